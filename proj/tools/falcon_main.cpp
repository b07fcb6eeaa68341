#include "falcon/cli.hpp"

int main(int argc, char** argv) { return falcon::run_cli(argc, argv); }
