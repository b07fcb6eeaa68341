#pragma once

namespace falcon {

// Command-line driver. The default command runs the full pipeline: read a
// feature grid, partition it, build and refine the label mask, and write the
// mask plus a JSON run manifest. The `bench` subcommand times the iterative
// partitioner against the recursive spectral baseline on seeded random
// feature grids and emits a CSV.
//
// Returns the process exit code: 0 on success, 1 on a runtime failure (one
// diagnostic line on stderr naming the failing stage), 2 on usage errors.
int run_cli(int argc, const char* const* argv);

} // namespace falcon
