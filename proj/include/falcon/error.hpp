#pragma once

#include <stdexcept>
#include <string>

namespace falcon {

// One enumerator per distinct failure condition so callers and tests can
// dispatch on the kind instead of parsing message text.
enum class ErrorKind {
    // file and format handling
    MissingFile,
    BadMagic,
    UnsupportedDtype,
    FortranOrderUnsupported,
    TruncatedPayload,
    LabelOverflow,
    IoFailure,
    MalformedJson,
    InvariantViolation,
    // affinity construction
    DegenerateAffinity,
    NonFiniteInput,
    // alternating solver
    NonFiniteIntermediate,
    EmptyClusterVolume,
    ZeroRowNorm,
    // masks and refinement
    ShapeMismatch,
    NoPopulatedPartition,
    MissingDepthWithNonzeroWeight,
    // evaluation
    NonFiniteCost,
    BackgroundClassRequired,
    // reference solvers
    TooLarge,
    InsufficientNodes,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace falcon
