#include "falcon/error.hpp"

namespace falcon {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorKind::FortranOrderUnsupported: return "FortranOrderUnsupported";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::LabelOverflow: return "LabelOverflow";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::DegenerateAffinity: return "DegenerateAffinity";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NonFiniteIntermediate: return "NonFiniteIntermediate";
    case ErrorKind::EmptyClusterVolume: return "EmptyClusterVolume";
    case ErrorKind::ZeroRowNorm: return "ZeroRowNorm";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NoPopulatedPartition: return "NoPopulatedPartition";
    case ErrorKind::MissingDepthWithNonzeroWeight: return "MissingDepthWithNonzeroWeight";
    case ErrorKind::NonFiniteCost: return "NonFiniteCost";
    case ErrorKind::BackgroundClassRequired: return "BackgroundClassRequired";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InsufficientNodes: return "InsufficientNodes";
    }
    return "UnknownError";
}

} // namespace falcon
