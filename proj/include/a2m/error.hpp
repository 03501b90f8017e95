#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace a2m {

// Domain error categories. The string form is what the CLI reports in its
// machine-readable error record.
enum class ErrorKind {
    DimensionMismatch,
    ShapeMismatch,
    AngleNearPi,
    DegenerateBone,
    InvalidSkeleton,
    InvalidArgument,
    EmptyDataset,
    SchemaViolation,
    UnknownAction,
    InvalidSchedule,
    SingularSystem,
    EmptyResult,
    Io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::AngleNearPi: return "AngleNearPi";
        case ErrorKind::DegenerateBone: return "DegenerateBone";
        case ErrorKind::InvalidSkeleton: return "InvalidSkeleton";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::UnknownAction: return "UnknownAction";
        case ErrorKind::InvalidSchedule: return "InvalidSchedule";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::EmptyResult: return "EmptyResult";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace a2m
