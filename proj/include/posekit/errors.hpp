#pragma once

#include <stdexcept>
#include <string>

namespace posekit {

enum class ErrorKind {
    DegenerateInput,    // unusable numeric input (e.g. near-zero 6D columns)
    BehindCamera,       // point or object with Z <= 0
    NonPositiveDepth,   // depth or depth proxy must be > 0
    DegenerateBox,      // bounding box below the 1 px validity floor
    EmptyDataset,
    EmptyPipeline,
    UnknownFrame,
    ParseError,
    SchemaError,
    ValidationError,
    SpecError,
    IoError,
    Internal,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::BehindCamera: return "BehindCamera";
        case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
        case ErrorKind::DegenerateBox: return "DegenerateBox";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::EmptyPipeline: return "EmptyPipeline";
        case ErrorKind::UnknownFrame: return "UnknownFrame";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::ValidationError: return "ValidationError";
        case ErrorKind::SpecError: return "SpecError";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace posekit
