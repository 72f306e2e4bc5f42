#pragma once

#include <stdexcept>
#include <string>

namespace eduvsum {

enum class ErrorKind {
    InvalidInput,
    Parse,
    Validation,
    Referential,
    Stratification,
    Decode,
    InvalidConfig,
    BackendLoad,
    Contract,
    Io,
    ModelLoad,
    Checksum,
    TrainingDivergence,
    NotFound,
};

const char* to_string(ErrorKind kind);

// Single exception type for the toolkit; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace eduvsum
