#include "eduvsum/core/errors.hpp"

namespace eduvsum {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Referential: return "referential";
        case ErrorKind::Stratification: return "stratification";
        case ErrorKind::Decode: return "decode";
        case ErrorKind::InvalidConfig: return "invalid-config";
        case ErrorKind::BackendLoad: return "backend-load";
        case ErrorKind::Contract: return "contract";
        case ErrorKind::Io: return "io";
        case ErrorKind::ModelLoad: return "model-load";
        case ErrorKind::Checksum: return "checksum";
        case ErrorKind::TrainingDivergence: return "training-divergence";
        case ErrorKind::NotFound: return "not-found";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace eduvsum
