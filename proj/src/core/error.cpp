#include "core/error.hpp"

namespace caa {

const char* error_kind_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid_argument";
        case ErrorKind::Format: return "format";
        case ErrorKind::Corruption: return "corruption";
        case ErrorKind::Config: return "config";
        case ErrorKind::DegenerateData: return "degenerate_data";
        case ErrorKind::Protocol: return "protocol";
        case ErrorKind::Training: return "training";
        case ErrorKind::Input: return "input";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Type: return "type";
        case ErrorKind::Dependency: return "dependency";
        case ErrorKind::Integrity: return "integrity";
        case ErrorKind::Io: return "io";
        case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

} // namespace caa
