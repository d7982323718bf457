#pragma once

#include <stdexcept>
#include <string>

namespace caa {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorKind {
    InvalidArgument,
    Format,        // malformed file header / magic mismatch
    Corruption,    // header and payload disagree
    Config,        // inconsistent or unresolved configuration
    DegenerateData,
    Protocol,      // pairing / evaluation protocol violation
    Training,      // divergence or failed schedule
    Input,         // shape or domain mismatch at inference time
    Numerical,     // non-finite values where finite ones are required
    Type,          // latent-space tag mismatch
    Dependency,    // missing prerequisite artifact
    Integrity,     // hash mismatch between linked artifacts
    Io,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

const char* error_kind_name(ErrorKind kind) noexcept;

} // namespace caa
