#pragma once

#include <stdexcept>
#include <string>

namespace reconkit {

/// Failure carrying a stable machine-readable code ("zero-variance",
/// "token-limit", ...) next to a human-readable detail string.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)), detail_(detail) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string code_;
    std::string detail_;
};

/// Transport-level failure; the only error class the retry loop re-attempts.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& detail) : Error("transport", detail) {}
};

}  // namespace reconkit
