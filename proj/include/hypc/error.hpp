#pragma once

#include <stdexcept>
#include <string>

namespace hypc {

/// Base of every error thrown by the library. `kind()` is a short stable tag
/// used by the CLI for machine-readable diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Argument outside an operation's mathematical domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

/// Input data that cannot be processed (non-finite weights, shape mismatch).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error("data", what) {}
};

/// Malformed or truncated serialized data.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error("format", what) {}
};

/// A value does not fit the requested encoding.
class EncodeError : public Error {
public:
    explicit EncodeError(const std::string& what) : Error("encode", what) {}
};

/// Internal invariant violated; indicates a bug or inconsistent inputs.
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(const std::string& what) : Error("consistency", what) {}
};

}  // namespace hypc
