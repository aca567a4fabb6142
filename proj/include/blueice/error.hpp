#pragma once

#include <stdexcept>
#include <string>

namespace blueice {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed canonical record. `key()` names the offending field when known.
class DecodeError : public Error {
public:
    DecodeError(std::string key, const std::string& what)
        : Error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class EncodeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A protocol-level failure carrying a wire error code ("AUTH", "TICK_MISMATCH", ...).
class ProtocolError : public Error {
public:
    ProtocolError(std::string code, const std::string& what)
        : Error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace blueice
