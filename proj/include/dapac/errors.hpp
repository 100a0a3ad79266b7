#pragma once

#include <stdexcept>
#include <string>

namespace dapac {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FieldMismatch : Error {
    using Error::Error;
};
struct DivisionByZero : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct AccessViolation : Error {
    using Error::Error;
};
struct DecodeError : Error {
    using Error::Error;
};
struct VerificationFailed : Error {
    int server;
    VerificationFailed(int server_id, const std::string& msg) : Error(msg), server(server_id) {}
};
struct FrameError : Error {
    using Error::Error;
};
struct VersionError : Error {
    using Error::Error;
};
struct SessionError : Error {
    using Error::Error;
};
struct DomainTooLarge : Error {
    using Error::Error;
};

} // namespace dapac
