#pragma once

#include <stdexcept>
#include <string>

namespace nonexp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands live in incompatible spaces (dense dimension mismatch, or a
/// sparse support that a dense operand does not cover).
class IncompatibleSpace : public Error {
public:
    using Error::Error;
};

/// A NaN or infinity was produced by arithmetic.
class NonFinite : public Error {
public:
    using Error::Error;
};

/// A set or mapping descriptor is malformed (unordered box bounds, negative
/// radius, non-orthonormal basis, missing witness, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// `project` was called on an intersection; use `dykstra_project`.
class UseDykstra : public Error {
public:
    using Error::Error;
};

class NotInSet : public Error {
public:
    using Error::Error;
};

/// A point handed to a mapping lies outside its domain, or an orbit left it.
class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidAddress : public Error {
public:
    using Error::Error;
};

class DivergingOrbit : public Error {
public:
    using Error::Error;
};

class NotAttractive : public Error {
public:
    using Error::Error;
};

class EmptyModel : public Error {
public:
    using Error::Error;
};

/// Config validation failure. `pointer()` is an RFC 6901 JSON pointer to the
/// offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& what)
        : Error((pointer.empty() ? std::string("/") : pointer) + ": " + what), pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

} // namespace nonexp
