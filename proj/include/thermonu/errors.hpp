#pragma once

#include <stdexcept>
#include <string>

namespace thermonu {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Frame or grid dimensions unusable for the requested operation.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Least-squares design matrix is rank deficient.
class SingularFitError : public Error {
public:
    using Error::Error;
};

/// Value outside its documented domain (temperature bounds, gray-level range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// File missing, unreadable, or not writable.
class IoError : public Error {
public:
    using Error::Error;
};

/// File exists but its content does not match the expected format.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace thermonu
