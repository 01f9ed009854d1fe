#pragma once

#include <stdexcept>
#include <string>

namespace irsv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Coincident points or a BS/IRS/target arrangement that makes the inverse map singular.
class GeometryError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input to an estimator (empty snapshot set, non-Hermitian covariance, ...).
class InputError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace irsv
