#pragma once

#include <stdexcept>
#include <string>

namespace ovo {

// Base for all domain errors thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidPairError : public Error {
public:
    using Error::Error;
};

class DegeneratePairError : public Error {
public:
    using Error::Error;
};

class InvalidParamsError : public Error {
public:
    using Error::Error;
};

class EmptyDataError : public Error {
public:
    using Error::Error;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class MissingCalibrationError : public Error {
public:
    using Error::Error;
};

class DegenerateCouplingError : public Error {
public:
    using Error::Error;
};

class InvalidThresholdError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class MissingClassError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

// Validation failure of an external record; carries the offending record index.
class ValidationError : public Error {
public:
    ValidationError(const std::string& msg, std::size_t record)
        : Error(msg + " (record " + std::to_string(record) + ")"), record_index(record) {}
    std::size_t record_index;
};

} // namespace ovo
