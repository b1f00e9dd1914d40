#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace d2ibc {

// Every failure raised by the library derives from Error. The CLI maps the
// category to an exit code, so keep new error types inside one of the
// existing families.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or broken preconditions on numeric inputs.
class DomainError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

// Data family: anything wrong with recorded or loaded data.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

class ConditioningError : public DataError {
public:
    ConditioningError(const std::string& what, std::size_t deficient)
        : DataError(what), deficient_(deficient) {}

    std::size_t deficient() const noexcept { return deficient_; }

private:
    std::size_t deficient_;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

// Closed-loop run left the |y| guard.
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, std::int64_t time)
        : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

    std::int64_t time() const noexcept { return time_; }

private:
    std::int64_t time_;
};

class AssumptionViolation : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace d2ibc
