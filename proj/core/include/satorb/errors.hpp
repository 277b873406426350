#pragma once

#include <stdexcept>
#include <string>

namespace satorb {

// Error hierarchy. The CLI maps each class onto an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DesignInfeasible : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double tLast)
        : Error(what), tLast_(tLast) {}
    double lastTime() const { return tLast_; }

private:
    double tLast_;
};

class SearchFailure : public Error {
public:
    using Error::Error;
};

} // namespace satorb
