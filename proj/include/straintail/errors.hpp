#ifndef STRAINTAIL_ERRORS_HPP
#define STRAINTAIL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace straintail {

/// Bad or inconsistent user input (config keys, parameter ranges, file I/O).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A model assumption required by the approximation does not hold
/// (kernel not admissible, forcing shape outside the covered cases, ...).
class AssumptionError : public std::runtime_error {
public:
    explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to deliver its advertised accuracy
/// (factorization failure after jitter escalation, bracket not found,
/// residual above tolerance, overflow).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace straintail

#endif
