// Typed exceptions used across the library.  Each maps to a distinct CLI
// exit code, so callers can tell "you asked for something invalid" apart
// from "the computation broke down".
#pragma once

#include <stdexcept>
#include <string>

namespace prospect {

// Invalid user-supplied configuration (bad parameter ranges, malformed
// config files, inconsistent scenario settings).  CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A mathematical operation was asked to evaluate outside its domain
// (negative wealth in a power utility, probability outside [0,1], ...).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or unusable data (NaNs in a sample, too few observations,
// unreadable input files).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure failed to converge or hit a degenerate system
// (root not bracketed, rank-deficient regression, ...).  CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace prospect
