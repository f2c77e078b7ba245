#pragma once

#include <stdexcept>
#include <string>

namespace dzofl {

// Thrown for invalid configuration: bad exponents, out-of-range channel
// probability, malformed config files, dimension mismatches.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a loss evaluation produces a non-finite value or a task
// is queried outside its contract.
struct TaskError : std::runtime_error {
    explicit TaskError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for values outside a representable/admissible domain at runtime
// (e.g. quantizer overflow, rate-bound exponents outside the theorem's range).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dzofl
