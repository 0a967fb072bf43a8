#pragma once

#include <stdexcept>
#include <string>

namespace finres {

/// Invalid or inconsistent run configuration (bad keys, dimension mismatch,
/// parameters outside their physical domain at setup time).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime numerical failure: step-size underflow, eigensolver breakdown,
/// invariant breach beyond tolerance, root bracketing failure.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// File I/O failure at the CLI boundary.
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace finres
