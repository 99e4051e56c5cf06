#pragma once

#include <stdexcept>
#include <string>

namespace gstein {

// Precondition / contract violations (bad arguments, undeclared Lipschitz
// constants, malformed kernels).
class contract_error : public std::invalid_argument {
  public:
    explicit contract_error(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine could not reach its requested tolerance.
class accuracy_error : public std::runtime_error {
  public:
    accuracy_error(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved tolerance " + std::to_string(achieved) + ")"),
          achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

// An exact-enumeration request exceeds the configured cap.
class resource_error : public std::runtime_error {
  public:
    resource_error(const std::string& what, std::size_t required)
        : std::runtime_error(what + " (required size " + std::to_string(required) + ")"),
          required_size(required) {}
    std::size_t required_size;
};

// Invalid run configuration (CLI / JSON).
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gstein
