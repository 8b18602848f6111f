#pragma once

#include <stdexcept>
#include <string>

namespace flexlink {

/// Scenario/config rejected during validation; message carries the field path.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical routine failed (root bracketing, degenerate transform, ...).
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Simulation left the admissible state region.
class DivergedError : public std::runtime_error {
  public:
    DivergedError(double time, const std::string& what)
        : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

  private:
    double time_;
};

}  // namespace flexlink
