#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace frohlich {

/// Bad physical parameters, malformed configuration or violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical method failed to deliver a result within its budget. The last
/// iterate (if any) travels with the exception so callers can report it.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, std::vector<double> last_state = {})
      : std::runtime_error(what), last_state_(std::move(last_state)) {}

  const std::vector<double>& last_state() const noexcept { return last_state_; }

 private:
  std::vector<double> last_state_;
};

}  // namespace frohlich
