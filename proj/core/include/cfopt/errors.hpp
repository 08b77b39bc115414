#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfopt {

/// Raised when a time integration produces a non-finite value. Carries the
/// index of the step whose update went bad (0-based, forward or backward).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  [[nodiscard]] std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Armijo backtracking ran out of trials without sufficient decrease.
class LineSearchStalled : public std::runtime_error {
 public:
  explicit LineSearchStalled(int backtracks)
      : std::runtime_error("stalled line search after " + std::to_string(backtracks) +
                           " backtracks"),
        backtracks_(backtracks) {}

  [[nodiscard]] int backtracks() const noexcept { return backtracks_; }

 private:
  int backtracks_;
};

}  // namespace cfopt
