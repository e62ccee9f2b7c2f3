#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gmrf {

// Dense-oracle guard rail: requested problem exceeds the N <= 4096 cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solver failed to reach its tolerance within the iteration cap.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

// Optimization produced a non-finite objective; carries the NLL trace up to the failure.
class FitDivergedError : public std::runtime_error {
 public:
  FitDivergedError(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace gmrf
