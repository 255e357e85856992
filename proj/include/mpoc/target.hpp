#pragma once

// Target propagator construction: a fine 4th-order Trotterization contracted
// into an MPO at increasing bond dimension until consecutive results agree.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mpoc/hamiltonian.hpp"
#include "mpoc/mpo.hpp"

namespace mpoc {

struct TargetOptions {
  std::size_t k = 10;
  std::vector<std::size_t> chi_ladder{16, 32, 64, 128};
  double conv_tol = 1e-10;
};

struct TargetBuildReport {
  double t = 0.0;
  std::size_t chi = 0;  // ladder value of the returned MPO
  std::size_t max_bond = 0;
  std::vector<std::pair<std::size_t, double>> history;  // (chi, cost to previous chi)
  double discarded_weight = 0.0;
  double budget = 0.0;
  double final_cost = 0.0;  // compressed vs uncompressed

  std::string to_text() const;
};

struct TargetResult {
  Mpo mpo;
  TargetBuildReport report;
};

/// Throws CapacityError (carrying the last consecutive cost) when the ladder
/// runs out before two results agree to conv_tol.
TargetResult build_target(const TermList& terms, double t, const TargetOptions& opt = {});

struct TimeSweepResult {
  std::vector<double> times;
  std::vector<bool> feasible;
  double longest = 0.0;
};

/// Evaluates every grid time with the ladder capped at chi_cap. Throws
/// CapacityError when no grid time is feasible.
TimeSweepResult longest_time_sweep(const TermList& terms, const std::vector<double>& grid,
                                   std::size_t chi_cap = 128, TargetOptions opt = {});

/// Variationally compresses at chi = 1, 2, 4, ... until the cost to the
/// input drops below `error_budget`; returns the input when no smaller chi
/// meets it.
TargetResult precompress_target(const Mpo& mpo, double error_budget,
                                TargetBuildReport report = {});

/// One tenth of the requested compilation error.
inline double default_error_budget(double target_error) { return target_error / 10.0; }

}  // namespace mpoc
