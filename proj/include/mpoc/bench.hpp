#pragma once

// End-to-end pipelines behind the command-line tool.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpoc/circuit.hpp"
#include "mpoc/hamiltonian.hpp"
#include "mpoc/optimizer.hpp"
#include "mpoc/target.hpp"
#include "mpoc/trotter.hpp"

namespace mpoc {

enum class Mode { Compile, Baseline, Diagnose, Verify };

struct RunManifest {
  Mode mode = Mode::Compile;
  std::string config_path;
  std::vector<std::size_t> depths{3, 5, 9, 17};
  std::size_t chi = 128;
  std::size_t k = 10;
  double budget = 1e-8;  // precompression error budget
  std::uint64_t seed = 0;
  double perturb = 0.0;  // random perturbation of the initial gates
  std::size_t max_sweeps = 20;
  double cost_tol = 1e-4;
  std::size_t depth_cap = 0;  // deepest baseline Trotterization, 0 picks one
  std::string out_dir = "out";

  void validate() const;
};

struct CompileRun {
  std::size_t depth = 0;
  TrotterChoice init;
  OptimizeResult result;
};

struct CompileOutput {
  TargetResult target;
  std::vector<CompileRun> runs;
};

/// Target, precompression, Trotter ansatz and optimization for every depth.
/// Writes target.mpo, circuit_L{L}.circ, trace_L{L}.csv and report.txt.
CompileOutput cmd_compile(const RunManifest& m, std::ostream& log);

struct BaselinePoint {
  int order = 0;
  std::size_t k = 0;
  std::size_t depth = 0;
  double cost = 0.0;
};

struct ComparisonRow {
  std::size_t depth = 0;
  double compiled_cost = 0.0;
  double trotter_cost = 0.0;  // best at depth <= L, interpolants included
  int trotter_order = 0;
  std::size_t trotter_k = 0;  // 0 when the best value is interpolated
  double reduction = 0.0;
  double compression = 0.0;
  bool compression_lower_bound = false;  // no Trotterization reached the cost
};

inline constexpr double kCostFloor = 1e-14;

/// Piecewise-linear interpolation of log cost against depth, per order,
/// defined only inside each order's depth range.
class TrotterBaseline {
 public:
  explicit TrotterBaseline(std::vector<BaselinePoint> points);

  const std::vector<BaselinePoint>& points() const { return points_; }
  /// Interpolated cost of `order` at `depth`; negative outside its range.
  double interpolate(int order, double depth) const;
  ComparisonRow compare(std::size_t depth, double compiled_cost) const;

 private:
  std::vector<BaselinePoint> points_;  // sorted by (order, depth)
};

/// Costs of merged U_r(t/k)^k, r in {1, 2, 4}, up to `depth_cap` layers,
/// against `exact` (dense) or, when it is empty, the target MPO.
std::vector<BaselinePoint> trotter_baseline_points(const TermList& terms, double t,
                                                   std::size_t depth_cap,
                                                   const Matrix& exact, const Mpo* target,
                                                   std::size_t chi);

std::vector<ComparisonRow> cmd_baseline(const RunManifest& m, std::ostream& log);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

/// Spectra for the deepest compiled circuit; writes spectra.csv.
std::vector<std::vector<double>> cmd_diagnose(const RunManifest& m, std::ostream& log);

/// Dense cross-check of every artifact. Returns true when all pass.
bool cmd_verify(const RunManifest& m, std::ostream& log);

inline constexpr std::size_t kVerifyQubitLimit = 10;

}  // namespace mpoc
