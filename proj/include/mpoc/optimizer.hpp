#pragma once

// Layer-by-layer circuit optimization against a target MPO.
//
// For layer i the overlap is F = Tr(W U^i B) with the bottom environment
// B = U^{i-1} ... U^0 and the top environment W = V^dagger U^{L-1} ... U^{i+1}.
// Gates are replaced by the polar part of their environment, which
// maximizes |F| with everything else fixed.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mpoc/circuit.hpp"
#include "mpoc/errors.hpp"
#include "mpoc/mpo.hpp"

namespace mpoc {

struct OptimizerConfig {
  std::size_t max_sweeps = 20;
  double cost_tol = 1e-4;  // stop when the relative per-sweep improvement drops below
  std::size_t chi_train = 128;
  std::size_t chi_escalation = 28;
  std::size_t chi_cap = 512;
  std::size_t micro_sweeps = 2;
  bool resets = true;
  std::size_t verify_multiplier = 2;
  double weight_tol = 1e-14;
  bool escalate = true;
  bool cold_cost = false;        // recontract the circuit after every sweep
  bool variational_envs = false; // recompress environments variationally
  std::string checkpoint_path;   // written after every sweep when set

  void validate() const;
};

struct SweepRecord {
  std::size_t sweep = 0;
  double cost = 0.0;             // training cost from the cached environments
  std::size_t chi = 0;           // largest environment bond seen
  double discarded_weight = 0.0;
  double seconds = 0.0;
  double min_gain = 0.0;         // smallest overlap gain of any gate update
  std::size_t updates = 0;
  std::size_t degenerate = 0;    // updates skipped on a vanishing environment
  double cold_cost = -1.0;       // negative when not computed
  std::size_t chi_train = 0;
};

struct CostTrace {
  std::vector<SweepRecord> records;

  /// sweep,cost,chi,discarded_weight,seconds
  std::string to_csv() const;
};

struct LayerVisit {
  double overlap = 0.0;
  double min_gain = 0.0;
  std::size_t updates = 0;
  std::size_t degenerate = 0;
};

/// Top and bottom environments of the current layer.
class EnvironmentCache {
 public:
  /// Positions the cache at the last layer: W = V^dagger, B = U^{L-2..0}.
  EnvironmentCache(const Circuit& circ, const Mpo& v_targ, const Truncation& trunc,
                   bool variational = false);

  std::size_t layer() const { return layer_; }
  const Mpo& top() const { return top_; }
  const Mpo& bottom() const { return bottom_; }
  const TruncationStats& stats() const { return stats_; }
  void clear_stats() { stats_ = {}; }

  void move_down(const Circuit& circ);
  void move_up(const Circuit& circ);

  /// Layer 0: B = identity. Last layer: W = V^dagger. UsageError elsewhere.
  void reset_outer(const Circuit& circ, const Mpo& v_targ);

  /// E with Tr(g E) equal to the normalized overlap Tr(W U B)/(|W| |B|),
  /// for gate `gate` of the current layer. Any span is accepted.
  Matrix gate_environment(const Circuit& circ, std::size_t gate) const;

  /// Normalized overlap Tr(W U B)/(|W| |B|) for the current layer.
  cplx overlap(const Circuit& circ) const;

  /// Replaces the gate by the polar part of its environment. Returns the
  /// gain in |overlap|; a vanishing environment keeps the gate.
  std::pair<Matrix, double> update_gate(Circuit& circ, std::size_t gate, bool* degenerate = nullptr) const;

  /// `micro_sweeps` alternating passes over the gates of the current layer
  /// with cached left/right environment tensors.
  LayerVisit optimize_layer(Circuit& circ, std::size_t micro_sweeps);

 private:
  void absorb(Mpo& env, const Layer& layer, bool adjoint, Side side);
  /// InternalStateError when `circ` does not match the cached shape.
  void check_sync(const Circuit& circ) const;

  std::size_t layer_ = 0;
  std::size_t n_ = 0;
  std::size_t depth_ = 0;
  Mpo top_;
  Mpo bottom_;
  Truncation trunc_;
  bool variational_ = false;
  TruncationStats stats_;
};

/// One full down-and-up pass; the cache starts and ends at the last layer.
SweepRecord sweep(Circuit& circ, const Mpo& v_targ, EnvironmentCache& cache,
                  const OptimizerConfig& cfg);

struct OptimizeResult {
  Circuit circuit;
  CostTrace trace;
  double init_cost = 0.0;   // at verification chi
  double final_cost = 0.0;  // at verification chi
  std::size_t chi_train = 0;
};

/// Raised when escalation would pass chi_cap; carries the best circuit so far.
class OptimizeCapacityError : public CapacityError {
 public:
  OptimizeCapacityError(const std::string& what, double last_cost, OptimizeResult partial)
      : CapacityError(what, last_cost), partial_(std::move(partial)) {}
  const OptimizeResult& partial() const { return partial_; }

 private:
  OptimizeResult partial_;
};

OptimizeResult optimize(const Circuit& init, const Mpo& v_targ, const OptimizerConfig& cfg);

/// hst_cost of the circuit MPO at bond dimension chi.
double circuit_cost(const Circuit& circ, const Mpo& v_targ, std::size_t chi,
                    double weight_tol = 1e-14);

/// Spectra at the center bond of (U^{L-i} ... U^{L-1})^dagger V for
/// i = 0..L, each with unit 2-norm.
std::vector<std::vector<double>> schmidt_decay_diagnostic(const Circuit& circ, const Mpo& v_targ,
                                                          std::size_t chi);

struct Checkpoint {
  Circuit circuit;
  std::size_t chi = 0;
  std::size_t sweep = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mpoc
