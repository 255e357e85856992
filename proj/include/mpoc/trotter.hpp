#pragma once

// Product-formula circuits at orders 1, 2 and 4.
//
// A Trotter step is laid out by a StepPlan: layers of gates on chain
// positions, each optionally followed by a SWAP or fermionic SWAP that
// routes qubits. Terms are attached to the first gate at which their two
// qubits sit on the gate's positions; one-qubit terms go to the first gate
// that touches the qubit.

#include <cstddef>
#include <vector>

#include "mpoc/circuit.hpp"
#include "mpoc/hamiltonian.hpp"

namespace mpoc {

struct PlanGate {
  std::size_t a = 0;  // positions, a < b
  std::size_t b = 1;
  Routing router = Routing::None;
  Matrix h = Matrix::Zero(4, 4);  // summed terms in the (a, b) frame
};

using PlanLayer = std::vector<PlanGate>;

struct StepPlan {
  std::size_t n = 0;
  std::string topology = "chain";
  std::vector<Edge> edges;
  std::vector<PlanLayer> layers;
};

/// Gate layout of one first-order step with every term scheduled exactly
/// once and the routing returning to the identity arrangement.
StepPlan step_plan(const TermList& terms);

/// One step of order 1, 2 or 4 for time dt, repeated `steps` times, unmerged.
Circuit trotter_circuit(const TermList& terms, double dt, int order, std::size_t steps = 1);
Circuit trotter_circuit(const StepPlan& plan, double dt, int order, std::size_t steps = 1);

/// Fuses consecutive layers with identical support sets.
Circuit merge_adjacent_layers(const Circuit& circ);

/// Merged U_order(t/k)^k.
Circuit merged_trotterization(const StepPlan& plan, double t, int order, std::size_t k);

std::size_t merged_depth(const StepPlan& plan, int order, std::size_t k);

struct TrotterChoice {
  int order = 0;
  std::size_t steps = 0;
  std::size_t depth = 0;    // merged depth before padding
  std::size_t padding = 0;  // identity layers appended
};

/// Highest order with at least one step fitting in `depth_layers`, and the
/// most steps of that order.
TrotterChoice choose_trotter(const StepPlan& plan, std::size_t depth_layers);

/// Merged Trotterization padded with identity layers up to exactly L.
Circuit ansatz_from_trotter(const TermList& terms, double t, std::size_t depth_layers,
                            TrotterChoice* choice = nullptr);

/// exp(-i dt h) for Hermitian h.
Matrix hermitian_exp(const Matrix& h, double dt);

Matrix router_matrix(Routing r);

}  // namespace mpoc
