#pragma once

// Layered circuits of two-qubit unitaries.

#include <cstddef>
#include <string>
#include <vector>

#include "mpoc/hamiltonian.hpp"
#include "mpoc/mpo.hpp"

namespace mpoc {

/// A 4x4 unitary on qubits (a, b); qubit a is the more significant factor.
struct Gate {
  std::size_t a = 0;
  std::size_t b = 1;
  Matrix u = Matrix::Identity(4, 4);

  std::size_t lo() const { return a < b ? a : b; }
  std::size_t hi() const { return a < b ? b : a; }
};

using Layer = std::vector<Gate>;

struct Circuit {
  std::size_t n = 0;
  std::string topology = "chain";
  /// Allowed qubit pairs (ascending). Empty means nearest neighbours.
  std::vector<Edge> edges;
  std::vector<Layer> layers;

  std::size_t depth() const { return layers.size(); }
  std::size_t gate_count() const;
  /// Unitarity, disjoint supports per layer and topology membership.
  void validate() const;
  /// Gates in every layer also occupy disjoint chain intervals.
  bool intervals_disjoint() const;
};

/// Sorted list of the (lo, hi) supports of a layer.
std::vector<Edge> layer_support(const Layer& layer);

/// U^L ... U^1 as an MPO, gates applied layer by layer.
Mpo circuit_to_mpo(const Circuit& circ, const Truncation& trunc,
                   TruncationStats* stats = nullptr);

/// Applies layers [first, last) of `circ` to `mpo` on the given side.
Mpo apply_layers(Mpo mpo, const Circuit& circ, std::size_t first, std::size_t last,
                 const Truncation& trunc, TruncationStats* stats = nullptr,
                 Side side = Side::Out);

std::string circuit_to_json(const Circuit& circ);
Circuit circuit_from_json(const std::string& text);
void save_circuit(const std::string& path, const Circuit& circ);
Circuit load_circuit(const std::string& path);

}  // namespace mpoc
