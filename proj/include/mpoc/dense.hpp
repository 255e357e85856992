#pragma once

// Dense 2^n x 2^n reference computations for small systems.

#include <cstddef>

#include "mpoc/circuit.hpp"
#include "mpoc/hamiltonian.hpp"

namespace mpoc {

inline constexpr std::size_t kDenseQubitLimit = 12;

/// Sum of the terms, with Jordan-Wigner strings for fermionic hops.
Matrix dense_hamiltonian(const TermList& terms);

/// exp(-i H t) by scaling and squaring.
Matrix dense_propagator(const TermList& terms, double t);

/// Multiplies the gate onto the rows of `m` (m <- G m).
void apply_gate_dense(Matrix& m, const Gate& g, std::size_t n);

Matrix circuit_to_dense(const Circuit& circ);

/// 1 - |Tr(u^dagger v)|^2 / (|u|^2 |v|^2), clamped to [0, 1].
double dense_hst(const Matrix& u, const Matrix& v);

}  // namespace mpoc
