#pragma once

// Matrix product operators on qubit chains.
//
// Site tensors have legs [left-bond, physical-out, physical-in, right-bond].
// The represented operator is exp(log_norm) times the contraction of the
// site tensors. When `center` is set, sites left of it are left-isometric,
// sites right of it are right-isometric and the center tensor has unit
// Frobenius norm, so exp(log_norm) is the Frobenius norm of the operator.
// Qubit 0 is the most significant bit of dense matrix indices.

#include <cstddef>
#include <optional>
#include <vector>

#include "mpoc/tensor.hpp"

namespace mpoc {

inline constexpr std::size_t kPhysDim = 2;

struct Truncation {
  std::size_t chi_max = 128;
  double weight_tol = 1e-14;
};

/// Running totals reported by truncating operations.
struct TruncationStats {
  double discarded_weight = 0.0;
  std::size_t max_bond = 0;

  void record(double weight, std::size_t bond) {
    discarded_weight += weight;
    if (bond > max_bond) max_bond = bond;
  }
};

/// Which side of the operator a gate multiplies: Out computes G*M, In M*G.
enum class Side { Out, In };

struct Mpo {
  std::vector<Tensor> sites;
  double log_norm = 0.0;
  std::optional<std::size_t> center;

  std::size_t size() const { return sites.size(); }
  /// Extent of the bond between site b and b+1.
  std::size_t bond(std::size_t b) const { return sites.at(b).extent(3); }
  std::size_t max_bond() const;
  /// Throws DimensionError when shapes are inconsistent.
  void validate() const;
};

/// MPO with the two physical legs fused into one of extent d^2.
struct DoubledMps {
  std::vector<Tensor> sites;  // [left, d*d, right]
  double log_norm = 0.0;
  std::optional<std::size_t> center;

  std::size_t size() const { return sites.size(); }
  /// Canonicalizes onto the last site and moves the norm into log_norm.
  void normalize();
};

Mpo mpo_identity(std::size_t n);

/// Moves the orthogonality center to `center` (full sweep if none is set).
Mpo canonicalize(Mpo mpo, std::size_t center);
void move_center(Mpo& mpo, std::size_t target);

/// Dense 2^n x 2^n matrix including the exp(log_norm) scale.
Matrix to_dense(const Mpo& mpo);

DoubledMps mpo_to_doubled_mps(const Mpo& mpo);
Mpo doubled_mps_to_mpo(const DoubledMps& mps);

/// <a|b> / (|a| |b|), evaluated with per-site rescaling so long chains do
/// not overflow.
cplx inner_product_normalized(const DoubledMps& a, const DoubledMps& b);

/// Hilbert-Schmidt test cost 1 - |Tr(u^dagger v)|^2 / (|u|^2 |v|^2).
double hst_cost(const Mpo& u, const Mpo& v);

Mpo adjoint(const Mpo& mpo);

/// Applies a 4x4 gate to neighbouring sites (site, site+1) and splits the
/// result with a truncated SVD. The center ends on site+1.
Mpo apply_two_site_gate(Mpo mpo, const Matrix& gate, std::size_t site,
                        const Truncation& trunc, TruncationStats* stats = nullptr,
                        Side side = Side::Out);

/// Splits a gate across its qubit bipartition into a `span`-site fragment,
/// with identity pass-through tensors on the intermediate sites.
Mpo gate_to_two_site_mpo(const Matrix& gate, std::size_t span);

/// Applies an MPO fragment starting at `start` with one truncating
/// left-to-right pass and an exact canonicalization pass back.
Mpo zip_up_apply(Mpo mpo, const Mpo& fragment, std::size_t start, const Truncation& trunc,
                 TruncationStats* stats = nullptr, Side side = Side::Out);

/// Applies a gate on qubits (a, b) in either order and at any distance. The
/// first gate qubit acts on `a`.
Mpo apply_gate(Mpo mpo, const Matrix& gate, std::size_t a, std::size_t b,
               const Truncation& trunc, TruncationStats* stats = nullptr,
               Side side = Side::Out);

/// Checks ||g^dagger g - 1||_max <= 1e-8.
void require_unitary(const Matrix& gate, const char* context);

inline constexpr double kUnitarityTolerance = 1e-8;

Matrix swap_gate();

}  // namespace mpoc
