#pragma once

// Bond-dimension reduction for MPOs and the operator-Schmidt spectrum.

#include <cstddef>
#include <vector>

#include "mpoc/mpo.hpp"

namespace mpoc {

/// One right-to-left truncating SVD sweep over a left-canonical chain.
Mpo svd_compress(const Mpo& mpo, const Truncation& trunc, TruncationStats* stats = nullptr);

struct CompressResult {
  Mpo mpo;
  double svd_fidelity = 0.0;     // after the SVD initialization
  std::vector<double> fidelity;  // one entry per completed variational sweep
  double final_fidelity() const { return fidelity.empty() ? svd_fidelity : fidelity.back(); }
};

/// SVD-sweep initialization followed by one-site variational sweeps on the
/// doubled MPS. Fidelity is |<psi|target>|^2 for normalized vectors and never
/// decreases over the recorded sweeps.
CompressResult variational_compress(const Mpo& mpo, std::size_t chi_target,
                                    double fid_tol = 1e-12, std::size_t max_sweeps = 50);

/// Normalized singular values across the bond between sites `bond` and
/// bond+1, descending, with exact zeros trimmed.
std::vector<double> schmidt_spectrum(const Mpo& mpo, std::size_t bond);

}  // namespace mpoc
