#include "mpoc/compress.hpp"

#include <cmath>

#include "mpoc/errors.hpp"

namespace mpoc {

namespace {

// Sweeps a last-site-centered chain leftwards, truncating every bond.
void truncate_leftwards(DoubledMps& mps, const Truncation& trunc, TruncationStats* stats) {
  auto& s = mps.sites;
  for (std::size_t i = s.size() - 1; i > 0; --i) {
    const Shape sh = s[i].shape();
    const SvdResult r = truncated_svd(s[i].matrix(1), trunc.chi_max, trunc.weight_tol);
    const auto k = static_cast<std::size_t>(r.singular.size());
    s[i] = Tensor::from_matrix(r.right.adjoint(), {k, sh[1], sh[2]});
    const Shape pv = s[i - 1].shape();
    const Matrix us = r.left * r.singular.cast<cplx>().asDiagonal();
    s[i - 1] = Tensor::from_matrix(s[i - 1].matrix(2) * us, {pv[0], pv[1], k});
    if (stats) stats->record(r.discarded_weight, k);
  }
  mps.center = 0;
  const double nrm = s[0].norm();
  if (nrm > 0.0) {
    s[0] *= cplx(1.0 / nrm);
    mps.log_norm += std::log(nrm);
  }
}

// env [psi-bond, target-bond] grown by one site from the left.
Tensor grow_left(const Tensor& env, const Tensor& psi, const Tensor& target) {
  const Tensor t = contract(env, target, {{1, 0}});
  return contract(psi.conj(), t, {{0, 0}, {1, 1}});
}

// env [psi-bond, target-bond] grown by one site from the right.
Tensor grow_right(const Tensor& env, const Tensor& psi, const Tensor& target) {
  const Tensor t = contract(target, env, {{2, 1}});           // [ta, p, pb]
  return contract(psi.conj(), t, {{1, 1}, {2, 2}});            // [pa, ta]
}

Tensor projected_center(const Tensor& left, const Tensor& target, const Tensor& right) {
  const Tensor t = contract(left, target, {{1, 0}});  // [pa, p, tb]
  return contract(t, right, {{2, 1}});                // [pa, p, pb]
}

Tensor unit_env() { return Tensor({1, 1}, {cplx(1.0)}); }

}  // namespace

Mpo svd_compress(const Mpo& mpo, const Truncation& trunc, TruncationStats* stats) {
  DoubledMps mps = mpo_to_doubled_mps(mpo);
  truncate_leftwards(mps, trunc, stats);
  return doubled_mps_to_mpo(mps);
}

CompressResult variational_compress(const Mpo& mpo, std::size_t chi_target, double fid_tol,
                                    std::size_t max_sweeps) {
  if (chi_target == 0) throw DimensionError("chi_target must be at least 1");
  const DoubledMps target = mpo_to_doubled_mps(mpo);
  const std::size_t n = target.size();
  const auto& a = target.sites;

  DoubledMps psi = target;
  truncate_leftwards(psi, Truncation{chi_target, 0.0}, nullptr);
  auto& p = psi.sites;

  std::vector<Tensor> right(n);  // right[i]: sites > i
  right[n - 1] = unit_env();
  for (std::size_t i = n - 1; i > 0; --i) right[i - 1] = grow_right(right[i], p[i], a[i]);
  std::vector<Tensor> left(n);   // left[i]: sites < i
  left[0] = unit_env();

  CompressResult result;
  {
    const Tensor c = projected_center(left[0], a[0], right[0]);
    result.svd_fidelity = std::norm(c.norm());
  }

  double fid = result.svd_fidelity;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const std::vector<Tensor> saved = p;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Tensor c = projected_center(left[i], a[i], right[i]);
      const Shape sh = c.shape();
      const QrResult qr = thin_qr(c.matrix(2));
      const auto k = static_cast<std::size_t>(qr.q.cols());
      p[i] = Tensor::from_matrix(qr.q, {sh[0], sh[1], k});
      const Shape nx = p[i + 1].shape();
      p[i + 1] = Tensor::from_matrix(qr.r * p[i + 1].matrix(1), {k, nx[1], nx[2]});
      left[i + 1] = grow_left(left[i], p[i], a[i]);
    }
    for (std::size_t i = n - 1; i > 0; --i) {
      const Tensor c = projected_center(left[i], a[i], right[i]);
      const Shape sh = c.shape();
      const QrResult qr = thin_qr(c.matrix(1).adjoint());
      const auto k = static_cast<std::size_t>(qr.q.cols());
      p[i] = Tensor::from_matrix(qr.q.adjoint(), {k, sh[1], sh[2]});
      const Shape pv = p[i - 1].shape();
      p[i - 1] = Tensor::from_matrix(p[i - 1].matrix(2) * qr.r.adjoint(), {pv[0], pv[1], k});
      right[i - 1] = grow_right(right[i], p[i], a[i]);
    }
    const Tensor c = projected_center(left[0], a[0], right[0]);
    const double last = c.norm();
    p[0] = cplx(1.0 / (last > 0.0 ? last : 1.0)) * c;
    const double next = last * last;
    if (next < fid) {
      p = saved;
      break;
    }
    const double gain = next - fid;
    fid = next;
    result.fidelity.push_back(fid);
    if (gain < fid_tol) break;
  }

  psi.center = 0;
  psi.log_norm = target.log_norm + 0.5 * std::log(fid > 0.0 ? fid : 1.0);
  result.mpo = doubled_mps_to_mpo(psi);
  return result;
}

std::vector<double> schmidt_spectrum(const Mpo& mpo, std::size_t bond) {
  if (bond + 1 >= mpo.size()) throw DimensionError("schmidt_spectrum needs an interior bond");
  const Mpo c = canonicalize(mpo, bond);
  const Tensor theta = contract(c.sites[bond], c.sites[bond + 1], {{3, 0}});
  const SvdResult r = svd(theta.matrix(3));
  const double total = r.singular.norm();
  std::vector<double> out;
  if (total == 0.0) return out;
  for (Eigen::Index i = 0; i < r.singular.size(); ++i) {
    const double s = r.singular[i];
    if (s <= 1e-14 * r.singular[0]) break;
    out.push_back(s / total);
  }
  return out;
}

}  // namespace mpoc
