#include "mpoc/mpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mpoc/errors.hpp"

namespace mpoc {

namespace {

constexpr std::size_t d = kPhysDim;

// Chain helpers on rank-3 site tensors [left, p, right].

void step_right(std::vector<Tensor>& s, std::size_t i) {
  const Shape sh = s[i].shape();
  const QrResult qr = thin_qr(s[i].matrix(2));
  const auto k = static_cast<std::size_t>(qr.q.cols());
  s[i] = Tensor::from_matrix(qr.q, {sh[0], sh[1], k});
  const Shape nx = s[i + 1].shape();
  s[i + 1] = Tensor::from_matrix(qr.r * s[i + 1].matrix(1), {k, nx[1], nx[2]});
}

void step_left(std::vector<Tensor>& s, std::size_t i) {
  const Shape sh = s[i].shape();
  const QrResult qr = thin_qr(s[i].matrix(1).adjoint());
  const auto k = static_cast<std::size_t>(qr.q.cols());
  s[i] = Tensor::from_matrix(qr.q.adjoint(), {k, sh[1], sh[2]});
  const Shape pv = s[i - 1].shape();
  s[i - 1] = Tensor::from_matrix(s[i - 1].matrix(2) * qr.r.adjoint(), {pv[0], pv[1], k});
}

void normalize_site(Tensor& t, double& log_norm) {
  const double nrm = t.norm();
  if (nrm > 0.0 && std::isfinite(nrm)) {
    t *= cplx(1.0 / nrm);
    log_norm += std::log(nrm);
  }
}

void chain_move_center(std::vector<Tensor>& s, std::optional<std::size_t>& center,
                       std::size_t target, double& log_norm) {
  const std::size_t n = s.size();
  if (target >= n) throw DimensionError("center index out of range");
  auto right = [&](std::size_t i) {
    step_right(s, i);
    normalize_site(s[i + 1], log_norm);
  };
  auto left = [&](std::size_t i) {
    step_left(s, i);
    normalize_site(s[i - 1], log_norm);
  };
  if (!center) {
    for (std::size_t i = 0; i < target; ++i) right(i);
    for (std::size_t i = n - 1; i > target; --i) left(i);
  } else {
    for (std::size_t i = *center; i < target; ++i) right(i);
    for (std::size_t i = *center; i > target; --i) left(i);
  }
  center = target;
  normalize_site(s[target], log_norm);
}

std::vector<Tensor> to_rank3(std::vector<Tensor> sites) {
  for (Tensor& t : sites) {
    const Shape sh = t.shape();
    t = std::move(t).reshape({sh[0], sh[1] * sh[2], sh[3]});
  }
  return sites;
}

std::vector<Tensor> to_rank4(std::vector<Tensor> sites) {
  for (Tensor& t : sites) {
    const Shape sh = t.shape();
    t = std::move(t).reshape({sh[0], d, d, sh[2]});
  }
  return sites;
}

// Transfer-matrix overlap <a|b> returned as (mantissa, log scale).
std::pair<cplx, double> chain_overlap(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  Tensor env({1, 1}, {cplx(1.0)});
  double log_scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Tensor tmp = contract(env, b[i], {{1, 0}});                 // [xa, p, yb']
    env = contract(a[i].conj(), tmp, {{0, 0}, {1, 1}});               // [xa', yb']
    const double nrm = env.norm();
    if (nrm == 0.0) return {cplx(0.0), 0.0};
    env *= cplx(1.0 / nrm);
    log_scale += std::log(nrm);
  }
  return {env[0], log_scale};
}

Tensor gate_tensor(const Matrix& gate) { return Tensor::from_matrix(gate, {d, d, d, d}); }

}  // namespace

std::size_t Mpo::max_bond() const {
  std::size_t m = 1;
  for (const Tensor& t : sites) m = std::max({m, t.extent(0), t.extent(3)});
  return m;
}

void Mpo::validate() const {
  if (sites.empty()) throw DimensionError("MPO has no sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Tensor& t = sites[i];
    if (t.rank() != 4 || t.extent(1) != d || t.extent(2) != d) {
      throw DimensionError("MPO site " + std::to_string(i) + " is not [l, 2, 2, r]");
    }
    if (i + 1 < sites.size() && t.extent(3) != sites[i + 1].extent(0)) {
      throw DimensionError("MPO bond mismatch after site " + std::to_string(i));
    }
  }
  if (sites.front().extent(0) != 1 || sites.back().extent(3) != 1) {
    throw DimensionError("MPO boundary bonds must have extent 1");
  }
  if (center && *center >= sites.size()) throw DimensionError("MPO center out of range");
}

void DoubledMps::normalize() {
  if (sites.empty()) return;
  chain_move_center(sites, center, sites.size() - 1, log_norm);
}

Mpo mpo_identity(std::size_t n) {
  if (n == 0) throw DimensionError("identity MPO needs at least one site");
  Mpo m;
  Tensor id({1, d, d, 1});
  for (std::size_t p = 0; p < d; ++p) id.at({0, p, p, 0}) = 1.0;
  m.sites.assign(n, id);
  return m;
}

void move_center(Mpo& mpo, std::size_t target) {
  std::vector<Tensor> s = to_rank3(std::move(mpo.sites));
  chain_move_center(s, mpo.center, target, mpo.log_norm);
  mpo.sites = to_rank4(std::move(s));
}

Mpo canonicalize(Mpo mpo, std::size_t center) {
  move_center(mpo, center);
  return mpo;
}

Matrix to_dense(const Mpo& mpo) {
  mpo.validate();
  const Shape s0 = mpo.sites[0].shape();
  Tensor acc = mpo.sites[0].reshape({d, d, s0[3]});  // [Dout, Din, r]
  for (std::size_t i = 1; i < mpo.size(); ++i) {
    const std::size_t dout = acc.extent(0), din = acc.extent(1);
    Tensor t = contract(acc, mpo.sites[i], {{2, 0}});  // [Dout, Din, o, i, r]
    const std::size_t r = t.extent(4);
    acc = t.permute({0, 2, 1, 3, 4}).reshape({dout * d, din * d, r});
  }
  Matrix m = acc.reshape({acc.extent(0), acc.extent(1)}).matrix(1);
  return m * std::exp(mpo.log_norm);
}

DoubledMps mpo_to_doubled_mps(const Mpo& mpo) {
  mpo.validate();
  DoubledMps out;
  out.sites = to_rank3(mpo.sites);
  out.log_norm = mpo.log_norm;
  out.center = mpo.center;
  out.normalize();
  return out;
}

Mpo doubled_mps_to_mpo(const DoubledMps& mps) {
  Mpo out;
  out.sites = to_rank4(mps.sites);
  out.log_norm = mps.log_norm;
  out.center = mps.center;
  out.validate();
  return out;
}

cplx inner_product_normalized(const DoubledMps& a, const DoubledMps& b) {
  if (a.size() != b.size()) {
    throw DimensionError("inner product of chains with " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " sites");
  }
  if (a.size() == 0) throw DimensionError("inner product of empty chains");
  const auto [ab, lab] = chain_overlap(a.sites, b.sites);
  const auto [aa, laa] = chain_overlap(a.sites, a.sites);
  const auto [bb, lbb] = chain_overlap(b.sites, b.sites);
  const double naa = std::abs(aa), nbb = std::abs(bb);
  if (naa == 0.0 || nbb == 0.0) return cplx(0.0);
  const double scale = std::exp(lab - 0.5 * (laa + lbb)) / std::sqrt(naa * nbb);
  return ab * scale;
}

double hst_cost(const Mpo& u, const Mpo& v) {
  if (u.size() != v.size()) {
    throw DimensionError("hst_cost on " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()) + " qubits");
  }
  u.validate();
  v.validate();
  DoubledMps a, b;
  a.sites = to_rank3(u.sites);
  b.sites = to_rank3(v.sites);
  const cplx ip = inner_product_normalized(a, b);
  return std::clamp(1.0 - std::norm(ip), 0.0, 1.0);
}

Mpo adjoint(const Mpo& mpo) {
  Mpo out = mpo;
  for (Tensor& t : out.sites) t = t.conj().permute({0, 2, 1, 3});
  return out;
}

Matrix swap_gate() {
  Matrix s = Matrix::Zero(4, 4);
  s(0, 0) = s(1, 2) = s(2, 1) = s(3, 3) = 1.0;
  return s;
}

void require_unitary(const Matrix& gate, const char* context) {
  if (gate.rows() != 4 || gate.cols() != 4) {
    throw DimensionError(std::string(context) + ": gate must be 4x4");
  }
  const double defect = unitarity_defect(gate);
  if (!(defect <= kUnitarityTolerance)) {
    throw ValidationError(std::string(context) + ": gate is not unitary (defect " +
                          std::to_string(defect) + ")");
  }
}

Mpo apply_two_site_gate(Mpo mpo, const Matrix& gate, std::size_t site, const Truncation& trunc,
                        TruncationStats* stats, Side side) {
  require_unitary(gate, "apply_two_site_gate");
  if (site + 1 >= mpo.size()) throw DimensionError("two-site gate runs past the chain end");
  if (!mpo.center || (*mpo.center != site && *mpo.center != site + 1)) move_center(mpo, site);

  const Tensor theta = contract(mpo.sites[site], mpo.sites[site + 1], {{3, 0}});  // [l,o1,i1,o2,i2,r]
  Tensor updated;
  if (side == Side::Out) {
    updated = contract(gate_tensor(gate), theta, {{2, 1}, {3, 3}}).permute({2, 0, 3, 1, 4, 5});
  } else {
    updated = contract(theta, gate_tensor(gate), {{2, 0}, {4, 1}}).permute({0, 1, 4, 2, 5, 3});
  }
  const std::size_t l = updated.extent(0), r = updated.extent(5);
  const SvdResult s = truncated_svd(updated.matrix(3), trunc.chi_max, trunc.weight_tol);
  const auto k = static_cast<std::size_t>(s.singular.size());
  mpo.sites[site] = Tensor::from_matrix(s.left, {l, d, d, k});
  const Matrix right = s.singular.cast<cplx>().asDiagonal() * s.right.adjoint();
  mpo.sites[site + 1] = Tensor::from_matrix(right, {k, d, d, r});
  mpo.center = site + 1;
  normalize_site(mpo.sites[site + 1], mpo.log_norm);
  if (stats) stats->record(s.discarded_weight, k);
  return mpo;
}

Mpo gate_to_two_site_mpo(const Matrix& gate, std::size_t span) {
  if (span < 2) throw DimensionError("gate fragment span must be at least 2");
  if (gate.rows() != 4 || gate.cols() != 4) throw DimensionError("gate must be 4x4");
  // [p1,p2,q1,q2] -> [(p1 q1), (p2 q2)]
  const Matrix m = gate_tensor(gate).permute({0, 2, 1, 3}).matrix(2);
  const SvdResult s = svd(m);
  Eigen::Index k = 1;
  while (k < s.singular.size() && s.singular[k] > 1e-14 * s.singular[0]) ++k;

  Matrix left = s.left.leftCols(k);
  Matrix right = s.right.leftCols(k).adjoint();  // k x 4
  for (Eigen::Index j = 0; j < k; ++j) {
    // fix the phase so the largest entry of each left vector is real positive
    Eigen::Index arg = 0;
    left.col(j).cwiseAbs().maxCoeff(&arg);
    const cplx ph = left(arg, j) / std::abs(left(arg, j));
    const double root = std::sqrt(s.singular[j]);
    left.col(j) *= std::conj(ph) * root;
    right.row(j) *= ph * root;
  }
  const auto kk = static_cast<std::size_t>(k);
  Mpo frag;
  frag.sites.reserve(span);
  frag.sites.push_back(Tensor::from_matrix(left, {1, d, d, kk}));
  Tensor pass({kk, d, d, kk});
  for (std::size_t b = 0; b < kk; ++b)
    for (std::size_t p = 0; p < d; ++p) pass.at({b, p, p, b}) = 1.0;
  for (std::size_t i = 0; i + 2 < span; ++i) frag.sites.push_back(pass);
  frag.sites.push_back(Tensor::from_matrix(right, {kk, d, d, 1}));
  return frag;
}

Mpo zip_up_apply(Mpo mpo, const Mpo& fragment, std::size_t start, const Truncation& trunc,
                 TruncationStats* stats, Side side) {
  const std::size_t w = fragment.size();
  if (w == 0 || start + w > mpo.size()) throw DimensionError("fragment does not fit the chain");
  if (fragment.sites.front().extent(0) != 1 || fragment.sites.back().extent(3) != 1) {
    throw DimensionError("fragment boundary bonds must have extent 1");
  }
  move_center(mpo, start);

  const std::size_t ml = mpo.sites[start].extent(0);
  Tensor carry({ml, 1, ml});  // [x, a, b]
  for (std::size_t b = 0; b < ml; ++b) carry.at({b, 0, b}) = 1.0;

  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t s = start + k;
    const Tensor t1 = contract(carry, mpo.sites[s], {{2, 0}});  // [x, a, o, i, b']
    Tensor t;
    if (side == Side::Out) {
      t = contract(t1, fragment.sites[k], {{1, 0}, {2, 2}}).permute({0, 3, 1, 4, 2});
    } else {
      t = contract(t1, fragment.sites[k], {{1, 0}, {3, 1}}).permute({0, 1, 3, 4, 2});
    }
    // t: [x, out, in, a', b']
    const std::size_t x = t.extent(0), fa = t.extent(3), mb = t.extent(4);
    if (k + 1 == w) {
      mpo.sites[s] = std::move(t).reshape({x, d, d, fa * mb});
      break;
    }
    const SvdResult sv = truncated_svd(t.matrix(3), trunc.chi_max, trunc.weight_tol);
    const auto chi = static_cast<std::size_t>(sv.singular.size());
    mpo.sites[s] = Tensor::from_matrix(sv.left, {x, d, d, chi});
    carry = Tensor::from_matrix(sv.singular.cast<cplx>().asDiagonal() * sv.right.adjoint(),
                                {chi, fa, mb});
    // keep the carry O(1) so deep spans cannot overflow
    normalize_site(carry, mpo.log_norm);
    if (stats) stats->record(sv.discarded_weight, chi);
  }
  mpo.center = start + w - 1;
  move_center(mpo, start);
  return mpo;
}

Mpo apply_gate(Mpo mpo, const Matrix& gate, std::size_t a, std::size_t b,
               const Truncation& trunc, TruncationStats* stats, Side side) {
  require_unitary(gate, "apply_gate");
  if (a == b) throw DimensionError("gate acts twice on one qubit");
  Matrix g = gate;
  if (a > b) {
    const Matrix sw = swap_gate();
    g = sw * gate * sw;
    std::swap(a, b);
  }
  if (b >= mpo.size()) throw DimensionError("gate qubit outside the chain");
  if (b == a + 1) return apply_two_site_gate(std::move(mpo), g, a, trunc, stats, side);
  return zip_up_apply(std::move(mpo), gate_to_two_site_mpo(g, b - a + 1), a, trunc, stats, side);
}

}  // namespace mpoc
