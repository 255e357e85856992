#include "mpoc/dense.hpp"

#include <algorithm>

#include <unsupported/Eigen/MatrixFunctions>

#include "mpoc/errors.hpp"

namespace mpoc {

namespace {

void check_size(std::size_t n) {
  if (n == 0 || n > kDenseQubitLimit) {
    throw UsageError("dense computations are limited to " + std::to_string(kDenseQubitLimit) +
                     " qubits (got " + std::to_string(n) + ")");
  }
}

std::size_t bit(std::size_t q, std::size_t n) { return std::size_t{1} << (n - 1 - q); }

}  // namespace

Matrix dense_hamiltonian(const TermList& terms) {
  const std::size_t n = terms.n;
  check_size(n);
  const std::size_t dim = std::size_t{1} << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (const Term& t : terms.terms) {
    if (t.support.size() == 1) {
      const std::size_t m = bit(t.support[0], n);
      for (std::size_t col = 0; col < dim; ++col) {
        const std::size_t c = (col & m) ? 1 : 0;
        for (std::size_t r = 0; r < 2; ++r) {
          h(static_cast<Eigen::Index>(r ? (col | m) : (col & ~m)), col) += t.matrix(r, c);
        }
      }
      continue;
    }
    const std::size_t a = t.support[0], b = t.support[1];
    const std::size_t ma = bit(a, n), mb = bit(b, n);
    std::size_t string_mask = 0;
    if (t.routing == Routing::FermionicSwap) {
      for (std::size_t q = a + 1; q < b; ++q) string_mask |= bit(q, n);
    }
    for (std::size_t col = 0; col < dim; ++col) {
      const std::size_t c = ((col & ma) ? 2 : 0) | ((col & mb) ? 1 : 0);
      // the string is diagonal and the hop preserves parity, so the sign
      // depends on the untouched middle bits only
      const double sign = (__builtin_popcountll(col & string_mask) % 2) ? -1.0 : 1.0;
      const std::size_t base = col & ~(ma | mb);
      for (std::size_t r = 0; r < 4; ++r) {
        const std::size_t row = base | ((r & 2) ? ma : 0) | ((r & 1) ? mb : 0);
        h(static_cast<Eigen::Index>(row), col) += sign * t.matrix(r, c);
      }
    }
  }
  return h;
}

Matrix dense_propagator(const TermList& terms, double t) {
  const Matrix h = dense_hamiltonian(terms);
  return Matrix(cplx(0.0, -t) * h).exp();
}

void apply_gate_dense(Matrix& m, const Gate& g, std::size_t n) {
  const std::size_t ma = bit(g.a, n), mb = bit(g.b, n);
  const std::size_t dim = std::size_t{1} << n;
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & (ma | mb)) continue;
    const Eigen::Index idx[4] = {static_cast<Eigen::Index>(base),
                                 static_cast<Eigen::Index>(base | mb),
                                 static_cast<Eigen::Index>(base | ma),
                                 static_cast<Eigen::Index>(base | ma | mb)};
    Matrix rows(4, m.cols());
    for (int r = 0; r < 4; ++r) rows.row(r) = m.row(idx[r]);
    const Matrix mixed = g.u * rows;
    for (int r = 0; r < 4; ++r) m.row(idx[r]) = mixed.row(r);
  }
}

Matrix circuit_to_dense(const Circuit& circ) {
  check_size(circ.n);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << circ.n);
  Matrix m = Matrix::Identity(dim, dim);
  for (const Layer& l : circ.layers)
    for (const Gate& g : l) apply_gate_dense(m, g, circ.n);
  return m;
}

double dense_hst(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw DimensionError("dense_hst shape mismatch");
  const double nu = u.squaredNorm(), nv = v.squaredNorm();
  if (nu == 0.0 || nv == 0.0) return 1.0;
  const cplx tr = u.conjugate().cwiseProduct(v).sum();
  return std::clamp(1.0 - std::norm(tr) / (nu * nv), 0.0, 1.0);
}

}  // namespace mpoc
