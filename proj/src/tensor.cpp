#include "mpoc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mpoc/errors.hpp"

namespace mpoc {

namespace {

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

}  // namespace

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_volume(shape_)) {}

Tensor::Tensor(Shape shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_volume(shape_)) {
    throw DimensionError("tensor data has " + std::to_string(data_.size()) +
                         " entries, shape " + shape_string(shape_) + " needs " +
                         std::to_string(shape_volume(shape_)));
  }
}

Tensor Tensor::from_matrix(const Matrix& m, Shape shape) {
  if (static_cast<std::size_t>(m.size()) != shape_volume(shape)) {
    throw DimensionError("matrix of " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " does not fit shape " +
                         shape_string(shape));
  }
  Tensor t(std::move(shape));
  Eigen::Map<RowMatrix>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw DimensionError("index rank mismatch");
  std::size_t flat = 0;
  std::size_t leg = 0;
  for (std::size_t i : idx) {
    if (i >= shape_[leg]) throw DimensionError("index out of range");
    flat = flat * shape_[leg] + i;
    ++leg;
  }
  return flat;
}

cplx& Tensor::at(std::initializer_list<std::size_t> idx) { return data_[flat_index(idx)]; }
const cplx& Tensor::at(std::initializer_list<std::size_t> idx) const {
  return data_[flat_index(idx)];
}

Tensor Tensor::reshape(Shape shape) const& {
  Tensor t = *this;
  return std::move(t).reshape(std::move(shape));
}

Tensor Tensor::reshape(Shape shape) && {
  if (shape_volume(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " +
                         shape_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

Tensor Tensor::permute(std::span<const std::size_t> perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw DimensionError("permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw DimensionError("invalid permutation");
    seen[p] = true;
  }
  bool identity = true;
  for (std::size_t k = 0; k < r; ++k) identity = identity && perm[k] == k;
  if (identity) return *this;

  Shape out_shape(r);
  for (std::size_t k = 0; k < r; ++k) out_shape[k] = shape_[perm[k]];

  // strides of the input, listed in output-leg order
  std::vector<std::size_t> in_stride(r);
  {
    std::size_t s = 1;
    for (std::size_t k = r; k-- > 0;) {
      in_stride[k] = s;
      s *= shape_[k];
    }
  }
  std::vector<std::size_t> stride(r);
  for (std::size_t k = 0; k < r; ++k) stride[k] = in_stride[perm[k]];

  Tensor out(out_shape);
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  const std::size_t n = data_.size();
  for (std::size_t dst = 0; dst < n; ++dst) {
    out.data_[dst] = data_[src];
    for (std::size_t k = r; k-- > 0;) {
      ++counter[k];
      src += stride[k];
      if (counter[k] < out_shape[k]) break;
      src -= stride[k] * out_shape[k];
      counter[k] = 0;
    }
  }
  return out;
}

Matrix Tensor::matrix(std::size_t row_legs) const {
  if (row_legs > rank()) throw DimensionError("row_legs exceeds tensor rank");
  std::size_t rows = 1;
  for (std::size_t k = 0; k < row_legs; ++k) rows *= shape_[k];
  const std::size_t cols = rows == 0 ? 0 : data_.size() / rows;
  return Eigen::Map<const RowMatrix>(data_.data(), static_cast<Eigen::Index>(rows),
                                     static_cast<Eigen::Index>(cols));
}

double Tensor::norm() const {
  double s = 0.0;
  for (const cplx& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

Tensor Tensor::conj() const {
  Tensor t = *this;
  for (cplx& z : t.data_) z = std::conj(z);
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

Tensor& Tensor::operator*=(cplx factor) {
  for (cplx& z : data_) z *= factor;
  return *this;
}

Tensor contract(const Tensor& a, const Tensor& b, std::span<const LegPair> pairs) {
  std::vector<bool> a_paired(a.rank(), false), b_paired(b.rank(), false);
  for (const auto& [la, lb] : pairs) {
    if (la >= a.rank() || lb >= b.rank()) throw DimensionError("contract: leg out of range");
    if (a_paired[la] || b_paired[lb]) throw DimensionError("contract: leg paired twice");
    if (a.extent(la) != b.extent(lb)) {
      throw DimensionError("contract: extent mismatch " + std::to_string(a.extent(la)) +
                           " vs " + std::to_string(b.extent(lb)) + " on legs (" +
                           std::to_string(la) + "," + std::to_string(lb) + ")");
    }
    a_paired[la] = b_paired[lb] = true;
  }

  std::vector<std::size_t> a_perm, b_perm;
  Shape out_shape;
  std::size_t free_a = 1, free_b = 1, inner = 1;
  for (std::size_t k = 0; k < a.rank(); ++k) {
    if (!a_paired[k]) {
      a_perm.push_back(k);
      out_shape.push_back(a.extent(k));
      free_a *= a.extent(k);
    }
  }
  for (const auto& [la, lb] : pairs) {
    a_perm.push_back(la);
    b_perm.push_back(lb);
    inner *= a.extent(la);
  }
  for (std::size_t k = 0; k < b.rank(); ++k) {
    if (!b_paired[k]) {
      b_perm.push_back(k);
      out_shape.push_back(b.extent(k));
      free_b *= b.extent(k);
    }
  }

  const Tensor ap = a.permute(a_perm);
  const Tensor bp = b.permute(b_perm);
  Tensor out(out_shape);
  using Idx = Eigen::Index;
  Eigen::Map<const RowMatrix> am(ap.data().data(), static_cast<Idx>(free_a), static_cast<Idx>(inner));
  Eigen::Map<const RowMatrix> bm(bp.data().data(), static_cast<Idx>(inner), static_cast<Idx>(free_b));
  Eigen::Map<RowMatrix> om(out.data().data(), static_cast<Idx>(free_a), static_cast<Idx>(free_b));
  if (inner == 0) {
    om.setZero();
  } else {
    om.noalias() = am * bm;
  }
  return out;
}

namespace {

bool finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

SvdResult svd(const Matrix& m) {
  if (!finite(m)) throw NumericalError("svd: non-finite input");
  SvdResult out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.left = Matrix(m.rows(), 0);
    out.right = Matrix(m.cols(), 0);
    out.singular = RealVector(0);
    return out;
  }
  Eigen::BDCSVD<Matrix> dc(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dc.info() == Eigen::Success && dc.singularValues().allFinite() &&
      dc.matrixU().allFinite() && dc.matrixV().allFinite()) {
    out.left = dc.matrixU();
    out.singular = dc.singularValues();
    out.right = dc.matrixV();
    return out;
  }
  Eigen::JacobiSVD<Matrix> jac(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (jac.info() != Eigen::Success || !jac.singularValues().allFinite()) {
    throw NumericalError("svd did not converge on a " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix");
  }
  out.left = jac.matrixU();
  out.singular = jac.singularValues();
  out.right = jac.matrixV();
  return out;
}

SvdResult truncated_svd(const Matrix& m, std::size_t chi_max, double weight_tol) {
  SvdResult full = svd(m);
  const auto count = static_cast<std::size_t>(full.singular.size());
  if (count == 0) return full;

  // tail[j] = sum_{i >= j} s_i^2
  std::vector<double> tail(count + 1, 0.0);
  for (std::size_t j = count; j-- > 0;) tail[j] = tail[j + 1] + full.singular[j] * full.singular[j];
  const double total = tail[0];

  std::size_t keep = std::min(std::max<std::size_t>(chi_max, 1), count);
  if (total > 0.0) {
    while (keep > 1 && tail[keep - 1] < weight_tol * total) --keep;
  } else {
    keep = 1;
  }
  const auto k = static_cast<Eigen::Index>(keep);
  SvdResult out;
  out.left = full.left.leftCols(k);
  out.singular = full.singular.head(k);
  out.right = full.right.leftCols(k);
  out.discarded_weight = total > 0.0 ? tail[keep] / total : 0.0;
  return out;
}

Matrix polar_unitary(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("polar_unitary needs a square matrix");
  const SvdResult s = svd(m);
  return s.right * s.left.adjoint();
}

QrResult thin_qr(const Matrix& m) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix> qr(m);
  QrResult out;
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  if (!out.q.allFinite() || !out.r.allFinite()) throw NumericalError("qr: non-finite result");
  return out;
}

double unitarity_defect(const Matrix& g) {
  if (g.rows() != g.cols()) return std::numeric_limits<double>::infinity();
  const Matrix d = g.adjoint() * g - Matrix::Identity(g.rows(), g.cols());
  return d.cwiseAbs().maxCoeff();
}

}  // namespace mpoc
