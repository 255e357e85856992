#pragma once

// Dense complex tensors and the matrix decompositions the tensor-network
// code is built on.
//
// Layout: entries are stored row-major over the ordered legs, i.e. the last
// leg varies fastest. Every serialized format in this project depends on it.

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mpoc {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using LegPair = std::pair<std::size_t, std::size_t>;

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<cplx> data);

  /// Builds a tensor whose first legs fuse into the rows of `m` and whose
  /// remaining legs fuse into its columns.
  static Tensor from_matrix(const Matrix& m, Shape shape);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t leg) const { return shape_.at(leg); }
  std::size_t size() const { return data_.size(); }

  std::span<const cplx> data() const { return data_; }
  std::span<cplx> data() { return data_; }

  cplx& operator[](std::size_t flat) { return data_[flat]; }
  const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  cplx& at(std::initializer_list<std::size_t> idx);
  const cplx& at(std::initializer_list<std::size_t> idx) const;

  Tensor reshape(Shape shape) const&;
  Tensor reshape(Shape shape) &&;

  /// Result leg k is input leg perm[k].
  Tensor permute(std::span<const std::size_t> perm) const;
  Tensor permute(std::initializer_list<std::size_t> perm) const {
    return permute(std::span<const std::size_t>(perm.begin(), perm.size()));
  }

  /// Matrix view with the first `row_legs` legs fused into rows.
  Matrix matrix(std::size_t row_legs) const;

  double norm() const;
  Tensor conj() const;
  bool all_finite() const;

  Tensor& operator*=(cplx factor);
  friend Tensor operator*(cplx factor, Tensor t) { return t *= factor; }

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> idx) const;

  Shape shape_;
  std::vector<cplx> data_;
};

std::size_t shape_volume(const Shape& shape);

/// Contracts leg a[p.first] with leg b[p.second] for every pair. The result
/// carries the unpaired legs of `a` followed by those of `b`, in order.
Tensor contract(const Tensor& a, const Tensor& b, std::span<const LegPair> pairs);
inline Tensor contract(const Tensor& a, const Tensor& b,
                       std::initializer_list<LegPair> pairs) {
  return contract(a, b, std::span<const LegPair>(pairs.begin(), pairs.size()));
}

struct SvdResult {
  Matrix left;            // columns are orthonormal
  RealVector singular;    // descending, non-negative
  Matrix right;           // m ~= left * diag(singular) * right^dagger
  double discarded_weight = 0.0;
};

/// Full thin SVD, divide-and-conquer with a Jacobi fallback.
SvdResult svd(const Matrix& m);

/// Keeps at most `chi_max` singular values and drops trailing values while
/// their cumulative relative squared weight stays below `weight_tol`.
SvdResult truncated_svd(const Matrix& m, std::size_t chi_max, double weight_tol);

/// The unitary g maximizing |Tr(m g)|, i.e. Y X^dagger for m = X S Y^dagger.
Matrix polar_unitary(const Matrix& m);

struct QrResult {
  Matrix q;  // rows x k, orthonormal columns
  Matrix r;  // k x cols
};

/// Thin QR with k = min(rows, cols).
QrResult thin_qr(const Matrix& m);

/// max |g^dagger g - 1| entry.
double unitarity_defect(const Matrix& g);

}  // namespace mpoc
