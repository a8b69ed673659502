#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace snet {

using cplx = std::complex<double>;

struct TensorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTol = 1e-9;

// Row-major complex tensor. Axis tags are optional and only carried along.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::int64_t> shape, std::vector<std::string> tags = {});

  static DenseTensor scalar(cplx x);

  const std::vector<std::int64_t>& shape() const { return shape_; }
  const std::vector<std::string>& tags() const { return tags_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  std::int64_t extent(int ax) const { return shape_.at(ax); }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  std::int64_t offset(const std::vector<int>& idx) const;
  cplx& operator()(const std::vector<int>& idx) { return data_[offset(idx)]; }
  cplx operator()(const std::vector<int>& idx) const { return data_[offset(idx)]; }
  cplx& at(std::initializer_list<int> idx) { return data_[offset(std::vector<int>(idx))]; }
  cplx at(std::initializer_list<int> idx) const { return data_[offset(std::vector<int>(idx))]; }

  int axis(const std::string& tag) const;
  void set_tags(std::vector<std::string> tags);

  double max_abs() const;

 private:
  std::vector<std::int64_t> shape_;
  std::vector<std::string> tags_;
  std::vector<cplx> data_;
};

// Result axes: remaining axes of a in order, then remaining axes of b.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const std::vector<std::pair<int, int>>& pairs);
DenseTensor permute(const DenseTensor& t, const std::vector<int>& perm);
DenseTensor reshape(const DenseTensor& t, std::vector<std::int64_t> shape);
DenseTensor conj(const DenseTensor& t);
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

// Matrix view with rows = row_axes (row-major over them) and cols = col_axes.
Eigen::MatrixXcd as_matrix(const DenseTensor& t, const std::vector<int>& row_axes, const std::vector<int>& col_axes);
DenseTensor from_matrix(const Eigen::MatrixXcd& m, std::vector<std::int64_t> shape);

Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& m, double tol = kDefaultTol);
// Result has col_axes first, then row_axes, so that contracting its trailing
// axes with t's row axes yields the projector onto t's row space.
DenseTensor pseudo_inverse(const DenseTensor& t, const std::vector<int>& row_axes, const std::vector<int>& col_axes,
                           double tol = kDefaultTol);

int numerical_rank(const Eigen::MatrixXcd& m, double tol = kDefaultTol);

struct LeastSquares {
  Eigen::VectorXcd x;
  double residual = 0;
};
LeastSquares solve_least_squares(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b, double tol = kDefaultTol);

// Orthonormal kernel basis as columns.
Eigen::MatrixXcd null_space(const Eigen::MatrixXcd& a, double tol = kDefaultTol);

struct SupportProjector {
  Eigen::MatrixXcd P;
  int rank = 0;
  double tol = kDefaultTol;
  double idempotence = 0;  // max |P^2 - P|
  double hermiticity = 0;  // max |P - P^dagger|
};

// Checks idempotence and hermiticity, throws TensorError on failure.
SupportProjector make_projector(Eigen::MatrixXcd P, double tol = kDefaultTol);

}  // namespace snet
