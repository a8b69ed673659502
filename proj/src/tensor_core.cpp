#include "snet/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace snet {

namespace {

std::int64_t product(const std::vector<std::int64_t>& v) {
  std::int64_t p = 1;
  for (auto x : v) {
    if (x < 0) throw TensorError("negative extent");
    p *= x;
  }
  return p;
}

std::vector<std::int64_t> strides_of(const std::vector<std::int64_t>& shape) {
  std::vector<std::int64_t> s(shape.size(), 1);
  for (int k = static_cast<int>(shape.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * shape[k + 1];
  return s;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::int64_t> shape, std::vector<std::string> tags)
    : shape_(std::move(shape)), tags_(std::move(tags)) {
  if (!tags_.empty() && tags_.size() != shape_.size()) throw TensorError("tag count differs from rank");
  data_.assign(product(shape_), cplx(0, 0));
}

DenseTensor DenseTensor::scalar(cplx x) {
  DenseTensor t(std::vector<std::int64_t>{});
  t.data_[0] = x;
  return t;
}

std::int64_t DenseTensor::offset(const std::vector<int>& idx) const {
  if (idx.size() != shape_.size()) throw TensorError("index rank mismatch");
  std::int64_t o = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= shape_[k]) throw TensorError("index out of range");
    o = o * shape_[k] + idx[k];
  }
  return o;
}

int DenseTensor::axis(const std::string& tag) const {
  for (std::size_t k = 0; k < tags_.size(); ++k)
    if (tags_[k] == tag) return static_cast<int>(k);
  throw TensorError("no axis tagged '" + tag + "'");
}

void DenseTensor::set_tags(std::vector<std::string> tags) {
  if (!tags.empty() && tags.size() != shape_.size()) throw TensorError("tag count differs from rank");
  tags_ = std::move(tags);
}

double DenseTensor::max_abs() const {
  double m = 0;
  for (const auto& x : data_) m = std::max(m, std::abs(x));
  return m;
}

DenseTensor permute(const DenseTensor& t, const std::vector<int>& perm) {
  const int r = t.rank();
  if (static_cast<int>(perm.size()) != r) throw TensorError("permutation length differs from rank");
  std::vector<bool> seen(r, false);
  for (int p : perm) {
    if (p < 0 || p >= r || seen[p]) throw TensorError("invalid permutation");
    seen[p] = true;
  }
  std::vector<std::int64_t> shape(r);
  std::vector<std::string> tags;
  for (int k = 0; k < r; ++k) shape[k] = t.extent(perm[k]);
  if (!t.tags().empty())
    for (int k = 0; k < r; ++k) tags.push_back(t.tags()[perm[k]]);
  DenseTensor out(shape, tags);
  const auto src = strides_of(t.shape());
  std::vector<std::int64_t> st(r);
  for (int k = 0; k < r; ++k) st[k] = src[perm[k]];
  std::vector<std::int64_t> idx(r, 0);
  std::int64_t off = 0;
  auto& od = out.data();
  const auto& id = t.data();
  for (std::int64_t q = 0; q < out.size(); ++q) {
    od[q] = id[off];
    for (int k = r - 1; k >= 0; --k) {
      if (++idx[k] < shape[k]) {
        off += st[k];
        break;
      }
      off -= st[k] * (shape[k] - 1);
      idx[k] = 0;
    }
  }
  return out;
}

DenseTensor reshape(const DenseTensor& t, std::vector<std::int64_t> shape) {
  if (product(shape) != t.size()) throw TensorError("reshape changes the entry count");
  DenseTensor out(std::move(shape));
  out.data() = t.data();
  return out;
}

DenseTensor conj(const DenseTensor& t) {
  DenseTensor out = t;
  for (auto& x : out.data()) x = std::conj(x);
  return out;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw TensorError("shape mismatch");
  double m = 0;
  for (std::int64_t q = 0; q < a.size(); ++q) m = std::max(m, std::abs(a.data()[q] - b.data()[q]));
  return m;
}

Eigen::MatrixXcd as_matrix(const DenseTensor& t, const std::vector<int>& row_axes, const std::vector<int>& col_axes) {
  std::vector<int> perm(row_axes);
  perm.insert(perm.end(), col_axes.begin(), col_axes.end());
  DenseTensor p = permute(t, perm);
  std::int64_t rows = 1, cols = 1;
  for (int a : row_axes) rows *= t.extent(a);
  for (int a : col_axes) cols *= t.extent(a);
  Eigen::MatrixXcd m(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t j = 0; j < cols; ++j) m(i, j) = p.data()[i * cols + j];
  return m;
}

DenseTensor from_matrix(const Eigen::MatrixXcd& m, std::vector<std::int64_t> shape) {
  DenseTensor out(std::move(shape));
  if (out.size() != m.size()) throw TensorError("shape does not match matrix size");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.data()[i * m.cols() + j] = m(i, j);
  return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const std::vector<std::pair<int, int>>& pairs) {
  std::set<int> ua, ub;
  std::vector<int> ca, cb;
  for (auto [x, y] : pairs) {
    if (x < 0 || x >= a.rank() || y < 0 || y >= b.rank()) throw TensorError("axis out of range");
    if (!ua.insert(x).second || !ub.insert(y).second) throw TensorError("duplicate axis in pairs");
    if (a.extent(x) != b.extent(y)) throw TensorError("extent mismatch");
    ca.push_back(x);
    cb.push_back(y);
  }
  std::vector<int> fa, fb;
  std::vector<std::int64_t> shape;
  std::vector<std::string> tags;
  const bool tagged = !a.tags().empty() && !b.tags().empty();
  for (int k = 0; k < a.rank(); ++k)
    if (!ua.count(k)) {
      fa.push_back(k);
      shape.push_back(a.extent(k));
      if (tagged) tags.push_back(a.tags()[k]);
    }
  for (int k = 0; k < b.rank(); ++k)
    if (!ub.count(k)) {
      fb.push_back(k);
      shape.push_back(b.extent(k));
      if (tagged) tags.push_back(b.tags()[k]);
    }
  Eigen::MatrixXcd m = as_matrix(a, fa, ca) * as_matrix(b, cb, fb);
  DenseTensor out(shape, tags);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.data()[i * m.cols() + j] = m(i, j);
  return out;
}

Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& m, double tol) {
  if (m.size() == 0) return Eigen::MatrixXcd::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  const double cut = tol * (s.size() ? s(0) : 0.0);
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) inv(k) = 1.0 / s(k);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

DenseTensor pseudo_inverse(const DenseTensor& t, const std::vector<int>& row_axes, const std::vector<int>& col_axes,
                           double tol) {
  if (static_cast<int>(row_axes.size() + col_axes.size()) != t.rank()) throw TensorError("axes do not partition tensor");
  if (t.max_abs() == 0) throw TensorError("pseudo-inverse of an all-zero tensor");
  Eigen::MatrixXcd p = pinv(as_matrix(t, row_axes, col_axes), tol);
  std::vector<std::int64_t> shape;
  for (int a : col_axes) shape.push_back(t.extent(a));
  for (int a : row_axes) shape.push_back(t.extent(a));
  return from_matrix(p, shape);
}

int numerical_rank(const Eigen::MatrixXcd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  int r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tol * s(0)) ++r;
  return r;
}

LeastSquares solve_least_squares(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b, double tol) {
  if (a.rows() != b.size()) throw TensorError("inconsistent least-squares shapes");
  LeastSquares out;
  out.x = pinv(a, tol) * b;
  out.residual = (a * out.x - b).norm();
  return out;
}

Eigen::MatrixXcd null_space(const Eigen::MatrixXcd& a, double tol) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Eigen::MatrixXcd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return svd.matrixV().rightCols(n - r);
}

SupportProjector make_projector(Eigen::MatrixXcd P, double tol) {
  SupportProjector sp;
  sp.tol = tol;
  if (P.size() > 0) {
    sp.idempotence = (P * P - P).cwiseAbs().maxCoeff();
    sp.hermiticity = (P - P.adjoint()).cwiseAbs().maxCoeff();
  }
  if (sp.idempotence > tol || sp.hermiticity > tol) throw TensorError("matrix is not a projector within tolerance");
  sp.rank = static_cast<int>(std::lround(P.trace().real()));
  sp.P = std::move(P);
  return sp;
}

}  // namespace snet
