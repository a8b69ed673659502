#include <gtest/gtest.h>

#include <random>

#include "snet/sparse_network.hpp"
#include "snet/tensor_core.hpp"

using namespace snet;

namespace {

DenseTensor random_tensor(std::vector<std::int64_t> shape, std::mt19937_64& rng, double zero_fraction = 0.0) {
  DenseTensor t(std::move(shape));
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u;
  for (auto& x : t.data()) x = u(rng) < zero_fraction ? cplx(0) : cplx(nd(rng), nd(rng));
  return t;
}

}  // namespace

TEST(DenseTensor, ContractMatchesMatrixProduct) {
  std::mt19937_64 rng(1);
  DenseTensor a = random_tensor({3, 4}, rng), b = random_tensor({4, 5}, rng);
  DenseTensor c = contract(a, b, {{1, 0}});
  Eigen::MatrixXcd ref = as_matrix(a, {0}, {1}) * as_matrix(b, {0}, {1});
  EXPECT_LT((as_matrix(c, {0}, {1}) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DenseTensor, ContractOrdersFreeAxes) {
  std::mt19937_64 rng(2);
  DenseTensor a = random_tensor({2, 3, 4}, rng), b = random_tensor({4, 2, 5}, rng);
  DenseTensor c = contract(a, b, {{2, 0}});
  ASSERT_EQ(c.shape(), (std::vector<std::int64_t>{2, 3, 2, 5}));
  cplx x = 0;
  for (int k = 0; k < 4; ++k) x += a.at({1, 2, k}) * b.at({k, 1, 3});
  EXPECT_LT(std::abs(c.at({1, 2, 1, 3}) - x), 1e-12);
}

TEST(DenseTensor, PermuteAndReshape) {
  std::mt19937_64 rng(3);
  DenseTensor a = random_tensor({2, 3, 4}, rng);
  DenseTensor p = permute(a, {2, 0, 1});
  EXPECT_EQ(p.at({3, 1, 2}), a.at({1, 2, 3}));
  EXPECT_EQ(max_abs_diff(permute(p, {1, 2, 0}), a), 0.0);
  DenseTensor r = reshape(a, {6, 4});
  EXPECT_EQ(r.at({5, 3}), a.at({1, 2, 3}));
  EXPECT_THROW(reshape(a, {5, 5}), TensorError);
}

TEST(DenseTensor, ScalarAndTags) {
  DenseTensor s = DenseTensor::scalar(cplx(2, 1));
  EXPECT_EQ(s.rank(), 0);
  EXPECT_EQ(s.data()[0], cplx(2, 1));
  DenseTensor t({2, 2}, {"in", "out"});
  EXPECT_EQ(t.axis("out"), 1);
}

TEST(LinearAlgebra, PinvIdentities) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXcd a = as_matrix(random_tensor({5, 3}, rng), {0}, {1});
  Eigen::MatrixXcd low = a * as_matrix(random_tensor({3, 6}, rng), {0}, {1});  // rank 3
  Eigen::MatrixXcd p = pinv(low);
  EXPECT_LT((low * p * low - low).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((p * low * p - p).cwiseAbs().maxCoeff(), 1e-9);
  Eigen::MatrixXcd h = p * low;
  EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(numerical_rank(low), 3);
}

TEST(LinearAlgebra, PseudoInverseOfTensorProjectsOntoRowSpace) {
  std::mt19937_64 rng(5);
  DenseTensor t = random_tensor({2, 2, 3}, rng);
  DenseTensor pi = pseudo_inverse(t, {2}, {0, 1});
  ASSERT_EQ(pi.shape(), (std::vector<std::int64_t>{2, 2, 3}));
  DenseTensor prod = contract(pi, t, {{2, 2}});
  Eigen::MatrixXcd P = as_matrix(prod, {0, 1}, {2, 3});
  EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(P.trace().real(), 3.0, 1e-10);
  EXPECT_THROW(pseudo_inverse(DenseTensor({2, 2}), {0}, {1}), TensorError);
}

TEST(LinearAlgebra, LeastSquaresAndNullSpace) {
  Eigen::MatrixXcd a(2, 3);
  a << 1, 0, 1, 0, 1, 1;
  Eigen::VectorXcd b(2);
  b << 1, 2;
  LeastSquares ls = solve_least_squares(a, b);
  EXPECT_LT(ls.residual, 1e-12);
  EXPECT_LT((a * ls.x - b).norm(), 1e-12);
  Eigen::MatrixXcd z = null_space(a);
  ASSERT_EQ(z.cols(), 1);
  EXPECT_LT((a * z).norm(), 1e-12);
  EXPECT_NEAR(z.norm(), 1.0, 1e-12);

  Eigen::MatrixXcd inconsistent(2, 1);
  inconsistent << 1, 1;
  Eigen::VectorXcd rhs(2);
  rhs << 1, -1;
  EXPECT_NEAR(solve_least_squares(inconsistent, rhs).residual, std::sqrt(2.0), 1e-12);
}

TEST(LinearAlgebra, MakeProjector) {
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(3, 3);
  P(0, 0) = 1;
  P(1, 1) = 0.5;
  P(1, 2) = 0.5;
  P(2, 1) = 0.5;
  P(2, 2) = 0.5;
  SupportProjector s = make_projector(P);
  EXPECT_EQ(s.rank, 2);
  Eigen::MatrixXcd bad = P;
  bad(0, 0) = 0.9;
  EXPECT_THROW(make_projector(bad), TensorError);
}

// Sparse contraction against the dense contraction of the same chain.
TEST(SparseNetwork, MatchesDenseChain) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    DenseTensor a = random_tensor({3, 2, 3}, rng, 0.4), b = random_tensor({3, 3}, rng, 0.4),
                c = random_tensor({3, 2, 3}, rng, 0.4);
    SparseNetwork net;
    int i = net.add_var(3), j = net.add_var(2), k = net.add_var(3), l = net.add_var(2), m = net.add_var(3);
    net.add_dense({i, j, k}, a.data());
    net.add_dense({k, m}, b.data());
    net.add_dense({m, l, i}, c.data());
    DenseTensor s = net.contract({j, l});
    DenseTensor ab = contract(a, b, {{2, 0}});      // i j m
    DenseTensor abc = contract(ab, c, {{2, 0}, {0, 2}});  // j l
    EXPECT_LT(max_abs_diff(s, abc), 1e-12);
  }
}

TEST(SparseNetwork, FullTraceAndRepeatedVariable) {
  SparseNetwork net;
  int x = net.add_var(3);
  // Diagonal of a 3x3 matrix via a repeated variable.
  std::vector<cplx> m = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  net.add_dense({x, x}, m);
  int y = net.add_var(2);
  net.add_dense({y}, {cplx(2), cplx(3)});
  DenseTensor r = net.contract({});
  EXPECT_NEAR(std::abs(r.data()[0] - cplx(15.0 * 5.0)), 0.0, 1e-12);
}

TEST(SparseNetwork, OutputOrderAndOpenVariables) {
  SparseNetwork net;
  int a = net.add_var(2), b = net.add_var(4);
  net.add_function({a, b}, [](const std::vector<int>& z) { return cplx(10 * z[0] + z[1]); });
  DenseTensor r = net.contract({b, a});
  EXPECT_EQ(r.at({3, 1}), cplx(13));
  EXPECT_EQ(r.at({2, 0}), cplx(2));
}

TEST(SparseNetwork, MemoryLimit) {
  SparseNetwork net;
  std::vector<int> v;
  for (int k = 0; k < 12; ++k) v.push_back(net.add_var(3));
  auto ones = [](const std::vector<int>&) { return cplx(1); };
  for (int k = 0; k < 6; ++k) net.add_function({v[k], v[k + 6]}, ones);
  // The output is a dense 3^12 table.
  EXPECT_THROW(net.contract(v, 1 << 16), ResourceLimit);
  ContractStats st;
  DenseTensor r = net.contract({v[0], v[6]}, 0, &st);
  EXPECT_EQ(r.data()[0], cplx(59049));
}
