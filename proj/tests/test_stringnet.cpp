#include <gtest/gtest.h>

#include <cmath>

#include "snet/builtins.hpp"
#include "snet/stringnet.hpp"

using namespace snet;

TEST(SiteTensors, Shapes) {
  // Admissible (a, i, b) legs; trivial 1, Z2 4, Z3 9, Fibonacci 5, Ising 10.
  const std::map<std::string, int> dv = {{"trivial", 1}, {"z2", 4}, {"z3", 9}, {"fibonacci", 5}, {"ising", 10}};
  for (const auto& [n, d] : dv) {
    SiteTensorSet ts(builtin(n));
    EXPECT_EQ(ts.Dv, d) << n;
    const int c = ts.n() * ts.n() * ts.n();
    EXPECT_EQ(ts.A.shape(), (std::vector<std::int64_t>{d, d, d, c})) << n;
    EXPECT_EQ(ts.Aplus.shape(), (std::vector<std::int64_t>{c, d, d, d})) << n;
    EXPECT_EQ(ts.M.shape(), (std::vector<std::int64_t>{c, c, d, d})) << n;
  }
}

TEST(SiteTensors, TrivialCategoryIsScalar) {
  SiteTensorSet ts(builtin("trivial"));
  EXPECT_EQ(ts.A.size(), 1);
  EXPECT_NEAR(std::abs(ts.A.data()[0] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(ts.Aplus.data()[0] - 1.0), 0.0, 1e-15);
}

TEST(SiteTensors, LegReversal) {
  FusionCategory c = builtin("z3");
  Leg l{0, 1, 2};
  Leg r = l.reversed(c);
  EXPECT_EQ(r.a, 2);
  EXPECT_EQ(r.i, 2);
  EXPECT_EQ(r.b, 0);
  EXPECT_EQ(r.reversed(c), l);
}

TEST(SiteTensors, PseudoInverseClosedForm) {
  // conj(A)/D^2 against the Moore-Penrose inverse of each physical block.
  for (const auto& n : {"z2", "fibonacci", "ising"}) {
    SiteTensorSet ts(builtin(n));
    Eigen::MatrixXcd A = as_matrix(ts.A, {3}, {0, 1, 2});
    Eigen::MatrixXcd P = as_matrix(ts.Aplus, {1, 2, 3}, {0});
    Eigen::MatrixXcd ref = pinv(A);
    EXPECT_LT((P - ref).cwiseAbs().maxCoeff(), 1e-12) << n;
  }
}

TEST(ClosedMPO, TracesFollowFusionCounting) {
  const std::map<std::string, std::vector<double>> expect = {
      {"z2", {1, 2, 4, 8}}, {"z3", {1, 3, 9, 27}}, {"fibonacci", {1, 2, 5, 13}}, {"ising", {1, 3, 10, 34}}};
  for (const auto& [n, tr] : expect) {
    SiteTensorSet ts(builtin(n));
    for (int L = 1; L <= 4; ++L) {
      ClosedMPO P = build_closed_mpo(ts, L);
      EXPECT_NEAR(P.trace(), tr[L - 1], 1e-9) << n << " L=" << L;
      EXPECT_EQ(P.rank(), static_cast<int>(tr[L - 1])) << n;
      EXPECT_NEAR(closed_mpo_trace(ts, L), tr[L - 1], 1e-9) << n;
    }
  }
}

TEST(ClosedMPO, BlocksAgreeWithContractedM) {
  // The dense contraction is capped in size; Ising stops at two legs.
  for (const auto& [n, Lmax] : std::vector<std::pair<std::string, int>>{{"z2", 3}, {"fibonacci", 3}, {"ising", 2}}) {
    SiteTensorSet ts(builtin(n));
    for (int L = 1; L <= Lmax; ++L) {
      ClosedMPO P = build_closed_mpo(ts, L);
      Eigen::MatrixXcd dense = P.dense(ts).P;
      Eigen::MatrixXcd viaM = closed_mpo_from_M(ts, L);
      EXPECT_LT((dense - viaM).cwiseAbs().maxCoeff(), 1e-12) << n << " L=" << L;
    }
  }
}

TEST(ClosedMPO, DenseContractionIsCapped) {
  SiteTensorSet ts(builtin("ising"));
  EXPECT_THROW(closed_mpo_from_M(ts, 3), TensorError);
}

TEST(ClosedMPO, IdentityOnlyStringIsNotAProjector) {
  SiteTensorSet ts(builtin("z2"));
  ts.identity_only_mpo = true;
  EXPECT_THROW(build_closed_mpo(ts, 3), TensorError);
}

TEST(ClosedMPO, TransferTraceGrowsLikeLargestDimension) {
  SiteTensorSet ts(builtin("fibonacci"));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  EXPECT_NEAR(closed_mpo_trace(ts, 31) / closed_mpo_trace(ts, 30), phi * phi, 1e-9);
}

TEST(GeneralizedInverse, ExistsForBuiltins) {
  for (const auto& n : builtin_names()) {
    SiteTensorSet ts(builtin(n));
    GeneralizedInverse g = find_generalized_inverse(ts);
    EXPECT_LT(g.residual, 1e-8) << n;
    EXPECT_TRUE(g.output_side) << n;
    EXPECT_EQ(g.attempts.size(), 1u) << n;
  }
}

TEST(GeneralizedInverse, FallsBackToInputSide) {
  SiteTensorSet ts(perturb_entry(builtin("fibonacci"), 1e-2));
  GeneralizedInverse g = find_generalized_inverse(ts);
  ASSERT_FALSE(g.attempts.empty());
  EXPECT_EQ(g.attempts.front().first, "output_side");
  if (g.attempts.front().second > 1e-8) EXPECT_EQ(g.attempts.size(), 2u);
}
