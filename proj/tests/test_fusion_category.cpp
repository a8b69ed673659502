#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>

#include "pentagon_oracle.hpp"
#include "snet/builtins.hpp"
#include "snet/fusion_category.hpp"

using namespace snet;
using nlohmann::json;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

json z2_doc() { return json::parse(category_to_json(builtin("z2"))); }

std::vector<double> real_table(const FusionCategory& c) {
  std::vector<double> F;
  for (const auto& z : c.F) F.push_back(z.real());
  return F;
}

}  // namespace

TEST(Builtins, NamesAndSizes) {
  EXPECT_EQ(builtin_names(), (std::vector<std::string>{"trivial", "z2", "z3", "fibonacci", "ising"}));
  EXPECT_EQ(builtin("trivial").n(), 1);
  EXPECT_EQ(builtin("z3").n(), 3);
  EXPECT_EQ(builtin("fib").name, "fibonacci");
  EXPECT_THROW(builtin("su2_5"), CategoryError);
}

TEST(Builtins, TotalQuantumDimension) {
  EXPECT_NEAR(builtin("trivial").D2(), 1.0, 1e-14);
  EXPECT_NEAR(builtin("z2").D2(), 2.0, 1e-14);
  EXPECT_NEAR(builtin("z3").D2(), 3.0, 1e-14);
  EXPECT_NEAR(builtin("fibonacci").D2(), 1 + kPhi * kPhi, 1e-12);
  EXPECT_NEAR(builtin("ising").D2(), 4.0, 1e-12);
}

TEST(Builtins, AllChecksPass) {
  for (const auto& n : builtin_names()) {
    FusionCategory c = builtin(n);
    EXPECT_LT(check_pentagon(c, 1e-10).residual, 1e-10) << n;
    EXPECT_LT(check_tetrahedral(c, 1e-10).residual, 1e-10) << n;
    EXPECT_LT(check_unitarity(c, 1e-10).residual, 1e-10) << n;
  }
}

// Pentagon in F form, evaluated by the oracle's own code on the embedded tables.
TEST(Oracle, IndependentPentagonOnEmbeddedTables) {
  for (const auto& n : builtin_names()) {
    FusionCategory c = builtin(n);
    EXPECT_LT(oracle::pentagon_residual(oracle::skeleton(n), real_table(c)), 1e-12) << n;
  }
}

TEST(Oracle, FibonacciAllTauEntry) {
  // Gauge invariant, -1/phi in every unitary gauge.
  FusionCategory c = builtin("fibonacci");
  EXPECT_NEAR(c.f(1, 1, 1, 1, 1, 1).real(), -1 / kPhi, 1e-12);
  auto sol = oracle::solve(oracle::skeleton("fibonacci"), 11);
  EXPECT_LT(sol.cost, 1e-24);
  EXPECT_NEAR(sol.cat.f(1, 1, 1, 1, 1, 1).real(), -1 / kPhi, 1e-10);
}

TEST(Oracle, FrobeniusPerronDimensions) {
  auto d = oracle::fp_dims(oracle::skeleton("fibonacci"));
  EXPECT_NEAR(d[1], kPhi, 1e-12);
  d = oracle::fp_dims(oracle::skeleton("ising"));
  EXPECT_NEAR(d[1], std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(d[2], 1.0, 1e-12);
  for (const auto& n : builtin_names()) {
    auto fp = oracle::fp_dims(oracle::skeleton(n));
    FusionCategory c = builtin(n);
    for (int a = 0; a < c.n(); ++a) EXPECT_NEAR(c.d(a), fp[a], 1e-10) << n;
  }
}

TEST(Loader, RoundTrip) {
  for (const auto& n : builtin_names()) {
    FusionCategory c = builtin(n);
    FusionCategory r = load_category(category_to_json(c));
    EXPECT_EQ(r.labels, c.labels);
    EXPECT_EQ(r.N, c.N);
    for (std::size_t k = 0; k < c.F.size(); ++k) EXPECT_EQ(r.F[k], c.F[k]);
  }
}

TEST(Loader, Rejections) {
  EXPECT_THROW(load_category("{"), CategoryError);
  EXPECT_THROW(load_category("[]"), CategoryError);
  EXPECT_THROW(load_category_file("/nonexistent/cat.json"), CategoryError);

  json d = z2_doc();
  d["dual"]["1"] = "0";
  EXPECT_THROW(load_category(d.dump()), CategoryError);

  d = z2_doc();
  d["qdim_root"]["1"] = -1.0;
  EXPECT_THROW(load_category(d.dump()), CategoryError);

  d = z2_doc();
  d["F"].erase(d["F"].begin());
  EXPECT_THROW(load_category(d.dump()), CategoryError);

  d = z2_doc();
  d["F"].push_back(d["F"][0]);
  EXPECT_THROW(load_category(d.dump()), CategoryError);

  d = z2_doc();
  d["fusion"].push_back({"1", "1", "1"});
  EXPECT_THROW(load_category(d.dump()), CategoryError);

  d = z2_doc();
  d["labels"] = json::array({"0", "0"});
  EXPECT_THROW(load_category(d.dump()), CategoryError);
}

TEST(Loader, DetectsWrongF) {
  json d = z2_doc();
  for (auto& r : d["F"])
    if (r["i"] == "1" && r["j"] == "1" && r["k"] == "1") r["re"] = -1.0;
  FusionCategory c = load_category(d.dump());
  // Still a valid document; the checks report the damage.
  EXPECT_FALSE(check_pentagon(c, 1e-10).pass && check_unitarity(c, 1e-10).pass && check_tetrahedral(c, 1e-10).pass);
}

TEST(Verlinde, ToricCodeS) {
  Eigen::MatrixXcd S(4, 4);
  S << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  S /= 2.0;
  VerlindeResult v = verlinde_fusion(S);
  EXPECT_LT(v.max_error, 1e-12);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      int total = 0;
      for (int c = 0; c < 4; ++c) total += v.at(a, b, c);
      EXPECT_EQ(total, 1);
    }
  EXPECT_EQ(v.at(1, 2, 3), 1);
  EXPECT_EQ(v.at(3, 3, 0), 1);
}

TEST(Verlinde, FibonacciS) {
  const double D = std::sqrt(1 + kPhi * kPhi);
  Eigen::MatrixXcd S(2, 2);
  S << 1, kPhi, kPhi, -1;
  S /= D;
  VerlindeResult v = verlinde_fusion(S);
  EXPECT_EQ(v.at(1, 1, 0), 1);
  EXPECT_EQ(v.at(1, 1, 1), 1);
  EXPECT_EQ(v.at(0, 1, 0), 0);
}

TEST(Verlinde, RejectsZeroInFirstRow) {
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(2, 2);
  EXPECT_THROW(verlinde_fusion(S), CategoryError);
}

TEST(Gauge, SymmetricGaugeKeepsEveryCheck) {
  for (const auto& n : builtin_names())
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      FusionCategory g = random_gauge(builtin(n), seed);
      EXPECT_TRUE(check_pentagon(g, 1e-10).pass) << n;
      EXPECT_TRUE(check_tetrahedral(g, 1e-10).pass) << n;
      EXPECT_TRUE(check_unitarity(g, 1e-10).pass) << n;
    }
}

TEST(Gauge, CyclicGaugeKeepsUnitarityOnly) {
  FusionCategory c = builtin("ising");
  FusionCategory g = random_gauge(c, 5, false);
  double shift = 0;
  for (std::size_t k = 0; k < c.F.size(); ++k) shift = std::max(shift, std::abs(g.F[k] - c.F[k]));
  EXPECT_GT(shift, 1e-3);
  EXPECT_TRUE(check_unitarity(g, 1e-10).pass);
  EXPECT_FALSE(check_tetrahedral(g, 1e-10).pass);
}

TEST(Perturb, ChangesOneEntry) {
  for (const auto& n : builtin_names()) {
    FusionCategory c = builtin(n);
    FusionCategory p = perturb_entry(c, 1e-2);
    int changed = 0;
    for (std::size_t k = 0; k < c.F.size(); ++k)
      if (p.F[k] != c.F[k]) {
        ++changed;
        EXPECT_NEAR(std::abs(p.F[k] - c.F[k]), 1e-2, 1e-15);
      }
    EXPECT_EQ(changed, 1) << n;
    EXPECT_GE(check_pentagon(p, 1e-10).residual, 1e-3) << n;
  }
}

TEST(Perturb, ResidualScalesLinearly) {
  for (const auto& n : {"z2", "fibonacci", "ising"}) {
    FusionCategory c = builtin(n);
    const double r6 = check_pentagon(perturb_entry(c, 1e-6), 1e-10).residual;
    const double r4 = check_pentagon(perturb_entry(c, 1e-4), 1e-10).residual;
    EXPECT_NEAR(r4 / r6, 100.0, 1.0) << n;
  }
}
