#include <gtest/gtest.h>

#include <cmath>

#include "snet/axioms.hpp"
#include "snet/builtins.hpp"

using namespace snet;

TEST(Axioms, BuiltinsPass) {
  for (const auto& n : builtin_names()) {
    SiteTensorSet ts(builtin(n));
    EXPECT_TRUE(verify_mpo_injectivity(ts).pass) << n;
    EXPECT_TRUE(verify_pulling_through(ts).pass) << n;
    EXPECT_TRUE(verify_closed_mpos(ts, 6).pass) << n;
    EXPECT_TRUE(verify_generalized_inverse(ts).pass) << n;
    EXPECT_TRUE(verify_blocked_injectivity(ts, two_site_region()).pass) << n;
    EXPECT_TRUE(verify_blocked_injectivity(ts, plaquette_region()).pass) << n;
    EXPECT_TRUE(verify_rg_moves(ts).pass) << n;
  }
}

TEST(Axioms, RegionsAreConnected) {
  EXPECT_EQ(two_site_region().sites, 2);
  Region p = plaquette_region();
  EXPECT_EQ(p.sites, 6);
  EXPECT_EQ(p.bonds.size(), 6u);
}

TEST(Axioms, PerturbedCategoryFailsPullingThrough) {
  for (const auto& n : {"z2", "z3", "fibonacci", "ising"}) {
    SiteTensorSet ts(perturb_entry(builtin(n), 1e-2));
    CheckReport r = verify_pulling_through(ts);
    EXPECT_FALSE(r.pass) << n;
    EXPECT_GE(r.residual, 1e-3) << n;
  }
}

TEST(Axioms, PullingThroughResidualScalesLinearly) {
  for (const auto& n : {"z2", "fibonacci", "ising"}) {
    const double r6 = verify_pulling_through(SiteTensorSet(perturb_entry(builtin(n), 1e-6))).residual;
    const double r4 = verify_pulling_through(SiteTensorSet(perturb_entry(builtin(n), 1e-4))).residual;
    EXPECT_NEAR(r4 / r6, 100.0, 2.0) << n;
  }
}

TEST(Axioms, VacuumOnlyStringBreaksInjectivity) {
  SiteTensorSet ts(builtin("fibonacci"));
  ts.identity_only_mpo = true;
  bool inj = true, blocked = true;
  try {
    inj = verify_mpo_injectivity(ts).pass;
  } catch (const TensorError&) {
    inj = false;
  }
  try {
    blocked = verify_blocked_injectivity(ts, two_site_region()).pass;
  } catch (const TensorError&) {
    blocked = false;
  }
  EXPECT_FALSE(inj);
  EXPECT_FALSE(blocked);
}

TEST(Tee, MatchesLogTotalDimension) {
  for (const auto& n : {"trivial", "z2", "z3", "fibonacci", "ising"}) {
    FusionCategory c = builtin(n);
    TeeEstimate e = compute_tee(SiteTensorSet(c));
    EXPECT_NEAR(e.gamma, std::log(c.D2()), 1e-6) << n;
    EXPECT_TRUE(e.pass) << n;
    EXPECT_EQ(e.ranks.size(), 5u) << n;
  }
}

TEST(Tee, ToricCodeValue) {
  TeeEstimate e = compute_tee(SiteTensorSet(builtin("z2")));
  EXPECT_NEAR(e.gamma, std::log(2.0), 1e-9);
  EXPECT_NEAR(e.slope, std::log(2.0), 1e-9);
}

TEST(Tee, GaugeInvariant) {
  for (const auto& n : {"fibonacci", "ising"}) {
    FusionCategory c = builtin(n);
    const double g0 = compute_tee(SiteTensorSet(c)).gamma;
    for (std::uint64_t seed : {3u, 4u})
      EXPECT_NEAR(compute_tee(SiteTensorSet(random_gauge(c, seed))).gamma, g0, 1e-9) << n;
  }
}
