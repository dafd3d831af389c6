#include <gtest/gtest.h>

#include <cmath>

#include "qgibbs/cluster_expansion.hpp"
#include "qgibbs/lattice.hpp"

using namespace qgibbs;

namespace {

LocalPotential edge_chain(int n, double j = 1.0) { return ising_family(1, n, j, 0.0, 0.1); }

int term_index(const LocalPotential& p, const Region& x) {
  for (size_t k = 0; k < p.terms.size(); ++k)
    if (p.terms[k].first == x) return static_cast<int>(k);
  return -1;
}

std::vector<cplx> random_z(const LocalPotential& p, double scale, int seed) {
  Rng rng(seed);
  std::vector<cplx> z(p.terms.size());
  for (auto& v : z) v = cplx(scale * (0.5 + rng.uniform()), scale * (rng.uniform() - 0.5));
  return z;
}

}  // namespace

TEST(ConnectedSets, FiveSiteChainFromMiddle) {
  auto p = edge_chain(5);
  auto sets = connected_sets({2}, p, 2);
  ASSERT_EQ(sets.size(), 5u);
  auto e = [&](int a) { return term_index(p, make_region({{a}, {a + 1}})); };
  std::set<std::vector<int>> got;
  for (const auto& s : sets) got.insert(s.terms);
  auto sorted = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  std::set<std::vector<int>> want = {{e(1)}, {e(2)}, sorted({e(1), e(2)}), sorted({e(0), e(1)}), sorted({e(2), e(3)})};
  EXPECT_EQ(got, want);
  auto rows = connected_set_counts({2}, p, 2);
  EXPECT_EQ(rows[0].count, 2);
  EXPECT_EQ(rows[1].count, 3);
  EXPECT_DOUBLE_EQ(rows[0].bound, 2.0);
  EXPECT_DOUBLE_EQ(rows[1].bound, 4.0);
}

TEST(ConnectedSets, EmptyPotentialAndBadSize) {
  LocalPotential p;
  EXPECT_TRUE(connected_sets({0}, p, 3).empty());
  EXPECT_THROW(connected_sets({0}, edge_chain(3), 0), PreconditionError);
}

TEST(ConnectedSets, CountBoundOnChainsAndSquarePatch) {
  for (const auto& p : {ising_family(1, 7, 1.0, 0.5, 0.1), edge_chain(7), ising_family(2, 3, 1.0, 0.0, 0.1),
                        ising_family(2, 3, 1.0, 0.2, 0.1)}) {
    for (const auto& x0 : p.sites())
      for (const auto& row : connected_set_counts(x0, p, 4)) EXPECT_LE(row.count, row.bound) << row.size;
  }
}

TEST(ConnectedSets, EverySetIsConnectedAndDistinct) {
  auto p = ising_family(2, 3, 1.0, 0.3, 0.1);
  auto sets = connected_sets({{1, 1}}, p, 3);
  std::set<std::vector<int>> uniq;
  for (const auto& s : sets) {
    EXPECT_TRUE(uniq.insert(s.terms).second);
    EXPECT_TRUE(contains(s.support, Site{1, 1}));
    // flood fill over supports
    std::vector<bool> reached(s.terms.size(), false);
    Region cover = {Site{1, 1}};
    bool grew = true;
    while (grew) {
      grew = false;
      for (size_t i = 0; i < s.terms.size(); ++i)
        if (!reached[i] && !region_intersection(p.terms[s.terms[i]].first, cover).empty()) {
          reached[i] = true;
          cover = region_union(cover, p.terms[s.terms[i]].first);
          grew = true;
        }
    }
    for (bool r : reached) EXPECT_TRUE(r);
  }
}

TEST(ClusterWeight, SingleEdgeClosedForm) {
  auto p = edge_chain(2);
  auto sets = connected_sets({0}, p, 1);
  ASSERT_EQ(sets.size(), 1u);
  for (cplx z : {cplx(0.3, 0), cplx(0.2, 0.1), cplx(-0.4, 0.3)}) {
    std::vector<cplx> zz = {z};
    cplx want = 4.0 * (std::cosh(z) - 1.0);
    EXPECT_LT(std::abs(cluster_weight(sets[0], p, zz) - want), 1e-13);
    EXPECT_LT(std::abs(cluster_weight(sets[0], p, zz, WeightMode::Truncated, 20) - want), 1e-12);
  }
  EXPECT_LT(std::abs(cluster_weight(sets[0], p, {cplx(0)})), 1e-15);
}

TEST(ClusterWeight, TruncatedMatchesClosedFormOnCommutingPairs) {
  auto p = ising_family(1, 4, 1.0, 0.6, 0.1);
  auto z = random_z(p, 0.3, 4);
  for (const auto& s : connected_sets({1}, p, 3)) {
    cplx a = cluster_weight(s, p, z);
    cplx b = cluster_weight(s, p, z, WeightMode::Truncated, 20);
    EXPECT_LT(std::abs(a - b), 1e-10) << s.size();
  }
}

TEST(ClusterWeight, InclusionExclusionMatchesSequenceEnumeration) {
  LocalPotential p;
  p.add_term({{0}, {1}}, pauli_string("XX"));
  p.add_term({{1}, {2}}, pauli_string("ZZ"));
  p.add_term({{1}}, 0.5 * pauli('Y'));
  auto z = random_z(p, 0.4, 9);
  for (const auto& s : connected_sets({1}, p, 3)) {
    cplx a = cluster_weight(s, p, z, WeightMode::Truncated, 7);
    cplx b = cluster_weight_sequences(s, p, z, 7);
    EXPECT_LT(std::abs(a - b), 1e-12) << s.size();
  }
  auto both = connected_sets({1}, p, 2);
  bool threw = false;
  for (const auto& s : both)
    if (s.size() == 2) {
      try {
        cluster_weight(s, p, z);
      } catch (const PreconditionError&) {
        threw = true;
      }
    }
  EXPECT_TRUE(threw);
}

TEST(ClusterWeight, TruncationConvergesGeometrically) {
  auto p = edge_chain(3);
  auto z = random_z(p, 0.2, 3);
  auto sets = connected_sets({1}, p, 2);
  const auto& s = sets.back();
  cplx exact = cluster_weight(s, p, z);
  // odd orders vanish for ZZ edges, so step by two
  double prev = std::abs(cluster_weight(s, p, z, WeightMode::Truncated, 3) - exact);
  for (int q = 5; q <= 11; q += 2) {
    double err = std::abs(cluster_weight(s, p, z, WeightMode::Truncated, q) - exact);
    EXPECT_LT(err, 0.1 * prev + 1e-15) << q;
    prev = err;
  }
}

TEST(ClusterIdentity, TwoSiteEdgeByHand) {
  auto p = edge_chain(2);
  Region lam = chain_region(2);
  for (cplx z : {cplx(0.7, 0.0), cplx(0.3, -0.2)}) {
    auto r = cluster_identity_check(lam, p, {0}, {}, {z});
    // Tr e^{-z ZZ} = 4 cosh z
    EXPECT_LT(std::abs(r.lhs - 4.0 * std::cosh(z)), 1e-12);
    EXPECT_LE(r.residual, 1e-12);
    EXPECT_EQ(r.sets, 1);
  }
}

TEST(ClusterIdentity, ChainsWithUnitAndLocalN) {
  Mat up = Mat::Zero(2, 2);
  up(0, 0) = 1;
  for (int n = 2; n <= 5; ++n) {
    auto p = ising_family(1, n, 1.0, 0.4, 0.1);
    Region lam = chain_region(n);
    auto z = random_z(p, 0.5, n);
    for (const auto& x0 : lam) {
      EXPECT_LE(cluster_identity_check(lam, p, x0, {}, z).residual, 1e-10);
      Site far = {x0[0] < n / 2 ? n - 1 : 0};
      if (far == x0) continue;
      auto r = cluster_identity_check(lam, p, x0, {{far, up}}, z);
      EXPECT_LE(r.residual, 1e-10);
      EXPECT_GT(r.n_weighted, 0);
    }
  }
}

TEST(ClusterIdentity, ZeroCouplingIsTrivial) {
  auto p = ising_family(1, 3, 1.0, 0.4, 0.1);
  std::vector<cplx> z(p.terms.size(), 0.0);
  auto r = cluster_identity_check(chain_region(3), p, {1}, {}, z);
  EXPECT_LE(r.residual, 1e-13);
  EXPECT_LT(std::abs(r.lhs - 8.0), 1e-13);
}

TEST(BetaC, FormulaAndPreconditions) {
  EXPECT_NEAR(beta_c(2, 1.0, 2, 0.001), 1.0 / (20.0 * std::exp(1.0)) - 0.001, 1e-15);
  EXPECT_NEAR(beta_c(2, 1.0, 2, 0.001), 0.017394, 1e-6);
  EXPECT_THROW(beta_c(2, 1.0, 2, 1.0 / (20.0 * std::exp(1.0))), PreconditionError);
  EXPECT_THROW(beta_c(2, 1.0, 2, -0.1), PreconditionError);
  EXPECT_GT(beta_c(2, 1.0, 2, 0.0), beta_c(3, 1.0, 2, 0.0));
  EXPECT_GT(beta_c(2, 1.0, 2, 0.0), beta_c(2, 1.5, 2, 0.0));
  EXPECT_GT(beta_c(2, 1.0, 2, 0.0), beta_c(2, 1.0, 3, 0.0));
}

TEST(Analyticity, BoundsBelowCriticalBeta) {
  auto p = ising_family(1, 4, 1.0, 0.5, 0.1);
  Region lam = chain_region(4);
  const double delta = 0.001;
  double bc = beta_c(growth_constant(p), p.strength(), p.kappa, delta);
  Mat id = Mat::Identity(16, 16);
  auto a = analyticity_bound_check(lam, p, bc / 2, delta, id, 40);
  EXPECT_TRUE(a.asserted);
  EXPECT_TRUE(a.holds);
  EXPECT_EQ(a.samples, 40);
  // delta = 0 reduces to the real partition function
  auto real = analyticity_bound_check(lam, p, bc / 2, 0.0, id, 1);
  EXPECT_NEAR(real.max_value, std::abs(std::log(std::real(exp_h(-bc / 2 * hamiltonian(p, lam)).trace()))), 1e-12);
  auto r = log_ratio_check(lam, {1}, p, bc / 2, delta, 40);
  EXPECT_TRUE(r.asserted);
  EXPECT_TRUE(r.holds);
  EXPECT_THROW(analyticity_bound_check(lam, p, bc / 2, delta, 2.0 * id, 1), PreconditionError);
}

TEST(Analyticity, LogRatioVanishesAtInfiniteTemperature) {
  auto p = edge_chain(3);
  auto r = log_ratio_check(chain_region(3), {0}, p, 0.0, 0.0, 3);
  EXPECT_LT(r.max_value, 1e-14);
  auto hot = log_ratio_check(chain_region(3), {0}, p, 2.0, 0.1, 3);
  EXPECT_FALSE(hot.asserted);
}
