#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qgibbs/conditional_expectations.hpp"
#include "qgibbs/functionals.hpp"
#include "qgibbs/lattice.hpp"

using namespace qgibbs;

namespace {

Mat plus_mixture(double r) {
  Mat x = pauli('X');
  return 0.5 * (Mat::Identity(2, 2) + r * x);
}

// gap as a generalized Hermitian eigenproblem: -<X, L X>_KMS = mu <X, X>_KMS
double rayleigh_gap(const Lindbladian& l, const Mat& sigma) {
  Mat s = to_superoperator(l);
  Mat h = pow_psd(sigma, 0.5);
  Mat k = kron(h.transpose(), h);
  Mat a = -(k * s);
  a = 0.5 * (a + a.adjoint());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a, k);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-8) best = std::min(best, es.eigenvalues()(i));
  return best;
}

}  // namespace

TEST(EntropyProduction, DephasingClosedForm) {
  auto l = dephasing_generator(chain_region(1));
  Mat sigma = Mat::Identity(2, 2) / 2.0;
  // EP = (r/2) ln((1+r)/(1-r)) for rho = (1 + r X)/2
  for (double r : {0.5, 0.1, 0.9}) {
    double want = 0.5 * r * std::log((1 + r) / (1 - r));
    EXPECT_NEAR(entropy_production(l, plus_mixture(r), sigma), want, 1e-12);
  }
  EXPECT_NEAR(entropy_production(l, plus_mixture(0.5), sigma), 0.25 * std::log(3.0), 1e-12);
}

TEST(EntropyProduction, IsMinusDerivativeOfRelativeEntropy) {
  auto p = ising_family(1, 3, 1.0, 0.3, 0.7);
  Region lam = chain_region(3);
  auto l = schmidt_generator(make_region({{0}, {1}}), p, lam, 0.7);
  Rng rng(11);
  Mat rho = random_state(8, rng);
  const double h = 1e-5;
  double f0 = relative_entropy(rho, l.sigma);
  double f1 = relative_entropy(evolve(l, rho, h).rho, l.sigma);
  double f2 = relative_entropy(evolve(l, rho, 2 * h).rho, l.sigma);
  double fd = -(-3 * f0 + 4 * f1 - f2) / (2 * h);
  EXPECT_NEAR(entropy_production(l, rho, l.sigma), fd, 1e-6);
  EXPECT_GE(entropy_production(l, rho, l.sigma), 0.0);
}

TEST(EntropyProduction, RankDeficientIsDomainError) {
  auto l = dephasing_generator(chain_region(1));
  Mat pure = Mat::Zero(2, 2);
  pure(0, 0) = 1;
  EXPECT_THROW(entropy_production(l, pure, Mat::Identity(2, 2) / 2.0), DomainError);
}

TEST(SpectralGap, IdempotentMinusIdentityHasGapOne) {
  auto p = ising_family(1, 2, 0.7, 0.4, 1.0);
  Region lam = chain_region(2);
  Mat sigma = gibbs_state(p, lam, 1.0);
  EXPECT_NEAR(spectral_gap(depolarizing_generator(sigma, {2, 2}), sigma), 1.0, 1e-10);
  auto l = schmidt_generator({{0}}, p, lam, 1.0);
  EXPECT_NEAR(spectral_gap(l, l.sigma), 1.0, 1e-10);
}

TEST(SpectralGap, MatchesRayleighQuotient) {
  auto p = ising_family(1, 3, 1.0, 0.3, 0.9);
  Region lam = chain_region(3);
  for (const auto& l : {schmidt_generator(lam, p, lam, 0.9), glauber_generator(lam, p, lam, 0.9),
                        schmidt_generator(make_region({{0}, {2}}), p, lam, 0.9)}) {
    EXPECT_NEAR(spectral_gap(l, l.sigma), rayleigh_gap(l, l.sigma), 1e-8);
  }
}

TEST(SpectralGap, RejectsNonSymmetric) {
  Mat a = Mat::Zero(2, 2);
  a(0, 1) = 1.0;
  Mat id = Mat::Identity(2, 2);
  Mat ada = a.adjoint() * a;
  Mat s = kron(a.transpose(), a.adjoint()) - 0.5 * (kron(id, ada) + kron(ada.transpose(), id));
  EXPECT_THROW(spectral_gap(dense_generator(s, {2}), id / 2.0), SymmetryError);
}

TEST(SpectralGap, StationaryProjectionIsCEDual) {
  auto p = ising_family(1, 3, 1.0, 0.25, 0.8);
  Region lam = chain_region(3);
  Region a = make_region({{1}, {2}});
  auto l = schmidt_generator(a, p, lam, 0.8);
  auto e = schmidt_ce(a, p, lam, 0.8);
  auto proj = dual_of_superop(stationary_projection_dual(l, l.sigma));
  Rng rng(9);
  for (int k = 0; k < 4; ++k) {
    Mat rho = random_state(8, rng);
    EXPECT_LT((proj(rho) - e.apply_dual(rho)).norm(), 1e-9);
  }
}

TEST(Witness, DepolarizingRatioBounds) {
  Rng rng(21);
  Mat sigma = random_state(2, rng);
  auto l = depolarizing_generator(sigma, {2});
  WitnessConfig cfg;
  cfg.samples = 90;
  cfg.descents = 4;
  cfg.steps = 15;
  auto rep = mlsi_witness(l, sigma, cfg);
  // EP = D(rho||sigma) + D(sigma||rho), so the ratio is at least 1/4; near sigma it tends to 1/2
  EXPECT_GE(rep.quantity, 0.25 - 1e-12);
  EXPECT_LE(rep.quantity, 0.5 + 1e-2);
  EXPECT_EQ(rep.samples + rep.skipped, 90);
  ASSERT_GE(rep.trace.size(), 2u);
  for (size_t i = 1; i < rep.trace.size(); ++i) EXPECT_LE(rep.trace[i], rep.trace[i - 1]);
}

TEST(Witness, MaximallyMixedDepolarizingAtLeastHalf) {
  Mat sigma = Mat::Identity(2, 2) / 2.0;
  auto l = depolarizing_generator(sigma, {2});
  WitnessConfig cfg;
  cfg.samples = 60;
  cfg.descents = 3;
  cfg.steps = 10;
  auto rep = mlsi_witness(l, sigma, cfg);
  EXPECT_GE(rep.quantity, 0.5 - 1e-6);
  EXPECT_LE(rep.quantity, 0.52);
}

TEST(Witness, DephasingRatioBounds) {
  auto l = dephasing_generator(chain_region(2));
  Mat sigma = Mat::Identity(4, 4) / 4.0;
  WitnessConfig cfg;
  cfg.samples = 60;
  cfg.descents = 3;
  cfg.steps = 10;
  auto rep = mlsi_witness(l, sigma, cfg);
  EXPECT_GE(rep.quantity, 0.25 - 1e-12);
  EXPECT_TRUE(std::isfinite(rep.quantity));
}

TEST(Witness, DeterministicForSeed) {
  auto l = dephasing_generator(chain_region(1));
  Mat sigma = Mat::Identity(2, 2) / 2.0;
  WitnessConfig cfg;
  cfg.samples = 30;
  cfg.descents = 2;
  cfg.steps = 5;
  EXPECT_EQ(mlsi_witness(l, sigma, cfg).quantity, mlsi_witness(l, sigma, cfg).quantity);
}

TEST(Witness, PinchIntoFixedPointsSkipsEverything) {
  auto l = dephasing_generator(chain_region(1));
  Mat sigma = Mat::Identity(2, 2) / 2.0;
  auto e = [](const Mat& rho) {
    Mat d = Mat::Zero(2, 2);
    d.diagonal() = rho.diagonal();
    return d;
  };
  WitnessConfig cfg;
  cfg.samples = 12;
  auto rep = pinched_mlsi_witness(l, sigma, e, e, cfg);
  EXPECT_TRUE(std::isinf(rep.quantity));
  EXPECT_EQ(rep.samples, 0);
  EXPECT_THROW(mlsi_witness(l, sigma, e, [] {
                 WitnessConfig c;
                 c.samples = 3;
                 c.skip_below = 1e9;
                 return c;
               }()),
               DomainError);
}

TEST(CmlsiBound, FormulaValue) {
  EXPECT_DOUBLE_EQ(cmlsi_bound(1.0, Mat::Identity(2, 2) / 2.0, 2), 0.125);
  EXPECT_THROW(cmlsi_bound(-1.0, Mat::Identity(2, 2) / 2.0, 2), PreconditionError);
}

TEST(ChainRule, HoldsForInvariantCE) {
  auto p = ising_family(1, 3, 1.0, 0.3, 0.6);
  Region lam = chain_region(3);
  Mat sigma = gibbs_state(p, lam, 0.6);
  Rng rng(31);
  for (const auto& a : {make_region({{0}}), make_region({{0}, {1}}), make_region({{0}, {2}})}) {
    auto e = schmidt_ce(a, p, lam, 0.6);
    for (int k = 0; k < 3; ++k) {
      auto c = chain_rule_check(random_state(8, rng), sigma, dual_of(e));
      EXPECT_LT(c.residual, 1e-10);
      EXPECT_GE(c.inner, -1e-12);
    }
  }
}

TEST(Tensorization, MultiplierValueAndPrecondition) {
  EXPECT_NEAR(tensorization_multiplier(0.1, 1, 0.0, 1.0), 1.25, 1e-15);
  EXPECT_NEAR(tensorization_multiplier(0.1, 4, 2.0 * std::log(2.0), 2.0), 1.0 / (1.0 - 0.4), 1e-14);
  EXPECT_THROW(tensorization_multiplier(0.5, 1, 0.0, 1.0), PreconditionError);
  EXPECT_THROW(tensorization_multiplier(0.1, 1, 0.0, 0.0), PreconditionError);
  EXPECT_DOUBLE_EQ(tensorization_multiplier(0.0, 7, 1.0, 1.0), 1.0);
}

TEST(Tensorization, StrongSubadditivityAtInfiniteTemperature) {
  LocalPotential empty;
  Region lam = chain_region(3);
  Region c = make_region({{0}, {1}}), d = make_region({{1}, {2}});
  auto ec = schmidt_ce(c, empty, lam, 0.0);
  auto ed = schmidt_ce(d, empty, lam, 0.0);
  auto ecd = schmidt_ce(lam, empty, lam, 0.0);
  for (int s = 0; s < 10; ++s) {
    Rng rng(41, "ssa", s);
    auto r = approximate_tensorization_check(random_state(8, rng), dual_of(ec), dual_of(ed), dual_of(ecd), 0.0, 1.0,
                                             1.0, 3);
    EXPECT_DOUBLE_EQ(r.multiplier, 1.0);
    EXPECT_GE(r.margin, -1e-10);
  }
}

TEST(Step1, AdditivityOfSiteSums) {
  auto p = ising_family(1, 4, 1.0, 0.3, 0.5);
  Region lam = chain_region(4);
  Region c = make_region({{0}, {1}, {2}}), d = make_region({{1}, {2}, {3}});
  auto lc = schmidt_generator(c, p, lam, 0.5), ld = schmidt_generator(d, p, lam, 0.5);
  auto lcap = schmidt_generator(region_intersection(c, d), p, lam, 0.5);
  auto lcup = schmidt_generator(lam, p, lam, 0.5);
  auto ecd = schmidt_ce(lam, p, lam, 0.5);
  Rng rng(51);
  Mat omega = random_state(16, rng);
  auto r = step1_check(omega, lc.sigma, lc, ld, lcap, lcup, dual_of(ecd), 0.1, 0.2, 1.0);
  EXPECT_LT(r.additivity_residual, 1e-9);
  EXPECT_GT(r.lhs, 0.0);
}

TEST(Decay, DepolarizingAtQuarterRate) {
  Rng rng(61);
  Mat sigma = random_state(4, rng);
  auto l = depolarizing_generator(sigma, {2, 2});
  Mat rho = random_state(4, rng);
  auto rep = decay_check(l, rho, [&](const Mat&) { return sigma; }, 0.25, {0.0, 0.1, 0.5, 1.0, 3.0});
  EXPECT_TRUE(rep.holds);
  EXPECT_TRUE(rep.monotone);
  EXPECT_NEAR(rep.d[0], relative_entropy(rho, sigma), 1e-12);
  // a rate far above the true constant must be caught
  EXPECT_FALSE(decay_check(l, rho, [&](const Mat&) { return sigma; }, 5.0, {0.0, 1.0}).holds);
}
