#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qgibbs/linalg.hpp"

using namespace qgibbs;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Mat random_full_rank(int n, Rng& rng) {
  Mat r = random_state(n, rng);
  return 0.8 * r + 0.2 * Mat::Identity(n, n) / n;
}

// CPTP map from a random isometry into C^n (x) C^k, traced over the ancilla
struct Channel {
  std::vector<Mat> kraus;
  Mat operator()(const Mat& rho) const {
    Mat out = Mat::Zero(rho.rows(), rho.cols());
    for (const auto& k : kraus) out += k * rho * k.adjoint();
    return out;
  }
};

Channel random_channel(int n, int k, Rng& rng) {
  Mat u = haar_unitary(n * k, rng);
  Mat v = u.leftCols(n);  // isometry C^n -> C^{nk}
  Channel c;
  for (int a = 0; a < k; ++a) {
    Mat ka(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ka(i, j) = v(i * k + a, j);
    c.kraus.push_back(ka);
  }
  return c;
}

}  // namespace

TEST(PartialTrace, ProductStateKeepsFirstFactor) {
  Rng rng(1);
  Mat rho = random_state(2, rng), tau = random_state(3, rng);
  Mat out = ptrace(kron(rho, tau), {2, 3}, {0});
  EXPECT_LT((out - rho).norm(), 1e-13);
  Mat out2 = ptrace(kron(rho, tau), {2, 3}, {1});
  EXPECT_LT((out2 - tau).norm(), 1e-13);
}

TEST(PartialTrace, BellStateReducesToMaximallyMixed) {
  Vec v = Vec::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  QOperator bell{v * v.adjoint(), {{0}, {1}}, 2};
  auto red = partial_trace(bell, {{1}});
  EXPECT_LT((red.mat - Mat::Identity(2, 2) / 2.0).norm(), 1e-14);
  EXPECT_EQ(red.support, Region({{1}}));
}

TEST(PartialTrace, TracePreservedOnRandomThreeQubitStates) {
  for (int s = 0; s < 10; ++s) {
    Rng rng(7, "ptrace", s);
    QOperator rho{random_state(8, rng), {{0}, {1}, {2}}, 2};
    for (const Region& keep : {Region{{0}}, Region{{1}, {2}}, Region{{0}, {2}}}) {
      auto r = partial_trace(rho, keep);
      EXPECT_NEAR(std::real(r.mat.trace()), 1.0, 1e-13);
    }
  }
}

TEST(PartialTrace, RejectsSiteOutsideSupport) {
  QOperator x{Mat::Identity(2, 2), {{0}}, 2};
  EXPECT_THROW(partial_trace(x, {{3}}), PreconditionError);
}

TEST(Embed, IdentityEmbedsToIdentity) {
  QOperator id{Mat::Identity(2, 2), {{1}}, 2};
  auto e = embed(id, {{0}, {1}, {2}});
  EXPECT_LT((e.mat - Mat::Identity(8, 8)).norm(), 1e-14);
}

TEST(Embed, RoundTripThroughPartialTrace) {
  Rng rng(3);
  Mat a = random_state(2, rng), b = random_state(2, rng), c = random_state(2, rng);
  QOperator prod{kron_all({a, b, c}), {{0}, {1}, {2}}, 2};
  auto mid = partial_trace(prod, {{1}});
  EXPECT_LT((mid.mat - b).norm(), 1e-13);
  auto back = embed(mid, {{0}, {1}, {2}});
  EXPECT_LT((back.mat - kron_all({Mat::Identity(2, 2), b, Mat::Identity(2, 2)})).norm(), 1e-13);
}

TEST(Embed, TraceOfProductCountsIdleSites) {
  Rng rng(5);
  Region full{{0}, {1}, {2}, {3}};
  QOperator x{random_operator(2, rng), {{1}}, 2};
  QOperator y{random_operator(4, rng), {{1}, {2}}, 2};
  Mat ex = embed(x, full).mat, ey = embed(y, full).mat;
  cplx lhs = (ex * ey).trace();
  cplx rhs = 4.0 * (embed(x, {{1}, {2}}).mat * y.mat).trace();  // two idle sites
  EXPECT_LT(std::abs(lhs - rhs), 1e-11);
}

TEST(Embed, NonContiguousLegOrder) {
  Rng rng(9);
  Mat x = random_operator(2, rng);
  Mat e = embed({x, {{2}}, 2}, {{0}, {1}, {2}}).mat;
  Mat want = kron_all({Mat::Identity(4, 4), x});
  EXPECT_LT((e - want).norm(), 1e-14);
  QOperator a{random_operator(2, rng), {{2}}, 2}, b{random_operator(2, rng), {{0}}, 2};
  auto t = tensor(a, b);
  EXPECT_EQ(t.support, Region({{0}, {2}}));
  EXPECT_LT((t.mat - kron(b.mat, a.mat)).norm(), 1e-14);
}

TEST(PermuteLegs, InverseRoundTrip) {
  Rng rng(11);
  Mat x = random_operator(24, rng);
  std::vector<int> dims{2, 3, 4};
  std::vector<int> perm{2, 0, 1}, inv{1, 2, 0};
  Mat y = permute_legs(x, dims, perm);
  Mat z = permute_legs(y, {4, 2, 3}, inv);
  EXPECT_LT((z - x).norm(), 1e-13);
}

TEST(MatrixFunction, IdentityAndExpZero) {
  Rng rng(2);
  Mat h = random_hermitian(5, rng);
  EXPECT_LT((herm_apply(h, [](double v) { return v; }) - h).norm(), 1e-12);
  EXPECT_LT((exp_h(Mat::Zero(3, 3)) - Mat::Identity(3, 3)).norm(), 1e-15);
}

TEST(MatrixFunction, ExpOfLogRoundTrip) {
  for (int s = 0; s < 5; ++s) {
    Rng rng(4, "explog", s);
    Mat sigma = random_full_rank(6, rng);
    EXPECT_LT((exp_h(log_h(sigma)) - sigma).norm(), 1e-12);
  }
}

TEST(MatrixFunction, LogOfSingularIsDomainError) {
  EXPECT_THROW(log_h(diag2(1.0, 0.0)), DomainError);
}

TEST(RelativeEntropy, ClosedForms) {
  Rng rng(6);
  Mat rho = random_state(4, rng);
  EXPECT_NEAR(relative_entropy(rho, rho), 0.0, 1e-12);
  EXPECT_NEAR(relative_entropy(diag2(1, 0), diag2(0.5, 0.5)), std::log(2.0), 1e-14);
  EXPECT_NEAR(relative_entropy(diag2(0.75, 0.25), diag2(0.5, 0.5)), 0.130812, 1e-6);
  const double oracle = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  EXPECT_NEAR(relative_entropy(diag2(0.75, 0.25), diag2(0.5, 0.5)), oracle, 1e-14);
}

TEST(RelativeEntropy, SupportViolationIsInfinite) {
  EXPECT_TRUE(std::isinf(relative_entropy(diag2(0.5, 0.5), diag2(1, 0))));
  EXPECT_FALSE(std::isinf(relative_entropy(diag2(1, 0), diag2(1, 0))));
}

TEST(RelativeEntropy, PinskerOnRandomPairs) {
  for (int s = 0; s < 50; ++s) {
    Rng rng(8, "pinsker", s);
    Mat rho = random_state(4, rng), sigma = random_full_rank(4, rng);
    double tn = trace_norm(rho - sigma);
    EXPECT_GE(relative_entropy(rho, sigma) + 1e-12, 0.5 * tn * tn);
  }
}

TEST(RelativeEntropy, DataProcessingUnderRandomChannels) {
  for (int s = 0; s < 30; ++s) {
    Rng rng(10, "dpi", s);
    Mat rho = random_state(3, rng), sigma = random_full_rank(3, rng);
    Channel phi = random_channel(3, 2, rng);
    EXPECT_LE(relative_entropy(phi(rho), phi(sigma)), relative_entropy(rho, sigma) + 1e-11);
  }
}

TEST(Dmax, ClosedFormsAndJointMixing) {
  Mat half = diag2(0.5, 0.5);
  EXPECT_NEAR(dmax(half, half), 0.0, 1e-14);
  EXPECT_NEAR(dmax(diag2(1, 0), half), std::log(2.0), 1e-14);
  EXPECT_THROW(dmax(half, diag2(1, 0)), DomainError);
  for (int s = 0; s < 20; ++s) {
    Rng rng(12, "dmax", s);
    Mat rho = random_state(3, rng), sigma = random_full_rank(3, rng);
    double lam = rng.uniform();
    Mat mix = lam * rho + (1 - lam) * sigma;
    EXPECT_LE(dmax(mix, sigma), dmax(rho, sigma) + 1e-12);
    EXPECT_GE(dmax(rho, sigma) + 1e-12, relative_entropy(rho, sigma));
  }
}

TEST(WeightedNorm, BasicIdentities) {
  Rng rng(13);
  Mat sigma = random_full_rank(4, rng);
  Mat id = Mat::Identity(4, 4);
  for (double p : {1.0, 2.0, 3.5}) EXPECT_NEAR(weighted_lp_norm(id, sigma, p), 1.0, 1e-12);
  EXPECT_NEAR(weighted_lp_norm(id, sigma, std::numeric_limits<double>::infinity()), 1.0, 1e-12);
  Mat g = random_operator(4, rng);
  Mat pos = g * g.adjoint();
  Mat s = sqrt_psd(sigma);
  EXPECT_NEAR(weighted_lp_norm(pos, sigma, 1.0), std::real((s * pos * s).trace()), 1e-11);
  Mat x = random_operator(4, rng);
  EXPECT_NEAR(weighted_lp_norm(x, sigma, 2.0), std::sqrt(std::real(kms_inner(x, x, sigma))), 1e-11);
  EXPECT_THROW(weighted_lp_norm(x, sigma, 0.5), PreconditionError);
}

TEST(WeightedNorm, MonotoneInP) {
  const double inf = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 20; ++s) {
    Rng rng(14, "lp", s);
    Mat sigma = random_full_rank(4, rng);
    Mat x = random_operator(4, rng);
    double prev = 0;
    for (double p : {1.0, 2.0, 4.0, inf}) {
      double v = weighted_lp_norm(x, sigma, p);
      EXPECT_GE(v + 1e-12, prev);
      prev = v;
    }
  }
}

TEST(Covariance, IdentityAndPositivity) {
  Rng rng(15);
  Mat sigma = random_full_rank(4, rng);
  Mat y = random_operator(4, rng), x = random_hermitian(4, rng);
  EXPECT_LT(std::abs(kms_covariance(Mat::Identity(4, 4), y, sigma)), 1e-13);
  EXPECT_GE(std::real(kms_covariance(x, x, sigma)), -1e-14);
}

TEST(Covariance, KmsEqualsGnsForCommutingInputs) {
  for (int s = 0; s < 10; ++s) {
    Rng rng(16, "cov", s);
    RVec p(4), a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      p(i) = rng.uniform() + 0.1;
      a(i) = rng.normal();
      b(i) = rng.normal();
    }
    p /= p.sum();
    Mat sigma = p.cast<cplx>().asDiagonal();
    Mat x = a.cast<cplx>().asDiagonal(), y = b.cast<cplx>().asDiagonal();
    Mat id = Mat::Identity(4, 4);
    Mat xc = x - (sigma * x).trace() * id, yc = y - (sigma * y).trace() * id;
    EXPECT_LT(std::abs(kms_covariance(x, y, sigma) - gns_inner(xc, yc, sigma)), 1e-13);
  }
}

TEST(Modular, ZeroCommutingAndGroupLaw) {
  Rng rng(17);
  Mat sigma = random_full_rank(4, rng);
  Mat x = random_operator(4, rng);
  EXPECT_LT((modular_apply(x, sigma, 0.0) - x).norm(), 1e-12);
  Mat f = sigma * sigma - 0.3 * sigma;  // commutes with sigma
  EXPECT_LT((modular_apply(f, sigma, cplx(0.3, 1.7)) - f).norm(), 1e-11);
  cplx z1(0.2, -0.7), z2(-0.45, 0.3);
  Mat lhs = modular_apply(modular_apply(x, sigma, z2), sigma, z1);
  Mat rhs = modular_apply(x, sigma, z1 + z2);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * std::max(1.0, rhs.norm()));
}

TEST(Modular, SpectrumIsEigenvalueRatios) {
  Rng rng(18);
  Mat sigma = random_full_rank(3, rng);
  const int n = 3;
  Mat sup(n * n, n * n);
  for (int k = 0; k < n * n; ++k) {
    Mat e = Mat::Zero(n, n);
    e(k % n, k / n) = 1;
    Mat y = modular_apply(e, sigma, 1.0);
    for (int j = 0; j < n * n; ++j) sup(j, k) = y(j % n, j / n);
  }
  Eigen::ComplexEigenSolver<Mat> es(sup);
  RVec lam = herm_eig(sigma).vals;
  std::vector<double> want, got;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) want.push_back(lam(a) / lam(b));
  for (int k = 0; k < n * n; ++k) got.push_back(es.eigenvalues()(k).real());
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  for (int k = 0; k < n * n; ++k) EXPECT_NEAR(got[k], want[k], 1e-10);
}

TEST(Gamma, IdentitiesAndRoundTrip) {
  Rng rng(19);
  Mat sigma = random_full_rank(4, rng);
  Mat id = Mat::Identity(4, 4);
  EXPECT_LT((gamma_apply(id, sigma) - sigma).norm(), 1e-13);
  Mat x = random_operator(4, rng);
  EXPECT_LT((gamma_apply(x, id / 4.0) - x / 4.0).norm(), 1e-14);
  EXPECT_LT((gamma_apply(gamma_apply(x, sigma, -1.0), sigma, 1.0) - x).norm(), 1e-11);
}
