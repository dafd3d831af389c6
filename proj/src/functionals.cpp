#include "qgibbs/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qgibbs {

namespace {

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }
Mat unvec(const Vec& v, long d) { return Eigen::Map<const Mat>(v.data(), d, d); }

// Euclidean projection onto {p >= floor, sum p = 1}
RVec project_simplex(const RVec& v, double floor) {
  const int n = static_cast<int>(v.size());
  double budget = 1.0 - n * floor;
  RVec u = v.array() - floor;
  RVec s = u;
  std::sort(s.data(), s.data() + n, std::greater<double>());
  double cum = 0, theta = 0;
  for (int i = 0; i < n; ++i) {
    cum += s(i);
    double t = (cum - budget) / (i + 1);
    if (s(i) - t > 0) theta = t;
  }
  RVec out = (u.array() - theta).max(0.0) + floor;
  return out / out.sum();
}

}  // namespace

DualMap dual_of(const ConditionalExpectation& e) {
  return [e](const Mat& rho) { return e.apply_dual(rho); };
}

DualMap dual_of_superop(const Mat& superop) {
  return [superop](const Mat& rho) { return unvec(superop * vec(rho), rho.rows()); };
}

double entropy_production(const Lindbladian& l, const Mat& rho, const Mat& sigma) {
  Mat lr = l.apply_dual(rho);
  Mat diff = log_h(rho) - log_h(sigma);
  return -std::real((lr * diff).trace());
}

namespace {

struct Symmetrized {
  Mat m;       // K^{1/2} S K^{-1/2}
  Mat k_half, k_half_inv;
};

Symmetrized symmetrize(const Lindbladian& l, const Mat& sigma) {
  double res = kms_symmetry_residual(l, sigma);
  if (res > 1e-8) throw SymmetryError("spectral_gap: generator is not KMS-symmetric (residual " + std::to_string(res) + ")");
  Mat s = to_superoperator(l);
  Mat q = pow_psd(sigma, 0.25), qi = pow_psd(sigma, -0.25);
  Symmetrized out;
  out.k_half = kron(q.transpose(), q);
  out.k_half_inv = kron(qi.transpose(), qi);
  out.m = out.k_half * s * out.k_half_inv;
  out.m = 0.5 * (out.m + out.m.adjoint());
  return out;
}

}  // namespace

double spectral_gap(const Lindbladian& l, const Mat& sigma) {
  Symmetrized sy = symmetrize(l, sigma);
  Eig e = herm_eig(-sy.m);
  double scale = std::max(1.0, e.vals.cwiseAbs().maxCoeff());
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < e.vals.size(); ++i)
    if (e.vals(i) > 1e-9 * scale) gap = std::min(gap, e.vals(i));
  return gap;
}

Mat stationary_projection_dual(const Lindbladian& l, const Mat& sigma) {
  Symmetrized sy = symmetrize(l, sigma);
  Eig e = herm_eig(sy.m);
  double scale = std::max(1.0, e.vals.cwiseAbs().maxCoeff());
  Mat pi = Mat::Zero(sy.m.rows(), sy.m.cols());
  for (int i = 0; i < e.vals.size(); ++i)
    if (std::abs(e.vals(i)) <= 1e-9 * scale) pi += e.vecs.col(i) * e.vecs.col(i).adjoint();
  return sy.k_half * pi * sy.k_half_inv;
}

// ---------------------------------------------------------------------------

WitnessReport ratio_witness(long dim, const std::function<double(const Mat&)>& numerator,
                            const std::function<double(const Mat&)>& denominator, const DualMap& prepare,
                            const Mat& sigma, const WitnessConfig& cfg, const DualMap& mix_with) {
  WitnessReport rep;
  rep.quantity = std::numeric_limits<double>::infinity();
  rep.tolerance = cfg.skip_below;
  const int n = static_cast<int>(dim);

  auto ratio = [&](const Mat& rho, bool count) {
    Mat w = prepare(rho);
    double den = denominator(w);
    if (!(den >= cfg.skip_below)) {
      if (count) ++rep.skipped;
      return std::numeric_limits<double>::infinity();
    }
    double r = numerator(w) / (4.0 * den);
    if (count) ++rep.samples;
    if (r < rep.quantity) {
      rep.quantity = r;
      rep.minimizer = w;
    }
    return r;
  };

  // samples in thirds: random states, mixtures with sigma, mixtures with mix_with(rho)
  std::vector<std::pair<double, Mat>> pool;
  for (int s = 0; s < cfg.samples; ++s) {
    Rng rng(cfg.seed, "witness_sample", static_cast<std::uint64_t>(s));
    Mat rho = random_state(n, rng);
    if (s % 3 == 1) {
      double lam = std::pow(10.0, -3.0 * rng.uniform());
      rho = lam * rho + (1 - lam) * sigma;
    } else if (s % 3 == 2) {
      double lam = std::pow(10.0, -3.0 * rng.uniform());
      Mat p = mix_with ? mix_with(rho) : sigma;
      rho = lam * rho + (1 - lam) * p;
    }
    double r = ratio(rho, true);
    if (std::isfinite(r)) pool.push_back({r, rho});
  }
  rep.trace.push_back(rep.quantity);

  // descents from the worst samples: projected steps on the eigenvalue simplex plus random
  // eigenbasis rotations, adaptive step sizes
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const int nd = std::min<int>(cfg.descents, static_cast<int>(pool.size()));
  const double floor = 1e-9;
  for (int k = 0; k < nd; ++k) {
    Rng rng(cfg.seed, "witness_descent", static_cast<std::uint64_t>(k));
    Eig e = herm_eig(pool[k].second);
    RVec p = project_simplex(e.vals, floor);
    Mat u = e.vecs;
    auto build = [&](const RVec& pp, const Mat& uu) { return Mat(uu * pp.cast<cplx>().asDiagonal() * uu.adjoint()); };
    double cur = ratio(build(p, u), false);
    double step_p = 0.05, step_u = 0.05;
    for (int it = 0; it < cfg.steps; ++it) {
      // eigenvalues: forward-difference gradient for small dims, random direction otherwise
      RVec g(n);
      if (n <= 16) {
        const double h = 1e-6;
        for (int i = 0; i < n; ++i) {
          RVec q = p;
          q(i) += h;
          q /= q.sum();
          double v = ratio(build(q, u), false);
          g(i) = std::isfinite(v) ? (v - cur) / h : 0.0;
        }
      } else {
        for (int i = 0; i < n; ++i) g(i) = rng.normal();
      }
      if (g.norm() > 0) {
        RVec q = project_simplex(p - step_p * g / g.norm(), floor);
        double v = ratio(build(q, u), false);
        if (v < cur) {
          p = q;
          cur = v;
          step_p *= 1.5;
        } else {
          step_p *= 0.5;
        }
      }
      Mat kmat = random_hermitian(n, rng);
      Eig ek = herm_eig(kmat / std::max(1e-300, op_norm(kmat)));
      Mat urot = ek.vecs * (cplx(0, 1) * step_u * ek.vals.cast<cplx>()).array().exp().matrix().asDiagonal() *
                 ek.vecs.adjoint();
      Mat u2 = urot * u;
      double v = ratio(build(p, u2), false);
      if (v < cur) {
        u = u2;
        cur = v;
        step_u *= 1.5;
      } else {
        step_u *= 0.5;
      }
      if (step_p < 1e-10 && step_u < 1e-10) break;
    }
    rep.trace.push_back(rep.quantity);
  }
  if (rep.samples == 0) throw DomainError("witness: no valid sample (all denominators below the skip threshold)");
  return rep;
}

WitnessReport mlsi_witness(const Lindbladian& l, const Mat& sigma, const DualMap& e_star, const WitnessConfig& cfg) {
  auto num = [&](const Mat& rho) { return entropy_production(l, rho, sigma); };
  auto den = [&](const Mat& rho) { return relative_entropy(rho, e_star(rho)); };
  auto id = [](const Mat& rho) { return rho; };
  return ratio_witness(l.dim(), num, den, id, sigma, cfg, e_star);
}

WitnessReport mlsi_witness(const Lindbladian& l, const Mat& sigma, const WitnessConfig& cfg) {
  return mlsi_witness(l, sigma, dual_of_superop(stationary_projection_dual(l, sigma)), cfg);
}

double cmlsi_bound(double gap, const Mat& sigma, long dim) {
  if (gap < 0) throw PreconditionError("cmlsi_bound: negative gap");
  double lmin = min_eig(sigma);
  if (lmin <= 0) throw DomainError("cmlsi_bound: sigma is not full rank");
  return gap * lmin / (static_cast<double>(dim) * static_cast<double>(dim));
}

WitnessReport pinched_mlsi_witness(const Lindbladian& lc, const Mat& sigma, const DualMap& pinch,
                                   const DualMap& ec_star, const WitnessConfig& cfg) {
  auto num = [&](const Mat& w) { return entropy_production(lc, w, sigma); };
  auto den = [&](const Mat& w) { return relative_entropy(w, ec_star(w)); };
  try {
    return ratio_witness(lc.dim(), num, den, pinch, sigma, cfg, ec_star);
  } catch (const DomainError&) {
    WitnessReport rep;
    rep.quantity = std::numeric_limits<double>::infinity();
    rep.skipped = cfg.samples;
    rep.tolerance = cfg.skip_below;
    return rep;
  }
}

ChainRule chain_rule_check(const Mat& rho, const Mat& sigma, const DualMap& e_star) {
  ChainRule c;
  Mat er = e_star(rho);
  c.total = relative_entropy(rho, sigma);
  c.inner = relative_entropy(rho, er);
  c.outer = relative_entropy(er, sigma);
  c.residual = std::abs(c.total - c.inner - c.outer);
  return c;
}

double tensorization_multiplier(double c, long size, double dist, double xi) {
  if (c < 0 || xi <= 0) throw PreconditionError("tensorization: need c >= 0 and xi > 0");
  double ct = 2.0 * c * static_cast<double>(size) * std::exp(-dist / xi);
  if (!(ct < 1.0)) throw PreconditionError("tensorization: 2 c |C u D| exp(-dist/xi) must be < 1");
  return 1.0 / (1.0 - ct);
}

TensorizationReport approximate_tensorization_check(const Mat& omega, const DualMap& ec, const DualMap& ed,
                                                    const DualMap& ecd, double c, double xi, double dist, long size) {
  TensorizationReport r;
  r.multiplier = tensorization_multiplier(c, size, dist, xi);
  r.lhs = relative_entropy(omega, ecd(omega));
  r.d_c = relative_entropy(omega, ec(omega));
  r.d_d = relative_entropy(omega, ed(omega));
  r.rhs = r.multiplier * (r.d_c + r.d_d);
  r.margin = r.rhs - r.lhs;
  return r;
}

Step1Report step1_check(const Mat& omega, const Mat& sigma, const Lindbladian& lc, const Lindbladian& ld,
                        const Lindbladian& lcap, const Lindbladian& lcup, const DualMap& ecd, double beta_c,
                        double beta_d, double theta) {
  Step1Report r;
  double ep_c = entropy_production(lc, omega, sigma);
  double ep_d = entropy_production(ld, omega, sigma);
  double ep_cap = entropy_production(lcap, omega, sigma);
  double ep_cup = entropy_production(lcup, omega, sigma);
  r.additivity_residual = std::abs(ep_c + ep_d - ep_cap - ep_cup);
  r.lhs = relative_entropy(omega, ecd(omega));
  r.rhs = theta / (4.0 * std::min(beta_c, beta_d)) * (ep_cap + ep_cup);
  r.margin = r.rhs - r.lhs;
  return r;
}

DecayReport decay_check(const Lindbladian& l, const Mat& rho, const DualMap& e_star, double alpha,
                        const std::vector<double>& times) {
  DecayReport rep;
  Mat target = e_star(rho);
  double d0 = relative_entropy(rho, target);
  Mat s = to_dual_superoperator(l);
  double prev = std::numeric_limits<double>::infinity();
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (double t : times) {
    Mat rt = t == 0 ? rho : unvec(expm(t * s) * vec(rho), rho.rows());
    rt = herm_part(rt);
    double d = relative_entropy(rt, target);
    double env = std::exp(-4.0 * alpha * t) * d0;
    rep.t.push_back(t);
    rep.d.push_back(d);
    rep.envelope.push_back(env);
    rep.worst_margin = std::min(rep.worst_margin, env - d);
    if (d > prev + 1e-12) rep.monotone = false;
    prev = d;
  }
  rep.holds = rep.worst_margin >= -1e-10;
  return rep;
}

}  // namespace qgibbs
