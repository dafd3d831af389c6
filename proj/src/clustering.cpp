#include "qgibbs/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "qgibbs/lattice.hpp"

namespace qgibbs {

namespace {

std::vector<int> legs_in(const Region& x, const Region& in) {
  std::vector<int> w;
  for (const auto& s : x) {
    auto it = std::lower_bound(in.begin(), in.end(), s);
    if (it == in.end() || *it != s) throw PreconditionError("site " + region_to_string({s}) + " is outside the region");
    w.push_back(static_cast<int>(it - in.begin()));
  }
  return w;
}

Mat embed_in(const Mat& x, const Region& where, const Region& lambda, int d) {
  std::vector<int> dims(lambda.size(), d);
  return embed_legs(x, dims, legs_in(where, lambda));
}

double top_abs_eig(const Mat& h, Vec* vec = nullptr, double* sign = nullptr) {
  Eig e = herm_eig(herm_part(h));
  Eigen::Index lo = 0, hi = e.vals.size() - 1;
  bool use_hi = std::abs(e.vals(hi)) >= std::abs(e.vals(lo));
  Eigen::Index k = use_hi ? hi : lo;
  if (vec) *vec = e.vecs.col(k);
  if (sign) *sign = e.vals(k) >= 0 ? 1.0 : -1.0;
  return std::abs(e.vals(k));
}

}  // namespace

DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples, double floor) {
  std::set<double> distances;
  for (const auto& [d, v] : samples) distances.insert(d);
  if (distances.size() < 3) throw PreconditionError("fit_decay: need at least 3 distinct distances");
  DecayFit f;
  std::set<double> kept_d;
  for (const auto& [d, v] : samples) {
    if (v > floor) {
      f.samples.emplace_back(d, v);
      kept_d.insert(d);
    } else {
      ++f.dropped;
    }
  }
  if (kept_d.size() < 3) {
    f.no_correlation = true;
    return f;
  }
  const double n = static_cast<double>(f.samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [d, v] : f.samples) {
    double y = std::log(v);
    sx += d;
    sy += y;
    sxx += d * d;
    sxy += d * y;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icpt = (sy - slope * sx) / n;
  double ss_tot = 0, ss_res = 0, ybar = sy / n;
  for (const auto& [d, v] : f.samples) {
    double y = std::log(v);
    ss_tot += (y - ybar) * (y - ybar);
    ss_res += (y - icpt - slope * d) * (y - icpt - slope * d);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  f.c = std::exp(icpt);
  f.xi = slope < 0 ? -1.0 / slope : std::numeric_limits<double>::infinity();
  return f;
}

std::string to_string(ClusteringKind k) {
  switch (k) {
    case ClusteringKind::LInf: return "qLinf";
    case ClusteringKind::L2: return "qL2";
    case ClusteringKind::L2Zero: return "qL2_0";
  }
  return "?";
}

namespace {

// sigma together with sigma^{1/2}, so sweeps over many probes diagonalize sigma once
struct StateRoots {
  const Mat& s;
  Mat half;
};

Mat centered(const Mat& x, const Mat& s) {
  return x - (s * x).trace() * Mat::Identity(x.rows(), x.cols());
}

// Tr[sigma^{1/2} X^dag sigma^{1/2} Y]
cplx kms_with(const Mat& x, const Mat& y, const StateRoots& r) { return (r.half * x.adjoint() * r.half * y).trace(); }

// ||sigma^{1/4} X sigma^{1/4}||_2, via the KMS form instead of an SVD
double l2_with(const Mat& x, const StateRoots& r) { return std::sqrt(std::max(0.0, std::real(kms_with(x, x, r)))); }

double correlation_value_with(const StateRoots& r, const Region& lambda, int d, const CorrelationProbe& probe,
                              ClusteringKind kind, long gamma_size) {
  if (gamma_size <= 0) throw PreconditionError("correlation_value: |Gamma| must be positive");
  const Mat& s = r.s;
  Mat x = embed_in(probe.x, probe.a, lambda, d);
  Mat y = embed_in(probe.y, probe.b, lambda, d);
  double num = 0, den = 1;
  switch (kind) {
    case ClusteringKind::LInf: {
      Mat xc = centered(x, s), yc = centered(y, s);
      double kms = std::abs(kms_with(xc, yc, r));
      double gns = std::abs(gns_inner(xc, yc, s));
      num = std::max(kms, gns);
      // the embedding tensors with the identity, which keeps the operator norm
      den = op_norm(probe.x) * op_norm(probe.y);
      break;
    }
    case ClusteringKind::L2:
      num = std::abs(kms_with(centered(x, s), centered(y, s), r));
      den = l2_with(x, r) * l2_with(y, r);
      break;
    case ClusteringKind::L2Zero: {
      num = std::abs(gns_inner(centered(x, s), centered(y, s), s));
      den = std::sqrt(std::real((s * x.adjoint() * x).trace()) * std::real((s * y.adjoint() * y).trace()));
      break;
    }
  }
  if (den <= 0) return 0.0;
  return num / den / static_cast<double>(gamma_size);
}

}  // namespace

double correlation_value(const Mat& s, const Region& lambda, int d, const CorrelationProbe& probe, ClusteringKind kind,
                         long gamma_size) {
  return correlation_value_with({s, sqrt_psd(s)}, lambda, d, probe, kind, gamma_size);
}

std::vector<CorrelationProbe> single_site_probes(const Region& sites, const std::vector<Mat>& observables) {
  std::vector<CorrelationProbe> out;
  for (const auto& i : sites)
    for (const auto& j : sites) {
      if (i == j) continue;
      for (const auto& x : observables)
        for (const auto& y : observables) out.push_back({{i}, {j}, x, y});
    }
  return out;
}

DecayProfile covariance_decay_profile(const Mat& s, const Region& lambda, int d,
                                      const std::vector<CorrelationProbe>& probes, ClusteringKind kind,
                                      long gamma_size, double floor) {
  DecayProfile prof;
  std::map<double, double> best;
  StateRoots roots{s, kind == ClusteringKind::L2Zero ? Mat() : sqrt_psd(s)};
  for (const auto& pr : probes) {
    double dd = dist(pr.a, pr.b);
    double v = correlation_value_with(roots, lambda, d, pr, kind, gamma_size);
    prof.raw.emplace_back(dd, v);
    auto it = best.find(dd);
    if (it == best.end())
      best[dd] = v;
    else
      it->second = std::max(it->second, v);
  }
  std::vector<std::pair<double, double>> env(best.begin(), best.end());
  prof.fit = fit_decay(env, floor);
  if (prof.fit.no_correlation) prof.fit.samples = env;
  return prof;
}

QIIIdResult qIIId_gap(const Mat& sigma, const Region& lambda, int d, const Region& a, const Mat& n_a, const Region& b,
                      const Mat& p_b, const Mat& p_b_prime, const std::vector<std::pair<Site, Mat>>& boundary_tests) {
  if (min_eig(n_a) < -1e-12) throw PreconditionError("qIIId_gap: N_A must be positive semidefinite");
  const long dim = sigma.rows();
  Mat bd = Mat::Identity(dim, dim);
  for (const auto& [site, t] : boundary_tests) bd = bd * embed_in(t, {site}, lambda, d);
  Mat n = embed_in(n_a, a, lambda, d);
  Mat pb = embed_in(p_b, b, lambda, d) * bd;
  Mat pbp = embed_in(p_b_prime, b, lambda, d) * bd;
  // tests on disjoint supports commute, so the products are again tests
  Mat s1 = post_selected(sigma, herm_part(pb));
  Mat s2 = post_selected(sigma, herm_part(pbp));
  Mat s0 = post_selected(sigma, herm_part(bd));
  QIIIdResult r;
  double t1 = std::real((s1 * n).trace()), t2 = std::real((s2 * n).trace());
  r.lhs = std::abs(t1 - t2);
  r.rhs_factor = t2;
  r.ratio = t2 > 0 ? r.lhs / t2 : std::numeric_limits<double>::infinity();
  r.n_l1 = weighted_lp_norm(n, s0, 1.0);
  if (r.n_l1 > 0) {
    r.lhs_unit = r.lhs / r.n_l1;
    r.rhs_unit = r.rhs_factor / r.n_l1;
  }
  return r;
}

L1LinfResult l1_to_linf_norm(const std::function<Mat(const Mat&)>& phi, const std::function<Mat(const Mat&)>& phi_adj,
                             const Mat& tau, const L1LinfConfig& cfg) {
  const int m = static_cast<int>(tau.rows());
  Mat ti = pow_psd(tau, -0.5);
  auto image = [&](const Vec& u) {
    Mat g = ti * u;
    return Mat(phi(g * g.adjoint()));
  };
  L1LinfResult res;
  res.value = -1;
  Mat tau_basis = herm_eig(tau).vecs;
  const int n_basis = std::min(m, cfg.starts / 2);
  for (int s = 0; s < cfg.starts; ++s) {
    Vec u;
    if (s < n_basis) {
      // part of the eigenbasis of tau first (from the smallest weight), then random directions
      u = tau_basis.col(s);
    } else {
      Rng rng(cfg.seed, "l1linf_start", static_cast<std::uint64_t>(s));
      u = Vec(m);
      for (int i = 0; i < m; ++i) u(i) = rng.cnormal();
      u.normalize();
    }
    double f = top_abs_eig(image(u));
    for (int it = 0; it < cfg.iters; ++it) {
      Vec v;
      double sign = 1;
      top_abs_eig(image(u), &v, &sign);
      Mat g = sign * ti * phi_adj(v * v.adjoint()) * ti;
      Vec w;
      Eig e = herm_eig(herm_part(g));
      w = e.vecs.col(e.vals.size() - 1);
      double fw = top_abs_eig(image(w));
      if (fw <= f + cfg.tol) {
        if (fw > f) {
          f = fw;
          u = w;
        }
        break;
      }
      f = fw;
      u = w;
    }
    if (f > res.value) {
      res.value = f;
      res.maximizer = u;
    }
  }
  return res;
}

namespace {

Mat restricted_block_apply_dual(const ConditionalExpectation& e, const ConditionalExpectation::FullBlock& blk,
                                const Mat& y) {
  Mat x = blk.W * kron(Mat::Identity(blk.n, blk.n), y) * blk.W.adjoint();
  Mat z = blk.W.adjoint() * e.apply_dual(x) * blk.W;
  return ptrace(z, {blk.n, blk.m}, {1}) / static_cast<double>(blk.n);
}

}  // namespace

L1LinfResult l1_to_linf_norm(const ConditionalExpectation& e_c, const ConditionalExpectation& e_d,
                             const ConditionalExpectation& e_cd, const L1LinfConfig& cfg) {
  if (e_c.dims() != e_cd.dims() || e_d.dims() != e_cd.dims())
    throw PreconditionError("l1_to_linf_norm: conditional expectations act on different spaces");
  auto blocks = e_cd.full_blocks();
  L1LinfResult best;
  best.value = -1;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const auto& blk = blocks[i];
    if (blk.tau.rows() != blk.m) throw PreconditionError("l1_to_linf_norm: block state has the wrong size");
    auto phi = [&](const Mat& y) {
      return Mat(restricted_block_apply(e_c, blk, restricted_block_apply(e_d, blk, y)) -
                 restricted_block_apply(e_cd, blk, y));
    };
    auto phi_adj = [&](const Mat& y) {
      return Mat(restricted_block_apply_dual(e_d, blk, restricted_block_apply_dual(e_c, blk, y)) -
                 restricted_block_apply_dual(e_cd, blk, y));
    };
    auto r = l1_to_linf_norm(phi, phi_adj, blk.tau, cfg);
    best.per_block.push_back(r.value);
    if (r.value > best.value) {
      best.value = r.value;
      best.maximizer = r.maximizer;
      best.block = i;
    }
  }
  return best;
}

ClusteringReport clustering_report(LocalPotential p, int n, double beta) {
  ClusteringReport rep;
  rep.beta = beta;
  rep.commuting = verify_commuting(p).commuting;
  Region lam = chain_region(n);
  if (!rep.commuting)
    rep.note = "potential is not commuting: the clustering bounds hold with |Gamma| replaced by |Lambda|";
  const long gamma = static_cast<long>(lam.size());
  Mat sigma = gibbs_state(p, lam, beta);
  std::vector<Mat> paulis = {pauli('X'), pauli('Y'), pauli('Z')};
  // probes from site 0 keep the sweep linear in n
  std::vector<CorrelationProbe> probes;
  for (int j = 1; j < n; ++j)
    for (const auto& x : paulis)
      for (const auto& y : paulis) probes.push_back({{{0}}, {{j}}, x, y});
  rep.linf = covariance_decay_profile(sigma, lam, p.d, probes, ClusteringKind::LInf, gamma);
  rep.l2 = covariance_decay_profile(sigma, lam, p.d, probes, ClusteringKind::L2, gamma);
  rep.l2zero = covariance_decay_profile(sigma, lam, p.d, probes, ClusteringKind::L2Zero, gamma);
  StateRoots roots{sigma, sqrt_psd(sigma)};
  for (size_t k = 0; k < probes.size(); ++k) {
    Mat x = embed_in(probes[k].x, probes[k].a, lam, p.d), y = embed_in(probes[k].y, probes[k].b, lam, p.d);
    double cov = std::abs(kms_with(centered(x, sigma), centered(y, sigma), roots));
    double l2x = l2_with(x, roots), l2y = l2_with(y, roots);
    if (cov / (op_norm(probes[k].x) * op_norm(probes[k].y)) > cov / (l2x * l2y) + 1e-14) ++rep.ordering_violations;
    rep.max_cauchy_schwarz_excess = std::max(rep.max_cauchy_schwarz_excess, cov - l2x * l2y);
  }
  // qIIId sweep: N_A = |0><0| on site 0, P_B = |0><0| against 1 on site j
  Mat up = Mat::Zero(p.d, p.d);
  up(0, 0) = 1;
  Mat id = Mat::Identity(p.d, p.d);
  std::vector<std::pair<double, double>> q;
  for (int j = 1; j < n; ++j) {
    auto r = qIIId_gap(sigma, lam, p.d, {{0}}, up, {{j}}, up, id);
    q.emplace_back(static_cast<double>(j), r.ratio / static_cast<double>(gamma));
    rep.qiiid.raw.emplace_back(static_cast<double>(j), r.ratio / static_cast<double>(gamma));
  }
  rep.qiiid.fit = fit_decay(q);
  if (rep.qiiid.fit.no_correlation) rep.qiiid.fit.samples = q;
  if (rep.commuting) {
    for (int k = 1; k <= 3 && 2 + k < n; ++k) {
      Region c, dd;
      for (int s = 1; s <= 1 + k; ++s) c.push_back({s});
      for (int s = 2; s <= 2 + k; ++s) dd.push_back({s});
      Region cd = region_union(c, dd);
      auto ec = schmidt_ce(c, p, lam, beta), ed = schmidt_ce(dd, p, lam, beta), ecd = schmidt_ce(cd, p, lam, beta);
      L1LinfConfig cfg;
      cfg.starts = 8;
      auto r = l1_to_linf_norm(ec, ed, ecd, cfg);
      rep.l1_linf.emplace_back(dist(region_difference(c, dd), region_difference(dd, c)), r.value);
    }
  }
  return rep;
}

}  // namespace qgibbs
