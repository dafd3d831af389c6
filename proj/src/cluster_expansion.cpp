#include "qgibbs/cluster_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qgibbs/lattice.hpp"

namespace qgibbs {

namespace {

std::vector<int> legs_in(const Region& x, const Region& in) {
  std::vector<int> w;
  for (const auto& s : x) w.push_back(static_cast<int>(std::lower_bound(in.begin(), in.end(), s) - in.begin()));
  return w;
}

Mat embed_term(const LocalPotential& p, int k, const Region& on) {
  std::vector<int> dims(on.size(), p.d);
  return embed_legs(p.terms[k].second, dims, legs_in(p.terms[k].first, on));
}

long dim_of(const Region& r, int d) {
  long n = 1;
  for (size_t i = 0; i < r.size(); ++i) n *= d;
  return n;
}

bool nonzero(const LocalPotential& p, int k) { return p.terms[k].second.norm() != 0.0; }

Region support_of(const LocalPotential& p, const std::vector<int>& terms) {
  std::vector<Site> all;
  for (int k : terms) all.insert(all.end(), p.terms[k].first.begin(), p.terms[k].first.end());
  return make_region(all);
}

void check_z(const LocalPotential& p, const std::vector<cplx>& z) {
  if (z.size() != p.terms.size()) throw PreconditionError("z must carry one entry per potential term");
}

}  // namespace

std::vector<ConnectedSet> connected_sets(const Site& x0, const LocalPotential& p, int max_size) {
  if (max_size < 1) throw PreconditionError("connected_sets: max_size must be >= 1");
  const int nt = static_cast<int>(p.terms.size());
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> frontier;
  for (int k = 0; k < nt; ++k)
    if (nonzero(p, k) && contains(p.terms[k].first, x0)) {
      frontier.push_back({k});
      seen.insert({k});
    }
  std::vector<ConnectedSet> out;
  for (int size = 1; size <= max_size && !frontier.empty(); ++size) {
    std::vector<std::vector<int>> next;
    for (const auto& t : frontier) {
      Region sup = support_of(p, t);
      out.push_back({t, sup, x0});
      if (size == max_size) continue;
      for (int k = 0; k < nt; ++k) {
        if (!nonzero(p, k) || std::binary_search(t.begin(), t.end(), k)) continue;
        if (region_intersection(p.terms[k].first, sup).empty()) continue;
        std::vector<int> u = t;
        u.insert(std::upper_bound(u.begin(), u.end(), k), k);
        if (seen.insert(u).second) next.push_back(std::move(u));
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::vector<CountRow> connected_set_counts(const Site& x0, const LocalPotential& p, int max_size) {
  const int g = growth_constant(p);
  std::vector<CountRow> rows(max_size);
  for (int s = 1; s <= max_size; ++s) rows[s - 1] = {s, 0, std::pow(static_cast<double>(g), s)};
  for (const auto& c : connected_sets(x0, p, max_size)) ++rows[c.size() - 1].count;
  return rows;
}

cplx cluster_weight(const ConnectedSet& x, const LocalPotential& p, const std::vector<cplx>& z, WeightMode mode,
                    int p_max) {
  check_z(p, z);
  const Region& sup = x.support;
  const long dim = dim_of(sup, p.d);
  std::vector<Mat> a;
  for (int k : x.terms) a.push_back(-z[k] * embed_term(p, k, sup));
  if (mode == WeightMode::ClosedForm) {
    for (size_t i = 0; i < a.size(); ++i)
      for (size_t j = i + 1; j < a.size(); ++j)
        if ((a[i] * a[j] - a[j] * a[i]).norm() > 1e-10 * std::max(1.0, a[i].norm() * a[j].norm()))
          throw PreconditionError("cluster_weight: closed form needs commuting terms");
    Mat prod = Mat::Identity(dim, dim);
    for (const auto& m : a) prod = prod * (expm(m) - Mat::Identity(dim, dim));
    return prod.trace();
  }
  // sequences over T that hit every element of X = alternating sum over sub-collections T
  const int n = static_cast<int>(a.size());
  cplx total = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Mat at = Mat::Zero(dim, dim);
    int bits = 0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1) {
        at += a[i];
        ++bits;
      }
    Mat pw = Mat::Identity(dim, dim);
    cplx s = pw.trace();
    double fact = 1;
    for (int q = 1; q <= p_max; ++q) {
      pw = pw * at;
      fact *= q;
      s += pw.trace() / fact;
    }
    total += ((n - bits) % 2 ? -1.0 : 1.0) * s;
  }
  return total;
}

cplx cluster_weight_sequences(const ConnectedSet& x, const LocalPotential& p, const std::vector<cplx>& z, int p_max) {
  check_z(p, z);
  const Region& sup = x.support;
  const long dim = dim_of(sup, p.d);
  std::vector<Mat> a;
  for (int k : x.terms) a.push_back(-z[k] * embed_term(p, k, sup));
  const int n = static_cast<int>(a.size());
  cplx total = 0;
  double fact = 1;
  for (int q = 1; q <= p_max; ++q) {
    fact *= q;
    if (q < n) continue;
    std::vector<int> idx(q, 0);
    while (true) {
      std::vector<bool> hit(n, false);
      Mat prod = Mat::Identity(dim, dim);
      for (int i : idx) {
        hit[i] = true;
        prod = prod * a[i];
      }
      if (std::all_of(hit.begin(), hit.end(), [](bool b) { return b; })) total += prod.trace() / fact;
      int pos = q - 1;
      while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return total;
}

Mat product_observable(const ProductObservable& n, const Region& lambda, int d) {
  const long dim = dim_of(lambda, d);
  Mat out = Mat::Identity(dim, dim);
  std::vector<int> dims(lambda.size(), d);
  for (const auto& [s, m] : n) {
    if (!contains(lambda, s)) throw PreconditionError("product_observable: factor outside the region");
    out = out * embed_legs(m, dims, legs_in({s}, lambda));
  }
  return out;
}

cplx partition_g(const LocalPotential& p, const Region& lambda, const Region& s, const std::vector<cplx>& z,
                 const Mat& n) {
  check_z(p, z);
  const long dim = dim_of(lambda, p.d);
  Mat h = Mat::Zero(dim, dim);
  for (size_t k = 0; k < p.terms.size(); ++k) {
    const Region& x = p.terms[k].first;
    if (!region_difference(x, s).empty() || !region_difference(x, lambda).empty()) continue;
    h += z[k] * embed_term(p, static_cast<int>(k), lambda);
  }
  return (expm(-h) * n).trace();
}

IdentityReport cluster_identity_check(const Region& lambda, const LocalPotential& p_in, const Site& x0,
                                      const ProductObservable& n, const std::vector<cplx>& z) {
  if (!contains(lambda, x0)) throw PreconditionError("cluster_identity_check: anchor outside the region");
  for (const auto& [s, m] : n)
    if (min_eig(m) < -1e-12) throw PreconditionError("cluster_identity_check: N must be positive");
  check_z(p_in, z);
  // only terms inside lambda take part; keep z aligned
  LocalPotential p = p_in;
  std::vector<cplx> zz;
  p.terms.clear();
  for (size_t k = 0; k < p_in.terms.size(); ++k)
    if (region_difference(p_in.terms[k].first, lambda).empty()) {
      p.terms.push_back(p_in.terms[k]);
      zz.push_back(z[k]);
    }
  Mat nfull = product_observable(n, lambda, p.d);
  IdentityReport rep;
  rep.lhs = partition_g(p, lambda, lambda, zz, nfull);
  Region minus = region_difference(lambda, {x0});
  rep.rhs = partition_g(p, lambda, minus, zz, nfull);
  const int max_size = std::max<int>(1, static_cast<int>(p.terms.size()));
  for (const auto& c : connected_sets(x0, p, max_size)) {
    ++rep.sets;
    ProductObservable nx;
    for (const auto& f : n)
      if (contains(c.support, f.first)) nx.push_back(f);
    cplx w;
    if (nx.empty()) {
      w = cluster_weight(c, p, zz, WeightMode::ClosedForm) / static_cast<double>(dim_of(c.support, p.d));
    } else {
      ++rep.n_weighted;
      const long dim = dim_of(c.support, p.d);
      Mat prod = Mat::Identity(dim, dim);
      for (int k : c.terms) prod = prod * (expm(-zz[k] * embed_term(p, k, c.support)) - Mat::Identity(dim, dim));
      Mat nl = product_observable(nx, c.support, p.d);
      w = (prod * nl).trace() / nl.trace();
    }
    rep.rhs += w * partition_g(p, lambda, region_difference(lambda, c.support), zz, nfull);
  }
  rep.residual = std::abs(rep.lhs - rep.rhs);
  return rep;
}

double beta_c(int g, double h, int kappa, double delta) {
  if (g <= 0 || h <= 0 || kappa <= 0) throw PreconditionError("beta_c: g, h and kappa must be positive");
  if (delta < 0) throw PreconditionError("beta_c: delta must be >= 0");
  double b = 1.0 / (5.0 * std::exp(1.0) * g * h * kappa) - delta;
  if (b <= 0) throw PreconditionError("beta_c: delta must be below 1/(5 e g h kappa)");
  return b;
}

std::vector<cplx> sample_disc(const LocalPotential& p, double beta, double delta, std::uint64_t seed,
                              std::uint64_t index) {
  Rng rng(seed, "disc_z", index);
  std::vector<cplx> z(p.terms.size());
  for (auto& v : z) {
    double r = delta * std::sqrt(rng.uniform());
    double th = 2 * M_PI * rng.uniform();
    v = beta + std::polar(r, th);
  }
  return z;
}

BoundReport analyticity_bound_check(const Region& lambda, const LocalPotential& p, double beta, double delta,
                                    const Mat& n, int samples, std::uint64_t seed) {
  if (min_eig(n) < -1e-12 || std::abs(op_norm(n) - 1.0) > 1e-10)
    throw PreconditionError("analyticity_bound_check: need N >= 0 with |N|_inf = 1");
  BoundReport rep;
  const int g = growth_constant(p);
  const double h = p.strength();
  rep.bound = (std::exp(2.0) * g * h * (beta + delta) + std::log(static_cast<double>(p.d))) *
              static_cast<double>(lambda.size());
  try {
    rep.asserted = beta <= beta_c(g, h, p.kappa, delta);
  } catch (const PreconditionError&) {
    rep.asserted = false;
  }
  for (int s = 0; s < samples; ++s) {
    auto z = sample_disc(p, beta, delta, seed, static_cast<std::uint64_t>(s));
    double v = std::abs(std::log(partition_g(p, lambda, lambda, z, n)));
    rep.max_value = std::max(rep.max_value, v);
    ++rep.samples;
  }
  rep.margin = rep.bound - rep.max_value;
  rep.holds = rep.margin >= 0;
  return rep;
}

BoundReport log_ratio_check(const Region& lambda, const Site& x0, const LocalPotential& p, double beta, double delta,
                            int samples, std::uint64_t seed) {
  BoundReport rep;
  const int g = growth_constant(p);
  const double h = p.strength();
  rep.bound = std::exp(2.0) * g * h * (beta + delta);
  try {
    rep.asserted = beta <= beta_c(g, h, p.kappa, delta);
  } catch (const PreconditionError&) {
    rep.asserted = false;
  }
  const long dim = dim_of(lambda, p.d);
  Mat id = Mat::Identity(dim, dim);
  Region minus = region_difference(lambda, {x0});
  for (int s = 0; s < samples; ++s) {
    auto z = sample_disc(p, beta, delta, seed, static_cast<std::uint64_t>(s));
    // g(lambda \ x0) as a trace over H_{lambda \ x0} is the full trace divided by d
    cplx r = partition_g(p, lambda, lambda, z, id) / partition_g(p, lambda, minus, z, id);
    rep.max_value = std::max(rep.max_value, std::abs(std::log(r)));
    ++rep.samples;
  }
  rep.margin = rep.bound - rep.max_value;
  rep.holds = rep.margin >= 0;
  return rep;
}

}  // namespace qgibbs
