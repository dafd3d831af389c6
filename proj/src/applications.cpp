#include "qgibbs/applications.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "qgibbs/functionals.hpp"

namespace qgibbs {

namespace {

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }
Mat unvec(const Vec& v, long d) { return Eigen::Map<const Mat>(v.data(), d, d); }

Mat psd_power(const Mat& a, double p) {
  return herm_apply(a, [p](double x) { return std::pow(std::max(x, 0.0), p); });
}

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

}  // namespace

Mat AnnealSchedule::h(double t) const {
  double s = total_time > 0 ? std::clamp(t / total_time, 0.0, 1.0) : 1.0;
  return g1(s) * h1 + g0(s) * h0;
}

Mat transverse_field(int n, const std::vector<double>& gamma) {
  if (!gamma.empty() && static_cast<int>(gamma.size()) != n) throw PreconditionError("transverse_field: gamma size");
  std::vector<int> dims(n, 2);
  long dim = total_dim(dims);
  Mat h = Mat::Zero(dim, dim);
  for (int i = 0; i < n; ++i) h -= (gamma.empty() ? 1.0 : gamma[i]) * embed_legs(pauli('X'), dims, {i});
  return h;
}

Mat plus_state(int n) {
  long dim = 1L << n;
  return Mat::Constant(dim, dim, cplx(1.0 / static_cast<double>(dim), 0));
}

AnnealSchedule linear_schedule(const Mat& h0, const Mat& h1, double total_time, double rate) {
  if (total_time < 0 || rate < 0) throw PreconditionError("linear_schedule: negative time or rate");
  AnnealSchedule s;
  s.h0 = h0;
  s.h1 = h1;
  s.g0 = [](double x) { return 1.0 - x; };
  s.g1 = [](double x) { return x; };
  s.total_time = total_time;
  s.rate = rate;
  return s;
}

Trajectory annealer_evolve(const AnnealSchedule& s, const Mat& rho0, const Lindbladian& noise,
                           const std::vector<double>& times, double abs_tol, double rel_tol) {
  if (times.empty() || times.front() != 0.0) throw PreconditionError("annealer_evolve: time grid must start at 0");
  if (!std::is_sorted(times.begin(), times.end())) throw PreconditionError("annealer_evolve: unsorted time grid");
  const long d = rho0.rows();
  if (noise.dim() != d) throw PreconditionError("annealer_evolve: dimension mismatch");
  Mat sup = to_dual_superoperator(noise);

  using State = std::vector<cplx>;
  namespace ode = boost::numeric::odeint;
  auto rhs = [&](const State& y, State& dydt, double t) {
    Mat r = Eigen::Map<const Mat>(y.data(), d, d);
    Mat h = s.h(t);
    Mat out = cplx(0, -1) * commutator(h, r) + s.rate * unvec(sup * vec(r), d);
    dydt.assign(out.data(), out.data() + out.size());
  };

  Trajectory tr;
  State y(rho0.data(), rho0.data() + rho0.size());
  for (size_t k = 0; k < times.size(); ++k) {
    if (k > 0 && times[k] > times[k - 1]) {
      auto stepper = ode::make_controlled(abs_tol, rel_tol, ode::runge_kutta_dopri5<State>());
      double dt0 = std::min(0.01, times[k] - times[k - 1]);
      ode::integrate_adaptive(stepper, rhs, y, times[k - 1], times[k], dt0);
    }
    Mat r = herm_part(Eigen::Map<const Mat>(y.data(), d, d));
    double neg = -min_eig(r);
    tr.max_negativity = std::max(tr.max_negativity, neg);
    tr.max_trace_drift = std::max(tr.max_trace_drift, std::abs(r.trace().real() - 1.0));
    if (neg > 1e-6)
      throw StepSizeError("annealer_evolve: positivity drift " + std::to_string(neg) + " at t = " +
                          std::to_string(times[k]));
    tr.t.push_back(times[k]);
    tr.rho.push_back(r);
  }
  return tr;
}

double commutator_weight(const Mat& h, const Mat& sigma) {
  Mat isq = herm_apply(sigma, [](double x) {
    if (x <= 1e-14) throw DomainError("commutator_weight: sigma not faithful");
    return 1.0 / std::sqrt(x);
  });
  return op_norm(isq * commutator(h, sigma) * isq);
}

RelentDecayReport relent_decay_bound(const Trajectory& traj, const Mat& sigma, double alpha, const AnnealSchedule& s,
                                     double tol) {
  if (traj.t.empty() || traj.t.front() != 0.0) throw PreconditionError("relent_decay_bound: trajectory must start at 0");
  if (alpha <= 0) throw PreconditionError("relent_decay_bound: alpha must be positive");
  const double a = 4.0 * alpha * s.rate;
  auto weight = [&](double tau) { return commutator_weight(s.h(tau), sigma); };

  RelentDecayReport rep;
  const double d0 = relative_entropy(traj.rho.front(), sigma);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < traj.t.size(); ++k) {
    double t = traj.t[k];
    double drift = 0;
    if (t > 0) {
      // the integrand has a kink at T when the schedule stops
      auto f = [&](double tau) { return std::exp(-a * (t - tau)) * weight(tau); };
      using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
      double split = std::min(t, s.total_time);
      drift = GK::integrate(f, 0.0, split, 15, 1e-12);
      if (t > split) drift += GK::integrate(f, split, t, 15, 1e-12);
    }
    double d = relative_entropy(traj.rho[k], sigma);
    double b = std::exp(-a * t) * d0 + drift;
    rep.t.push_back(t);
    rep.d.push_back(d);
    rep.bound.push_back(b);
    rep.drift.push_back(drift);
    rep.worst_margin = std::min(rep.worst_margin, b - d);
  }
  rep.holds = rep.worst_margin >= -tol;
  return rep;
}

double linear_path_envelope(double d0, double c0, double alpha, double rate, double total_time) {
  double a = 4.0 * alpha * rate;
  double e = std::exp(-a * total_time);
  if (total_time == 0) return d0;
  return e * d0 + c0 * (1.0 - a * total_time * e - e) / (a * a * total_time);
}

double lipschitz_norm(const Mat& x, const NormalForm& nf) {
  double s = 0;
  for (const auto& t : nf.terms) {
    double n = op_norm(commutator(t.L, x));
    s += t.c * (std::exp(-t.omega / 2) + std::exp(t.omega / 2)) * n * n;
  }
  return std::sqrt(s);
}

namespace {

struct LipEval {
  double lip = 0;
  Mat grad;  // gradient of lip w.r.t. Hermitian X (real trace pairing)
};

LipEval lip_with_gradient(const Mat& x, const NormalForm& nf) {
  const long n = x.rows();
  LipEval out;
  out.grad = Mat::Zero(n, n);
  double s2 = 0;
  for (const auto& t : nf.terms) {
    double w = t.c * (std::exp(-t.omega / 2) + std::exp(t.omega / 2));
    Vec u, v;
    double sv = top_singular(commutator(t.L, x), &u, &v);
    s2 += w * sv * sv;
    if (sv == 0) continue;
    Mat vu = v * u.adjoint();
    Mat m = vu * t.L - t.L * vu;
    out.grad += w * sv * 0.5 * (m + m.adjoint());
  }
  out.lip = std::sqrt(s2);
  if (out.lip > 0) out.grad /= out.lip;
  return out;
}

Mat traceless(const Mat& x) {
  return x - (x.trace() / static_cast<double>(x.rows())) * Mat::Identity(x.rows(), x.cols());
}

}  // namespace

WassersteinResult wasserstein1_lower(const Mat& rho, const Mat& sigma, const NormalForm& nf, const AscentConfig& cfg) {
  if (nf.terms.empty()) throw DomainError("wasserstein1_lower: empty normal form, the Lipschitz ball is unbounded");
  const long n = rho.rows();
  const Mat delta = herm_part(rho - sigma);
  auto value = [&](const Mat& x) { return std::real((x * delta).trace()); };

  WassersteinResult best;
  best.value = -1;
  for (int s = 0; s < cfg.starts; ++s) {
    Rng rng(cfg.seed, "wasserstein", static_cast<std::uint64_t>(s));
    Mat x = (s == 0 && delta.norm() > 0) ? Mat(traceless(delta)) : Mat(traceless(random_hermitian(static_cast<int>(n), rng)));
    double l0 = lipschitz_norm(x, nf);
    if (l0 < 1e-14) continue;
    x /= l0;
    if (value(x) < 0) x = -x;
    double f = value(x);
    double eta = 0.1 * x.norm();
    for (int it = 0; it < cfg.iters && eta > 1e-14; ++it) {
      LipEval le = lip_with_gradient(x, nf);
      Mat g = traceless(Mat(delta / le.lip - (f / (le.lip * le.lip)) * le.grad));
      double gn = g.norm();
      if (gn < 1e-15) break;
      bool improved = false;
      while (eta > 1e-14) {
        Mat y = herm_part(x + (eta / gn) * g);
        double ly = lipschitz_norm(y, nf);
        if (ly > 1e-14) {
          y /= ly;
          double fy = value(y);
          if (fy > f) {
            improved = fy - f > cfg.tol;
            x = y;
            f = fy;
            eta *= 1.5;
            break;
          }
        }
        eta *= 0.5;
      }
      if (!improved) break;
    }
    ++best.starts;
    if (f > best.value) {
      best.value = f;
      best.maximizer = x;
    }
  }
  if (best.value < 0) throw DomainError("wasserstein1_lower: no start with a nonzero Lipschitz norm");
  // value is the objective at the returned (Lip-normalised) maximizer
  best.value = std::abs(value(best.maximizer));
  return best;
}

TransportReport transport_check(const Mat& rho, const Mat& sigma, const NormalForm& nf, double alpha,
                                const AscentConfig& cfg) {
  if (alpha <= 0) throw PreconditionError("transport_check: alpha must be positive");
  TransportReport r;
  auto w = wasserstein1_lower(rho, sigma, nf, cfg);
  r.w1 = w.value;
  r.relent = relative_entropy(rho, sigma);
  r.bound = std::sqrt(r.relent / alpha);
  r.margin = r.bound - r.w1;
  r.duality_residual =
      std::abs(std::abs(std::real((w.maximizer * (rho - sigma)).trace())) - r.w1 * lipschitz_norm(w.maximizer, nf));
  r.holds = r.margin >= -1e-10;
  return r;
}

EnergyGapReport annealer_energy_gap(const Mat& rho_t, const Mat& sigma, const Mat& h1, const NormalForm& nf,
                                    double alpha, double r_t) {
  if (alpha <= 0) throw PreconditionError("annealer_energy_gap: alpha must be positive");
  EnergyGapReport r;
  r.lhs = std::abs(std::real((h1 * (rho_t - sigma)).trace()));
  r.lip = lipschitz_norm(h1, nf);
  r.r_t = r_t;
  r.bound = r.lip * std::sqrt(std::max(r_t, 0.0) / alpha);
  r.margin = r.bound - r.lhs;
  r.holds = r.margin >= -1e-10;
  return r;
}

ConcentrationReport concentration_check(const Mat& sigma, const Mat& o, double r, double alpha, const NormalForm& nf) {
  if (!is_hermitian(o)) throw PreconditionError("concentration_check: O must be Hermitian");
  if (alpha <= 0) throw PreconditionError("concentration_check: alpha must be positive");
  const long n = o.rows();
  ConcentrationReport rep;
  rep.mean = std::real((sigma * o).trace());
  Eig e = herm_eig(o);
  Mat proj = Mat::Zero(n, n);
  for (long i = 0; i < n; ++i)
    if (e.vals(i) >= rep.mean + r) proj += e.vecs.col(i) * e.vecs.col(i).adjoint();
  rep.lhs = std::real((sigma * proj * (o - rep.mean * Mat::Identity(n, n))).trace());
  Mat shifted = psd_power(sigma, -0.5) * o * psd_power(sigma, 0.5);
  rep.lip = lipschitz_norm(shifted, nf);
  if (rep.lip > 0)
    rep.rhs = std::exp(-alpha * r * r / (8.0 * rep.lip));
  else
    rep.rhs = r == 0 ? 1.0 : 0.0;
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.margin >= -1e-12;
  return rep;
}

EthReport eth_check(const Mat& sigma, const Mat& h, double beta, int m, const Mat& o, double alpha,
                    const NormalForm& nf) {
  if (alpha <= 0) throw PreconditionError("eth_check: alpha must be positive");
  Eig e = herm_eig(h);
  if (m < 0 || m >= e.vals.size()) throw PreconditionError("eth_check: eigenstate index out of range");
  EthReport r;
  r.energy = e.vals(m);
  Vec psi = e.vecs.col(m);
  Mat p = psi * psi.adjoint();
  r.lhs = std::real(((sigma - p) * o).trace());
  // ln f^{-1} = beta E_m + ln Z, with ln Z by log-sum-exp
  double top = (-beta * e.vals.array()).maxCoeff();
  double lz = top + std::log((-beta * e.vals.array() - top).exp().sum());
  r.log_inv_f = beta * r.energy + lz;
  r.relent = relative_entropy(p, sigma);
  r.identity_residual = std::abs(r.relent - r.log_inv_f);
  r.rhs = lipschitz_norm(o, nf) * std::sqrt(std::max(r.log_inv_f, 0.0) / alpha);
  r.margin = r.rhs - r.lhs;
  r.holds = r.margin >= -1e-12;
  return r;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (lo <= 0 || hi < lo || n < 1) throw PreconditionError("log_grid: bad range");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

HypothesisReport hypothesis_test_bound(const Mat& sigma, const Mat& rho, const Mat& test, const Lindbladian& l,
                                       double alpha, long sites, const std::vector<double>& times) {
  if (!is_hermitian(test)) throw PreconditionError("hypothesis_test_bound: test must be Hermitian");
  RVec tv = herm_eig(test).vals;
  if (tv.minCoeff() < -1e-12 || tv.maxCoeff() > 1 + 1e-12) throw PreconditionError("hypothesis_test_bound: 0 <= T <= 1 violated");
  if (alpha <= 0 || sites <= 0) throw PreconditionError("hypothesis_test_bound: alpha and |Lambda| must be positive");
  if (min_eig(sigma) <= 1e-14 || min_eig(rho) <= 1e-14) throw DomainError("hypothesis_test_bound: states must be full rank");
  const long d = rho.rows();
  const double nl = static_cast<double>(sites);
  HypothesisReport r;

  Mat sup = to_dual_superoperator(l);
  for (double t : times) {
    if (t <= 0) continue;
    Mat rt = herm_part(unvec(expm(t * sup) * vec(rho), d));
    r.gamma_grid = std::max(r.gamma_grid, dmax(rt, rho) / (nl * t));
  }
  Mat rh = psd_power(rho, 0.5), rih = psd_power(rho, -0.5);
  Mat tilt_one = herm_part(rih * l.apply_dual(rho) * rih);
  r.gamma_zero = std::max(0.0, herm_eig(tilt_one).vals.maxCoeff() / nl);
  r.gamma = std::max(r.gamma_grid, r.gamma_zero);
  Mat k = kron(rh.transpose(), rh), ki = kron(rih.transpose(), rih);
  Mat tilted = ki * sup * k;
  Eigen::JacobiSVD<Mat> svd(tilted);
  r.gamma_norm_bound = std::sqrt(static_cast<double>(d)) * svd.singularValues()(0) / nl;

  double pr = std::real((rho * test).trace());
  double ps = std::real((sigma * test).trace());
  const double inf = std::numeric_limits<double>::infinity();
  r.lhs = pr > 0 ? -std::log(pr) / nl : inf;
  if (ps > 0) {
    double lps = std::log(ps);
    r.rhs = relative_entropy(sigma, rho) / nl + 2.0 / std::sqrt(nl) * std::sqrt(std::max(0.0, -r.gamma / (4 * alpha) * lps)) -
            lps / (4 * alpha * nl);
  } else {
    r.rhs = inf;
  }
  r.margin = r.rhs - r.lhs;
  r.holds = std::isinf(r.rhs) || r.margin >= -1e-12;
  return r;
}

double scheduled_time(long sites, double eps, double alpha) {
  if (sites < 1 || eps <= 0 || eps > 1 || alpha <= 0) throw PreconditionError("scheduled_time: bad arguments");
  if (std::isinf(alpha)) return 0.0;
  return (std::log(static_cast<double>(sites)) + std::log(1.0 / eps)) / (4.0 * alpha);
}

std::vector<Mat> ce_kraus(const ConditionalExpectation& e) {
  std::vector<int> sub;
  for (int leg : e.support()) sub.push_back(e.dims()[leg]);
  std::vector<int> legs(sub.size());
  std::iota(legs.begin(), legs.end(), 0);
  ConditionalExpectation loc(sub, legs, e.blocks());
  const long ds = loc.dim();
  Mat dsup = loc.dual_superoperator();
  // Choi J[(i,a),(j,b)] = Phi(|i><j|)[a,b]
  Mat choi(ds * ds, ds * ds);
  for (long i = 0; i < ds; ++i)
    for (long j = 0; j < ds; ++j)
      for (long a = 0; a < ds; ++a)
        for (long b = 0; b < ds; ++b) choi(i * ds + a, j * ds + b) = dsup(a + b * ds, i + j * ds);
  Eig ce = herm_eig(herm_part(choi));
  std::vector<Mat> kraus;
  for (long k = 0; k < ce.vals.size(); ++k) {
    if (ce.vals(k) <= 1e-12) continue;
    Mat km(ds, ds);
    for (long i = 0; i < ds; ++i)
      for (long a = 0; a < ds; ++a) km(a, i) = std::sqrt(ce.vals(k)) * ce.vecs(i * ds + a, k);
    kraus.push_back(km);
  }
  return kraus;
}

GibbsCircuit gibbs_prep_circuit(const LocalPotential& p, const Region& lambda, double beta, double eps, double alpha,
                                const Mat& rho0_in, int max_steps) {
  Lindbladian l = schmidt_generator(lambda, p, lambda, beta);
  const long dim = l.dim();
  Mat rho0 = rho0_in.size() ? rho0_in : Mat(Mat::Identity(dim, dim) / static_cast<double>(dim));
  GibbsCircuit c;
  c.total_time = scheduled_time(static_cast<long>(lambda.size()), eps, alpha);
  c.ces = l.ces;

  // greedy layering of channels with disjoint supports
  std::vector<std::vector<int>> layers;
  for (size_t k = 0; k < l.ces.size(); ++k) {
    const auto& sk = l.ces[k].support();
    for (size_t li = 0; li <= layers.size(); ++li) {
      if (li == layers.size()) layers.emplace_back();
      bool clash = false;
      for (int other : layers[li]) {
        const auto& so = l.ces[other].support();
        for (int leg : sk)
          if (std::find(so.begin(), so.end(), leg) != so.end()) clash = true;
      }
      if (!clash) {
        layers[li].push_back(static_cast<int>(k));
        break;
      }
    }
  }
  c.layers = static_cast<int>(layers.size());

  if (c.total_time == 0) {
    c.output = rho0;
    c.distance = trace_distance(rho0, l.sigma);
    return c;
  }

  Mat exact = evolve(l, rho0, c.total_time).rho;
  auto run = [&](int steps) {
    double dt = c.total_time / steps;
    Mat r = rho0;
    for (int s = 0; s < steps; ++s)
      for (const auto& layer : layers)
        for (int k : layer) {
          double keep = std::exp(-dt * l.rates[k]);
          r = keep * r + (1.0 - keep) * l.ces[k].apply_dual(r);
        }
    return r;
  };
  int steps = std::max(1, static_cast<int>(std::ceil(c.total_time)));
  Mat out = run(steps);
  while (trace_distance(out, exact) > eps / 10 && steps < max_steps) {
    steps *= 2;
    out = run(steps);
  }
  c.steps = steps;
  c.depth = steps * c.layers;
  c.output = herm_part(out);
  c.splitting_error = trace_distance(c.output, exact);
  c.distance = trace_distance(c.output, l.sigma);
  double dt = c.total_time / steps;
  for (size_t k = 0; k < l.ces.size(); ++k) {
    LocalChannel ch;
    ch.support = l.ces[k].support();
    ch.keep = std::exp(-dt * l.rates[k]);
    for (const Mat& km : ce_kraus(l.ces[k])) ch.kraus.push_back(std::sqrt(1.0 - ch.keep) * km);
    c.channels.push_back(std::move(ch));
  }
  return c;
}

std::string trajectory_csv(const RelentDecayReport& r) {
  std::ostringstream os;
  os << "t,relent,bound\n";
  char buf[96];
  for (size_t k = 0; k < r.t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.t[k], r.d[k], r.bound[k]);
    os << buf;
  }
  return os.str();
}

std::string circuit_json(const GibbsCircuit& c) {
  using nlohmann::json;
  json j;
  j["total_time"] = c.total_time;
  j["steps"] = c.steps;
  j["layers"] = c.layers;
  j["depth"] = c.depth;
  j["distance"] = c.distance;
  j["splitting_error"] = c.splitting_error;
  json chans = json::array();
  for (const auto& ch : c.channels) {
    json jc;
    jc["support"] = ch.support;
    jc["identity_weight"] = ch.keep;
    json ks = json::array();
    for (const Mat& k : ch.kraus) {
      json re = json::array(), im = json::array();
      for (long a = 0; a < k.rows(); ++a) {
        std::vector<double> rr, ii;
        for (long b = 0; b < k.cols(); ++b) {
          rr.push_back(k(a, b).real());
          ii.push_back(k(a, b).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
      }
      ks.push_back({{"re", re}, {"im", im}});
    }
    jc["kraus"] = ks;
    chans.push_back(jc);
  }
  j["channels"] = chans;
  return j.dump();
}

}  // namespace qgibbs
