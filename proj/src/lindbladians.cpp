#include "qgibbs/lindbladians.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <iostream>

#include "qgibbs/lattice.hpp"

namespace qgibbs {

Mat Lindbladian::apply(const Mat& x) const {
  Mat out = Mat::Zero(x.rows(), x.cols());
  for (size_t k = 0; k < ces.size(); ++k) out += rates[k] * (ces[k].apply(x) - x);
  if (dense.size() > 0) {
    Vec v = dense * Eigen::Map<const Vec>(x.data(), x.size());
    out += Eigen::Map<const Mat>(v.data(), x.rows(), x.cols());
  }
  return out;
}

Mat Lindbladian::apply_dual(const Mat& rho) const {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (size_t k = 0; k < ces.size(); ++k) out += rates[k] * (ces[k].apply_dual(rho) - rho);
  if (dense.size() > 0) {
    Vec v = dense.adjoint() * Eigen::Map<const Vec>(rho.data(), rho.size());
    out += Eigen::Map<const Mat>(v.data(), rho.rows(), rho.cols());
  }
  return out;
}

Lindbladian schmidt_generator(const Region& region, const LocalPotential& p, const Region& lambda, double beta,
                              const SchmidtOptions& opt) {
  Lindbladian l;
  l.dims.assign(lambda.size(), p.d);
  for (const auto& k : region) {
    l.ces.push_back(schmidt_ce({k}, p, lambda, beta, opt));
    l.rates.push_back(1.0);
  }
  l.sigma = gibbs_state(p, lambda, beta);
  l.region = region;
  l.kind = "schmidt";
  return l;
}

Lindbladian glauber_generator(const Region& region, const LocalPotential& p, const Region& lambda, double beta) {
  Lindbladian l;
  l.dims.assign(lambda.size(), p.d);
  for (const auto& k : region) {
    l.ces.push_back(glauber_ce({k}, p, lambda, beta));
    l.rates.push_back(1.0);
  }
  l.sigma = gibbs_state(p, lambda, beta);
  l.region = region;
  l.kind = "glauber";
  return l;
}

Lindbladian dephasing_generator(const Region& lambda, int d) {
  Lindbladian l;
  const int n = static_cast<int>(lambda.size());
  l.dims.assign(n, d);
  for (int k = 0; k < n; ++k) {
    auto bs = diagonal_algebra(d);
    attach_state(bs, Mat::Identity(d, d));
    ConditionalExpectation e(l.dims, {k}, bs);
    e.region = {lambda[k]};
    e.kind = "pinching";
    l.ces.push_back(e);
    l.rates.push_back(1.0);
  }
  long dim = total_dim(l.dims);
  l.sigma = Mat::Identity(dim, dim) / static_cast<double>(dim);
  l.region = lambda;
  l.kind = "dephasing";
  return l;
}

Lindbladian depolarizing_generator(const Mat& sigma, std::vector<int> dims) {
  Lindbladian l;
  l.dims = std::move(dims);
  const int n = static_cast<int>(l.dims.size());
  if (total_dim(l.dims) != sigma.rows()) throw PreconditionError("depolarizing_generator: state size mismatch");
  auto bs = trivial_algebra(static_cast<int>(sigma.rows()));
  attach_state(bs, sigma);
  std::vector<int> all(n);
  for (int k = 0; k < n; ++k) all[k] = k;
  ConditionalExpectation e(l.dims, all, bs);
  e.kind = "depolarizing";
  l.ces.push_back(e);
  l.rates.push_back(1.0);
  l.sigma = sigma;
  l.kind = "depolarizing";
  return l;
}

Lindbladian dense_generator(const Mat& superop, std::vector<int> dims, const Mat& sigma) {
  Lindbladian l;
  l.dims = std::move(dims);
  long d = total_dim(l.dims);
  if (superop.rows() != d * d || superop.cols() != d * d) throw PreconditionError("dense_generator: size mismatch");
  l.dense = superop;
  l.sigma = sigma;
  l.kind = "dense";
  return l;
}

Lindbladian add(const Lindbladian& a, const Lindbladian& b) {
  if (a.dims != b.dims) throw PreconditionError("add: generators act on different spaces");
  Lindbladian l = a;
  l.ces.insert(l.ces.end(), b.ces.begin(), b.ces.end());
  l.rates.insert(l.rates.end(), b.rates.begin(), b.rates.end());
  if (b.dense.size() > 0) l.dense = l.dense.size() > 0 ? Mat(l.dense + b.dense) : b.dense;
  l.region = region_union(a.region, b.region);
  if (a.kind != b.kind) l.kind = a.kind + "+" + b.kind;
  return l;
}

namespace {

template <class F>
Mat assemble_superop(long dim, F&& f) {
  if (dim > 64) throw PreconditionError("dense superoperator beyond the memory budget (dim > 64); use the integrator");
  const long n2 = dim * dim;
  Mat s(n2, n2);
  for (long k = 0; k < n2; ++k) {
    Mat e = Mat::Zero(dim, dim);
    e(k % dim, k / dim) = 1.0;
    Mat y = f(e);
    s.col(k) = Eigen::Map<const Vec>(y.data(), n2);
  }
  return s;
}

Mat unvec(const Vec& v, long d) { return Eigen::Map<const Mat>(v.data(), d, d); }
Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

}  // namespace

Mat to_superoperator(const Lindbladian& l) {
  return assemble_superop(l.dim(), [&](const Mat& e) { return l.apply(e); });
}

Mat to_dual_superoperator(const Lindbladian& l) {
  return assemble_superop(l.dim(), [&](const Mat& e) { return l.apply_dual(e); });
}

EvolveResult evolve(const Lindbladian& l, const Mat& rho, double t, const EvolveOptions& opt) {
  if (t < 0) throw PreconditionError("evolve: negative time");
  const long d = l.dim();
  EvolveResult res;
  if (t == 0) {
    res.rho = rho;
  } else if (opt.method == EvolveMethod::Expm) {
    if (d > opt.dense_limit) throw PreconditionError("evolve: dense path beyond the memory budget; use the integrator");
    Mat s = to_dual_superoperator(l);
    Mat e = expm(t * s);
    res.rho = unvec(e * vec(rho), d);
  } else {
    using State = std::vector<cplx>;
    namespace ode = boost::numeric::odeint;
    State y(rho.data(), rho.data() + rho.size());
    auto rhs = [&](const State& s, State& dsdt, double) {
      Mat r = Eigen::Map<const Mat>(s.data(), d, d);
      Mat out = l.apply_dual(r);
      dsdt.assign(out.data(), out.data() + out.size());
    };
    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_adaptive(stepper, rhs, y, 0.0, t, std::min(0.01, t));
    res.rho = Eigen::Map<const Mat>(y.data(), d, d);
  }
  res.rho = herm_part(res.rho);
  res.min_eig = min_eig(res.rho);
  if (res.min_eig < -1e-9) {
    res.clipped = true;
    std::cerr << "warning: evolve clipped negative eigenvalue " << res.min_eig << "\n";
    res.rho = herm_apply(res.rho, [](double x) { return std::max(0.0, x); });
    res.rho /= res.rho.trace().real();
  }
  return res;
}

namespace {

Mat kernel_basis(const Lindbladian& l, double tol) {
  Mat s = to_superoperator(l);
  Eigen::BDCSVD<Mat> svd(s, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double scale = std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * scale) ++rank;
  return svd.matrixV().rightCols(s.cols() - rank);
}

}  // namespace

int kernel_dimension(const Lindbladian& l, double tol) { return static_cast<int>(kernel_basis(l, tol).cols()); }

BlockStructure fixed_point_algebra(const Lindbladian& l, double tol, std::uint64_t seed) {
  Mat k = kernel_basis(l, tol);
  const long d = l.dim();
  std::vector<Mat> ops;
  for (int c = 0; c < k.cols(); ++c) ops.push_back(unvec(k.col(c), d));
  auto basis = algebra_closure(ops, static_cast<int>(d));
  if (basis.size() != ops.size())
    throw DomainError("fixed_point_algebra: kernel is not closed under products");
  return blocks_from_basis(basis, static_cast<int>(d), seed);
}

double gns_symmetry_residual(const Lindbladian& l, const Mat& sigma) {
  Mat s = to_superoperator(l);
  const long d = l.dim();
  Mat g = kron(sigma.transpose(), Mat::Identity(d, d));
  return (g * s - s.adjoint() * g).norm();
}

double kms_symmetry_residual(const Lindbladian& l, const Mat& sigma) {
  Mat s = to_superoperator(l);
  Mat r = sqrt_psd(sigma);
  Mat g = kron(r.transpose(), r);
  return (g * s - s.adjoint() * g).norm();
}

// ---------------------------------------------------------------------------

namespace {

struct ModularBasis {
  std::vector<Mat> ops;        // Hilbert-Schmidt orthonormal; ops[0] = 1/sqrt(N)
  std::vector<int> group;      // group index per op (-1 for the identity)
  std::vector<double> omegas;  // per group
};

}  // namespace

NormalForm normal_form(const Lindbladian& l, const Mat& sigma, double omega_tol) {
  const long n = l.dim();
  double sym = gns_symmetry_residual(l, sigma);
  if (sym > 1e-8) throw SymmetryError("normal_form: generator is not GNS-symmetric (residual " + std::to_string(sym) + ")");
  Eig es = herm_eig(sigma);
  const Mat& q = es.vecs;
  auto unit = [&](long i, long j) { return Mat(q.col(i) * q.col(j).adjoint()); };

  // group ordered pairs (i, j) by omega = ln(lambda_j / lambda_i)
  std::vector<double> omegas;
  std::vector<std::vector<std::pair<long, long>>> members;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      double w = std::log(es.vals(j) / es.vals(i));
      size_t g = 0;
      while (g < omegas.size() && std::abs(omegas[g] - w) > omega_tol) ++g;
      if (g == omegas.size()) {
        omegas.push_back(w);
        members.emplace_back();
      }
      members[g].push_back({i, j});
    }
  size_t zero = 0;
  while (std::abs(omegas[zero]) > omega_tol) ++zero;

  // basis: identity, then the Hermitian traceless omega = 0 part, then omega > 0 groups and their adjoints
  std::vector<Mat> ops{Mat::Identity(n, n) / std::sqrt(static_cast<double>(n))};
  std::vector<std::vector<int>> group_idx;  // indices into ops per emitted group
  std::vector<double> group_omega;
  {
    std::vector<int> idx;
    std::vector<long> diag;
    for (auto [i, j] : members[zero]) {
      if (i == j) diag.push_back(i);
      else if (i < j) {
        ops.push_back((unit(i, j) + unit(j, i)) / std::sqrt(2.0));
        idx.push_back(static_cast<int>(ops.size()) - 1);
        ops.push_back(cplx(0, 1) * (unit(i, j) - unit(j, i)) / std::sqrt(2.0));
        idx.push_back(static_cast<int>(ops.size()) - 1);
      }
    }
    // Helmert contrasts of the diagonal units
    for (size_t k = 1; k < diag.size(); ++k) {
      Mat m = Mat::Zero(n, n);
      for (size_t r = 0; r < k; ++r) m += unit(diag[r], diag[r]);
      m -= static_cast<double>(k) * unit(diag[k], diag[k]);
      ops.push_back(m / std::sqrt(static_cast<double>(k * (k + 1))));
      idx.push_back(static_cast<int>(ops.size()) - 1);
    }
    group_idx.push_back(idx);
    group_omega.push_back(0.0);
  }
  std::vector<std::pair<size_t, size_t>> pairs;  // (positive group, its adjoint group) in group_idx
  for (size_t g = 0; g < omegas.size(); ++g) {
    if (omegas[g] <= omega_tol) continue;
    std::vector<int> pos, neg;
    for (auto [i, j] : members[g]) {
      ops.push_back(unit(i, j));
      pos.push_back(static_cast<int>(ops.size()) - 1);
    }
    for (auto [i, j] : members[g]) {
      ops.push_back(unit(j, i));
      neg.push_back(static_cast<int>(ops.size()) - 1);
    }
    group_idx.push_back(pos);
    group_omega.push_back(omegas[g]);
    group_idx.push_back(neg);
    group_omega.push_back(-omegas[g]);
    pairs.push_back({group_idx.size() - 2, group_idx.size() - 1});
  }

  // coefficient matrix of L(X) = sum_ab K_ab F_a^dag X F_b via the reshuffled superoperator
  Mat s = to_superoperator(l);
  Mat r(n * n, n * n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      for (long k = 0; k < n; ++k)
        for (long m = 0; m < n; ++m) r(i + n * k, m + n * j) = s(i + n * j, k + n * m);
  const long nb = static_cast<long>(ops.size());
  Mat ma(n * n, nb), pb(n * n, nb);
  for (long a = 0; a < nb; ++a) {
    Mat adj = ops[a].adjoint();
    ma.col(a) = vec(adj);
    pb.col(a) = vec(ops[a]);
  }
  Mat kmat = ma.adjoint() * r * pb.conjugate();

  NormalForm nf;
  nf.sigma = sigma;
  const double nd = static_cast<double>(n);
  double scale = std::max(1.0, kmat.norm());
  auto sub = [&](const std::vector<int>& ix) {
    Mat out(ix.size(), ix.size());
    for (size_t a = 0; a < ix.size(); ++a)
      for (size_t b = 0; b < ix.size(); ++b) out(a, b) = kmat(ix[a], ix[b]);
    return out;
  };
  auto combo = [&](const std::vector<int>& ix, const Vec& coef) {
    Mat out = Mat::Zero(n, n);
    for (size_t b = 0; b < ix.size(); ++b) out += coef(b) * ops[ix[b]];
    return Mat(out * std::sqrt(nd));
  };
  auto check_psd = [&](double kappa) {
    if (kappa < -1e-8 * scale) throw ExtractionError("normal_form: jump part is not positive");
  };

  // omega = 0: Hermitian basis, real symmetric coefficients, Hermitian jump operators
  if (!group_idx[0].empty()) {
    Mat k0 = sub(group_idx[0]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k0.real());
    for (int j = 0; j < eig.eigenvalues().size(); ++j) {
      double kappa = eig.eigenvalues()(j);
      check_psd(kappa);
      if (kappa <= 1e-12 * scale) continue;
      Vec coef = eig.eigenvectors().col(j).cast<cplx>();
      nf.terms.push_back({combo(group_idx[0], coef), 0.0, kappa / (2.0 * nd)});
    }
  }
  for (auto [gp, gn] : pairs) {
    double w = group_omega[gp];
    Eig ep = herm_eig(sub(group_idx[gp]));
    Mat kn = ep.vecs.adjoint() * sub(group_idx[gn]) * ep.vecs;
    for (int j = 0; j < ep.vals.size(); ++j) {
      double kappa = ep.vals(j), kappa_adj = kn(j, j).real();
      check_psd(kappa);
      check_psd(kappa_adj);
      if (kappa <= 1e-12 * scale && kappa_adj <= 1e-12 * scale) continue;
      Mat lt = combo(group_idx[gp], ep.vecs.col(j));
      // Delta_sigma(L) = e^{-omega} L for the |i><j| units with omega = ln(lambda_j / lambda_i)
      nf.terms.push_back({lt, w, kappa * std::exp(w / 2.0) / (2.0 * nd)});
      nf.terms.push_back({Mat(lt.adjoint()), -w, kappa_adj * std::exp(-w / 2.0) / (2.0 * nd)});
    }
  }

  Mat rebuilt = assemble_superop(n, [&](const Mat& e) { return apply_normal_form(nf, e); });
  nf.reassembly_residual = (rebuilt - s).cwiseAbs().maxCoeff();
  if (nf.reassembly_residual > 1e-6)
    throw ExtractionError("normal_form: reassembly residual " + std::to_string(nf.reassembly_residual));
  return nf;
}

Mat apply_normal_form(const NormalForm& nf, const Mat& x) {
  Mat out = Mat::Zero(x.rows(), x.cols());
  for (const auto& t : nf.terms) {
    Mat la = t.L.adjoint();
    out += t.c * std::exp(-t.omega / 2.0) * (la * (x * t.L - t.L * x) + (la * x - x * la) * t.L);
  }
  return out;
}

}  // namespace qgibbs
