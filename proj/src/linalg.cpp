#include "qgibbs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

namespace qgibbs {

namespace {

std::vector<long> strides_of(const std::vector<int>& dims) {
  std::vector<long> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

int region_index(const Region& r, const Site& s) {
  auto it = std::lower_bound(r.begin(), r.end(), s);
  if (it == r.end() || *it != s) return -1;
  return static_cast<int>(it - r.begin());
}

}  // namespace

long total_dim(const std::vector<int>& dims) {
  long n = 1;
  for (int d : dims) n *= d;
  return n;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat kron_all(const std::vector<Mat>& factors) {
  Mat out = Mat::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

std::vector<long> leg_permutation_map(const std::vector<int>& dims, const std::vector<int>& perm) {
  const int n = static_cast<int>(dims.size());
  const long D = total_dim(dims);
  std::vector<int> new_dims(n);
  for (int k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];
  auto old_strides = strides_of(dims);
  std::vector<long> map(D);
  std::vector<int> digit(n, 0);
  for (long idx = 0; idx < D; ++idx) {
    long old = 0;
    for (int k = 0; k < n; ++k) old += digit[k] * old_strides[perm[k]];
    map[idx] = old;
    for (int k = n - 1; k >= 0; --k) {
      if (++digit[k] < new_dims[k]) break;
      digit[k] = 0;
    }
  }
  return map;
}

Mat permute_legs(const Mat& x, const std::vector<int>& dims, const std::vector<int>& perm) {
  const long D = total_dim(dims);
  if (x.rows() != D || x.cols() != D) throw PreconditionError("permute_legs: dimension mismatch");
  auto map = leg_permutation_map(dims, perm);
  Mat out(D, D);
  for (long j = 0; j < D; ++j)
    for (long i = 0; i < D; ++i) out(i, j) = x(map[i], map[j]);
  return out;
}

Mat ptrace(const Mat& x, const std::vector<int>& dims, const std::vector<int>& keep) {
  const int n = static_cast<int>(dims.size());
  std::vector<int> perm = keep;
  std::vector<bool> kept(n, false);
  for (int k : keep) kept[k] = true;
  for (int k = 0; k < n; ++k)
    if (!kept[k]) perm.push_back(k);
  long dk = 1;
  for (int k : keep) dk *= dims[k];
  const long D = total_dim(dims);
  const long dt = D / dk;
  Mat y = (perm == [&] {
    std::vector<int> id(n);
    for (int k = 0; k < n; ++k) id[k] = k;
    return id;
  }())
              ? x
              : permute_legs(x, dims, perm);
  Mat out = Mat::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      cplx s = 0;
      for (long t = 0; t < dt; ++t) s += y(a * dt + t, b * dt + t);
      out(a, b) = s;
    }
  return out;
}

Mat embed_legs(const Mat& x, const std::vector<int>& dims, const std::vector<int>& where) {
  const int n = static_cast<int>(dims.size());
  std::vector<bool> used(n, false);
  std::vector<int> order = where;
  for (int k : where) used[k] = true;
  long rest = 1;
  for (int k = 0; k < n; ++k)
    if (!used[k]) {
      order.push_back(k);
      rest *= dims[k];
    }
  Mat big = kron(x, Mat::Identity(rest, rest));
  // big has legs in `order`; bring them back to natural order
  std::vector<int> ordered_dims(n);
  for (int k = 0; k < n; ++k) ordered_dims[k] = dims[order[k]];
  std::vector<int> inv(n);
  for (int k = 0; k < n; ++k) inv[order[k]] = k;
  return permute_legs(big, ordered_dims, inv);
}

QOperator tensor(const QOperator& a, const QOperator& b) {
  if (a.d != b.d) throw PreconditionError("tensor: local dimension mismatch");
  for (const auto& s : a.support)
    if (region_index(b.support, s) >= 0) throw PreconditionError("tensor: overlapping supports");
  Region joint = a.support;
  joint.insert(joint.end(), b.support.begin(), b.support.end());
  Mat m = kron(a.mat, b.mat);
  Region sorted = joint;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> perm(joint.size());
  for (size_t k = 0; k < sorted.size(); ++k) {
    perm[k] = static_cast<int>(std::find(joint.begin(), joint.end(), sorted[k]) - joint.begin());
  }
  std::vector<int> dims(joint.size(), a.d);
  return {permute_legs(m, dims, perm), sorted, a.d};
}

QOperator partial_trace(const QOperator& x, const Region& keep) {
  std::vector<int> legs;
  Region kept;
  for (const auto& s : keep) {
    int i = region_index(x.support, s);
    if (i < 0) throw PreconditionError("partial_trace: site outside support");
    legs.push_back(i);
  }
  std::sort(legs.begin(), legs.end());
  for (int i : legs) kept.push_back(x.support[i]);
  std::vector<int> dims(x.support.size(), x.d);
  return {ptrace(x.mat, dims, legs), kept, x.d};
}

QOperator embed(const QOperator& x, const Region& target) {
  std::vector<int> where;
  for (const auto& s : x.support) {
    int i = region_index(target, s);
    if (i < 0) throw PreconditionError("embed: support not contained in target");
    where.push_back(i);
  }
  std::vector<int> dims(target.size(), x.d);
  return {embed_legs(x.mat, dims, where), target, x.d};
}

// ---------------------------------------------------------------------------

bool is_hermitian(const Mat& a, double tol) {
  return (a - a.adjoint()).norm() <= tol * std::max(1.0, a.norm());
}

Mat herm_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

Eig herm_eig(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(herm_part(a));
  if (es.info() != Eigen::Success) throw DomainError("herm_eig: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

Mat herm_apply(const Mat& a, const std::function<double(double)>& f) {
  Eig e = herm_eig(a);
  RVec fv(e.vals.size());
  for (Eigen::Index i = 0; i < e.vals.size(); ++i) fv(i) = f(e.vals(i));
  return e.vecs * fv.cast<cplx>().asDiagonal() * e.vecs.adjoint();
}

Mat herm_apply_c(const Mat& a, const std::function<cplx(double)>& f) {
  Eig e = herm_eig(a);
  Vec fv(e.vals.size());
  for (Eigen::Index i = 0; i < e.vals.size(); ++i) fv(i) = f(e.vals(i));
  return e.vecs * fv.asDiagonal() * e.vecs.adjoint();
}

Mat exp_h(const Mat& h) {
  Eig e = herm_eig(h);
  double shift = e.vals.size() ? e.vals.maxCoeff() : 0.0;
  RVec fv = (e.vals.array() - shift).exp() * std::exp(shift);
  return e.vecs * fv.cast<cplx>().asDiagonal() * e.vecs.adjoint();
}

Mat log_h(const Mat& a) {
  Eig e = herm_eig(a);
  if (e.vals.size() && e.vals.minCoeff() < 1e-14)
    throw DomainError("log_h: eigenvalue below 1e-14");
  RVec fv = e.vals.array().log();
  return e.vecs * fv.cast<cplx>().asDiagonal() * e.vecs.adjoint();
}

Mat pow_psd(const Mat& a, double p) {
  return herm_apply(a, [p](double x) {
    if (x <= 0.0) {
      if (p < 0.0) throw DomainError("pow_psd: negative power of singular matrix");
      return 0.0;
    }
    return std::pow(x, p);
  });
}

Mat sqrt_psd(const Mat& a) { return pow_psd(a, 0.5); }

Mat expm(const Mat& a) { return a.exp(); }

// ---------------------------------------------------------------------------

double trace_norm(const Mat& a) {
  if (is_hermitian(a, 1e-12)) return herm_eig(a).vals.cwiseAbs().sum();
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().sum();
}

double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (is_hermitian(a, 1e-12)) return herm_eig(a).vals.cwiseAbs().maxCoeff();
  return top_singular(a);
}

double top_singular(const Mat& a, Vec* u, Vec* v) {
  if (a.size() == 0) return 0.0;
  Mat g = a.adjoint() * a;
  g = 0.5 * (g + g.adjoint());
  const bool vecs = u || v;
  Eigen::SelfAdjointEigenSolver<Mat> es(g, vecs ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  const long k = g.rows() - 1;
  double s = std::sqrt(std::max(0.0, es.eigenvalues()(k)));
  if (vecs) {
    Vec vv = es.eigenvectors().col(k);
    if (v) *v = vv;
    if (u) *u = s > 0 ? Vec(a * vv / s) : Vec(Vec::Zero(a.rows()));
  }
  return s;
}

double trace_distance(const Mat& a, const Mat& b) { return 0.5 * trace_norm(a - b); }

double von_neumann_entropy(const Mat& rho) {
  RVec v = herm_eig(rho).vals;
  double s = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) > 1e-300) s -= v(i) * std::log(v(i));
  return s;
}

double relative_entropy(const Mat& rho, const Mat& sigma) {
  Eig er = herm_eig(rho);
  Eig es = herm_eig(sigma);
  const double ztol = 1e-14;
  // supp(rho) must sit inside supp(sigma)
  double leak = 0;
  for (Eigen::Index j = 0; j < es.vals.size(); ++j) {
    if (es.vals(j) > ztol) continue;
    Vec v = es.vecs.col(j);
    leak += std::real(v.dot(rho * v));
  }
  if (leak > 1e-12) return std::numeric_limits<double>::infinity();
  double s = 0;
  for (Eigen::Index i = 0; i < er.vals.size(); ++i)
    if (er.vals(i) > ztol) s += er.vals(i) * std::log(er.vals(i));
  // Tr[rho log sigma] on the support of sigma
  Mat overlap = es.vecs.adjoint() * er.vecs;
  for (Eigen::Index j = 0; j < es.vals.size(); ++j) {
    if (es.vals(j) <= ztol) continue;
    double w = 0;
    for (Eigen::Index i = 0; i < er.vals.size(); ++i)
      if (er.vals(i) > ztol) w += er.vals(i) * std::norm(overlap(j, i));
    s -= w * std::log(es.vals(j));
  }
  return s;
}

double dmax(const Mat& rho, const Mat& sigma) {
  Eig es = herm_eig(sigma);
  if (es.vals.minCoeff() <= 1e-14) throw DomainError("dmax: sigma not faithful");
  RVec isq = es.vals.array().rsqrt();
  Mat s_isqrt = es.vecs * isq.cast<cplx>().asDiagonal() * es.vecs.adjoint();
  double top = herm_eig(s_isqrt * rho * s_isqrt).vals.maxCoeff();
  return std::log(top);
}

double weighted_lp_norm(const Mat& x, const Mat& sigma, double p) {
  if (std::isinf(p)) return op_norm(x);
  if (p < 1.0) throw PreconditionError("weighted_lp_norm: p must be >= 1");
  Mat s = pow_psd(sigma, 1.0 / (2.0 * p));
  Mat y = s * x * s;
  Eigen::JacobiSVD<Mat> svd(y);
  return std::pow(svd.singularValues().array().pow(p).sum(), 1.0 / p);
}

cplx kms_inner(const Mat& x, const Mat& y, const Mat& sigma) {
  Mat s = sqrt_psd(sigma);
  return (s * x.adjoint() * s * y).trace();
}

cplx gns_inner(const Mat& x, const Mat& y, const Mat& sigma) {
  return (sigma * x.adjoint() * y).trace();
}

cplx kms_covariance(const Mat& x, const Mat& y, const Mat& sigma) {
  const long n = x.rows();
  Mat id = Mat::Identity(n, n);
  Mat xc = x - (sigma * x).trace() * id;
  Mat yc = y - (sigma * y).trace() * id;
  return kms_inner(xc, yc, sigma);
}

Mat modular_apply(const Mat& x, const Mat& sigma, cplx z) {
  Eig e = herm_eig(sigma);
  if (e.vals.minCoeff() <= 1e-14) throw DomainError("modular_apply: sigma not faithful");
  Vec fp(e.vals.size()), fm(e.vals.size());
  for (Eigen::Index i = 0; i < e.vals.size(); ++i) {
    cplx l = std::log(cplx(e.vals(i), 0.0));
    fp(i) = std::exp(z * l);
    fm(i) = std::exp(-z * l);
  }
  Mat xt = e.vecs.adjoint() * x * e.vecs;
  return e.vecs * (fp.asDiagonal() * xt * fm.asDiagonal()) * e.vecs.adjoint();
}

Mat gamma_apply(const Mat& x, const Mat& sigma, double s) {
  Mat h = pow_psd(sigma, s / 2.0);
  return h * x * h;
}

// ---------------------------------------------------------------------------

Mat orthonormal_columns(const Mat& a, double tol) {
  if (a.cols() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  const RVec& sv = svd.singularValues();
  double top = sv.size() ? sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, top)) ++r;
  return svd.matrixU().leftCols(r);
}

Mat nullspace(const Mat& a, double tol) {
  const long n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  double top = sv.size() ? sv(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, top)) ++r;
  return svd.matrixV().rightCols(n - r);
}

double min_eig(const Mat& a) { return herm_eig(a).vals.minCoeff(); }

Mat haar_unitary(int n, Rng& rng) {
  Mat g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.cnormal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    cplx d = r(i, i);
    double ad = std::abs(d);
    if (ad > 0) q.col(i) *= d / ad;
  }
  return q;
}

Mat random_hermitian(int n, Rng& rng) {
  Mat g = random_operator(n, rng);
  return herm_part(g);
}

Mat random_operator(int n, Rng& rng) {
  Mat g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.cnormal();
  return g;
}

Mat random_state(int n, Rng& rng) {
  Mat u = haar_unitary(n, rng);
  RVec p(n);
  for (int i = 0; i < n; ++i) p(i) = rng.exponential() + 1e-300;
  p /= p.sum();
  return u * p.cast<cplx>().asDiagonal() * u.adjoint();
}

Mat random_pure_state(int n, Rng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.cnormal();
  v.normalize();
  return v * v.adjoint();
}

}  // namespace qgibbs
