#include "qgibbs/conditional_expectations.hpp"

#include <algorithm>
#include <cmath>

#include "qgibbs/lattice.hpp"

namespace qgibbs {

ConditionalExpectation::ConditionalExpectation(std::vector<int> dims, std::vector<int> support, BlockStructure blocks)
    : dims_(std::move(dims)), support_(std::move(support)), blocks_(std::move(blocks)) {
  std::sort(support_.begin(), support_.end());
  const int n = static_cast<int>(dims_.size());
  std::vector<bool> in(n, false);
  for (int k : support_) {
    if (k < 0 || k >= n || in[k]) throw PreconditionError("ConditionalExpectation: bad support legs");
    in[k] = true;
  }
  perm_ = support_;
  for (int k = 0; k < n; ++k)
    if (!in[k]) perm_.push_back(k);
  iperm_.assign(n, 0);
  for (int k = 0; k < n; ++k) iperm_[perm_[k]] = k;
  pdims_.resize(n);
  for (int k = 0; k < n; ++k) pdims_[k] = dims_[perm_[k]];
  d_s_ = 1;
  for (int k : support_) d_s_ *= dims_[k];
  d_r_ = total_dim(dims_) / d_s_;
  if (blocks_.dim != d_s_) throw PreconditionError("ConditionalExpectation: block structure size mismatch");
  if (!blocks_.has_states()) throw PreconditionError("ConditionalExpectation: block structure carries no states");
  Mat id_r = Mat::Identity(d_r_, d_r_);
  for (const auto& b : blocks_.blocks) {
    w_.push_back(kron(b.V, id_r));
    tau_r_.push_back(kron(Mat::Identity(b.n, b.n), kron(b.tau, id_r)));
  }
  long n2 = 0;
  for (const auto& b : blocks_.blocks) n2 += static_cast<long>(b.n) * b.n;
  const long d = d_s_ * d_r_;
  factored_ = n2 < d && d_s_ * d_s_ * n2 <= (1L << 22);
  if (!factored_) return;
  for (const auto& b : blocks_.blocks) {
    Mat cm(d_s_ * d_s_, b.n * b.n), cn(d_s_ * d_s_, b.n * b.n);
    for (int h2 = 0; h2 < b.n; ++h2)
      for (int h = 0; h < b.n; ++h) {
        auto vh = b.V.middleCols(h * b.m, b.m);
        auto vh2 = b.V.middleCols(h2 * b.m, b.m);
        Mat pm = vh * vh2.adjoint();
        Mat pn = vh * b.tau * vh2.adjoint();
        cm.col(h + h2 * b.n) = Eigen::Map<const Vec>(pm.data(), pm.size());
        cn.col(h + h2 * b.n) = Eigen::Map<const Vec>(pn.data(), pn.size());
      }
    coef_m_.push_back(std::move(cm));
    coef_n_.push_back(std::move(cn));
  }
}

// rows (i, j) with i fastest, columns the column-major entries of the d_R x d_R block X_ij
Mat ConditionalExpectation::to_blocks(const Mat& xp) const {
  const long ds = d_s_, dr = d_r_;
  Mat xr(ds * ds, dr * dr);
  for (long j = 0; j < ds; ++j)
    for (long s2 = 0; s2 < dr; ++s2)
      for (long i = 0; i < ds; ++i)
        for (long s1 = 0; s1 < dr; ++s1) xr(i + j * ds, s1 + s2 * dr) = xp(i * dr + s1, j * dr + s2);
  return xr;
}

Mat ConditionalExpectation::from_blocks(const Mat& xr) const {
  const long ds = d_s_, dr = d_r_;
  Mat xp(ds * dr, ds * dr);
  for (long j = 0; j < ds; ++j)
    for (long s2 = 0; s2 < dr; ++s2)
      for (long i = 0; i < ds; ++i)
        for (long s1 = 0; s1 < dr; ++s1) xp(i * dr + s1, j * dr + s2) = xr(i + j * ds, s1 + s2 * dr);
  return xp;
}

ConditionalExpectation ConditionalExpectation::identity(std::vector<int> dims) {
  BlockStructure bs = trivial_algebra(1);
  bs.blocks[0].tau = Mat::Identity(1, 1);
  ConditionalExpectation e(std::move(dims), {}, bs);
  e.kind = "identity";
  return e;
}

Mat ConditionalExpectation::to_local_order(const Mat& x) const {
  bool trivial = true;
  for (size_t k = 0; k < perm_.size(); ++k) trivial &= perm_[k] == static_cast<int>(k);
  return trivial ? x : permute_legs(x, dims_, perm_);
}

Mat ConditionalExpectation::from_local_order(const Mat& x) const {
  bool trivial = true;
  for (size_t k = 0; k < perm_.size(); ++k) trivial &= perm_[k] == static_cast<int>(k);
  return trivial ? x : permute_legs(x, pdims_, iperm_);
}

Mat ConditionalExpectation::apply(const Mat& x) const {
  Mat xp = to_local_order(x);
  if (factored_) {
    Mat xr = to_blocks(xp);
    Mat acc = Mat::Zero(xr.rows(), xr.cols());
    for (size_t a = 0; a < coef_m_.size(); ++a) acc.noalias() += coef_m_[a] * (coef_n_[a].adjoint() * xr);
    return from_local_order(from_blocks(acc));
  }
  Mat out = Mat::Zero(xp.rows(), xp.cols());
  const int dr = static_cast<int>(d_r_);
  for (size_t a = 0; a < w_.size(); ++a) {
    const Block& b = blocks_.blocks[a];
    std::vector<int> legs{b.n, b.m, dr};
    Mat z = w_[a].adjoint() * xp * w_[a] * tau_r_[a];
    Mat red = ptrace(z, legs, {0, 2});
    out += w_[a] * embed_legs(red, legs, {0, 2}) * w_[a].adjoint();
  }
  return from_local_order(out);
}

Mat ConditionalExpectation::apply_dual(const Mat& rho) const {
  Mat rp = to_local_order(rho);
  if (factored_) {
    Mat xr = to_blocks(rp);
    Mat acc = Mat::Zero(xr.rows(), xr.cols());
    for (size_t a = 0; a < coef_m_.size(); ++a) acc.noalias() += coef_n_[a] * (coef_m_[a].adjoint() * xr);
    return from_local_order(from_blocks(acc));
  }
  Mat out = Mat::Zero(rp.rows(), rp.cols());
  const int dr = static_cast<int>(d_r_);
  for (size_t a = 0; a < w_.size(); ++a) {
    const Block& b = blocks_.blocks[a];
    std::vector<int> legs{b.n, b.m, dr};
    Mat red = ptrace(w_[a].adjoint() * rp * w_[a], legs, {0, 2});
    Mat t = permute_legs(kron(red, b.tau), {b.n, dr, b.m}, {0, 2, 1});
    out += w_[a] * t * w_[a].adjoint();
  }
  return from_local_order(out);
}

namespace {

template <class F>
Mat dense_superop(long dim, F&& f) {
  if (dim > 64) throw PreconditionError("dense superoperator beyond the memory budget (dim > 64)");
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

}  // namespace

Mat ConditionalExpectation::superoperator() const {
  return dense_superop(dim(), [this](const Mat& e) { return apply(e); });
}

Mat ConditionalExpectation::dual_superoperator() const {
  return dense_superop(dim(), [this](const Mat& e) { return apply_dual(e); });
}

long ConditionalExpectation::fixed_algebra_dim() const {
  long s = 0;
  for (const auto& b : blocks_.blocks) s += (b.n * d_r_) * (b.n * d_r_);
  return s;
}

std::vector<ConditionalExpectation::FullBlock> ConditionalExpectation::full_blocks() const {
  std::vector<FullBlock> out;
  auto rows = leg_permutation_map(dims_, perm_);  // permuted index -> natural index
  const long D = dim();
  const long dr = d_r_;
  for (size_t a = 0; a < w_.size(); ++a) {
    const Block& b = blocks_.blocks[a];
    const long ncols = static_cast<long>(b.n) * b.m * dr;
    Mat wn = Mat::Zero(D, ncols);
    for (long h = 0; h < b.n; ++h)
      for (long t = 0; t < b.m; ++t)
        for (long r = 0; r < dr; ++r) {
          long old_col = (h * b.m + t) * dr + r;
          long new_col = (h * dr + r) * b.m + t;
          for (long i = 0; i < D; ++i) wn(rows[i], new_col) = w_[a](i, old_col);
        }
    out.push_back({wn, static_cast<int>(b.n * dr), b.m, b.tau});
  }
  return out;
}

Mat ConditionalExpectation::central_projection(size_t i) const {
  return from_local_order(kron(blocks_.blocks.at(i).P, Mat::Identity(d_r_, d_r_)));
}

// ---------------------------------------------------------------------------

namespace {

int leg_of(const Region& lambda, const Site& s) {
  auto it = std::lower_bound(lambda.begin(), lambda.end(), s);
  if (it == lambda.end() || *it != s) throw PreconditionError("site outside the region");
  return static_cast<int>(it - lambda.begin());
}

void require_two_local_commuting(const LocalPotential& p) {
  for (const auto& [x, t] : p.terms)
    if (x.size() > 2) throw PreconditionError("Schmidt construction needs a 2-local potential");
  if (!p.commuting_verified) {
    LocalPotential q = p;
    if (!verify_commuting(q).commuting) throw PreconditionError("potential is not commuting");
  }
}

const Mat* edge_term(const LocalPotential& p, const Site& a, const Site& b) {
  Region e = make_region({a, b});
  for (const auto& [x, t] : p.terms)
    if (x == e) return &t;
  return nullptr;
}

ConditionalExpectation assemble(const Region& a, const Region& bd, const LocalPotential& p, const Region& lambda,
                                double beta, const std::vector<BlockStructure>& per_site, const Region& s,
                                const char* kind) {
  BlockStructure comp = tensor_blocks(per_site);
  LocalPotential ps = p.restricted(s);
  Mat omega = exp_h(-beta * hamiltonian(ps, s));
  attach_state(comp, omega);
  std::vector<int> legs;
  for (const auto& x : s) legs.push_back(leg_of(lambda, x));
  ConditionalExpectation e(std::vector<int>(lambda.size(), p.d), legs, comp);
  e.region = a;
  e.boundary = bd;
  e.kind = kind;
  return e;
}

}  // namespace

BlockStructure schmidt_site_algebra(const Site& j, const Region& a, const LocalPotential& p, const Region& lambda,
                                    double beta, const SchmidtOptions& opt) {
  const int d = p.d;
  std::vector<Mat> all, out;
  for (const auto& k : interaction_neighbours(p, j, lambda)) {
    const Mat* h = edge_term(p, j, k);
    int side = j < k ? 0 : 1;
    auto span = schmidt_span(*h, d, d, beta, side, opt.rank_tol);
    all.insert(all.end(), span.begin(), span.end());
    if (!contains(a, k)) out.insert(out.end(), span.begin(), span.end());
  }
  if (all.empty()) return trivial_algebra(d);
  BlockStructure joint = generated_algebra(all, d, opt.seed);
  for (const auto& b : joint.blocks) out.push_back(b.P);
  return generated_algebra(out, d, opt.seed);
}

ConditionalExpectation schmidt_ce(const Region& a, const LocalPotential& p, const Region& lambda, double beta,
                                  const SchmidtOptions& opt) {
  require_two_local_commuting(p);
  if (!region_difference(a, lambda).empty()) throw PreconditionError("schmidt_ce: A must lie inside the region");
  Region bd = interaction_boundary(p, a, lambda);
  Region s = region_union(a, bd);
  std::vector<BlockStructure> per_site;
  for (const auto& x : s) {
    if (contains(a, x))
      per_site.push_back(trivial_algebra(p.d));
    else
      per_site.push_back(schmidt_site_algebra(x, a, p, lambda, beta, opt));
  }
  return assemble(a, bd, p, lambda, beta, per_site, s, "schmidt");
}

ConditionalExpectation glauber_ce(const Region& a, const LocalPotential& p, const Region& lambda, double beta) {
  if (!is_classical(p)) throw PreconditionError("glauber_ce: the Gibbs state must be diagonal (classical potential)");
  if (!region_difference(a, lambda).empty()) throw PreconditionError("glauber_ce: A must lie inside the region");
  Region bd = interaction_boundary(p, a, lambda);
  Region s = region_union(a, bd);
  std::vector<BlockStructure> per_site;
  for (const auto& x : s) per_site.push_back(contains(a, x) ? trivial_algebra(p.d) : diagonal_algebra(p.d));
  return assemble(a, bd, p, lambda, beta, per_site, s, "glauber");
}

// ---------------------------------------------------------------------------

double AxiomReport::max() const {
  return std::max({contraction, idempotence, invariance, unital, modular, duality});
}

AxiomReport verify_ce_axioms(const ConditionalExpectation& e, const Mat& sigma, int samples, std::uint64_t seed) {
  AxiomReport rep;
  const int n = static_cast<int>(e.dim());
  Mat id = Mat::Identity(n, n);
  rep.unital = (e.apply(id) - id).norm();
  for (int s = 0; s < samples; ++s) {
    Rng rng(seed, "ce_axioms", s);
    Mat x = random_operator(n, rng);
    x /= op_norm(x);
    Mat ex = e.apply(x);
    rep.contraction = std::max(rep.contraction, op_norm(ex) - op_norm(x));
    rep.idempotence = std::max(rep.idempotence, (e.apply(ex) - ex).norm());
    rep.invariance = std::max(rep.invariance, std::abs((sigma * ex).trace() - (sigma * x).trace()));
    double t = 2.0 * rng.uniform() - 1.0;
    Mat lhs = modular_apply(ex, sigma, cplx(0, t));
    Mat rhs = e.apply(modular_apply(x, sigma, cplx(0, t)));
    rep.modular = std::max(rep.modular, (lhs - rhs).norm());
    Mat g1 = gamma_apply(ex, sigma);
    Mat g2 = e.apply_dual(gamma_apply(x, sigma));
    rep.duality = std::max(rep.duality, (g1 - g2).norm());
  }
  rep.contraction = std::max(0.0, rep.contraction);
  return rep;
}

CommutationReport verify_commutation(const ConditionalExpectation& ea, const ConditionalExpectation& eb,
                                     const ConditionalExpectation* eab, int samples, std::uint64_t seed) {
  CommutationReport rep;
  rep.applicable = region_intersection(region_union(ea.region, ea.boundary), eb.region).empty() &&
                   region_intersection(ea.region, region_union(eb.region, eb.boundary)).empty();
  const int n = static_cast<int>(ea.dim());
  for (int s = 0; s < samples; ++s) {
    Rng rng(seed, "ce_commute", s);
    Mat x = random_operator(n, rng);
    x /= x.norm();
    Mat ab = ea.apply(eb.apply(x));
    Mat ba = eb.apply(ea.apply(x));
    rep.commutator = std::max(rep.commutator, (ab - ba).norm());
    if (eab) rep.union_residual = std::max(rep.union_residual, (ab - eab->apply(x)).norm());
  }
  return rep;
}

Mat restricted_block_apply(const ConditionalExpectation& e_c, const ConditionalExpectation::FullBlock& blk,
                           const Mat& y) {
  Mat x = blk.W * kron(Mat::Identity(blk.n, blk.n), y) * blk.W.adjoint();
  Mat z = blk.W.adjoint() * e_c.apply(x) * blk.W;
  return ptrace(z, {blk.n, blk.m}, {1}) / static_cast<double>(blk.n);
}

}  // namespace qgibbs
