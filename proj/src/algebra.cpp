#include "qgibbs/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace qgibbs {

namespace {

Vec vec_of(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }

Mat unvec(const Vec& v, int dim) { return Eigen::Map<const Mat>(v.data(), dim, dim); }

// grow an orthonormal column set; returns true when v added a new direction
struct SpanBuilder {
  Mat q;
  int r = 0;
  double tol;
  SpanBuilder(long n, double t) : q(n, 16), tol(t) {}
  // ref: scale below which v counts as a numerical zero (products of normalized factors)
  bool add(const Vec& v, double ref = 0.0) {
    double nv = v.norm();
    if (nv == 0.0 || nv <= tol * ref) return false;
    Vec w = v / nv;
    for (int pass = 0; pass < 2; ++pass)
      if (r > 0) w -= q.leftCols(r) * (q.leftCols(r).adjoint() * w);
    double nw = w.norm();
    if (nw <= tol) return false;
    if (r == q.cols()) q.conservativeResize(Eigen::NoChange, 2 * q.cols());
    q.col(r++) = w / nw;
    return true;
  }
};

// cluster sorted values; gap threshold relative to the spread
std::vector<std::vector<int>> cluster_sorted(const RVec& vals, double gap) {
  std::vector<std::vector<int>> out;
  for (int i = 0; i < vals.size(); ++i) {
    if (out.empty() || vals(i) - vals(out.back().back()) > gap)
      out.push_back({i});
    else
      out.back().push_back(i);
  }
  return out;
}

Mat random_element(const std::vector<Mat>& basis, Rng& rng) {
  Mat x = Mat::Zero(basis.front().rows(), basis.front().cols());
  for (const auto& b : basis) x += rng.cnormal() * b;
  return x;
}

}  // namespace

int BlockStructure::algebra_dim() const {
  int s = 0;
  for (const auto& b : blocks) s += b.n * b.n;
  return s;
}

bool BlockStructure::has_states() const {
  for (const auto& b : blocks)
    if (b.tau.size() == 0) return false;
  return true;
}

std::vector<Mat> BlockStructure::basis() const {
  std::vector<Mat> out;
  for (const auto& b : blocks) {
    for (int a = 0; a < b.n; ++a)
      for (int c = 0; c < b.n; ++c) {
        Mat e = Mat::Zero(b.n, b.n);
        e(a, c) = 1.0;
        out.push_back(b.V * kron(e, Mat::Identity(b.m, b.m)) * b.V.adjoint() / std::sqrt(double(b.m)));
      }
  }
  return out;
}

BlockStructure trivial_algebra(int dim) {
  BlockStructure bs;
  bs.dim = dim;
  bs.blocks.push_back({Mat::Identity(dim, dim), Mat::Identity(dim, dim), 1, dim, {}});
  return bs;
}

BlockStructure full_algebra(int dim) {
  BlockStructure bs;
  bs.dim = dim;
  bs.blocks.push_back({Mat::Identity(dim, dim), Mat::Identity(dim, dim), dim, 1, {}});
  return bs;
}

BlockStructure diagonal_algebra(int dim) {
  BlockStructure bs;
  bs.dim = dim;
  for (int i = 0; i < dim; ++i) {
    Mat v = Mat::Zero(dim, 1);
    v(i, 0) = 1.0;
    bs.blocks.push_back({v * v.adjoint(), v, 1, 1, {}});
  }
  return bs;
}

std::vector<Mat> algebra_closure(const std::vector<Mat>& generators, int dim, double tol, int max_rounds) {
  SpanBuilder span(static_cast<long>(dim) * dim, tol);
  std::vector<Mat> gens;
  for (const auto& g : generators) {
    if (g.rows() != dim || g.cols() != dim) throw PreconditionError("algebra_closure: generator size");
    gens.push_back(g);
    gens.push_back(g.adjoint());
  }
  std::deque<int> todo;
  auto push = [&](const Mat& x, double ref) {
    if (span.add(vec_of(x), ref)) todo.push_back(span.r - 1);
  };
  push(Mat::Identity(dim, dim), 0.0);
  for (const auto& g : gens) push(g, 0.0);
  long steps = 0;
  const long budget = static_cast<long>(max_rounds) * dim * dim;
  while (!todo.empty()) {
    int i = todo.front();
    todo.pop_front();
    Mat b = unvec(span.q.col(i), dim);
    for (const auto& g : gens) push(g * b, g.norm());
    if (++steps > budget) throw DomainError("algebra_closure: iteration budget exhausted");
  }
  std::vector<Mat> out;
  for (int i = 0; i < span.r; ++i) out.push_back(unvec(span.q.col(i), dim));
  return out;
}

std::vector<Mat> commutant(const std::vector<Mat>& ops, int dim, double tol) {
  const long n2 = static_cast<long>(dim) * dim;
  Mat g = Mat::Zero(n2, n2);
  Mat id = Mat::Identity(dim, dim);
  for (const auto& a : ops) {
    for (const Mat& b : {a, Mat(a.adjoint())}) {
      // vec([X, b]) = (b^T (x) 1 - 1 (x) b) vec X in column-major order
      Mat m = kron(b.transpose(), id) - kron(id, b);
      g += m.adjoint() * m;
    }
  }
  Eig e = herm_eig(g);
  double top = std::max(1.0, e.vals.cwiseAbs().maxCoeff());
  std::vector<Mat> out;
  for (int i = 0; i < e.vals.size(); ++i)
    if (e.vals(i) < tol * top) out.push_back(unvec(e.vecs.col(i), dim));
  return out;
}

BlockStructure blocks_from_basis(const std::vector<Mat>& basis, int dim, std::uint64_t seed) {
  if (basis.empty()) throw PreconditionError("blocks_from_basis: empty basis");
  Rng rng(seed);
  const long n2 = static_cast<long>(dim) * dim;
  const int nb = static_cast<int>(basis.size());

  // centre: combinations commuting with a few random elements (which generate the algebra)
  const int probes = 3;
  Mat cons(probes * n2, nb);
  for (int k = 0; k < probes; ++k) {
    Mat y = random_element(basis, rng);
    for (int i = 0; i < nb; ++i) cons.block(k * n2, i, n2, 1) = vec_of(basis[i] * y - y * basis[i]);
  }
  Mat coeffs = nullspace(cons, 1e-9);
  std::vector<Mat> centre;
  for (int j = 0; j < coeffs.cols(); ++j) {
    Mat z = Mat::Zero(dim, dim);
    for (int i = 0; i < nb; ++i) z += coeffs(i, j) * basis[i];
    centre.push_back(z);
  }
  const int cdim = static_cast<int>(centre.size());
  if (cdim == 0) throw DomainError("blocks_from_basis: empty centre (basis is not an algebra)");

  std::vector<std::vector<int>> groups;
  Eig he;
  for (int draw = 0; draw < 5; ++draw) {
    Mat h = Mat::Zero(dim, dim);
    for (const auto& z : centre) h += rng.normal() * herm_part(z) + rng.normal() * herm_part(cplx(0, 1) * z);
    he = herm_eig(h);
    double spread = std::max(1.0, he.vals.cwiseAbs().maxCoeff());
    groups = cluster_sorted(he.vals, 1e-8 * spread);
    if (static_cast<int>(groups.size()) == cdim) break;
    groups.clear();
  }
  if (groups.empty()) throw DomainError("blocks_from_basis: could not separate central projections");

  BlockStructure bs;
  bs.dim = dim;
  for (const auto& grp : groups) {
    const int r = static_cast<int>(grp.size());
    Mat q(dim, r);
    for (int k = 0; k < r; ++k) q.col(k) = he.vecs.col(grp[k]);
    Block blk;
    blk.P = q * q.adjoint();
    bool done = false;
    for (int draw = 0; draw < 5 && !done; ++draw) {
      Mat x = q.adjoint() * herm_part(random_element(basis, rng)) * q;
      Eig xe = herm_eig(x);
      double spread = std::max(1.0, xe.vals.cwiseAbs().maxCoeff());
      auto sub = cluster_sorted(xe.vals, 1e-8 * spread);
      const int n = static_cast<int>(sub.size());
      if (r % n != 0) continue;
      const int m = r / n;
      bool equal = true;
      for (const auto& s : sub) equal &= static_cast<int>(s.size()) == m;
      if (!equal) continue;
      std::vector<Mat> es;
      for (const auto& s : sub) {
        Mat e(dim, m);
        for (int k = 0; k < m; ++k) e.col(k) = q * xe.vecs.col(s[k]);
        es.push_back(e);
      }
      Mat y = random_element(basis, rng);
      Mat v(dim, n * m);
      v.leftCols(m) = es[0];
      bool good = true;
      for (int s = 1; s < n && good; ++s) {
        Mat t = es[s].adjoint() * y * es[0];
        double c = std::sqrt(std::real((t.adjoint() * t).trace()) / m);
        if (c < 1e-10) {
          good = false;
          break;
        }
        Mat u = t / c;
        if ((u.adjoint() * u - Mat::Identity(m, m)).norm() > 1e-6) {
          good = false;
          break;
        }
        v.block(0, s * m, dim, m) = es[s] * u;
      }
      if (!good) continue;
      blk.n = n;
      blk.m = m;
      blk.V = v;
      done = true;
    }
    if (!done) throw DomainError("blocks_from_basis: could not factorize a block");
    bs.blocks.push_back(std::move(blk));
  }
  return bs;
}

BlockStructure generated_algebra(const std::vector<Mat>& generators, int dim, std::uint64_t seed) {
  return blocks_from_basis(algebra_closure(generators, dim), dim, seed);
}

BlockStructure tensor_blocks(const std::vector<BlockStructure>& parts) {
  BlockStructure out;
  out.dim = 1;
  for (const auto& p : parts) out.dim *= p.dim;
  const int k = static_cast<int>(parts.size());
  std::vector<size_t> idx(k, 0);
  if (k == 0) return trivial_algebra(1);
  bool states = true;
  for (const auto& p : parts) states &= p.has_states();
  while (true) {
    std::vector<Mat> vs, ps, ts;
    std::vector<int> ns, ms;
    for (int j = 0; j < k; ++j) {
      const Block& b = parts[j].blocks[idx[j]];
      vs.push_back(b.V);
      ps.push_back(b.P);
      ns.push_back(b.n);
      ms.push_back(b.m);
      if (states) ts.push_back(b.tau);
    }
    Mat vk = kron_all(vs);
    int n = 1, m = 1;
    for (int j = 0; j < k; ++j) {
      n *= ns[j];
      m *= ms[j];
    }
    // kron column (c_1..c_k), c_j = s_j m_j + t_j  ->  S m + T
    Mat v(vk.rows(), n * m);
    for (long col = 0; col < n * m; ++col) {
      long rem = col, S = 0, T = 0;
      std::vector<int> cj(k);
      for (int j = k - 1; j >= 0; --j) {
        int w = ns[j] * ms[j];
        cj[j] = static_cast<int>(rem % w);
        rem /= w;
      }
      for (int j = 0; j < k; ++j) {
        S = S * ns[j] + cj[j] / ms[j];
        T = T * ms[j] + cj[j] % ms[j];
      }
      v.col(S * m + T) = vk.col(col);
    }
    Block blk{kron_all(ps), v, n, m, {}};
    if (states) blk.tau = kron_all(ts);
    out.blocks.push_back(std::move(blk));
    int j = k - 1;
    while (j >= 0) {
      if (++idx[j] < parts[j].blocks.size()) break;
      idx[j] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return out;
}

void attach_state(BlockStructure& bs, const Mat& omega, double tol) {
  const double scale = std::max(1e-300, omega.norm());
  for (size_t a = 0; a < bs.blocks.size(); ++a)
    for (size_t b = a + 1; b < bs.blocks.size(); ++b) {
      double off = (bs.blocks[a].P * omega * bs.blocks[b].P).norm();
      if (off > tol * scale) throw DomainError("attach_state: state mixes central blocks");
    }
  for (auto& blk : bs.blocks) {
    Mat m = blk.V.adjoint() * omega * blk.V;
    std::vector<int> legs{blk.n, blk.m};
    Mat wh = ptrace(m, legs, {0});
    Mat tk = ptrace(m, legs, {1});
    double tr = std::real(m.trace());
    if (tr <= 0) throw DomainError("attach_state: block carries no weight");
    Mat tau = tk / std::real(tk.trace());
    double res = (m - kron(wh, tau)).norm();
    if (res > tol * std::max(1e-300, m.norm()))
      throw DomainError("attach_state: state does not factorize on a block (algebra not modular invariant)");
    if (min_eig(tau) <= 0) throw DomainError("attach_state: factor state not faithful");
    blk.tau = herm_part(tau);
  }
}

std::vector<Mat> schmidt_span(const Mat& h, int d_first, int d_second, double beta, int side, double rank_tol) {
  Mat e = exp_h(-beta * h);
  // R[(i i'), (k k')] = e[(i k), (i' k')]
  Mat r(d_first * d_first, d_second * d_second);
  for (int i = 0; i < d_first; ++i)
    for (int ip = 0; ip < d_first; ++ip)
      for (int k = 0; k < d_second; ++k)
        for (int kp = 0; kp < d_second; ++kp)
          r(i * d_first + ip, k * d_second + kp) = e(i * d_second + k, ip * d_second + kp);
  Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  std::vector<Mat> out;
  const int d = side == 0 ? d_first : d_second;
  const Mat& u = side == 0 ? svd.matrixU() : svd.matrixV();
  for (int l = 0; l < sv.size(); ++l) {
    if (sv(l) <= rank_tol * sv(0)) break;
    Mat x(d, d);
    for (int i = 0; i < d; ++i)
      for (int ip = 0; ip < d; ++ip) x(i, ip) = side == 0 ? u(i * d + ip, l) : std::conj(u(i * d + ip, l));
    out.push_back(x);
  }
  return out;
}

}  // namespace qgibbs
