#pragma once
// Independent reference implementations used only by the tests.

#include <vector>

#include "qgibbs/algebra.hpp"
#include "qgibbs/hamiltonians.hpp"
#include "qgibbs/lattice.hpp"
#include "qgibbs/linalg.hpp"

namespace oracle {

using namespace qgibbs;

// sigma-preserving conditional expectation onto span(basis), computed as the orthogonal
// projection for <X, Y> = Tr[sigma X^dag Y].
struct GnsProjection {
  std::vector<Mat> basis;
  Mat sigma;
  Eigen::MatrixXcd gram_inv;

  GnsProjection(std::vector<Mat> b, Mat s) : basis(std::move(b)), sigma(std::move(s)) {
    const int k = static_cast<int>(basis.size());
    Mat g(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) g(i, j) = (sigma * basis[i].adjoint() * basis[j]).trace();
    gram_inv = g.completeOrthogonalDecomposition().pseudoInverse();
  }

  Mat operator()(const Mat& x) const {
    const int k = static_cast<int>(basis.size());
    Vec b(k);
    for (int i = 0; i < k; ++i) b(i) = (sigma * basis[i].adjoint() * x).trace();
    Vec c = gram_inv * b;
    Mat out = Mat::Zero(x.rows(), x.cols());
    for (int i = 0; i < k; ++i) out += c(i) * basis[i];
    return out;
  }
};

inline std::vector<Mat> matrix_units(int d) {
  std::vector<Mat> out;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat e = Mat::Zero(d, d);
      e(i, j) = 1.0;
      out.push_back(e);
    }
  return out;
}

// all products of one element per site (Kronecker order = site order)
inline std::vector<Mat> product_basis(const std::vector<std::vector<Mat>>& per_site) {
  std::vector<Mat> out{Mat::Identity(1, 1)};
  for (const auto& s : per_site) {
    std::vector<Mat> next;
    for (const auto& a : out)
      for (const auto& b : s) next.push_back(kron(a, b));
    out = std::move(next);
  }
  return out;
}

// Schmidt fixed-point algebra of A from the generator rule, with the closure done from scratch.
inline std::vector<Mat> schmidt_fixed_basis(const Region& a, const LocalPotential& p, const Region& lambda,
                                            double beta) {
  Region bd = interaction_boundary(p, a, lambda);
  std::vector<std::vector<Mat>> per;
  for (const auto& x : lambda) {
    if (contains(a, x)) {
      per.push_back({Mat::Identity(p.d, p.d)});
    } else if (contains(bd, x)) {
      std::vector<Mat> all, out;
      for (const auto& k : interaction_neighbours(p, x, lambda)) {
        Region e = make_region({x, k});
        Mat h;
        for (const auto& [s, t] : p.terms)
          if (s == e) h = t;
        auto sp = schmidt_span(h, p.d, p.d, beta, x < k ? 0 : 1);
        all.insert(all.end(), sp.begin(), sp.end());
        if (!contains(a, k)) out.insert(out.end(), sp.begin(), sp.end());
      }
      // centre of the joint edge algebra, via commutant of the closure intersected with it
      auto joint = algebra_closure(all, p.d);
      auto comm = commutant(joint, p.d);
      // centre = joint intersect commutant: solve for combinations of joint in comm's span
      Mat J(p.d * p.d, joint.size()), C(p.d * p.d, comm.size());
      for (size_t i = 0; i < joint.size(); ++i) J.col(i) = Eigen::Map<const Vec>(joint[i].data(), p.d * p.d);
      for (size_t i = 0; i < comm.size(); ++i) C.col(i) = Eigen::Map<const Vec>(comm[i].data(), p.d * p.d);
      Mat stacked(p.d * p.d, joint.size() + comm.size());
      stacked << J, -C;
      Mat ns = nullspace(stacked, 1e-9);
      for (int c = 0; c < ns.cols(); ++c) {
        Vec v = J * ns.col(c).head(joint.size());
        out.push_back(Eigen::Map<const Mat>(v.data(), p.d, p.d));
      }
      per.push_back(algebra_closure(out, p.d));
    } else {
      per.push_back(matrix_units(p.d));
    }
  }
  return product_basis(per);
}

// Classical conditional expectation on A composed with the pinching on A and its boundary:
// E(X)[(c,b,r),(c',b',r')] = delta_cc' delta_bb' sum_c'' p(c''|b) X[(c'',b,r),(c'',b,r')].
inline Mat glauber_formula(const Mat& x, const Region& a, const LocalPotential& p, const Region& lambda,
                           double beta) {
  Region bd = interaction_boundary(p, a, lambda);
  const int n = static_cast<int>(lambda.size());
  const long dim = 1L << n;
  Mat h = hamiltonian(p, lambda);
  auto bit = [&](long idx, int leg) { return (idx >> (n - 1 - leg)) & 1L; };
  std::vector<int> a_legs, b_legs;
  for (int k = 0; k < n; ++k) {
    if (contains(a, lambda[k])) a_legs.push_back(k);
    if (contains(bd, lambda[k])) b_legs.push_back(k);
  }
  // energy of the terms inside A u bd only
  LocalPotential ps = p.restricted(region_union(a, bd));
  Mat hs = hamiltonian(ps, lambda);
  Mat out = Mat::Zero(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j) {
      bool same = true;
      for (int k : a_legs) same &= bit(i, k) == bit(j, k);
      for (int k : b_legs) same &= bit(i, k) == bit(j, k);
      if (!same) continue;
      // sum over A configurations c'' with i, j's other legs fixed
      double z = 0;
      cplx acc = 0;
      for (long c = 0; c < (1L << a_legs.size()); ++c) {
        long ii = i, jj = j;
        for (size_t q = 0; q < a_legs.size(); ++q) {
          long mask = 1L << (n - 1 - a_legs[q]);
          long v = (c >> (a_legs.size() - 1 - q)) & 1L;
          ii = (ii & ~mask) | (v ? mask : 0);
          jj = (jj & ~mask) | (v ? mask : 0);
        }
        double w = std::exp(-beta * std::real(hs(ii, ii)));
        z += w;
        acc += w * x(ii, jj);
      }
      out(i, j) = acc / z;
    }
  (void)h;
  return out;
}

}  // namespace oracle
