#include "qgibbs/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qgibbs/lattice.hpp"

namespace qgibbs {

void LocalPotential::add_term(Region support, const Mat& m) {
  support = make_region(std::move(support));
  long dim = 1;
  for (size_t i = 0; i < support.size(); ++i) dim *= d;
  if (m.rows() != dim || m.cols() != dim) throw PreconditionError("add_term: matrix size does not match support");
  if (!is_hermitian(m, 1e-12)) throw PreconditionError("add_term: term is not Hermitian");
  for (auto& [x, t] : terms)
    if (x == support) {
      t += m;
      commuting_verified = false;
      return;
    }
  terms.emplace_back(std::move(support), m);
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  commuting_verified = false;
}

double LocalPotential::strength() const {
  double h = 0;
  for (const auto& [x, t] : terms) h = std::max(h, op_norm(t));
  return h;
}

Region LocalPotential::sites() const {
  std::vector<Site> all;
  for (const auto& [x, t] : terms) all.insert(all.end(), x.begin(), x.end());
  return make_region(all);
}

LocalPotential LocalPotential::restricted(const Region& lambda) const {
  LocalPotential out;
  out.d = d;
  out.kappa = kappa;
  out.beta = beta;
  out.commuting_verified = commuting_verified;
  for (const auto& [x, t] : terms)
    if (region_difference(x, lambda).empty()) out.terms.emplace_back(x, t);
  return out;
}

Mat pauli(char c) {
  Mat m = Mat::Zero(2, 2);
  switch (c) {
    case 'I': m(0, 0) = m(1, 1) = 1; break;
    case 'X': m(0, 1) = m(1, 0) = 1; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1; m(1, 1) = -1; break;
    default: throw PreconditionError(std::string("pauli: unknown label ") + c);
  }
  return m;
}

Mat pauli_string(const std::string& s) {
  std::vector<Mat> f;
  for (char c : s) f.push_back(pauli(c));
  return kron_all(f);
}

namespace {

std::vector<int> legs_in(const Region& x, const Region& in) {
  std::vector<int> w;
  for (const auto& s : x) w.push_back(static_cast<int>(std::lower_bound(in.begin(), in.end(), s) - in.begin()));
  return w;
}

}  // namespace

CommutingReport verify_commuting(LocalPotential& p, double tol) {
  CommutingReport rep;
  for (size_t i = 0; i < p.terms.size(); ++i)
    for (size_t j = i + 1; j < p.terms.size(); ++j) {
      const auto& [x, a] = p.terms[i];
      const auto& [y, b] = p.terms[j];
      if (region_intersection(x, y).empty()) continue;
      Region u = region_union(x, y);
      std::vector<int> dims(u.size(), p.d);
      Mat ea = embed_legs(a, dims, legs_in(x, u));
      Mat eb = embed_legs(b, dims, legs_in(y, u));
      rep.max_commutator = std::max(rep.max_commutator, op_norm(ea * eb - eb * ea));
    }
  rep.commuting = rep.max_commutator <= tol;
  p.commuting_verified = rep.commuting;
  return rep;
}

Mat hamiltonian(const LocalPotential& p, const Region& lambda) {
  long dim = 1;
  for (size_t i = 0; i < lambda.size(); ++i) dim *= p.d;
  Mat h = Mat::Zero(dim, dim);
  std::vector<int> dims(lambda.size(), p.d);
  for (const auto& [x, t] : p.terms) {
    if (!region_difference(x, lambda).empty()) continue;
    h += embed_legs(t, dims, legs_in(x, lambda));
  }
  return h;
}

Mat gibbs_state(const LocalPotential& p, const Region& lambda, double beta) {
  if (beta < 0) throw PreconditionError("gibbs_state: beta must be >= 0");
  Mat g = exp_h(-beta * hamiltonian(p, lambda));
  return g / std::real(g.trace());
}

Mat gibbs_state(const LocalPotential& p, const Region& lambda) { return gibbs_state(p, lambda, p.beta); }

Mat post_selected(const Mat& sigma, const Mat& test) {
  Eig e = herm_eig(test);
  if (e.vals.minCoeff() < -1e-12 || e.vals.maxCoeff() > 1 + 1e-12)
    throw PreconditionError("post_selected: test must satisfy 0 <= P <= 1");
  double pr = std::real((test * sigma).trace());
  if (pr <= 1e-14) throw PreconditionError("post_selected: test has zero acceptance probability");
  Mat s = sqrt_psd(test);
  return s * sigma * s / pr;
}

int growth_constant(const LocalPotential& p) {
  std::map<Site, int> count;
  for (const auto& [x, t] : p.terms) {
    if (t.norm() == 0.0) continue;
    for (const auto& s : x) ++count[s];
  }
  int g = 0;
  for (const auto& [s, c] : count) g = std::max(g, c);
  return g;
}

LocalPotential ising_family(int d, int L, double J, double hz, double beta) {
  LocalPotential p;
  p.d = 2;
  p.kappa = 2;
  p.beta = beta;
  Site lo(d, 0), hi(d, L - 1);
  Region sites = box_region(lo, hi);
  for (const auto& x : sites) {
    if (hz != 0.0) p.add_term({x}, hz * pauli('Z'));
    if (J == 0.0) continue;
    for (int k = 0; k < d; ++k) {
      Site y = x;
      y[k] += 1;
      if (y[k] > L - 1) continue;
      p.add_term({x, y}, J * pauli_string("ZZ"));
    }
  }
  p.commuting_verified = true;
  return p;
}

LocalPotential ising_from_coefficients(const Region& lambda,
                                       const std::vector<std::pair<std::pair<Site, Site>, double>>& a,
                                       const std::vector<std::pair<Site, double>>& b, double beta) {
  LocalPotential p;
  p.beta = beta;
  for (const auto& [e, v] : a) {
    if (!contains(lambda, e.first) || !contains(lambda, e.second))
      throw PreconditionError("ising_from_coefficients: edge outside region");
    if (v != 0.0) p.add_term({e.first, e.second}, v * pauli_string("ZZ"));
  }
  for (const auto& [x, v] : b) {
    if (!contains(lambda, x)) throw PreconditionError("ising_from_coefficients: site outside region");
    if (v != 0.0) p.add_term({x}, v * pauli('Z'));
  }
  p.commuting_verified = true;
  return p;
}

Region interaction_boundary(const LocalPotential& p, const Region& a, const Region& lambda) {
  std::vector<Site> out;
  for (const auto& [x, t] : p.terms) {
    if (t.norm() == 0.0 || !region_difference(x, lambda).empty()) continue;
    if (region_intersection(x, a).empty()) continue;
    for (const auto& s : x)
      if (!contains(a, s)) out.push_back(s);
  }
  return make_region(out);
}

Region interaction_neighbours(const LocalPotential& p, const Site& x, const Region& lambda) {
  std::vector<Site> out;
  for (const auto& [sup, t] : p.terms) {
    if (sup.size() != 2 || t.norm() == 0.0 || !contains(sup, x) || !region_difference(sup, lambda).empty()) continue;
    out.push_back(sup[0] == x ? sup[1] : sup[0]);
  }
  return make_region(out);
}

bool is_classical(const LocalPotential& p, double tol) {
  for (const auto& [x, t] : p.terms) {
    Mat off = t;
    off.diagonal().setZero();
    if (off.norm() > tol) return false;
  }
  return true;
}

}  // namespace qgibbs
