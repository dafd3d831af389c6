#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qgibbs/linalg.hpp"

namespace qgibbs {

// Terms are kept merged per support: one Hermitian matrix per interaction set X.
struct LocalPotential {
  int d = 2;
  int kappa = 2;
  double beta = 1.0;
  std::vector<std::pair<Region, Mat>> terms;
  bool commuting_verified = false;

  void add_term(Region support, const Mat& m);
  double strength() const;  // h = max_X ||Phi(X)||
  Region sites() const;
  // terms with X inside lambda
  LocalPotential restricted(const Region& lambda) const;
};

Mat pauli(char c);
Mat pauli_string(const std::string& s);  // "ZZ" -> Z (x) Z

struct CommutingReport {
  bool commuting = true;
  double max_commutator = 0.0;
};
CommutingReport verify_commuting(LocalPotential& p, double tol = 1e-10);

Mat hamiltonian(const LocalPotential& p, const Region& lambda);
Mat gibbs_state(const LocalPotential& p, const Region& lambda, double beta);
Mat gibbs_state(const LocalPotential& p, const Region& lambda);  // uses p.beta
Mat post_selected(const Mat& sigma, const Mat& test);

int growth_constant(const LocalPotential& p);

// Z.Z couplings J on nearest-neighbour edges of [0,L-1]^d plus hz Z fields.
LocalPotential ising_family(int d, int L, double J, double hz, double beta);
// Same with per-edge / per-site coefficients (a_ij, b_i); missing entries are zero.
LocalPotential ising_from_coefficients(const Region& lambda,
                                       const std::vector<std::pair<std::pair<Site, Site>, double>>& a,
                                       const std::vector<std::pair<Site, double>>& b, double beta);

// Sites of lambda outside A that share an interaction term with A.
Region interaction_boundary(const LocalPotential& p, const Region& a, const Region& lambda);
// Neighbours of site x through 2-body terms inside lambda.
Region interaction_neighbours(const LocalPotential& p, const Site& x, const Region& lambda);
bool is_classical(const LocalPotential& p, double tol = 1e-14);

}  // namespace qgibbs
