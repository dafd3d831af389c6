#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qgibbs/hamiltonians.hpp"
#include "qgibbs/linalg.hpp"

namespace qgibbs {

// A set of distinct nonzero interaction supports whose union is connected and contains the
// anchor. `terms` indexes into LocalPotential::terms.
struct ConnectedSet {
  std::vector<int> terms;
  Region support;
  Site anchor;
  int size() const { return static_cast<int>(terms.size()); }
};

// Exhaustive enumeration of connected sets containing x0 with at most max_size supports.
// Singletons are included. Zero terms are skipped.
std::vector<ConnectedSet> connected_sets(const Site& x0, const LocalPotential& p, int max_size);

struct CountRow {
  int size = 0;
  long count = 0;
  double bound = 0;  // g^size
};
std::vector<CountRow> connected_set_counts(const Site& x0, const LocalPotential& p, int max_size);

enum class WeightMode { ClosedForm, Truncated };

// W_z(X) on H_supp(X). z is indexed like p.terms. Closed form Tr[prod (e^{-z Phi} - 1)] needs the
// set's terms to commute (PreconditionError otherwise); the truncated mode sums the sequence
// expansion up to p_max by inclusion-exclusion over the sub-collections that the sequences cover.
cplx cluster_weight(const ConnectedSet& x, const LocalPotential& p, const std::vector<cplx>& z,
                    WeightMode mode = WeightMode::ClosedForm, int p_max = 20);

// Reference implementation of the truncated sum that enumerates every sequence (X_1..X_q) with
// q <= p_max explicitly. Exponential cost; for tests.
cplx cluster_weight_sequences(const ConnectedSet& x, const LocalPotential& p, const std::vector<cplx>& z, int p_max);

// Product observable: single-site factors, identity elsewhere.
using ProductObservable = std::vector<std::pair<Site, Mat>>;
Mat product_observable(const ProductObservable& n, const Region& lambda, int d);

// g_z(S) = Tr_{H_lambda}[exp(-sum_{X in S} z_X Phi(X)) N]
cplx partition_g(const LocalPotential& p, const Region& lambda, const Region& s, const std::vector<cplx>& z,
                 const Mat& n);

struct IdentityReport {
  cplx lhs = 0;
  cplx rhs = 0;
  double residual = 0;
  int sets = 0;
  int n_weighted = 0;  // sets whose support meets supp(N)
};

// g_z(L) - g_z(L \ x0) - sum_X w(X) g_z(L \ supp X). w(X) = d^{-|supp X|} W_z(X) when N is the
// identity on supp X; otherwise w(X) = Tr[prod(e^{-zPhi} - 1) N_X] / Tr[N_X] with N_X the factors
// of N on supp X, which keeps the identity exact for product N.
IdentityReport cluster_identity_check(const Region& lambda, const LocalPotential& p, const Site& x0,
                                      const ProductObservable& n, const std::vector<cplx>& z);

// 1/(5 e g h kappa) - delta; PreconditionError if this is not positive or delta < 0.
double beta_c(int g, double h, int kappa, double delta);

struct BoundReport {
  int samples = 0;
  double max_value = 0;
  double bound = 0;
  double margin = 0;  // bound - max_value
  bool holds = true;
  bool asserted = true;  // false above beta_c (report only)
};

// z_X drawn uniformly from the disc |z - beta| <= delta, one per term.
std::vector<cplx> sample_disc(const LocalPotential& p, double beta, double delta, std::uint64_t seed,
                              std::uint64_t index);

// max |ln g_z(lambda)| against (e^2 g h (beta + delta) + ln d) |lambda|; N >= 0 with |N|_inf = 1.
BoundReport analyticity_bound_check(const Region& lambda, const LocalPotential& p, double beta, double delta,
                                    const Mat& n, int samples, std::uint64_t seed = 1);

// max |ln(g_z(lambda) / (d g_z(lambda \ x0)))| against e^2 g h (beta + delta), with the
// sublattice g taken as a trace over H_{lambda \ x0} (so z = 0 gives ratio 1).
BoundReport log_ratio_check(const Region& lambda, const Site& x0, const LocalPotential& p, double beta, double delta,
                            int samples, std::uint64_t seed = 1);

}  // namespace qgibbs
