#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qgibbs/conditional_expectations.hpp"
#include "qgibbs/hamiltonians.hpp"
#include "qgibbs/linalg.hpp"

namespace qgibbs {

struct DecayFit {
  std::vector<std::pair<double, double>> samples;  // (distance, value) as fitted
  double c = 0;
  double xi = 0;        // +inf if the fitted slope is not negative
  double r2 = 0;
  int dropped = 0;      // non-positive values left out of the fit
  bool no_correlation = false;  // fewer than 3 distinct distances carry a value above the floor
};

// Least squares of ln(value) against distance. PreconditionError unless the samples cover
// at least 3 distinct distances. Values <= floor are dropped and counted.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples, double floor = 1e-12);

enum class ClusteringKind {
  LInf,   // max(|Cov|, |Cov0|) / (|X|_inf |Y|_inf)
  L2,     // |Cov| / (|X|_L2(s) |Y|_L2(s))
  L2Zero  // |Cov0| / (Tr[s X^2]^1/2 Tr[s Y^2]^1/2)
};
std::string to_string(ClusteringKind k);

// X on region a, Y on region b (Kronecker order follows each sorted region).
struct CorrelationProbe {
  Region a, b;
  Mat x, y;
};

// Normalized covariance of one probe in the state s on lambda, divided by gamma_size.
double correlation_value(const Mat& s, const Region& lambda, int d, const CorrelationProbe& probe, ClusteringKind kind,
                         long gamma_size);

// Every ordered pair of distinct sites of `sites` with every (x, y) drawn from `observables`.
std::vector<CorrelationProbe> single_site_probes(const Region& sites, const std::vector<Mat>& observables);

struct DecayProfile {
  DecayFit fit;
  std::vector<std::pair<double, double>> raw;  // every probe (distance, value)
};

// Per-distance maximum of correlation_value over the probes, then fit_decay. Covariances at or
// below `floor` everywhere give no_correlation.
DecayProfile covariance_decay_profile(const Mat& s, const Region& lambda, int d,
                                      const std::vector<CorrelationProbe>& probes, ClusteringKind kind,
                                      long gamma_size, double floor = 1e-12);

struct QIIIdResult {
  double lhs = 0;         // |Tr[s^{P_B P} N] - Tr[s^{P'_B P} N]|
  double rhs_factor = 0;  // Tr[s^{P'_B P} N]
  double ratio = 0;       // lhs / rhs_factor
  // same quantities with N rescaled to unit L1(s^{P}) norm
  double lhs_unit = 0;
  double rhs_unit = 0;
  double n_l1 = 0;
};

// Single-site tests in `boundary_tests` are multiplied into one product test on lambda.
QIIIdResult qIIId_gap(const Mat& sigma, const Region& lambda, int d, const Region& a, const Mat& n_a, const Region& b,
                      const Mat& p_b, const Mat& p_b_prime,
                      const std::vector<std::pair<Site, Mat>>& boundary_tests = {});

struct L1LinfConfig {
  int starts = 24;
  int iters = 200;
  double tol = 1e-13;
  std::uint64_t seed = 7;
};

struct L1LinfResult {
  double value = 0;
  Vec maximizer;
  size_t block = 0;
  std::vector<double> per_block;
};

// sup over unit u of |phi(tau^{-1/2} u u^dag tau^{-1/2})|_inf for a Hermiticity-preserving phi
// on m x m matrices, phi_adj its Hilbert-Schmidt adjoint. The self-adjoint unit ball of L1(tau)
// has extreme points +-tau^{-1/2}|u><u|tau^{-1/2}, so this is the L1(tau) -> L_inf norm.
// Multi-start ascent: u <- top eigenvector of s tau^{-1/2} phi_adj(v v^dag) tau^{-1/2}, with v the
// eigenvector of the largest |eigenvalue| of the current image and s its sign.
L1LinfResult l1_to_linf_norm(const std::function<Mat(const Mat&)>& phi, const std::function<Mat(const Mat&)>& phi_adj,
                             const Mat& tau, const L1LinfConfig& cfg = {});

// max over blocks i of e_cd of the norm of E_C^(i) E_D^(i) - E_CuD^(i) on L1(tau_i).
L1LinfResult l1_to_linf_norm(const ConditionalExpectation& e_c, const ConditionalExpectation& e_d,
                             const ConditionalExpectation& e_cd, const L1LinfConfig& cfg = {});

struct ClusteringReport {
  double beta = 0;
  bool commuting = true;
  std::string note;  // set when the potential is not commuting
  DecayProfile linf, l2, l2zero, qiiid;
  // probes where |Cov| / (|X|_inf |Y|_inf) exceeded |Cov| / (|X|_L2 |Y|_L2) (should be none)
  int ordering_violations = 0;
  double max_cauchy_schwarz_excess = 0;  // max(|Cov| - |X|_L2 |Y|_L2, 0)
  std::vector<std::pair<double, double>> l1_linf;  // (dist(C\D, D\C), norm) on Schmidt blocks
};

// 1D chain of n sites with potential p. Probes are single-site Pauli pairs; qIIId uses
// N_A = |0><0| at site 0 against P_B = |0><0| vs 1 at site j; the L1 -> L_inf spot check uses
// C = [1, 1+k], D = [2, 2+k] (distance k+1) for k = 1, 2, 3 while 2 + k < n.
ClusteringReport clustering_report(LocalPotential p, int n, double beta);

}  // namespace qgibbs
