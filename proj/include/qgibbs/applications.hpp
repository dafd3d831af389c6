#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qgibbs/conditional_expectations.hpp"
#include "qgibbs/lindbladians.hpp"
#include "qgibbs/linalg.hpp"

namespace qgibbs {

struct StepSizeError : DomainError {
  using DomainError::DomainError;
};

// H(t) = g1(t/T) H1 + g0(t/T) H0 for t in [0, T]; held at the endpoint beyond T.
struct AnnealSchedule {
  Mat h0, h1;
  std::function<double(double)> g0, g1;
  double total_time = 1;
  double rate = 1;  // noise rate r

  Mat h(double t) const;
};

// -sum_i gamma_i X_i (gamma_i = 1 if gamma is empty)
Mat transverse_field(int n, const std::vector<double>& gamma = {});
Mat plus_state(int n);
AnnealSchedule linear_schedule(const Mat& h0, const Mat& h1, double total_time, double rate);

struct Trajectory {
  std::vector<double> t;
  std::vector<Mat> rho;
  double max_negativity = 0;  // largest -lambda_min seen before renormalisation
  double max_trace_drift = 0;
};

// d rho/dt = -i[H(t), rho] + r L_*(rho), sampled on `times` (ascending, starting at 0).
// StepSizeError when the state leaves the positive cone by more than 1e-6.
Trajectory annealer_evolve(const AnnealSchedule& s, const Mat& rho0, const Lindbladian& noise,
                           const std::vector<double>& times, double abs_tol = 1e-10, double rel_tol = 1e-9);

// ||sigma^{-1/2} [H, sigma] sigma^{-1/2}||_inf
double commutator_weight(const Mat& h, const Mat& sigma);

struct RelentDecayReport {
  std::vector<double> t, d, bound;
  std::vector<double> drift;  // integral term alone
  double worst_margin = 0;    // min(bound - d)
  bool holds = true;
  bool witness_conditional = true;
};

// e^{-4 a r t} D(rho_0 || sigma) + int_0^t e^{-4 a r (t - s)} ||sigma^{-1/2}[H_s, sigma]sigma^{-1/2}|| ds,
// with the integral by adaptive Gauss-Kronrod. holds iff worst_margin >= -tol.
RelentDecayReport relent_decay_bound(const Trajectory& traj, const Mat& sigma, double alpha, const AnnealSchedule& s,
                                     double tol = 1e-9);

// Closed form of the envelope at t = T for the linear schedule with [H1, sigma] = 0.
double linear_path_envelope(double d0, double c0, double alpha, double rate, double total_time);

// (sum_j c_j (e^{-w_j/2} + e^{w_j/2}) ||[L_j, X]||^2)^{1/2}
double lipschitz_norm(const Mat& x, const NormalForm& nf);

struct AscentConfig {
  int starts = 64;
  int iters = 200;
  double tol = 1e-12;
  std::uint64_t seed = 11;
};
struct WassersteinResult {
  double value = 0;  // |Tr[X (rho - sigma)]| at the maximizer
  Mat maximizer;     // traceless Hermitian with ||X||_Lip = 1
  int starts = 0;
};
// Lower bound on the Lipschitz-dual distance by projected gradient ascent of
// |Tr[X(rho - sigma)]| / ||X||_Lip. DomainError if the normal form has no terms.
WassersteinResult wasserstein1_lower(const Mat& rho, const Mat& sigma, const NormalForm& nf,
                                     const AscentConfig& cfg = {});

struct TransportReport {
  double w1 = 0;
  double relent = 0;
  double bound = 0;  // sqrt(D / alpha)
  double margin = 0;
  double duality_residual = 0;  // | |Tr X(rho - sigma)| - w1 ||X||_Lip |
  bool holds = true;
};
TransportReport transport_check(const Mat& rho, const Mat& sigma, const NormalForm& nf, double alpha,
                                const AscentConfig& cfg = {});

struct EnergyGapReport {
  double lhs = 0;  // |Tr[H1 (rho_T - sigma)]|
  double lip = 0;  // ||H1||_Lip
  double r_t = 0;
  double bound = 0;  // alpha^{-1/2} ||H1||_Lip R^{1/2}
  double margin = 0;
  bool holds = true;
};
EnergyGapReport annealer_energy_gap(const Mat& rho_t, const Mat& sigma, const Mat& h1, const NormalForm& nf,
                                    double alpha, double r_t);

struct ConcentrationReport {
  double mean = 0;
  double lhs = 0;
  double lip = 0;  // ||sigma^{-1/2} O sigma^{1/2}||_Lip
  double rhs = 0;
  double margin = 0;
  bool holds = true;
};
// Tr[sigma Pi_{<O>+r} (O - <O>)] against exp(-alpha r^2 / (8 ||Delta^{-1/2}(O)||_Lip)), as printed.
ConcentrationReport concentration_check(const Mat& sigma, const Mat& o, double r, double alpha, const NormalForm& nf);

struct EthReport {
  double energy = 0;
  double lhs = 0;  // Tr[(sigma - |E_m><E_m|) O]
  double log_inv_f = 0;
  double relent = 0;  // D(|E_m><E_m| || sigma)
  double identity_residual = 0;
  double rhs = 0;
  double margin = 0;
  bool holds = true;
};
// m indexes the eigenvalues of H in ascending order.
EthReport eth_check(const Mat& sigma, const Mat& h, double beta, int m, const Mat& o, double alpha,
                    const NormalForm& nf);

struct HypothesisReport {
  double gamma_grid = 0;       // max over the time grid
  double gamma_zero = 0;       // t -> 0 limit
  double gamma = 0;            // max of the two
  double gamma_norm_bound = 0; // sqrt(dim) ||L'||_{2->2} / |Lambda|
  double lhs = 0;
  double rhs = 0;
  double margin = 0;
  bool holds = true;
};
// sigma is the fixed point of l, rho the alternative; T must satisfy 0 <= T <= 1.
HypothesisReport hypothesis_test_bound(const Mat& sigma, const Mat& rho, const Mat& test, const Lindbladian& l,
                                       double alpha, long sites, const std::vector<double>& times);
std::vector<double> log_grid(double lo, double hi, int n);

struct LocalChannel {
  std::vector<int> support;  // legs
  std::vector<Mat> kraus;    // on the support legs
  double keep = 1;           // weight of the identity branch
};
struct GibbsCircuit {
  double total_time = 0;
  int steps = 0;
  int layers = 0;  // per step
  int depth = 0;
  std::vector<LocalChannel> channels;  // one step
  std::vector<ConditionalExpectation> ces;
  double distance = 0;          // trace distance of the output to sigma
  double splitting_error = 0;   // trace distance to e^{t L_*}(rho0)
  Mat output;
};
// Lie-Trotter circuit for the Schmidt generator on lambda, run for t = (ln|lambda| + ln(1/eps)) / (4 alpha)
// from rho0 (maximally mixed if empty). Steps double until the splitting error is below eps / 10.
GibbsCircuit gibbs_prep_circuit(const LocalPotential& p, const Region& lambda, double beta, double eps, double alpha,
                                const Mat& rho0 = Mat(), int max_steps = 4096);
double scheduled_time(long sites, double eps, double alpha);
// Kraus operators of the local part of E_*.
std::vector<Mat> ce_kraus(const ConditionalExpectation& e);

std::string trajectory_csv(const RelentDecayReport& r);
std::string circuit_json(const GibbsCircuit& c);

}  // namespace qgibbs
