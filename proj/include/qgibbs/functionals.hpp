#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qgibbs/lindbladians.hpp"
#include "qgibbs/linalg.hpp"

namespace qgibbs {

// Schroedinger-picture map on density matrices (e.g. a CE dual).
using DualMap = std::function<Mat(const Mat&)>;

DualMap dual_of(const ConditionalExpectation& e);
DualMap dual_of_superop(const Mat& superop);  // column-major vec

// EP = -Tr[L_*(rho)(ln rho - ln sigma)]; DomainError if rho is rank deficient.
double entropy_production(const Lindbladian& l, const Mat& rho, const Mat& sigma);

// Smallest nonzero eigenvalue of -L in the KMS inner product (+inf if L = 0 on the complement
// of its kernel). SymmetryError if the KMS-symmetry residual exceeds 1e-8.
double spectral_gap(const Lindbladian& l, const Mat& sigma);
// Dual superoperator of the sigma-preserving projection onto Ker(L) (the t -> inf limit).
Mat stationary_projection_dual(const Lindbladian& l, const Mat& sigma);

struct WitnessConfig {
  int samples = 512;
  int descents = 32;
  int steps = 40;
  std::uint64_t seed = 1;
  double skip_below = 1e-8;  // denominators below this are excluded (ratio dominated by rounding)
};

struct WitnessReport {
  double quantity = 0;         // min ratio over everything evaluated
  Mat minimizer;
  int samples = 0;             // ratios evaluated (valid)
  int skipped = 0;
  std::vector<double> trace;   // best value after sampling and after each descent
  double tolerance = 0;
};

// min over full-rank rho of numerator(rho) / (4 denominator(rho)), sampled then locally descended.
// `prepare` maps raw samples into the admissible set (identity for plain MLSI). A third of the
// samples are mixed towards mix_with(rho) (sigma if empty).
WitnessReport ratio_witness(long dim, const std::function<double(const Mat&)>& numerator,
                            const std::function<double(const Mat&)>& denominator, const DualMap& prepare,
                            const Mat& sigma, const WitnessConfig& cfg, const DualMap& mix_with = {});

// alpha(L) upper estimate: min EP(rho) / (4 D(rho || E_*(rho))).
WitnessReport mlsi_witness(const Lindbladian& l, const Mat& sigma, const DualMap& e_star, const WitnessConfig& cfg = {});
WitnessReport mlsi_witness(const Lindbladian& l, const Mat& sigma, const WitnessConfig& cfg = {});

// lambda * ||sigma^{-1}||^{-1} / dim^2
double cmlsi_bound(double gap, const Mat& sigma, long dim);

// min EP_{L_C}(w) / (4 D(w || E_{C*}(w))) over w = pinch(rho); +inf when every sample is skipped.
WitnessReport pinched_mlsi_witness(const Lindbladian& lc, const Mat& sigma, const DualMap& pinch,
                                   const DualMap& ec_star, const WitnessConfig& cfg = {});

struct ChainRule {
  double total = 0;      // D(rho || sigma)
  double inner = 0;      // D(rho || E_* rho)
  double outer = 0;      // D(E_* rho || sigma)
  double residual = 0;
};
ChainRule chain_rule_check(const Mat& rho, const Mat& sigma, const DualMap& e_star);

// 1 / (1 - 2 c |C u D| e^{-dist/xi}); PreconditionError unless 2 c |C u D| e^{-dist/xi} < 1.
double tensorization_multiplier(double c, long size, double dist, double xi);

struct TensorizationReport {
  double lhs = 0;        // D(w || E_{CuD*} w)
  double d_c = 0, d_d = 0;
  double multiplier = 1;
  double rhs = 0;
  double margin = 0;
};
TensorizationReport approximate_tensorization_check(const Mat& omega, const DualMap& ec, const DualMap& ed,
                                                    const DualMap& ecd, double c, double xi, double dist, long size);

struct Step1Report {
  double lhs = 0;
  double rhs = 0;
  double margin = 0;
  double additivity_residual = 0;  // |EP_C + EP_D - EP_{CnD} - EP_{CuD}|
};
Step1Report step1_check(const Mat& omega, const Mat& sigma, const Lindbladian& lc, const Lindbladian& ld,
                        const Lindbladian& lcap, const Lindbladian& lcup, const DualMap& ecd, double beta_c,
                        double beta_d, double theta);

struct DecayReport {
  std::vector<double> t, d, envelope;
  double worst_margin = 0;  // min(envelope - d)
  bool monotone = true;
  bool holds = true;        // worst_margin >= -1e-10
};
DecayReport decay_check(const Lindbladian& l, const Mat& rho, const DualMap& e_star, double alpha,
                        const std::vector<double>& times);

}  // namespace qgibbs
