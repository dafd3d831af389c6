#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qgibbs/algebra.hpp"
#include "qgibbs/hamiltonians.hpp"
#include "qgibbs/linalg.hpp"

namespace qgibbs {

// Conditional expectation of the form E_loc (x) id_R, where E_loc is the state-preserving
// projection onto a block algebra on the support legs S and R are the remaining legs.
class ConditionalExpectation {
 public:
  ConditionalExpectation() = default;
  // blocks must live on the support space (legs in `support`, ascending) and carry states.
  ConditionalExpectation(std::vector<int> dims, std::vector<int> support, BlockStructure blocks);
  static ConditionalExpectation identity(std::vector<int> dims);

  Mat apply(const Mat& x) const;        // Heisenberg picture
  Mat apply_dual(const Mat& rho) const; // Schroedinger picture
  Mat superoperator() const;            // column-major vec convention
  Mat dual_superoperator() const;

  long dim() const { return total_dim(dims_); }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<int>& support() const { return support_; }
  const BlockStructure& blocks() const { return blocks_; }
  long fixed_algebra_dim() const;

  // Blocks of the range algebra on the whole space: range(W_i) = H_i (x) K_i with
  // H_i carrying the untouched legs; columns ordered (h, t) with t fastest.
  struct FullBlock {
    Mat W;
    int n = 1;
    int m = 1;
    Mat tau;
  };
  std::vector<FullBlock> full_blocks() const;
  Mat central_projection(size_t i) const;

  // metadata for reports
  Region region;      // A
  Region boundary;    // boundary sites acted on through the algebra
  std::string kind;   // "schmidt", "glauber", "identity", ...

 private:
  std::vector<int> dims_;
  std::vector<int> support_;
  std::vector<int> perm_;   // support legs first, then the rest
  std::vector<int> iperm_;
  std::vector<int> pdims_;  // dims in permuted order
  long d_s_ = 1, d_r_ = 1;
  BlockStructure blocks_;
  std::vector<Mat> w_;      // V (x) 1_R in permuted order, columns (h, t, r)
  std::vector<Mat> tau_r_;  // 1_n (x) tau (x) 1_R
  // Factored form: with X split into d_R x d_R blocks X_ij over support indices, block a maps
  // vec_blocks(X) -> coef_m_[a] * coef_n_[a]^dag * vec_blocks(X) (apply) and the reverse (dual).
  // Columns of both are indexed by (h, h'); used when cheaper than the dense sandwich.
  bool factored_ = false;
  std::vector<Mat> coef_m_;  // vec(V_h V_h'^dag)
  std::vector<Mat> coef_n_;  // vec(V_h tau V_h'^dag)
  Mat to_blocks(const Mat& xp) const;
  Mat from_blocks(const Mat& xr) const;

  Mat to_local_order(const Mat& x) const;
  Mat from_local_order(const Mat& x) const;
};

struct SchmidtOptions {
  double rank_tol = 1e-12;
  std::uint64_t seed = 0x5eed;
};

// Per-site algebra on a boundary site j of A: generated by the Schmidt factors of its edges to
// sites outside A together with the central projections of the joint algebra of all its edges.
BlockStructure schmidt_site_algebra(const Site& j, const Region& a, const LocalPotential& p, const Region& lambda,
                                    double beta, const SchmidtOptions& opt = {});

ConditionalExpectation schmidt_ce(const Region& a, const LocalPotential& p, const Region& lambda, double beta,
                                  const SchmidtOptions& opt = {});
ConditionalExpectation glauber_ce(const Region& a, const LocalPotential& p, const Region& lambda, double beta);

struct AxiomReport {
  double contraction = 0;   // max(0, |E X| - |X|)
  double idempotence = 0;
  double invariance = 0;    // |Tr sigma E X - Tr sigma X|
  double unital = 0;
  double modular = 0;       // Delta^{it} E = E Delta^{it}
  double duality = 0;       // Gamma_sigma E = E_* Gamma_sigma
  double max() const;
};
AxiomReport verify_ce_axioms(const ConditionalExpectation& e, const Mat& sigma, int samples = 20,
                             std::uint64_t seed = 1);

struct CommutationReport {
  bool applicable = false;  // A boundary misses B and B boundary misses A
  double commutator = 0;    // |E_A E_B - E_B E_A|
  double union_residual = 0; // |E_A E_B - E_{A u B}| (if a union CE was supplied)
};
CommutationReport verify_commutation(const ConditionalExpectation& ea, const ConditionalExpectation& eb,
                                     const ConditionalExpectation* eab = nullptr, int samples = 10,
                                     std::uint64_t seed = 2);

// Action of E_c on block i of another CE's range algebra: E_c(W (Z (x) Y) W^dag) = W (Z (x) E^(i)(Y)) W^dag.
Mat restricted_block_apply(const ConditionalExpectation& e_c, const ConditionalExpectation::FullBlock& blk,
                           const Mat& y);

}  // namespace qgibbs
