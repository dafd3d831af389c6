#pragma once

#include <string>
#include <vector>

#include "qgibbs/algebra.hpp"
#include "qgibbs/conditional_expectations.hpp"
#include "qgibbs/hamiltonians.hpp"
#include "qgibbs/linalg.hpp"

namespace qgibbs {

// L(X) = sum_k rate_k (E_k(X) - X) + (dense Heisenberg superoperator, if any).
struct Lindbladian {
  std::vector<int> dims;
  std::vector<ConditionalExpectation> ces;
  std::vector<double> rates;
  Mat dense;  // optional extra Heisenberg superoperator (column-major vec), empty if unused
  Mat sigma;  // invariant state (may be empty when unknown)
  Region region;
  std::string kind;

  long dim() const { return total_dim(dims); }
  Mat apply(const Mat& x) const;        // Heisenberg picture
  Mat apply_dual(const Mat& rho) const; // Schroedinger picture
};

// Sum over k in `region` of (E_k - id) with E_k the single-site Schmidt CE inside lambda.
Lindbladian schmidt_generator(const Region& region, const LocalPotential& p, const Region& lambda, double beta,
                              const SchmidtOptions& opt = {});
Lindbladian glauber_generator(const Region& region, const LocalPotential& p, const Region& lambda, double beta);
// Single-site computational-basis pinchings minus identity, on every site of lambda.
Lindbladian dephasing_generator(const Region& lambda, int d = 2);
// E(X) = Tr[sigma X] 1 minus identity on the whole space: L_*(rho) = Tr[rho] sigma - rho.
Lindbladian depolarizing_generator(const Mat& sigma, std::vector<int> dims);
// Generic Lindbladian from a dense Heisenberg superoperator.
Lindbladian dense_generator(const Mat& superop, std::vector<int> dims, const Mat& sigma = Mat());
// Sum of two generators on the same space.
Lindbladian add(const Lindbladian& a, const Lindbladian& b);

Mat to_superoperator(const Lindbladian& l);       // Heisenberg, column-major vec
Mat to_dual_superoperator(const Lindbladian& l);  // Schroedinger

enum class EvolveMethod { Expm, Integrator };
struct EvolveOptions {
  EvolveMethod method = EvolveMethod::Expm;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  long dense_limit = 64;  // dense expm up to this Hilbert space dimension
};
// e^{t L_*}(rho). Negative eigenvalues below -1e-9 are clipped (the count is in clipped).
struct EvolveResult {
  Mat rho;
  bool clipped = false;
  double min_eig = 0;
};
EvolveResult evolve(const Lindbladian& l, const Mat& rho, double t, const EvolveOptions& opt = {});

// Dimension of Ker(L) via the dense Heisenberg superoperator.
int kernel_dimension(const Lindbladian& l, double tol = 1e-9);
BlockStructure fixed_point_algebra(const Lindbladian& l, double tol = 1e-9, std::uint64_t seed = 0x5eed);

double gns_symmetry_residual(const Lindbladian& l, const Mat& sigma);
double kms_symmetry_residual(const Lindbladian& l, const Mat& sigma);

struct NormalFormTerm {
  Mat L;         // tilde L_j
  double omega;  // Delta_sigma(L) = e^{-omega} L
  double c;      // > 0
};
struct NormalForm {
  std::vector<NormalFormTerm> terms;
  double reassembly_residual = 0;
  Mat sigma;
};
struct SymmetryError : DomainError {
  using DomainError::DomainError;
};
struct ExtractionError : DomainError {
  using DomainError::DomainError;
};
NormalForm normal_form(const Lindbladian& l, const Mat& sigma, double omega_tol = 1e-8);
// Heisenberg action rebuilt from the triples.
Mat apply_normal_form(const NormalForm& nf, const Mat& x);

}  // namespace qgibbs
