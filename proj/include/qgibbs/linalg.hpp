#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgibbs/rng.hpp"

namespace qgibbs {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

using Site = std::vector<int>;
using Region = std::vector<Site>;  // sorted lexicographically, no repeats

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operator with explicit support. Kronecker order follows the (sorted) support.
struct QOperator {
  Mat mat;
  Region support;
  int d = 2;
};

QOperator tensor(const QOperator& a, const QOperator& b);
QOperator partial_trace(const QOperator& x, const Region& keep);
QOperator embed(const QOperator& x, const Region& target);

// ---- leg-level tensor helpers (leg 0 is the most significant factor)

long total_dim(const std::vector<int>& dims);
Mat kron(const Mat& a, const Mat& b);
Mat kron_all(const std::vector<Mat>& factors);
// index map of a leg permutation: entry i (new order) is the old-order index
std::vector<long> leg_permutation_map(const std::vector<int>& dims, const std::vector<int>& perm);
// output leg k is input leg perm[k]
Mat permute_legs(const Mat& x, const std::vector<int>& dims, const std::vector<int>& perm);
// trace out every leg not listed in keep (keep is sorted)
Mat ptrace(const Mat& x, const std::vector<int>& dims, const std::vector<int>& keep);
// x acts on legs `where` (in that order), identity on the rest
Mat embed_legs(const Mat& x, const std::vector<int>& dims, const std::vector<int>& where);

// ---- Hermitian functional calculus

struct Eig {
  RVec vals;
  Mat vecs;
};
Eig herm_eig(const Mat& a);
Mat herm_apply(const Mat& a, const std::function<double(double)>& f);
Mat herm_apply_c(const Mat& a, const std::function<cplx(double)>& f);
Mat exp_h(const Mat& h);
Mat log_h(const Mat& a);  // domain error on eigenvalues below 1e-14
Mat pow_psd(const Mat& a, double p);
Mat sqrt_psd(const Mat& a);
Mat expm(const Mat& a);  // general (non-Hermitian) exponential

bool is_hermitian(const Mat& a, double tol = 1e-10);
Mat herm_part(const Mat& a);

// ---- entropies and norms

double trace_norm(const Mat& a);
double op_norm(const Mat& a);
// Largest singular value from the top eigenpair of a^dagger a; u, v get the singular vectors when given.
double top_singular(const Mat& a, Vec* u = nullptr, Vec* v = nullptr);
double trace_distance(const Mat& a, const Mat& b);
double von_neumann_entropy(const Mat& rho);
double relative_entropy(const Mat& rho, const Mat& sigma);  // +inf on support violation
double dmax(const Mat& rho, const Mat& sigma);
double weighted_lp_norm(const Mat& x, const Mat& sigma, double p);  // p = inf -> operator norm

// ---- sigma-weighted inner products and modular maps

cplx kms_inner(const Mat& x, const Mat& y, const Mat& sigma);
cplx gns_inner(const Mat& x, const Mat& y, const Mat& sigma);
cplx kms_covariance(const Mat& x, const Mat& y, const Mat& sigma);
Mat modular_apply(const Mat& x, const Mat& sigma, cplx z);  // sigma^z x sigma^-z
Mat gamma_apply(const Mat& x, const Mat& sigma, double s = 1.0);  // sigma^{s/2} x sigma^{s/2}

// ---- numerical helpers

Mat orthonormal_columns(const Mat& a, double tol);  // basis of the column span
Mat nullspace(const Mat& a, double tol);
double min_eig(const Mat& a);

// ---- random objects

Mat haar_unitary(int n, Rng& rng);
Mat random_hermitian(int n, Rng& rng);
Mat random_operator(int n, Rng& rng);
Mat random_state(int n, Rng& rng);  // Haar eigenbasis, flat Dirichlet spectrum
Mat random_pure_state(int n, Rng& rng);

}  // namespace qgibbs
