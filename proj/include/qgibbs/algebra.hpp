#pragma once

#include <cstdint>
#include <vector>

#include "qgibbs/linalg.hpp"

namespace qgibbs {

// One block of a finite-dimensional *-algebra: P B(H) P ~ B(C^n) (x) 1_m.
// V maps C^n (x) C^m isometrically onto the range of P; column s*m + t is |s>|t>.
struct Block {
  Mat P;
  Mat V;
  int n = 1;
  int m = 1;
  Mat tau;  // m x m factor state, empty until a state is attached
};

struct BlockStructure {
  int dim = 1;
  std::vector<Block> blocks;

  int algebra_dim() const;
  bool has_states() const;
  // Hilbert-Schmidt orthonormal basis V (E_ab (x) 1_m) V^dag / sqrt(m)
  std::vector<Mat> basis() const;
};

BlockStructure trivial_algebra(int dim);   // C 1
BlockStructure full_algebra(int dim);      // B(C^dim)
BlockStructure diagonal_algebra(int dim);  // computational-basis diagonal

// Closure of {1} and the generators under products, adjoints and spans.
// Returns an orthonormal (Hilbert-Schmidt) basis of the generated algebra.
std::vector<Mat> algebra_closure(const std::vector<Mat>& generators, int dim, double tol = 1e-10,
                                 int max_rounds = 64);
// Block structure of an algebra from a linear basis of it.
BlockStructure blocks_from_basis(const std::vector<Mat>& basis, int dim, std::uint64_t seed = 0x5eed);
BlockStructure generated_algebra(const std::vector<Mat>& generators, int dim, std::uint64_t seed = 0x5eed);

// Tensor product of per-leg structures; composite blocks are ordered lexicographically.
BlockStructure tensor_blocks(const std::vector<BlockStructure>& parts);

// Factor states from omega (not necessarily normalized). Throws DomainError if omega does not
// factorize as (something on H) (x) tau on a block, i.e. the algebra is not modular invariant.
void attach_state(BlockStructure& bs, const Mat& omega, double tol = 1e-8);

// Operators on site j spanned by the Schmidt decomposition of exp(-beta h) across the edge.
// h acts on C^{d_first} (x) C^{d_second}; side 0 returns the first factor's operators.
std::vector<Mat> schmidt_span(const Mat& h, int d_first, int d_second, double beta, int side,
                              double rank_tol = 1e-12);

// Commutant of a set of operators (basis, Hilbert-Schmidt orthonormal).
std::vector<Mat> commutant(const std::vector<Mat>& ops, int dim, double tol = 1e-9);

}  // namespace qgibbs
