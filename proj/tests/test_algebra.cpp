#include <gtest/gtest.h>

#include "qgibbs/algebra.hpp"
#include "qgibbs/hamiltonians.hpp"

using namespace qgibbs;

namespace {

// every element V^dag F V of a basis element must have the form f (x) 1_m
double block_form_residual(const BlockStructure& bs, const std::vector<Mat>& basis) {
  double worst = 0;
  for (const auto& b : bs.blocks) {
    for (const auto& f : basis) {
      Mat loc = b.V.adjoint() * f * b.V;
      // commute with 1_n (x) every matrix unit of the multiplicity space
      for (int i = 0; i < b.m; ++i)
        for (int j = 0; j < b.m; ++j) {
          Mat e = Mat::Zero(b.m, b.m);
          e(i, j) = 1.0;
          Mat k = kron(Mat::Identity(b.n, b.n), e);
          worst = std::max(worst, (loc * k - k * loc).norm());
        }
    }
  }
  return worst;
}

double sum_projections_residual(const BlockStructure& bs) {
  Mat s = Mat::Zero(bs.dim, bs.dim);
  for (const auto& b : bs.blocks) s += b.P;
  return (s - Mat::Identity(bs.dim, bs.dim)).norm();
}

}  // namespace

TEST(Algebra, TrivialFullDiagonal) {
  auto t = trivial_algebra(3);
  ASSERT_EQ(t.blocks.size(), 1u);
  EXPECT_EQ(t.blocks[0].n, 1);
  EXPECT_EQ(t.blocks[0].m, 3);
  EXPECT_EQ(t.algebra_dim(), 1);
  auto f = full_algebra(3);
  EXPECT_EQ(f.algebra_dim(), 9);
  auto d = diagonal_algebra(4);
  EXPECT_EQ(d.blocks.size(), 4u);
  EXPECT_EQ(d.algebra_dim(), 4);
}

TEST(Algebra, ClosureOfPaulis) {
  EXPECT_EQ(algebra_closure({}, 2).size(), 1u);
  EXPECT_EQ(algebra_closure({pauli('Z')}, 2).size(), 2u);
  EXPECT_EQ(algebra_closure({pauli('X'), pauli('Z')}, 2).size(), 4u);
  // a single non-normal generator already gives everything
  Mat sp = Mat::Zero(2, 2);
  sp(0, 1) = 1.0;
  EXPECT_EQ(algebra_closure({sp}, 2).size(), 4u);
}

TEST(Algebra, BlocksOfDiagonalGenerator) {
  auto bs = generated_algebra({pauli('Z')}, 2);
  ASSERT_EQ(bs.blocks.size(), 2u);
  for (const auto& b : bs.blocks) {
    EXPECT_EQ(b.n, 1);
    EXPECT_EQ(b.m, 1);
  }
  EXPECT_LT(sum_projections_residual(bs), 1e-12);
}

TEST(Algebra, HiddenDirectSumIsRecovered) {
  // U (M_2 (x) 1_2 (+) C) U^dag inside M_5
  Rng rng(7);
  Mat u = haar_unitary(5, rng);
  auto embed5 = [&](const Mat& a, double c) {
    Mat m = Mat::Zero(5, 5);
    m.topLeftCorner(4, 4) = kron(a, Mat::Identity(2, 2));
    m(4, 4) = c;
    return Mat(u * m * u.adjoint());
  };
  std::vector<Mat> gens = {embed5(pauli('X'), 0.0), embed5(pauli('Z'), 0.0), embed5(Mat::Zero(2, 2), 1.0)};
  auto basis = algebra_closure(gens, 5);
  EXPECT_EQ(basis.size(), 5u);
  auto bs = blocks_from_basis(basis, 5, 11);
  ASSERT_EQ(bs.blocks.size(), 2u);
  std::vector<std::pair<int, int>> nm;
  for (const auto& b : bs.blocks) {
    nm.emplace_back(b.n, b.m);
    EXPECT_LT((b.V.adjoint() * b.V - Mat::Identity(b.n * b.m, b.n * b.m)).norm(), 1e-10);
    EXPECT_LT((b.V * b.V.adjoint() - b.P).norm(), 1e-10);
  }
  std::sort(nm.begin(), nm.end());
  EXPECT_EQ(nm[0], std::make_pair(1, 1));
  EXPECT_EQ(nm[1], std::make_pair(2, 2));
  EXPECT_LT(block_form_residual(bs, basis), 1e-9);
  EXPECT_LT(sum_projections_residual(bs), 1e-10);
  EXPECT_EQ(bs.algebra_dim(), 5);
}

TEST(Algebra, BasisIsOrthonormalAndSpansAlgebra) {
  auto bs = generated_algebra({pauli_string("ZI"), pauli_string("XX")}, 4);
  auto b = bs.basis();
  EXPECT_EQ(static_cast<int>(b.size()), bs.algebra_dim());
  for (size_t i = 0; i < b.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      EXPECT_NEAR(std::abs((b[i].adjoint() * b[j]).trace() - (i == j ? 1.0 : 0.0)), 0.0, 1e-10);
}

TEST(Algebra, TensorBlocksCountsAndOrder) {
  auto a = generated_algebra({pauli('Z')}, 2);
  auto t = trivial_algebra(2);
  auto f = full_algebra(2);
  auto c = tensor_blocks({a, t, f});
  EXPECT_EQ(c.dim, 8);
  EXPECT_EQ(c.blocks.size(), 2u);
  EXPECT_EQ(c.algebra_dim(), 2 * 1 * 4);
  for (const auto& b : c.blocks) {
    EXPECT_EQ(b.n, 2);
    EXPECT_EQ(b.m, 2);
  }
  EXPECT_LT(sum_projections_residual(c), 1e-12);
  // Z (x) 1 (x) X lies in the product algebra
  EXPECT_LT(block_form_residual(c, {pauli_string("ZIX")}), 1e-12);
}

TEST(Algebra, AttachStateFactorizes) {
  auto bs = tensor_blocks({full_algebra(2), trivial_algebra(2)});
  Rng rng(3);
  Mat tau = random_state(2, rng);
  Mat om = kron(random_state(2, rng), tau);
  attach_state(bs, om);
  ASSERT_TRUE(bs.has_states());
  EXPECT_LT((bs.blocks[0].tau - tau).norm(), 1e-10);
}

TEST(Algebra, AttachStateRejectsNonInvariantState) {
  auto bs = diagonal_algebra(2);
  Mat plus = Mat::Constant(2, 2, 0.5);
  EXPECT_THROW(attach_state(bs, plus), DomainError);
  auto bs2 = tensor_blocks({full_algebra(2), trivial_algebra(2)});
  Rng rng(5);
  Mat ent = random_state(4, rng);
  EXPECT_THROW(attach_state(bs2, ent), DomainError);
}

TEST(Algebra, SchmidtSpanRanks) {
  Mat zz = pauli_string("ZZ");
  auto s = schmidt_span(zz, 2, 2, 1.0, 0);
  EXPECT_EQ(s.size(), 2u);
  // span{1, Z}: the commutant with Z is everything in it
  for (const auto& x : s) EXPECT_LT((x * pauli('Z') - pauli('Z') * x).norm(), 1e-10);
  EXPECT_EQ(schmidt_span(zz, 2, 2, 0.0, 1).size(), 1u);
  Mat heis = pauli_string("XX") + pauli_string("YY") + pauli_string("ZZ");
  EXPECT_EQ(schmidt_span(heis, 2, 2, 0.7, 0).size(), 4u);  // the swap has full operator Schmidt rank
  Rng rng(9);
  Mat h = random_hermitian(6, rng);
  EXPECT_EQ(schmidt_span(h, 2, 3, 1.0, 0).size(), 4u);
  EXPECT_EQ(schmidt_span(h, 2, 3, 1.0, 1).size(), 4u);
}

TEST(Algebra, SchmidtSpanSideTwoIsInExpansion) {
  // exp(-beta h) must lie in span(side0) (x) span(side1)
  Rng rng(21);
  Mat h = random_hermitian(6, rng);
  auto s0 = schmidt_span(h, 2, 3, 0.8, 0);
  auto s1 = schmidt_span(h, 2, 3, 0.8, 1);
  std::vector<Mat> prods;
  for (const auto& a : s0)
    for (const auto& b : s1) prods.push_back(kron(a, b));
  Mat A(36, prods.size());
  for (size_t i = 0; i < prods.size(); ++i) A.col(i) = Eigen::Map<const Vec>(prods[i].data(), 36);
  Mat e = exp_h(-0.8 * h);
  Vec v = Eigen::Map<const Vec>(e.data(), 36);
  Vec c = A.completeOrthogonalDecomposition().solve(v);
  EXPECT_LT((A * c - v).norm(), 1e-10);
}

TEST(Algebra, Commutant) {
  EXPECT_EQ(commutant({pauli('Z')}, 2).size(), 2u);
  EXPECT_EQ(commutant({pauli('X'), pauli('Z')}, 2).size(), 1u);
  EXPECT_EQ(commutant({pauli_string("ZI"), pauli_string("XI")}, 4).size(), 4u);
}
