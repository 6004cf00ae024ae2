#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qot/core/error.hpp"
#include "qot/core/quat_tensor.hpp"

using namespace qot;

namespace {

void expect_near(const Quaternion& a, const Quaternion& b, double tol) {
  EXPECT_NEAR(a.r, b.r, tol);
  EXPECT_NEAR(a.i, b.i, tol);
  EXPECT_NEAR(a.j, b.j, tol);
  EXPECT_NEAR(a.k, b.k, tol);
}

const Quaternion kI{0, 1, 0, 0}, kJ{0, 0, 1, 0}, kK{0, 0, 0, 1};

}  // namespace

TEST(Hamilton, IdentityIsNeutral) {
  const Quaternion q{0.3, -1.2, 2.5, 4.0};
  EXPECT_EQ(hamilton(Quaternion::identity(), q), q);
  EXPECT_EQ(hamilton(q, Quaternion::identity()), q);
}

TEST(Hamilton, SignTable) {
  EXPECT_EQ(hamilton(kI, kJ), kK);
  EXPECT_EQ(hamilton(kJ, kI), -kK);
  EXPECT_EQ(hamilton(kJ, kK), kI);
  EXPECT_EQ(hamilton(kK, kJ), -kI);
  EXPECT_EQ(hamilton(kK, kI), kJ);
  EXPECT_EQ(hamilton(kI, kK), -kJ);
  const Quaternion minus_one{-1, 0, 0, 0};
  EXPECT_EQ(hamilton(kI, kI), minus_one);
  EXPECT_EQ(hamilton(kJ, kJ), minus_one);
  EXPECT_EQ(hamilton(kK, kK), minus_one);
  EXPECT_EQ(hamilton(hamilton(kI, kJ), kK), minus_one);
}

TEST(Hamilton, MatchesLeftMatrixAndPreservesNorm) {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 500; ++n) {
    const Quaternion a = oracle::random_quaternion(rng, -3, 3);
    const Quaternion b = oracle::random_quaternion(rng, -3, 3);
    expect_near(hamilton(a, b), oracle::left_apply(a, b), 1e-12);
    EXPECT_NEAR(hamilton(a, b).norm(), a.norm() * b.norm(), 1e-10);
  }
}

TEST(Hamilton, Associative) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    const Quaternion a = oracle::random_quaternion(rng), b = oracle::random_quaternion(rng),
                     c = oracle::random_quaternion(rng);
    expect_near(hamilton(hamilton(a, b), c), hamilton(a, hamilton(b, c)), 1e-10);
  }
}

TEST(LeftMatrix, IdentityQuaternionGivesIdentityMatrix) {
  const auto m = left_matrix(Quaternion::identity());
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(m[r][c], r == c ? 1.0 : 0.0);
}

TEST(LeftMatrix, PureIRows) {
  const auto m = left_matrix(kI);
  const std::array<std::array<double, 4>, 4> expected{{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}}};
  EXPECT_EQ(m, expected);
}

TEST(LeftMatrix, UnitQuaternionIsOrthogonal) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 100; ++n) {
    Quaternion q = oracle::random_quaternion(rng);
    q = q * (1.0 / q.norm());
    const auto m = left_matrix(q);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double dot = 0.0;
        for (int r = 0; r < 4; ++r) dot += m[r][a] * m[r][b];
        EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-10);
      }
  }
}

TEST(QuatMatmul, IdentityLeavesOperandUnchanged) {
  std::mt19937_64 rng(5);
  const QuatTensor b = oracle::random_quat({3, 4}, rng);
  EXPECT_TRUE(quat_matmul(QuatTensor::identity(3), b).base().identical(b.base()));
}

TEST(QuatMatmul, OneByOneIsHamilton) {
  std::mt19937_64 rng(6);
  const QuatTensor a = oracle::random_quat({1, 1}, rng), b = oracle::random_quat({1, 1}, rng);
  EXPECT_EQ(quat_matmul(a, b).get(0), hamilton(a.get(0), b.get(0)));
}

TEST(QuatMatmul, MatchesBlockMatrixOracle) {
  std::mt19937_64 rng(9);
  for (std::size_t m = 1; m <= 5; ++m)
    for (std::size_t n = 1; n <= 5; ++n)
      for (std::size_t p = 1; p <= 5; ++p) {
        const QuatTensor a = oracle::random_quat({m, n}, rng), b = oracle::random_quat({n, p}, rng);
        EXPECT_LT(max_abs_diff(quat_matmul(a, b).base(), oracle::block_matmul(a, b).base()), 1e-10);
      }
}

TEST(QuatMatmul, ShapeMismatchNamesBothShapes) {
  try {
    quat_matmul(QuatTensor::zeros({3, 2}), QuatTensor::zeros({3, 4}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("[3×2]"), std::string::npos) << what;
    EXPECT_NE(what.find("[3×4]"), std::string::npos) << what;
  }
}

TEST(Elementwise, ConjugateAndComponentMap) {
  QuatTensor q = QuatTensor::zeros({1});
  q.set(0, {1, 2, 3, 4});
  EXPECT_EQ(conjugate(q).get(0), (Quaternion{1, -2, -3, -4}));
  EXPECT_TRUE(component_map(q, [](double v) { return v; }).base().identical(q.base()));
  EXPECT_EQ(component_map(q, [](double v) { return v * v; }).get(0), (Quaternion{1, 4, 9, 16}));
}

TEST(Elementwise, AddSubInverse) {
  std::mt19937_64 rng(1);
  const QuatTensor a = oracle::random_quat({4, 3}, rng), b = oracle::random_quat({4, 3}, rng);
  EXPECT_LT(max_abs_diff(sub(add(a, b), b).base(), a.base()), 1e-12);
  EXPECT_THROW(add(a, QuatTensor::zeros({3, 4})), DimensionError);
}

TEST(Elementwise, StackThenExtractIsIdentity) {
  std::mt19937_64 rng(2);
  const QuatTensor q = oracle::random_quat({2, 3, 5}, rng);
  const auto c = q.components();
  EXPECT_TRUE(QuatTensor::stack(c[0], c[1], c[2], c[3]).base().identical(q.base()));
  EXPECT_THROW(QuatTensor(Tensor({2, 3})), DimensionError);
}

TEST(Elementwise, TransposeConcatSplit) {
  std::mt19937_64 rng(4);
  const QuatTensor a = oracle::random_quat({2, 3}, rng);
  const QuatTensor t = transpose(a);
  EXPECT_EQ(t.logical_shape(), (Shape{3, 2}));
  EXPECT_EQ(t.at(2, 1), a.at(1, 2));
  EXPECT_EQ(transpose(a, true).at(2, 1), a.at(1, 2).conjugate());

  const QuatTensor b = oracle::random_quat({2, 4}, rng);
  const std::array<QuatTensor, 2> parts{a, b};
  const QuatTensor joined = concat(parts, 1);
  EXPECT_EQ(joined.logical_shape(), (Shape{2, 7}));
  const std::array<std::size_t, 2> extents{3, 4};
  const auto back = split(joined, 1, extents);
  EXPECT_TRUE(back[0].base().identical(a.base()));
  EXPECT_TRUE(back[1].base().identical(b.base()));
  EXPECT_THROW(concat(std::array<QuatTensor, 2>{a, QuatTensor::zeros({3, 3})}, 1), DimensionError);
}

TEST(Tensor, ReshapePreservesData) {
  std::mt19937_64 rng(8);
  const Tensor t = oracle::random_tensor({2, 6}, rng);
  const Tensor r = t.reshape({3, 4});
  EXPECT_EQ(r.values(), t.values());
  EXPECT_THROW(t.reshape({5}), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, {1.0}), DimensionError);
}

TEST(Tensor, F32ValuesAreFloatRepresentable) {
  const Tensor t({1}, {0.1}, DType::F32);
  EXPECT_EQ(t[0], static_cast<double>(0.1f));
}
