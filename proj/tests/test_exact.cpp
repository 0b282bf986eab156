#include <gtest/gtest.h>

#include <sstream>

#include "qreduce/exact.hpp"
#include "qreduce/projective.hpp"

namespace qreduce {
namespace {

using GR = GaussianRational;

TEST(GaussianRational, FieldOperations) {
  const GR i(0, 1);
  EXPECT_EQ(i * i, GR(-1));
  const GR a(Rational(3, 4), Rational(-1, 3));
  const GR b(Rational(-2), Rational(5, 7));
  EXPECT_EQ((a * b) / b, a);
  EXPECT_EQ((a + b) - b, a);
  EXPECT_EQ(a * conjugate(a), GR(squared_modulus(a)));
  EXPECT_EQ(GR::fraction(1, 2) + GR::fraction(1, 2), GR(1));
  EXPECT_THROW(a / GR(0), std::domain_error);
}

TEST(GaussianRational, NoRoundingAtAnyScale) {
  // (1/3)*3 and 0.1 + 0.2 style identities hold exactly.
  GR third = GR::fraction(1, 3);
  EXPECT_EQ(third * GR(3), GR(1));
  EXPECT_EQ(GR::fraction(1, 10) + GR::fraction(2, 10), GR::fraction(3, 10));
  GR x = GR(Rational(1), Rational(1));
  GR acc(1);
  for (int k = 0; k < 40; ++k) acc *= x;
  EXPECT_EQ(acc, GR(Rational(1048576)));  // (1+i)^40 = (2i)^20 = 2^20
}

TEST(GaussianRational, Printing) {
  std::ostringstream s;
  s << GR(Rational(1, 2), Rational(-3));
  EXPECT_EQ(s.str(), "1/2-3i");
}

TEST(GaussianRational, AsEigenScalar) {
  ExactVector<4> p;
  p << GR(1), GR(0), GR(0), GR(-1);
  ExactVector<4> q;
  q << GR(1), GR(0), GR(0), GR(1);
  EXPECT_TRUE(is_zero(hermitian_inner(p, q)));
  EXPECT_EQ(hermitian_inner(p, p), GR(2));
  EXPECT_EQ(quadric_form(p), GR(-1));
  const Eigen::Matrix<GR, 2, 1> a(GR(1), GR(0, 1)), b(GR::fraction(1, 2), GR(2));
  EXPECT_TRUE(is_zero(quadric_form(segre_coordinates(a, b))));
}

TEST(GaussianRational, ExactTransitionProbability) {
  ExactVector<4> s;
  s << GR(1), GR(0), GR(0), GR(-1);
  ExactVector<4> down_up;
  down_up << GR(0), GR(0), GR(0), GR(1);
  EXPECT_EQ(transition_probability(s, down_up), GR::fraction(1, 2));
}

}  // namespace
}  // namespace qreduce
