#include <gtest/gtest.h>

#include "mcm/angular.hpp"
#include "oracles/oracles.hpp"

using namespace mcm::angular;

TEST(Rational, ArithmeticNormalizes) {
  EXPECT_EQ(Rational(2, 4), Rational(1, 2));
  EXPECT_EQ(Rational(1, -3), Rational(-1, 3));
  EXPECT_EQ(Rational(1, 2) + Rational(1, 3), Rational(5, 6));
  EXPECT_EQ(Rational(1, 2) - Rational(1, 2), Rational(0));
  EXPECT_EQ(Rational(2, 3) * Rational(3, 4), Rational(1, 2));
  EXPECT_EQ(Rational(2, 3) / Rational(4, 9), Rational(3, 2));
  EXPECT_EQ(Rational(-6, 4).sign(), -1);
  EXPECT_THROW(Rational(1, 0), std::exception);
}

TEST(ClebschGordan, IntegerSpinsMatchRacah) {
  for (int j1 = 0; j1 <= 4; ++j1)
    for (int j2 = 0; j2 <= 2; ++j2)
      for (int J = std::abs(j1 - j2); J <= j1 + j2; ++J)
        for (int m1 = -j1; m1 <= j1; ++m1)
          for (int m2 = -j2; m2 <= j2; ++m2) {
            const int M = m1 + m2;
            if (std::abs(M) > J) continue;
            const double got = clebsch_gordan(2 * j1, 2 * m1, 2 * j2, 2 * m2, 2 * J, 2 * M).to_double();
            EXPECT_NEAR(got, oracle::clebsch_gordan(j1, m1, j2, m2, J, M), 1e-12)
                << j1 << m1 << j2 << m2 << J << M;
          }
}

TEST(ClebschGordan, HalfIntegerOrthonormality) {
  // j1 = 7/2 (nuclear spin) with j2 = 1/2: columns of the coupling matrix are orthonormal.
  const int tj1 = 7, tj2 = 1;
  for (int tM = -8; tM <= 8; tM += 2) {
    for (int tJa : {6, 8})
      for (int tJb : {6, 8}) {
        double s = 0.0;
        for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
          const int tm2 = tM - tm1;
          if (std::abs(tm2) > tj2) continue;
          s += clebsch_gordan(tj1, tm1, tj2, tm2, tJa, tM).to_double() *
               clebsch_gordan(tj1, tm1, tj2, tm2, tJb, tM).to_double();
        }
        const bool exists = std::abs(tM) <= tJa && std::abs(tM) <= tJb;
        EXPECT_NEAR(s, exists && tJa == tJb ? 1.0 : 0.0, 1e-13) << tM << " " << tJa << " " << tJb;
      }
  }
}

TEST(ClebschGordan, ExactSquares) {
  // <1/2 1/2; 1/2 -1/2 | 0 0>^2 = 1/2 with positive sign.
  const Radical r = clebsch_gordan(1, 1, 1, -1, 0, 0);
  EXPECT_EQ(r.squared(), Rational(1, 2));
  EXPECT_GT(r.to_double(), 0.0);
  EXPECT_TRUE(clebsch_gordan(2, 2, 2, 2, 2, 2).squared().is_zero());  // M out of range
}

TEST(Wigner3j, RelatedToClebschGordan) {
  for (int m1 = -3; m1 <= 3; ++m1)
    for (int q = -1; q <= 1; ++q) {
      const int M = m1 + q;
      if (std::abs(M) > 4) continue;
      const double three = wigner_3j(6, 2, 8, 2 * m1, 2 * q, -2 * M).to_double();
      const double sign = ((3 - 1 + M) % 2 == 0) ? 1.0 : -1.0;
      EXPECT_NEAR(three, sign * oracle::clebsch_gordan(3, m1, 1, q, 4, M) / 3.0, 1e-13);
    }
}

TEST(Wigner6j, OrthogonalityAndKnownValues) {
  // F' shares a column with j = 1/2, so sum_F' (2F'+1)(2*1/2+1) {1/2 3/2 1; F' F 7/2}^2 = 1.
  for (int F : {3, 4}) {
    double s = 0.0;
    for (int Fp = 2; Fp <= 5; ++Fp) {
      const double v = wigner_6j(1, 3, 2, 2 * Fp, 2 * F, 7).to_double();
      s += (2 * Fp + 1) * 2.0 * v * v;
    }
    EXPECT_NEAR(s, 1.0, 1e-13) << F;
  }
  EXPECT_NEAR(wigner_6j(2, 2, 2, 2, 2, 2).to_double(), 1.0 / 6.0, 1e-15);
  // {a b c; b a 0} = (-1)^(a+b+c) / sqrt((2a+1)(2b+1)).
  EXPECT_NEAR(wigner_6j(1, 1, 2, 1, 1, 0).to_double(), 0.5, 1e-15);
  EXPECT_NEAR(wigner_6j(2, 4, 4, 4, 2, 0).to_double(), -1.0 / std::sqrt(15.0), 1e-15);
  EXPECT_TRUE(wigner_6j(2, 2, 6, 2, 2, 2).squared().is_zero());  // triangle broken
}
