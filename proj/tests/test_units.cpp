#include <gtest/gtest.h>

#include <random>

#include "mcm/units.hpp"

using namespace mcm;

TEST(Units, FrequencyBecomesAngular) {
  EXPECT_DOUBLE_EQ(parse_quantity("1 Hz", Dimension::AngularFrequency), 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(parse_quantity("22.4 kHz", Dimension::AngularFrequency), 2.0 * std::numbers::pi * 22.4e3);
  EXPECT_DOUBLE_EQ(parse_quantity("-24 GHz", Dimension::AngularFrequency), -2.0 * std::numbers::pi * 24e9);
  EXPECT_DOUBLE_EQ(parse_quantity("5 rad/s", Dimension::AngularFrequency), 5.0);
}

TEST(Units, PrefixesAndSpacing) {
  EXPECT_DOUBLE_EQ(parse_quantity("165ns", Dimension::Time), 165e-9);
  EXPECT_DOUBLE_EQ(parse_quantity("  4 ms ", Dimension::Time), 4e-3);
  EXPECT_DOUBLE_EQ(parse_quantity("10 uK", Dimension::Temperature), 10e-6);
  EXPECT_DOUBLE_EQ(parse_quantity("10 \xC2\xB5K", Dimension::Temperature), 10e-6);
  EXPECT_DOUBLE_EQ(parse_quantity("10.2 G", Dimension::MagneticField), 1.02e-3);
  EXPECT_DOUBLE_EQ(parse_quantity("1e3 nm", Dimension::Length), 1e-6);
}

TEST(Units, RejectsWrongDimensionAndGarbage) {
  EXPECT_THROW(parse_quantity("4 ms", Dimension::AngularFrequency), UnitError);
  EXPECT_THROW(parse_quantity("4", Dimension::Time), UnitError);
  EXPECT_THROW(parse_quantity("abc s", Dimension::Time), UnitError);
  EXPECT_THROW(parse_quantity("4 parsec", Dimension::Length), UnitError);
  EXPECT_THROW(parse_quantity("", Dimension::Time), UnitError);
  EXPECT_THROW(parse_quantity("nan s", Dimension::Time), UnitError);
}

TEST(Units, FormatRoundTripsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mant(-10.0, 10.0);
  std::uniform_int_distribution<int> expo(-9, 10);
  for (Dimension d : {Dimension::AngularFrequency, Dimension::Time, Dimension::Temperature, Dimension::MagneticField,
                      Dimension::Length}) {
    for (int i = 0; i < 500; ++i) {
      const double v = mant(rng) * std::pow(10.0, expo(rng));
      EXPECT_EQ(parse_quantity(format_quantity(v, d), d), v) << format_quantity(v, d);
    }
  }
}

TEST(Units, Constants) {
  // Cs-133 mass in kg, independent arithmetic.
  EXPECT_NEAR(kCsMass, 2.2069e-25, 1e-28);
  EXPECT_DOUBLE_EQ(angular_to_hz(hz_to_angular(9.192631770e9)), kCsHyperfineHz);
}
