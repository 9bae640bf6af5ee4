#pragma once

// Exact angular-momentum coefficients.  All angular momenta are passed doubled
// (two_j = 2j) so that half-integer values stay integral.

#include <cstdint>

namespace mcm::angular {

class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }
  int sign() const { return (num_ > 0) - (num_ < 0); }

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;

 private:
  struct Normalized {};
  constexpr Rational(Normalized, std::int64_t num, std::int64_t den) : num_(num), den_(den) {}
  static Rational make(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// value = sign(scale) * sqrt(radicand) * |scale|; radicand >= 0.
struct Radical {
  Rational radicand{0};
  Rational scale{0};

  Rational squared() const { return radicand * scale * scale; }
  double to_double() const;
};

// <j1 m1; j2 m2 | J M>, Condon-Shortley phase.  Returns 0 for forbidden arguments.
Radical clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M);

Radical wigner_3j(int two_j1, int two_j2, int two_j3, int two_m1, int two_m2, int two_m3);

Radical wigner_6j(int two_j1, int two_j2, int two_j3, int two_j4, int two_j5, int two_j6);

}  // namespace mcm::angular
