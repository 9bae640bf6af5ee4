#include "mcm/angular.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mcm::angular {

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational Rational::make(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  constexpr i128 lim = static_cast<i128>(INT64_MAX);
  if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational overflow");
  return Rational(Normalized{}, static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}

namespace {

std::int64_t factorial(int n) {
  if (n < 0) throw std::domain_error("negative factorial");
  if (n > 20) throw std::overflow_error("factorial argument too large");
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Half of a doubled quantity that must be an integer.
bool half(int twice, int& out) {
  if (twice % 2 != 0) return false;
  out = twice / 2;
  return true;
}

bool triangle(int ta, int tb, int tc) {
  return tc <= ta + tb && tc >= std::abs(ta - tb) && (ta + tb + tc) % 2 == 0;
}

// Triangle coefficient squared: (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!
Rational delta_sq(int ta, int tb, int tc) {
  return Rational(factorial((ta + tb - tc) / 2) * factorial((ta - tb + tc) / 2) * factorial((-ta + tb + tc) / 2),
                  factorial((ta + tb + tc) / 2 + 1));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = Rational::make(num, den);
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
              static_cast<i128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
              static_cast<i128>(a.den_) * b.den_);
}
Rational operator*(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  return Rational::make(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

double Radical::to_double() const {
  return std::sqrt(radicand.to_double()) * scale.to_double();
}

Radical clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  Radical zero;
  if (tm1 + tm2 != tM) return zero;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) return zero;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tJ + tM) % 2) return zero;
  if (!triangle(tj1, tj2, tJ)) return zero;

  int a, b, c, d, e, f, g, h, i;
  half(tj1 + tj2 - tJ, a);
  half(tj1 - tm1, b);
  half(tj2 + tm2, c);
  half(tJ - tj2 + tm1, d);
  half(tJ - tj1 - tm2, e);
  half(tJ + tM, f);
  half(tJ - tM, g);
  half(tj1 + tm1, h);
  half(tj2 - tm2, i);

  Rational radicand = Rational(tJ + 1) * delta_sq(tj1, tj2, tJ) *
                      Rational(factorial(f) * factorial(g)) * Rational(factorial(b) * factorial(h)) *
                      Rational(factorial(c) * factorial(i));
  // Triangle factor above has (j1+j2+J+1)! in the denominator already.
  Rational sum(0);
  int kmin = std::max({0, -d, -e});
  int kmax = std::min({a, b, c});
  for (int k = kmin; k <= kmax; ++k) {
    std::int64_t den = factorial(k) * factorial(a - k) * factorial(b - k);
    Rational term(1, den);
    term = term / Rational(factorial(c - k) * factorial(d + k) * factorial(e + k));
    sum = (k % 2 == 0) ? sum + term : sum - term;
  }
  return Radical{radicand, sum};
}

Radical wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  Radical cg = clebsch_gordan(tj1, tm1, tj2, tm2, tj3, -tm3);
  if (cg.scale.is_zero()) return Radical{};
  int phase_twice = tj1 - tj2 - tm3;  // exponent j1-j2-m3 is an integer
  int phase = phase_twice / 2;
  Rational sgn((phase % 2 == 0) ? 1 : -1);
  return Radical{cg.radicand / Rational(tj3 + 1), cg.scale * sgn};
}

Radical wigner_6j(int ta, int tb, int tc, int td, int te, int tf) {
  if (!triangle(ta, tb, tc) || !triangle(ta, te, tf) || !triangle(td, tb, tf) || !triangle(td, te, tc)) {
    return Radical{};
  }
  Rational radicand = delta_sq(ta, tb, tc) * delta_sq(ta, te, tf) * delta_sq(td, tb, tf) * delta_sq(td, te, tc);
  int s1 = (ta + tb + tc) / 2, s2 = (ta + te + tf) / 2, s3 = (td + tb + tf) / 2, s4 = (td + te + tc) / 2;
  int p1 = (ta + tb + td + te) / 2, p2 = (ta + tc + td + tf) / 2, p3 = (tb + tc + te + tf) / 2;
  int tmin = std::max({s1, s2, s3, s4});
  int tmax = std::min({p1, p2, p3});
  Rational sum(0);
  for (int t = tmin; t <= tmax; ++t) {
    Rational term(factorial(t + 1), factorial(t - s1) * factorial(t - s2) * factorial(t - s3));
    term = term / Rational(factorial(t - s4) * factorial(p1 - t));
    term = term / Rational(factorial(p2 - t) * factorial(p3 - t));
    sum = (t % 2 == 0) ? sum + term : sum - term;
  }
  return Radical{radicand, sum};
}

}  // namespace mcm::angular
