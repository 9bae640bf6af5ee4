#include <gtest/gtest.h>

#include "mcm/budget.hpp"
#include "mcm/sequence.hpp"
#include "oracles/oracles.hpp"

using namespace mcm;

namespace {

const double kOmegaQ = 2 * oracle::pi * 9.192631770e9;

// Generalized Rabi transfer via the matrix exponential of a detuned two-level drive.
double rabi_transfer(double rabi, double detuning, double t) {
  Eigen::MatrixXcd h(2, 2);
  h << 0.0, 0.5 * rabi, 0.5 * rabi, -detuning;
  return std::norm(oracle::expm_propagator(h, t)(1, 0));
}

}  // namespace

TEST(LightShift, SignsAndAsymptote) {
  const BudgetParams p = BudgetParams::defaults();
  const auto s = light_shifts(p);
  // Red of both lines: both clock levels move down.
  EXPECT_LT(s.upper, 0.0);
  EXPECT_LT(s.lower, 0.0);
  EXPECT_LT(s.differential_large_detuning, 0.0);
  EXPECT_NEAR(std::abs(s.differential_large_detuning), SequenceConfig{}.shiftout_shift, 1e-6);
  // Exact and asymptotic differ by less than 50% at -24 GHz.
  EXPECT_NEAR(s.differential / s.differential_large_detuning, 1.0, 0.5);
  // Far detuned: they converge.
  BudgetParams far = p;
  far.detuning = -1000.0 * p.omega_q;
  const auto f = light_shifts(far);
  EXPECT_NEAR(f.differential / f.differential_large_detuning, 1.0, 2e-3);
  BudgetParams pole = p;
  pole.detuning = 0.0;
  EXPECT_THROW(light_shifts(pole), DomainError);
  pole.detuning = p.omega_q;
  EXPECT_THROW(light_shifts(pole), DomainError);
}

TEST(Scatter, ClosedForms) {
  const BudgetParams p = BudgetParams::defaults();
  const auto s = p_scat(p);
  const double t = oracle::pi / p.omega_mw, w2 = p.omega_beam * p.omega_beam;
  EXPECT_NEAR(s.gamma_t, p.gamma * t, 1e-9);
  EXPECT_NEAR(s.exact, 0.5 * p.gamma * t * (w2 / (4 * p.detuning * p.detuning) +
                                            w2 / (4 * std::pow(p.detuning - p.omega_q, 2))), 1e-15);
  // Via the shift it is the large-detuning form in other variables.
  EXPECT_NEAR(s.via_shift / s.large_detuning, 1.0, 1e-12);
  EXPECT_GT(s.gamma_t, 10.0);
  BudgetParams far = p;
  far.detuning = -1000.0 * p.omega_q;
  const auto f = p_scat(far);
  EXPECT_NEAR(f.exact / f.large_detuning, 1.0, 2e-3);
}

TEST(Population, ExactFormsMatchRabiOracle) {
  for (double eps : {0.02, 0.05, 0.2, 0.7}) {
    const auto e = population_errors_exact(eps);
    const double d = 1.0 / eps;
    // Upper clock: half-rate drive for a 2 pi rotation; lower clock: full rate, pi.
    EXPECT_NEAR(e.c0, rabi_transfer(0.5, d, 4.0 * oracle::pi), 1e-10) << eps;
    EXPECT_NEAR(e.c1, rabi_transfer(1.0, d, oracle::pi), 1e-10) << eps;
  }
}

TEST(Population, LeadingOrderTracksExact) {
  for (double eps : {0.01, 0.03, 0.05}) {
    const auto a = population_errors(eps);
    const auto b = population_errors_exact(eps);
    EXPECT_NEAR(a.c0, b.c0, 0.1 * eps * eps) << eps;
    EXPECT_NEAR(a.c1, b.c1, 0.1 * eps * eps) << eps;
  }
  EXPECT_THROW(population_errors(0.0), DomainError);
  EXPECT_THROW(population_errors(1.5), DomainError);
  EXPECT_THROW(population_errors_exact(-0.1), DomainError);
}

TEST(Population, RotationErrorIsTheAverage) {
  // Averaged over many oscillation periods in 1/eps and over the two clock states, the
  // leading forms give (eps^2/8 + eps^2/2) / 2 = 5/16 eps^2.
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = 1.0 / (20.0 + 40.0 * (i + 0.5) / n);
    const auto p = population_errors(e);
    acc += 0.5 * (p.c0 + p.c1) / rotation_error(e);
  }
  EXPECT_NEAR(acc / n, 1.0, 0.01);
}

TEST(Optimum, GoldenSectionAndClosedForm) {
  for (double gamma : {kGammaShortLived, kGammaLongLived}) {
    const auto o = optimize_total_error(gamma, kOmegaQ);
    const double r = gamma / kOmegaQ;
    auto p = [&](double e) { return oracle::pi / 3.0 * r / e + 5.0 / 16.0 * e * e; };
    for (double e : {0.01, 0.05, 0.2}) EXPECT_NEAR(total_error(e, gamma, kOmegaQ), p(e), 1e-15);
    const double eg = oracle::golden_min(p, 1e-4, 1.0);
    EXPECT_NEAR(o.eps_numeric / eg, 1.0, 1e-6);
    EXPECT_NEAR(o.p_min_numeric / p(eg), 1.0, 1e-10);
    EXPECT_NEAR(o.eps_closed, std::cbrt(8 * oracle::pi / 15 * r), 1e-15);
    EXPECT_NEAR(o.p_min_closed, std::cbrt(15 * oracle::pi * oracle::pi / 64 * r * r), 1e-15);
    EXPECT_NEAR(o.eps_reduced * std::cbrt(4.0), o.eps_closed, 1e-12);
    EXPECT_LT(std::abs(o.derivative_at_closed), 1e-8);
  }
  const auto s = optimize_total_error(kGammaShortLived, kOmegaQ);
  EXPECT_NEAR(s.p_min_closed, 0.0029, 0.03 * 0.0029);
  EXPECT_NEAR(s.eps_closed, 0.0560, 5e-4);
}

TEST(Shiftout, ReportFlags) {
  const auto r = shiftout_budget(BudgetParams::defaults());
  EXPECT_TRUE(r.large_detuning_marginal);  // 24 GHz is under ten hyperfine splittings
  EXPECT_FALSE(r.short_pulse);
  EXPECT_NEAR(r.eps, 22.4e3 / 0.635e6, 1e-9);
  EXPECT_NEAR(r.total, r.scatter.large_detuning / 3.0 + r.rotation, 1e-15);
  const auto j = r.to_json();
  EXPECT_DOUBLE_EQ(j["p_total"].get<double>(), r.total);
  EXPECT_TRUE(j["regime"]["large_detuning_marginal"].get<bool>());
}

TEST(Photons, FourMillisecondBudget) {
  const PhotonParams p;
  const auto b = shelved_cost(p, 4e-3);
  const double g = 2 * oracle::pi * 5.2e6;
  // s = 3, detuning = -2 gamma: gamma/2 * 3 / (1 + 3 + 16).
  EXPECT_NEAR(b.bright_rate, g * 0.075, 1e-6);
  EXPECT_NEAR(b.photons, 9802, 1.0);
  EXPECT_NEAR(b.photoelectrons, 49.0, 0.05);
  EXPECT_NEAR(b.data_error, b.shelved_rate * 4e-3, 1e-15);
  // Far-off-resonant estimate: sum of the three hyperfine Lorentzian tails with the
  // shelved/stretched scale factor, using only the large-detuning limit.
  const auto w = shelved_line_strengths();
  const double tot = w[0] + w[1] + w[2];
  const std::array<double, 3> off{-603.4e6, -452.2e6, -251.0e6};
  double est = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = p.detuning - kOmegaQ - 2 * oracle::pi * off[static_cast<size_t>(k)];
    est += 0.5 * g * 3.0 * 0.91 * w[static_cast<size_t>(k)] / tot / (4 * d * d / (g * g));
  }
  EXPECT_NEAR(b.shelved_rate / est, 1.0, 0.01);
  EXPECT_NEAR(b.shelved_rate, 4.0, 0.15 * 4.0);
}

TEST(Photons, TargetInvertsDuration) {
  PhotonParams p;
  p.eta = 0.15;
  const auto b = shelved_cost_for_target(p, 50.0);
  EXPECT_NEAR(b.photoelectrons, 50.0, 1e-9);
  EXPECT_NEAR(b.photons, 333.33, 0.01);
  EXPECT_NEAR(b.duration, 136e-6, 1e-6);
  EXPECT_THROW(shelved_cost_for_target(p, 0.0), DomainError);
  p.eta = 0.0;
  EXPECT_THROW(shelved_cost(p, 1e-3), DomainError);
}
