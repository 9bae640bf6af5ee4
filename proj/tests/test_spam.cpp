#include <gtest/gtest.h>

#include <random>

#include "mcm/spam.hpp"

using namespace mcm;

namespace {

// Monte Carlo spread of f over Gaussian inputs; linear-regime oracle for the full Jacobian.
double mc_sigma(const std::function<double(const std::vector<double>&)>& f, const std::vector<Measured>& in,
                int n = 400000) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  double s = 0.0, s2 = 0.0;
  std::vector<double> x(in.size());
  for (int k = 0; k < n; ++k) {
    for (size_t i = 0; i < in.size(); ++i) x[i] = in[i].value + in[i].sigma * g(rng);
    const double v = f(x);
    s += v;
    s2 += v * v;
  }
  const double m = s / n;
  return std::sqrt(s2 / n - m * m);
}

}  // namespace

TEST(DataCorrection, ValueAndAnalyticSigma) {
  const Measured p{0.930, 0.008}, pmin{0.01, 0.01}, r3{0.970, 0.003}, r4{0.014, 0.002};
  const auto c = correct_data_fidelity(p, pmin, r3, r4);
  const double n = p.value - pmin.value, d = r3.value - r4.value;
  EXPECT_NEAR(c.value, n / d, 1e-15);
  // Analytic partial derivatives of N/D.
  const double jac = std::sqrt(std::pow(p.sigma / d, 2) + std::pow(pmin.sigma / d, 2) +
                               std::pow(n * r3.sigma / (d * d), 2) + std::pow(n * r4.sigma / (d * d), 2));
  EXPECT_NEAR(c.sigma_jacobian, jac, 1e-9);
  // No input appears in both N and D, so the conventions coincide.
  EXPECT_NEAR(c.sigma, c.sigma_jacobian, 1e-9);
  EXPECT_FALSE(c.above_one);
}

TEST(DataCorrection, FlagsAboveOneAndRejectsBadDenominator) {
  const auto hi = correct_data_fidelity({0.99, 0.01}, {0.0, 0.0}, {0.95, 0.01}, {0.0, 0.0});
  EXPECT_TRUE(hi.above_one);
  EXPECT_GT(hi.value, 1.0);  // not clamped
  EXPECT_THROW(correct_data_fidelity({0.9, 0.01}, {0.0, 0.0}, {0.1, 0.0}, {0.2, 0.0}), DomainError);
  EXPECT_THROW(correct_data_fidelity({1.3, 0.01}, {0.0, 0.0}, {0.9, 0.0}, {0.1, 0.0}), std::invalid_argument);
  EXPECT_THROW(correct_data_fidelity({0.9, -0.01}, {0.0, 0.0}, {0.9, 0.0}, {0.1, 0.0}), std::invalid_argument);
}

TEST(AncillaCorrection, PublishedValues) {
  const SpamInputs in = SpamInputs::published();
  const auto a = correct_ancilla(in.p1_d, in.p2_b, in.r_base, in.ancilla_r4prep, in.ancilla_r3prep, in.r_ba);
  EXPECT_NEAR(a.dark_given_0.value, 0.949, 0.001);
  EXPECT_NEAR(a.bright_given_1.value, 0.953, 0.001);
  EXPECT_NEAR(a.dark_given_0.sigma, 0.008, 0.001);
  EXPECT_NEAR(a.bright_given_1.sigma, 0.011, 0.001);
}

TEST(AncillaCorrection, ClosedFormAndMonteCarloSigma) {
  const SpamInputs in = SpamInputs::published();
  const std::vector<Measured> args{in.p1_d, in.r_base, in.ancilla_r4prep, in.ancilla_r3prep, in.r_ba};
  auto den = [](const std::vector<double>& x) { return 0.5 - x[2] + x[3] - x[1] / 2.0 + x[4]; };
  auto dark = [&](const std::vector<double>& x) { return (x[0] - (1.0 - x[1]) / 2.0) / den(x); };
  auto bright = [&](const std::vector<double>& x) { return (x[0] - x[2] + x[3] - x[1] + x[4]) / den(x); };
  const auto a = correct_ancilla(in.p1_d, in.p2_b, in.r_base, in.ancilla_r4prep, in.ancilla_r3prep, in.r_ba);
  std::vector<double> x0;
  for (const auto& m : args) x0.push_back(m.value);
  EXPECT_NEAR(a.dark_given_0.value, dark(x0), 1e-14);
  // Monte Carlo agrees with the full first-order expansion to its own sampling noise plus
  // the small curvature of the ratio.
  EXPECT_NEAR(a.dark_given_0.sigma_jacobian / mc_sigma(dark, args), 1.0, 0.02);
  std::vector<Measured> bargs = args;
  bargs[0] = in.p2_b;
  x0[0] = in.p2_b.value;
  EXPECT_NEAR(a.bright_given_1.value, bright(x0), 1e-14);
  EXPECT_NEAR(a.bright_given_1.sigma_jacobian / mc_sigma(bright, bargs), 1.0, 0.02);

  // SplitRatio: numerator and denominator spreads combined as relative errors.
  auto sn = std::hypot(in.p2_b.sigma, in.ancilla_r4prep.sigma, in.ancilla_r3prep.sigma);
  sn = std::hypot(sn, in.r_base.sigma, in.r_ba.sigma);
  const double sd = std::hypot(std::hypot(in.ancilla_r4prep.sigma, in.ancilla_r3prep.sigma),
                               in.r_base.sigma / 2.0, in.r_ba.sigma);
  const double nb = x0[0] - x0[2] + x0[3] - x0[1] + x0[4];
  EXPECT_NEAR(a.bright_given_1.sigma, std::abs(nb / den(x0)) * std::hypot(sn / nb, sd / den(x0)), 1e-9);
}

TEST(ProcessAverage, PublishedAndIndependent) {
  const SpamInputs in = SpamInputs::published();
  const auto corr = spam_report(in, Correlation::Correlated);
  EXPECT_NEAR(corr.raw_average.value, 0.9375, 1e-12);
  EXPECT_NEAR(corr.corrected_average.value, 0.970, 0.001);
  const std::vector<double> expected{0.962, 0.974, 0.966, 0.966, 0.972, 0.979};
  for (size_t i = 0; i < 6; ++i) EXPECT_NEAR(corr.corrected[i].value, expected[i], 0.001) << corr.labels[i];

  // Independent rows: sigma is the quadrature sum of row sigmas over six.
  const auto ind = spam_report(in, Correlation::Independent);
  double v = 0.0;
  for (const auto& r : ind.corrected) v += r.sigma * r.sigma;
  EXPECT_NEAR(ind.corrected_average.sigma, std::sqrt(v) / 6.0, 1e-12);
  // Shared calibration inputs add coherently, so correlated is never smaller.
  EXPECT_GE(corr.corrected_average.sigma, ind.corrected_average.sigma);
  // Raw rows share nothing.
  EXPECT_NEAR(corr.raw_average.sigma, ind.raw_average.sigma, 1e-15);
  EXPECT_THROW(average_process_fidelity({corr.corrected[0]}), std::invalid_argument);
}

TEST(SpamInputsJson, RoundTripAndStrictKeys) {
  const SpamInputs in = SpamInputs::published();
  const auto j = nlohmann::json::parse(in.to_json().dump());
  const SpamInputs back = SpamInputs::from_json(j);
  EXPECT_EQ(back.to_json().dump(), in.to_json().dump());
  auto bad = j;
  bad["p1_dd"] = 0.5;
  EXPECT_THROW(SpamInputs::from_json(bad), std::invalid_argument);
  // Missing keys fall back to the defaults.
  const SpamInputs partial = SpamInputs::from_json(nlohmann::json::object());
  EXPECT_EQ(partial.to_json().dump(), in.to_json().dump());
}

TEST(SpamReportTest, CsvLayout) {
  const auto r = spam_report(SpamInputs::published());
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.rfind("input,raw,raw_sigma,corrected,corrected_sigma\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);  // header, six rows, average
  EXPECT_FALSE(r.terms.empty());
  for (const auto& t : decompose_error_budget(SpamInputs::published())) EXPECT_GE(t.sigma, 0.0);
}
