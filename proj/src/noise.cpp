#include "mcm/noise.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <complex>
#include <fmt/format.h>
#include <vector>

namespace mcm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 shot_rng(std::uint64_t seed, std::uint64_t shot, Stream stream) {
  const std::uint64_t s = splitmix64(splitmix64(splitmix64(seed) ^ shot) ^ static_cast<std::uint64_t>(stream));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

double sample_noise(const NoiseModel& model, std::uint64_t shot) {
  if (!(model.sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
  if (model.sigma == 0.0) return 0.0;
  auto rng = shot_rng(model.seed, shot, Stream::Noise);
  std::normal_distribution<double> n(0.0, 1.0);
  return model.sigma * n(rng);
}

LevelShifts zeeman_noise_shifts(const FieldEnvironment& env, double deviate) {
  LevelShifts s{};
  for (int k = 0; k < kNumLevels; ++k) {
    const Level l = Level::from_index(k);
    s[static_cast<size_t>(k)] = (l.f == 4 ? env.g4 : env.g3) * l.m * deviate;
  }
  return s;
}

namespace {

std::vector<double> unit_deviates(std::uint64_t seed, int shots) {
  if (shots < 1) throw DomainError("need at least one shot");
  std::vector<double> u(static_cast<size_t>(shots));
  for (int i = 0; i < shots; ++i) u[static_cast<size_t>(i)] = sample_noise({1.0, seed}, static_cast<std::uint64_t>(i));
  return u;
}

// |<coherence>| of (|3,0> + |3,-1>)/sqrt2 after time t; the pair splits by |g3| * deviate.
double contrast(const std::vector<double>& units, double sigma, const FieldEnvironment& env, double t) {
  const double split = std::abs(env.g3) * sigma * t;
  std::complex<double> acc{0.0, 0.0};
  for (double u : units) acc += std::polar(1.0, split * u);
  return std::abs(acc) / static_cast<double>(units.size());
}

}  // namespace

double shelved_ramsey_contrast(const NoiseModel& model, const FieldEnvironment& env, double t, int shots) {
  if (!(model.sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
  if (t < 0.0) throw DomainError("negative evolution time");
  return contrast(unit_deviates(model.seed, shots), model.sigma, env, t);
}

double simulated_t2star(const NoiseModel& model, const FieldEnvironment& env, int shots) {
  if (!(model.sigma > 0.0)) throw DomainError("T2* is infinite without noise");
  const auto units = unit_deviates(model.seed, shots);
  const double target = std::exp(-1.0);
  auto f = [&](double t) { return contrast(units, model.sigma, env, t) - target; };
  double hi = 1e-3;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e3) throw SolverError("contrast never decays to 1/e");
  }
  auto tol = boost::math::tools::eps_tolerance<double>(40);
  auto r = boost::math::tools::bisect(f, 0.0, hi, tol);
  return 0.5 * (r.first + r.second);
}

double calibrate_noise_sigma(double t2star, const FieldEnvironment& env, int shots, std::uint64_t seed) {
  if (!(t2star > 0.0)) throw DomainError("T2* must be positive");
  const auto units = unit_deviates(seed, shots);
  const double target = std::exp(-1.0);
  auto f = [&](double sigma) { return contrast(units, sigma, env, t2star) - target; };
  // Contrast falls with sigma; bracket from the static-Gaussian estimate.
  double lo = 0.0, hi = 16.0 / t2star;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw SolverError("noise calibration failed to bracket");
  }
  auto tol = boost::math::tools::eps_tolerance<double>(40);
  auto r = boost::math::tools::bisect(f, lo, hi, tol);
  return 0.5 * (r.first + r.second);
}

}  // namespace mcm
