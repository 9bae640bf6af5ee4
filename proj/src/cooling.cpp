#include "mcm/cooling.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

namespace mcm {

namespace {

constexpr double kWindowSigmas = 5.0;

double kelvin_to_joule(double t) { return kBoltzmann * t; }

template <class F>
std::pair<double, double> integrate(F f, double a, double b) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-10, &err);
  return {v, err};
}

}  // namespace

void CoolingParams::check() const {
  if (!(gamma > 0.0)) throw DomainError("cooling: decay rate must be positive");
  if (!(omega_g >= 0.0)) throw DomainError("cooling: ground trap frequency must be non-negative");
  if (!(trap_ratio > 0.0)) throw DomainError("cooling: excited trap frequency must be positive");
  if (!(temperature > 0.0)) throw DomainError("cooling: temperature must be positive");
  if (!(trap_depth > 0.0)) throw DomainError("cooling: trap depth must be positive");
  if (!(waist > 0.0)) throw DomainError("cooling: waist must be positive");
  if (!(saturation >= 0.0)) throw DomainError("cooling: saturation must be non-negative");
  if (!(mass > 0.0)) throw DomainError("cooling: mass must be positive");
}

double CoolingParams::ground_frequency() const {
  if (omega_g > 0.0) return omega_g;
  return std::sqrt(4.0 * kelvin_to_joule(trap_depth) / (mass * waist * waist));
}

double CoolingParams::turning_point() const {
  const double we = excited_frequency();
  return std::sqrt(2.0 * kelvin_to_joule(temperature) / (mass * we * we));
}

double CoolingParams::position_sigma() const { return 0.5 * waist * std::sqrt(temperature / trap_depth); }

double delta_U_unchecked(double x0, const CoolingParams& p) {
  const double we = p.excited_frequency();
  const double wg = p.ground_frequency();
  const double xm = p.turning_point();
  const double pre = p.mass * we * we * (1.0 - (wg * wg) / (we * we)) / (4.0 * (1.0 + p.gamma * p.gamma / (4.0 * we * we)));
  return -pre * (xm * xm - 2.0 * x0 * x0);
}

double delta_U(double x0, const CoolingParams& p) {
  p.check();
  if (std::abs(x0) > p.turning_point()) throw DomainError("delta_U: start point beyond the classical turning point");
  return delta_U_unchecked(x0, p);
}

double delta_U_trajectory(double x0, const CoolingParams& p) {
  p.check();
  const double xm = p.turning_point();
  if (std::abs(x0) > xm) throw DomainError("delta_U: start point beyond the classical turning point");
  const double we = p.excited_frequency();
  const double wg = p.ground_frequency();
  const double v = std::sqrt(xm * xm - x0 * x0);
  auto excursion = [&](double t) {
    const double c = x0 * std::cos(we * t);
    const double s = v * std::sin(we * t);
    const double plus = (c + s) * (c + s), minus = (c - s) * (c - s);
    return (0.5 * (plus + minus) - x0 * x0) * std::exp(-p.gamma * t);
  };
  // exp(-40) leaves nothing measurable; split by oscillation period for the adaptive rule.
  const double t_end = 40.0 / p.gamma;
  const int pieces = std::max(1, static_cast<int>(std::ceil(t_end * we / kTwoPi)));
  double total = 0.0;
  for (int i = 0; i < pieces; ++i) total += integrate(excursion, t_end * i / pieces, t_end * (i + 1) / pieces).first;
  return -p.gamma * p.mass * (we * we - wg * wg) / 2.0 * total;
}

double trap_detuning(double x, const CoolingParams& p) {
  // Excited depth scales with the squared frequency ratio at a common waist.  The
  // transition is red-shifted most at the centre, so the laser detuning falls outward.
  const double extra = (p.trap_ratio * p.trap_ratio - 1.0) * kelvin_to_joule(p.trap_depth) / kHbar;
  const double u = 2.0 * x * x / (p.waist * p.waist);
  const double profile = p.shape == TrapShape::Gaussian ? -std::expm1(-u) : u;
  return -extra * profile;
}

double excitation_rate(double x, const CoolingParams& p) {
  const double d = (p.detuning + trap_detuning(x, p)) / p.gamma;
  const double s = p.saturation;
  return 0.5 * p.gamma * s / (1.0 + (p.saturate ? s : 0.0) + 4.0 * d * d);
}

double position_density(double x, const CoolingParams& p) {
  const double s = p.position_sigma();
  if (std::abs(x) > kWindowSigmas * s) return 0.0;
  const double norm = std::erf(kWindowSigmas / std::sqrt(2.0));
  return std::exp(-x * x / (2.0 * s * s)) / (std::sqrt(2.0 * kPi) * s * norm);
}

CoolingRate mean_cooling_rate(const CoolingParams& p) {
  p.check();
  const double s = p.position_sigma();
  const double a = -kWindowSigmas * s, b = kWindowSigmas * s;
  auto energy = [&](double x) { return delta_U_unchecked(x, p) * excitation_rate(x, p) * position_density(x, p); };
  auto scatter = [&](double x) { return excitation_rate(x, p) * position_density(x, p); };
  const auto [e, e_err] = integrate(energy, a, b);
  const auto [r, r_err] = integrate(scatter, a, b);
  // Tolerance: 1e-4 of the integrand peak times the interval length.
  double peak = 0.0;
  for (int i = 0; i <= 200; ++i) peak = std::max(peak, std::abs(energy(a + (b - a) * i / 200.0)));
  const double tol = 1e-4 * peak * (b - a);
  if (!std::isfinite(e) || e_err > tol)
    throw QuadratureError(fmt::format("cooling integral did not converge: value {:.6e}, error {:.3e}, tolerance {:.3e}",
                                      e, e_err, tol));
  (void)r_err;
  return {e / kBoltzmann * 1e6 * 1e-3, r, e_err};
}

double molasses_heating(double r_mol, double wavelength, double mass) {
  const double k = kTwoPi / wavelength;
  const double recoil = kHbar * kHbar * k * k / (2.0 * mass);
  return r_mol * 2.0 * recoil / kBoltzmann * 1e6 * 1e-3;
}

CoolingScan scan(const CoolingParams& p, double lo, double hi, int n, const std::vector<double>& molasses_rates) {
  if (!(lo > 0.0 && hi >= lo && n >= 1)) throw DomainError("cooling scan: need 0 < lo <= hi and n >= 1");
  CoolingScan out;
  auto at = [&](double ratio) {
    CoolingParams q = p;
    q.omega_g = ratio * p.gamma;
    return mean_cooling_rate(q);
  };
  for (int i = 0; i < n; ++i) {
    const double ratio = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    const auto c = at(ratio);
    out.points.push_back({ratio, c.rate_uk_per_ms, c.scatter_rate});
    if (i == 0 || c.rate_uk_per_ms < out.best_rate) {
      out.best_rate = c.rate_uk_per_ms;
      out.best_ratio = ratio;
    }
  }
  for (double r_mol : molasses_rates) {
    const double heat = molasses_heating(r_mol);
    std::optional<double> cross;
    for (std::size_t i = 1; i < out.points.size(); ++i) {
      const double f0 = -out.points[i - 1].rate_uk_per_ms - heat;
      const double f1 = -out.points[i].rate_uk_per_ms - heat;
      if (f0 < 0.0 && f1 >= 0.0) {
        auto g = [&](double lr) { return -at(std::exp(lr)).rate_uk_per_ms - heat; };
        boost::math::tools::eps_tolerance<double> tol(40);
        std::uintmax_t iters = 60;
        const auto [l, h] = boost::math::tools::toms748_solve(g, std::log(out.points[i - 1].ratio),
                                                              std::log(out.points[i].ratio), f0, f1, tol, iters);
        cross = std::exp(0.5 * (l + h));
        break;
      }
    }
    out.crossovers.emplace_back(r_mol, cross);
  }
  return out;
}

std::string CoolingScan::to_csv() const {
  std::string s = "omega_g_over_gamma,cooling_rate_uK_per_ms,scatter_rate_per_s\n";
  for (const auto& pt : points) s += fmt::format("{:.6e},{:.6e},{:.6e}\n", pt.ratio, pt.rate_uk_per_ms, pt.scatter_rate);
  return s;
}

nlohmann::ordered_json CoolingScan::to_json() const {
  nlohmann::ordered_json j{{"best_ratio", best_ratio}, {"best_rate_uK_per_ms", best_rate}};
  auto& c = j["crossovers"] = nlohmann::ordered_json::array();
  for (const auto& [r, x] : crossovers)
    c.push_back({{"molasses_rate_per_s", r}, {"ratio", x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json()}});
  j["points"] = points.size();
  return j;
}

}  // namespace mcm
