#include "mcm/budget.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "mcm/sequence.hpp"

namespace mcm {

BudgetParams BudgetParams::defaults() {
  BudgetParams p;
  const double dls = SequenceConfig{}.shiftout_shift;
  p.omega_beam = std::sqrt(4.0 * p.detuning * p.detuning * dls / p.omega_q);
  return p;
}

void BudgetParams::check() const {
  if (!(gamma > 0.0)) throw DomainError("budget: decay rate must be positive");
  if (!(omega_q > 0.0)) throw DomainError("budget: qubit frequency must be positive");
  if (!(omega_mw > 0.0)) throw DomainError("budget: microwave Rabi frequency must be positive");
  if (!(omega_beam >= 0.0)) throw DomainError("budget: shift-out Rabi frequency must be non-negative");
}

ScatterError p_scat(const BudgetParams& p) {
  p.check();
  const double t = p.pulse_time();
  const double w2 = p.omega_beam * p.omega_beam;
  const double d = p.detuning;
  const double dq = p.detuning - p.omega_q;
  ScatterError s;
  s.exact = 0.5 * p.gamma * t * (w2 / (4.0 * d * d) + w2 / (4.0 * dq * dq));
  s.large_detuning = p.gamma * t * w2 / (4.0 * d * d);
  const double dls = p.omega_q * w2 / (4.0 * d * d);
  s.via_shift = kPi * p.gamma * dls / (p.omega_q * p.omega_mw);
  s.gamma_t = p.gamma * t;
  return s;
}

LightShifts light_shifts(const BudgetParams& p) {
  p.check();
  if (p.detuning == 0.0 || p.detuning == p.omega_q) throw DomainError("light shift: detuning sits on a pole");
  const double w2 = p.omega_beam * p.omega_beam;
  LightShifts s;
  s.upper = w2 / (4.0 * p.detuning);
  s.lower = w2 / (4.0 * (p.detuning - p.omega_q));
  s.differential = s.upper - s.lower;
  // Leading term of upper - lower for |detuning| >> omega_q.
  s.differential_large_detuning = -p.omega_q * w2 / (4.0 * p.detuning * p.detuning);
  return s;
}

PopulationErrors population_errors(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("population errors: expansion needs 0 < eps < 1");
  const double e2 = eps * eps;
  return {e2 / 8.0 * (1.0 - std::cos(4.0 * kPi / eps + kPi * eps / 2.0)),
          e2 / 2.0 * (1.0 - std::cos(kPi / eps - kPi * eps / 2.0))};
}

PopulationErrors population_errors_exact(double eps) {
  if (!(eps > 0.0)) throw DomainError("population errors: eps must be positive");
  // Microwave Rabi frequency as the unit; the shift is 1/eps.
  const double d = 1.0 / eps;
  // |4,0>-|3,-1> is driven at half rate for a 2 pi rotation, |3,0>-|4,-1> at full rate for pi.
  const double g0 = 1.0 + 4.0 * d * d;
  const double g1 = 1.0 + d * d;
  const double s0 = std::sin(kPi * std::sqrt(g0));
  const double s1 = std::sin(0.5 * kPi * std::sqrt(g1));
  return {s0 * s0 / g0, s1 * s1 / g1};
}

double total_error(double eps, double gamma, double omega_q) {
  return BranchingWeights{}.mean() * kPi * gamma / (omega_q * eps) + rotation_error(eps);
}

Optimum optimize_total_error(double gamma, double omega_q) {
  if (!(gamma > 0.0 && omega_q > 0.0)) throw DomainError("optimum: rates must be positive");
  Optimum o;
  const double r = gamma / omega_q;
  // Stationary point of total_error; the p_min expression below follows from it.
  o.eps_closed = std::cbrt(8.0 * kPi / 15.0 * r);
  o.eps_reduced = std::cbrt(2.0 * kPi / 15.0 * r);
  o.p_min_closed = std::cbrt(15.0 * kPi * kPi / 64.0 * r * r);
  auto p = [&](double e) { return total_error(e, gamma, omega_q); };
  // Work in log(eps) so the bracket spans many decades evenly.
  auto [x, fx] = boost::math::tools::brent_find_minima([&](double le) { return p(std::exp(le)); }, std::log(1e-6),
                                                       std::log(1.0), 60);
  o.eps_numeric = std::exp(x);
  o.p_min_numeric = fx;
  const double h = 1e-6 * o.eps_closed;
  o.derivative_at_closed = (p(o.eps_closed + h) - p(o.eps_closed - h)) / (2.0 * h) * o.eps_closed / o.p_min_closed;
  return o;
}

nlohmann::ordered_json ShiftoutReport::to_json() const {
  return {{"gamma_per_s", params.gamma},
          {"omega_q_rad_s", params.omega_q},
          {"omega_beam_rad_s", params.omega_beam},
          {"detuning_rad_s", params.detuning},
          {"omega_mw_rad_s", params.omega_mw},
          {"shift_upper_rad_s", shifts.upper},
          {"shift_lower_rad_s", shifts.lower},
          {"shift_differential_rad_s", shifts.differential},
          {"shift_differential_large_detuning_rad_s", shifts.differential_large_detuning},
          {"eps", eps},
          {"p_scat_exact", scatter.exact},
          {"p_scat_large_detuning", scatter.large_detuning},
          {"p_scat_via_shift", scatter.via_shift},
          {"gamma_t", scatter.gamma_t},
          {"pop_error_c0_leading", leading.c0},
          {"pop_error_c1_leading", leading.c1},
          {"pop_error_c0_exact", exact.c0},
          {"pop_error_c1_exact", exact.c1},
          {"p_rot", rotation},
          {"p_total", total},
          {"regime",
           {{"large_detuning_marginal", large_detuning_marginal}, {"short_pulse", short_pulse}}}};
}

ShiftoutReport shiftout_budget(const BudgetParams& p) {
  ShiftoutReport r;
  r.params = p;
  r.shifts = light_shifts(p);
  r.eps = std::abs(p.omega_mw / r.shifts.differential_large_detuning);
  r.scatter = p_scat(p);
  r.leading = r.eps < 1.0 ? population_errors(r.eps) : PopulationErrors{NAN, NAN};
  r.exact = population_errors_exact(r.eps);
  r.rotation = rotation_error(r.eps);
  r.total = BranchingWeights{}.mean() * r.scatter.large_detuning + r.rotation;
  r.large_detuning_marginal = std::abs(p.detuning) < 10.0 * p.omega_q;
  r.short_pulse = r.scatter.gamma_t < 10.0;
  return r;
}

void PhotonParams::check() const {
  if (!(gamma > 0.0)) throw DomainError("photons: linewidth must be positive");
  if (!(saturation >= 0.0)) throw DomainError("photons: saturation must be non-negative");
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("photons: efficiency must lie in (0,1]");
}

nlohmann::ordered_json PhotonBudget::to_json() const {
  return {{"bright_rate_per_s", bright_rate}, {"shelved_rate_per_s", shelved_rate}, {"duration_s", duration},
          {"photons", photons},             {"photoelectrons", photoelectrons},   {"data_error", data_error}};
}

PhotonBudget shelved_cost(const PhotonParams& p, double duration) {
  p.check();
  if (!(duration >= 0.0)) throw DomainError("photons: duration must be non-negative");
  PhotonBudget b;
  b.bright_rate = scattering_rate_bright(p.gamma, p.saturation, p.detuning);
  b.shelved_rate =
      scattering_rate_offresonant(shelved_scatter_params(p.gamma, p.saturation, p.detuning, p.omega_q));
  b.duration = duration;
  b.photons = b.bright_rate * duration;
  b.photoelectrons = p.eta * b.photons;
  b.data_error = b.shelved_rate * duration;
  return b;
}

PhotonBudget shelved_cost_for_target(const PhotonParams& p, double photoelectrons) {
  p.check();
  if (!(photoelectrons > 0.0)) throw DomainError("photons: target must be positive");
  const double rate = scattering_rate_bright(p.gamma, p.saturation, p.detuning);
  return shelved_cost(p, photoelectrons / p.eta / rate);
}

}  // namespace mcm
