#include "mcm/atomic_model.hpp"

#include <cmath>
#include <fmt/format.h>
#include <regex>

#include "mcm/angular.hpp"

namespace mcm {

Level Level::from_index(int idx) {
  if (idx < 0 || idx >= kNumLevels) throw DomainError(fmt::format("level index {} out of range", idx));
  return idx < 7 ? Level{3, idx - 3} : Level{4, idx - 11};
}

std::string Level::label() const { return fmt::format("|{},{}>", f, m); }

Level parse_level(const std::string& text) {
  static const std::regex re(R"(^\s*\|?\s*([34])\s*,\s*([+-]?\d)\s*>?\s*$)");
  std::smatch mt;
  if (!std::regex_match(text, mt, re)) throw DomainError(fmt::format("cannot parse level '{}'", text));
  Level l{std::stoi(mt[1]), std::stoi(mt[2])};
  if (!l.valid()) throw DomainError(fmt::format("level '{}' outside the ground manifold", text));
  return l;
}

void FieldEnvironment::check() const {
  if (!(bias_field >= 0.0)) throw DomainError("bias field must be non-negative");
  if (!(omega_q > 0.0)) throw DomainError("hyperfine splitting must be positive");
}

double zeeman_energy(const Level& s, const FieldEnvironment& env) {
  if (!s.valid()) throw DomainError("invalid level");
  const double sign = s.f == 4 ? 1.0 : -1.0;
  const double mub = kBohrMagneton * env.bias_field / kHbar;  // rad/s per unit g
  if (!env.breit_rabi) {
    const double g = s.f == 4 ? env.g4 : env.g3;
    return sign * env.omega_q / 2.0 + g * s.m * mub;
  }
  const double two_i_plus_1 = kCsTwoI + 1.0;
  const double x = (env.g_j - env.g_i) * mub / env.omega_q;
  const double m = s.m;
  double root;
  if (s.f == 4 && std::abs(s.m) == 4) {
    // Stretched states: the square root is exactly linear in x.
    root = 1.0 + (s.m > 0 ? x : -x);
  } else {
    root = std::sqrt(1.0 + 4.0 * m * x / two_i_plus_1 + x * x);
  }
  return env.g_i * m * mub + sign * env.omega_q / 2.0 * root;
}

double transition_frequency(const Level& a, const Level& b, const FieldEnvironment& env) {
  if (!a.valid() || !b.valid()) throw DomainError("invalid level");
  if (a.f == b.f) {
    throw DomainError(fmt::format("{} and {} are in the same hyperfine manifold", a.label(), b.label()));
  }
  return std::abs(zeeman_energy(b, env) - zeeman_energy(a, env));
}

Polarization normalized(const Polarization& p) {
  double n = std::sqrt(std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]));
  if (n == 0.0) throw DomainError("zero polarization vector");
  return {p[0] / n, p[1] / n, p[2] / n};
}

std::optional<int> coupling_component(const Level& a, const Level& b) {
  if (!a.valid() || !b.valid() || a.f == b.f) return std::nullopt;
  const Level& lo = a.f == 3 ? a : b;
  const Level& hi = a.f == 3 ? b : a;
  int q = hi.m - lo.m;
  if (q < -1 || q > 1) return std::nullopt;
  return q;
}

double mw_clebsch_gordan(const Level& a, const Level& b) {
  auto q = coupling_component(a, b);
  if (!q) return 0.0;
  const Level& lo = a.f == 3 ? a : b;
  const Level& hi = a.f == 3 ? b : a;
  return angular::clebsch_gordan(6, 2 * lo.m, 2, 2 * *q, 8, 2 * hi.m).to_double();
}

std::complex<double> mw_coupling(const Level& a, const Level& b, const Polarization& pol) {
  auto q = coupling_component(a, b);
  if (!q) return {0.0, 0.0};
  return mw_clebsch_gordan(a, b) * pol[static_cast<size_t>(*q + 1)];
}

// ---- scattering ------------------------------------------------------------------------

void ScatterParams::check() const {
  if (!(gamma > 0.0)) throw DomainError("decay rate must be positive");
  for (double s : saturation) {
    if (!(s >= 0.0)) throw DomainError("saturation parameters must be non-negative");
  }
}

double scattering_rate_offresonant(const ScatterParams& p) {
  p.check();
  double rate = 0.0;
  for (size_t k = 0; k < 3; ++k) {
    const double s = p.saturation[k];
    const double d = p.detuning + p.omega_q + p.excited_offset[k];
    rate += s / (1.0 + 4.0 * d * d / (p.gamma * p.gamma) + s);
  }
  return 0.5 * p.gamma * rate;
}

double scattering_rate_bright(double gamma, double s, double detuning) {
  if (!(gamma > 0.0) || !(s >= 0.0)) throw DomainError("invalid bright-rate parameters");
  return 0.5 * gamma * s / (1.0 + s + 4.0 * detuning * detuning / (gamma * gamma));
}

std::array<double, 3> shelved_line_strengths() {
  // D2 line: J=1/2 -> J'=3/2, I=7/2; sigma+ (q=+1) excitation.
  auto strength = [](int F, int m, int Fp) {
    if (std::abs(m + 1) > Fp) return 0.0;
    const double sixj = angular::wigner_6j(1, 3, 2, 2 * Fp, 2 * F, kCsTwoI).to_double();
    const double threej = angular::wigner_3j(2 * F, 2, 2 * Fp, 2 * m, 2, -2 * (m + 1)).to_double();
    return (2 * Fp + 1) * (2 * F + 1) * 4.0 * sixj * sixj * threej * threej;
  };
  const double ref = strength(4, 4, 5);
  std::array<double, 3> w{};
  for (int k = 0; k < 3; ++k) {
    const int Fp = 2 + k;
    w[static_cast<size_t>(k)] = 0.5 * (strength(3, 0, Fp) + strength(3, -1, Fp)) / ref;
  }
  return w;
}

ScatterParams shelved_scatter_params(double gamma, double saturation, double detuning, double omega_q) {
  ScatterParams p;
  p.gamma = gamma;
  p.omega_q = omega_q;
  p.detuning = detuning;
  auto w = shelved_line_strengths();
  const double total = w[0] + w[1] + w[2];
  for (size_t k = 0; k < 3; ++k) p.saturation[k] = saturation * kShelvedToStretchedRatio * w[k] / total;
  return p;
}

QuadrupoleRates quadrupole_cycling_ratio(const QuadrupoleParams& p) {
  if (!(p.gamma > 0.0) || !(p.saturation6 > 0.0)) throw DomainError("invalid quadrupole parameters");
  const double g2 = p.gamma * p.gamma;
  const double s6 = p.saturation6;
  const double rc = 0.5 * p.gamma * s6 / (1.0 + 4.0 * p.detuning * p.detuning / g2 + s6);
  double rnc = 0.0;
  const std::array<std::pair<double, double>, 2> lines{{{p.hf_offset4, p.sat_ratio4}, {p.hf_offset5, p.sat_ratio5}}};
  for (auto [off, ratio] : lines) {
    const double s = s6 / ratio;
    const double d = p.detuning + off;
    rnc += s / (1.0 + 4.0 * d * d / g2 + s);
  }
  rnc *= 0.5 * p.gamma;
  return {rc, rnc, rnc / rc};
}

// ---- calibration -----------------------------------------------------------------------

std::pair<Level, Level> RabiCalibration::key(const Level& a, const Level& b) {
  if (!coupling_component(a, b)) {
    throw DomainError(fmt::format("{} <-> {} is not a microwave transition", a.label(), b.label()));
  }
  return a.f == 3 ? std::pair{a, b} : std::pair{b, a};
}

void RabiCalibration::set(const Level& a, const Level& b, double omega) {
  if (!(omega > 0.0)) throw DomainError("Rabi frequency must be positive");
  table_[key(a, b)] = omega;
}

bool RabiCalibration::contains(const Level& a, const Level& b) const {
  return table_.count(key(a, b)) != 0;
}

double RabiCalibration::get(const Level& a, const Level& b) const {
  auto it = table_.find(key(a, b));
  if (it == table_.end()) {
    throw DomainError(fmt::format("no Rabi calibration for {} <-> {}", a.label(), b.label()));
  }
  return it->second;
}

RabiCalibration RabiCalibration::defaults() {
  RabiCalibration c;
  const auto k = [](double khz) { return kTwoPi * khz * 1e3; };
  c.set({4, 4}, {3, 3}, k(99.9));
  c.set({3, 3}, {4, 3}, k(37.9));
  c.set({4, 3}, {3, 2}, k(87.7));
  c.set({3, 2}, {4, 1}, k(18.1));
  c.set({4, 1}, {3, 0}, k(59.9));
  c.set({3, 0}, {4, 0}, k(62.8));
  c.set({3, 2}, {4, 2}, k(51.8));
  c.set({3, 1}, {4, 1}, k(56.2));
  c.set({4, 0}, {3, -1}, k(44.8));
  c.set({3, 0}, {4, -1}, k(22.4));
  c.set({3, -1}, {4, -1}, k(58.4));
  return c;
}

}  // namespace mcm
