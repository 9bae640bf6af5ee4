#pragma once

#include <nlohmann/json.hpp>

#include "mcm/atomic_model.hpp"

namespace mcm {

// Site-selective shift-out beam acting on an ancilla during global microwave pulses.
struct BudgetParams {
  double gamma = 1.0 / 165e-9;                // excited-state decay rate of the shifting transition, 1/s
  double omega_q = kTwoPi * kCsHyperfineHz;   // rad/s
  double omega_beam = 0.0;                    // shift-out Rabi frequency, rad/s (set by defaults())
  double detuning = -kTwoPi * 24e9;           // from the f=4 line, rad/s
  double omega_mw = kTwoPi * 22.4e3;          // microwave Rabi frequency of the shelving pulse, rad/s

  // Beam strength whose large-detuning differential shift equals the compiled
  // sequence's default shift-out detuning.
  static BudgetParams defaults();
  void check() const;
  double pulse_time() const { return kPi / omega_mw; }
};

inline constexpr double kGammaShortLived = 1.0 / 165e-9;
inline constexpr double kGammaLongLived = 1.0 / 1280e-9;

struct ScatterError {
  double exact;           // two-term form
  double large_detuning;  // single-term asymptote
  double via_shift;       // pi gamma Delta_DLS / (omega_q Omega_mw), large-detuning shift
  double gamma_t;         // validity needs gamma * t >> 1
};

ScatterError p_scat(const BudgetParams& p);

struct LightShifts {
  double upper;           // f=4 clock and |4,-1>
  double lower;           // f=3 clock and |3,-1>
  double differential;    // upper - lower
  double differential_large_detuning;
};

// Throws DomainError at the poles detuning == 0 or detuning == omega_q.
LightShifts light_shifts(const BudgetParams& p);

struct PopulationErrors {
  double c0;  // population lost from the upper clock state
  double c1;  // from the lower clock state
};

// Leading-order expansion in eps = |Omega_mw / Delta_DLS|; needs 0 < eps < 1.
PopulationErrors population_errors(double eps);
// Full detuned-Rabi forms before expansion; any eps > 0.
PopulationErrors population_errors_exact(double eps);
// Average over basis states and the error oscillations.
inline double rotation_error(double eps) { return 5.0 / 16.0 * eps * eps; }

// Ancilla error weights per scattering event: dark input, bright input, and their mean.
struct BranchingWeights {
  double dark = 11.0 / 24.0;
  double bright = 5.0 / 24.0;
  double mean() const { return 0.5 * (dark + bright); }
};

// Total ancilla error p(eps) = mean weight * p_scat(eps) + p_rot(eps).
double total_error(double eps, double gamma, double omega_q);

struct Optimum {
  double eps_closed;
  double p_min_closed;
  double eps_reduced;  // (2 pi gamma / 15 omega_q)^(1/3), a factor 4^(1/3) below eps_closed
  double eps_numeric;
  double p_min_numeric;
  double derivative_at_closed;  // dp/deps at eps_closed, relative to p_min
};

Optimum optimize_total_error(double gamma, double omega_q);

struct ShiftoutReport {
  BudgetParams params;
  LightShifts shifts;
  double eps;
  ScatterError scatter;
  PopulationErrors leading;
  PopulationErrors exact;
  double rotation;
  double total;
  bool large_detuning_marginal;  // |detuning| < 10 omega_q
  bool short_pulse;              // gamma * t < 10

  nlohmann::ordered_json to_json() const;
};

ShiftoutReport shiftout_budget(const BudgetParams& p);

// Readout light seen by the bright ancilla and by shelved data qubits.
struct PhotonParams {
  double gamma = kTwoPi * 5.2e6;
  double saturation = 3.0;               // on the cycling line
  double detuning = -2.0 * kTwoPi * 5.2e6;
  double omega_q = kTwoPi * kCsHyperfineHz;
  double eta = 0.005;                    // photoelectrons per scattered photon

  void check() const;
};

struct PhotonBudget {
  double bright_rate;      // photons/s, stretched state
  double shelved_rate;     // photons/s, shelved data qubit
  double duration;         // s
  double photons;          // scattered by a bright ancilla
  double photoelectrons;
  double data_error;       // shelved_rate * duration

  nlohmann::ordered_json to_json() const;
};

PhotonBudget shelved_cost(const PhotonParams& p, double duration);
// Duration needed to collect `photoelectrons` at the configured efficiency.
PhotonBudget shelved_cost_for_target(const PhotonParams& p, double photoelectrons);

}  // namespace mcm
