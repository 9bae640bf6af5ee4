#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcm/atomic_model.hpp"

namespace mcm {

enum class TrapShape { Gaussian, Harmonic };

// 1-D Sisyphus cooling on a narrow line whose excited state is trapped more strongly.
struct CoolingParams {
  double gamma = kTwoPi * 124e3;  // excited-state decay rate, 1/s
  double omega_g = 0.0;           // ground trap frequency, rad/s (0: derived from depth and waist)
  double trap_ratio = 2.0;        // omega_e / omega_g
  double mass = kCsMass;
  double saturation = 0.2;        // I / I_s
  double detuning = 0.0;          // laser detuning from resonance at the trap centre, rad/s
  double temperature = 10e-6;     // K
  double trap_depth = 500e-6;     // ground-state depth, K
  double waist = 1e-6;            // m
  bool saturate = true;           // keep I/I_s in the Lorentzian denominator
  TrapShape shape = TrapShape::Gaussian;

  void check() const;
  double ground_frequency() const;                      // omega_g, resolved
  double excited_frequency() const { return trap_ratio * ground_frequency(); }
  double turning_point() const;                         // x_m in the excited well
  double position_sigma() const;                        // thermal width of the ground-state density
};

// Mean energy change (J) of one absorption-emission cycle starting at x0; negative cools.
// Throws DomainError for |x0| > x_m.
double delta_U(double x0, const CoolingParams& p);

// Same polynomial without the classical-turning-point check, used inside thermal averages.
double delta_U_unchecked(double x0, const CoolingParams& p);

// Numeric cross-check of delta_U: averages the excited-state dwell over exp(-gamma t)
// along both classical trajectories through x0 and integrates in time.
double delta_U_trajectory(double x0, const CoolingParams& p);

// Laser detuning shift at x from the differential trap light shift (rad/s).
double trap_detuning(double x, const CoolingParams& p);

// Photon absorption rate at x, 1/s.
double excitation_rate(double x, const CoolingParams& p);

// Normalised thermal density, truncated at +-5 sigma and renormalised on that interval.
double position_density(double x, const CoolingParams& p);

struct CoolingRate {
  double rate_uk_per_ms;   // d<E>/dt / k_B; negative cools
  double scatter_rate;     // density-averaged excitation rate, 1/s
  double quadrature_error; // estimated absolute error of the energy integral
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CoolingRate mean_cooling_rate(const CoolingParams& p);

struct ScanPoint {
  double ratio;  // omega_g / gamma
  double rate_uk_per_ms;
  double scatter_rate;
};

struct CoolingScan {
  std::vector<ScanPoint> points;
  double best_ratio = 0.0;     // most negative rate over the grid
  double best_rate = 0.0;
  // For each molasses scattering rate: the lowest ratio above which cooling beats
  // recoil heating r_mol * 2 E_rec, if any.
  std::vector<std::pair<double, std::optional<double>>> crossovers;

  std::string to_csv() const;  // omega_g_over_gamma,cooling_rate_uK_per_ms,scatter_rate_per_s
  nlohmann::ordered_json to_json() const;
};

// Log-spaced grid of `n` ratios over [lo, hi].  Molasses heating uses the 852 nm recoil.
CoolingScan scan(const CoolingParams& p, double lo, double hi, int n,
                 const std::vector<double>& molasses_rates = {});

// Recoil heating of a molasses scattering `r_mol` photons/s, in uK/ms.
double molasses_heating(double r_mol, double wavelength = 852.347e-9, double mass = kCsMass);

}  // namespace mcm
