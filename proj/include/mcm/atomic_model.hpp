#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcm/units.hpp"

namespace mcm {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr int kNumLevels = 16;

// One hyperfine-Zeeman level of the ground manifold.  Index layout: f=3 levels
// m=-3..3 occupy 0..6, f=4 levels m=-4..4 occupy 7..15.
struct Level {
  int f = 3;
  int m = 0;

  constexpr bool valid() const { return (f == 3 || f == 4) && m >= -f && m <= f; }
  constexpr int index() const { return f == 3 ? m + 3 : 7 + m + 4; }
  static Level from_index(int idx);
  std::string label() const;  // "|3,-1>"

  friend constexpr bool operator==(const Level&, const Level&) = default;
  friend constexpr auto operator<=>(const Level&, const Level&) = default;
};

inline constexpr Level kQubit0{3, 0};
inline constexpr Level kQubit1{4, 0};

Level parse_level(const std::string& text);  // "3,-1" or "|3,-1>"

struct FieldEnvironment {
  double bias_field = 1.02e-3;               // T
  double omega_q = kTwoPi * kCsHyperfineHz;  // rad/s
  double g3 = -0.25;
  double g4 = 0.25;
  bool breit_rabi = false;
  // Electron and nuclear g-factors used only in Breit-Rabi mode.  The defaults make the
  // low-field limit coincide with the linear g_f values above.
  double g_j = 2.0;
  double g_i = 0.0;

  void check() const;
};

double zeeman_energy(const Level& s, const FieldEnvironment& env);

// |E(b) - E(a)|; a and b must belong to different hyperfine manifolds.
double transition_frequency(const Level& a, const Level& b, const FieldEnvironment& env);

// Field polarization components ordered (sigma-, pi, sigma+).
using Polarization = std::array<std::complex<double>, 3>;

Polarization normalized(const Polarization& p);

// Spherical component index q = m(f=4 level) - m(f=3 level); nullopt if |q| > 1 or same manifold.
std::optional<int> coupling_component(const Level& a, const Level& b);

// Relative magnetic-dipole amplitude <4,m4| mu_q |3,m3> / reduced element, i.e. the
// Clebsch-Gordan factor <3 m3; 1 q | 4 m4> times the matching field component.
std::complex<double> mw_coupling(const Level& a, const Level& b, const Polarization& pol);

// Clebsch-Gordan factor alone (real, signed).
double mw_clebsch_gordan(const Level& a, const Level& b);

// ---- photon scattering ---------------------------------------------------------------

struct ScatterParams {
  double gamma = kTwoPi * 5.2e6;  // excited-state decay rate, rad/s
  double omega_q = kTwoPi * kCsHyperfineHz;
  double detuning = 0.0;          // from the f'=5 line, rad/s
  // Per excited level f' = 2, 3, 4: saturation parameter I/I_sat,f' and offset from f'=5.
  std::array<double, 3> saturation{0.0, 0.0, 0.0};
  std::array<double, 3> excited_offset{kTwoPi * -603.4e6, kTwoPi * -452.2e6, kTwoPi * -251.0e6};

  void check() const;
};

// Sum of Lorentzians over f'=2,3,4 for an atom parked in f=3 (9.2 GHz away from the probe).
double scattering_rate_offresonant(const ScatterParams& p);

// Saturated two-level rate on the cycling line.
double scattering_rate_bright(double gamma, double saturation, double detuning);

// Relative sigma+ line strengths |3,m> -> f'=2,3,4 (D2 line), normalised to the
// |4,4> -> |5,5> cycling strength, averaged over the shelved levels m=0 and m=-1.
std::array<double, 3> shelved_line_strengths();

// Average shelved-state rate is this fraction of the stretched-state rate at equal detuning.
inline constexpr double kShelvedToStretchedRatio = 0.91;

// Builds the per-f' saturation parameters for a shelved data qubit exposed to readout
// light with total saturation `saturation` on the cycling line.  The hyperfine-resolved
// strengths fix the split between f'=2,3,4; the overall scale is pinned to
// kShelvedToStretchedRatio of the cycling strength.
ScatterParams shelved_scatter_params(double gamma, double saturation, double detuning, double omega_q);

struct QuadrupoleParams {
  double gamma = kTwoPi * 124e3;
  double saturation6 = 365.0;          // I / I_sat,6 on the cycling f'=6 line
  double detuning = 0.0;               // from f'=6
  double hf_offset5 = kTwoPi * 127.4e6;
  double hf_offset4 = kTwoPi * 233.6e6;
  double sat_ratio5 = 1.7;             // I_sat,5 / I_sat,6
  double sat_ratio4 = 3.2;             // I_sat,4 / I_sat,6
};

struct QuadrupoleRates {
  double cycling;
  double non_cycling;
  double ratio;
};

QuadrupoleRates quadrupole_cycling_ratio(const QuadrupoleParams& p);

// ---- Rabi calibration ------------------------------------------------------------------

// Measured resonant Rabi frequencies keyed by an unordered level pair.
class RabiCalibration {
 public:
  static RabiCalibration defaults();

  void set(const Level& a, const Level& b, double omega);
  double get(const Level& a, const Level& b) const;  // throws if absent
  bool contains(const Level& a, const Level& b) const;
  const std::map<std::pair<Level, Level>, double>& entries() const { return table_; }

 private:
  static std::pair<Level, Level> key(const Level& a, const Level& b);
  std::map<std::pair<Level, Level>, double> table_;
};

}  // namespace mcm
