#pragma once

#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mcm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kBohrMagneton = 9.2740100783e-24; // J/T
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kCsMass = 132.905451961 * kAtomicMassUnit;
inline constexpr double kCsHyperfineHz = 9.192631770e9;

// Nuclear spin and electron angular momentum of the Cs ground state.
inline constexpr int kCsTwoI = 7;

class UnitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Dimension { AngularFrequency, Time, Temperature, MagneticField, Intensity, Length, Dimensionless };

std::string_view dimension_name(Dimension d);

// Parses "<number> <unit>" (whitespace optional). Frequencies given in Hz/kHz/MHz/GHz are
// converted to angular frequency (rad/s); "rad/s" is taken as-is.  Returns SI values:
// seconds, kelvin, tesla, metres.
double parse_quantity(std::string_view text, Dimension dim);

// Formats an SI value with a canonical unit so that parse_quantity(format_quantity(v,d),d)==v.
std::string format_quantity(double value, Dimension dim);

inline constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
inline constexpr double angular_to_hz(double w) { return w / kTwoPi; }

}  // namespace mcm
