#include "mcm/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fmt/format.h>

namespace mcm {

namespace {

struct UnitEntry {
  std::string_view symbol;
  Dimension dim;
  double scale;
};

// "u" is accepted as an ASCII spelling of the micro prefix.
constexpr std::array kUnits{
    UnitEntry{"Hz", Dimension::AngularFrequency, kTwoPi},
    UnitEntry{"kHz", Dimension::AngularFrequency, kTwoPi * 1e3},
    UnitEntry{"MHz", Dimension::AngularFrequency, kTwoPi * 1e6},
    UnitEntry{"GHz", Dimension::AngularFrequency, kTwoPi * 1e9},
    UnitEntry{"rad/s", Dimension::AngularFrequency, 1.0},
    UnitEntry{"s", Dimension::Time, 1.0},
    UnitEntry{"ms", Dimension::Time, 1e-3},
    UnitEntry{"us", Dimension::Time, 1e-6},
    UnitEntry{"\xC2\xB5s", Dimension::Time, 1e-6},
    UnitEntry{"ns", Dimension::Time, 1e-9},
    UnitEntry{"K", Dimension::Temperature, 1.0},
    UnitEntry{"mK", Dimension::Temperature, 1e-3},
    UnitEntry{"uK", Dimension::Temperature, 1e-6},
    UnitEntry{"\xC2\xB5K", Dimension::Temperature, 1e-6},
    UnitEntry{"T", Dimension::MagneticField, 1.0},
    UnitEntry{"mT", Dimension::MagneticField, 1e-3},
    UnitEntry{"G", Dimension::MagneticField, 1e-4},
    UnitEntry{"W/m2", Dimension::Intensity, 1.0},
    UnitEntry{"m", Dimension::Length, 1.0},
    UnitEntry{"mm", Dimension::Length, 1e-3},
    UnitEntry{"um", Dimension::Length, 1e-6},
    UnitEntry{"\xC2\xB5m", Dimension::Length, 1e-6},
    UnitEntry{"nm", Dimension::Length, 1e-9},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::AngularFrequency: return "frequency";
    case Dimension::Time: return "time";
    case Dimension::Temperature: return "temperature";
    case Dimension::MagneticField: return "magnetic field";
    case Dimension::Intensity: return "intensity";
    case Dimension::Length: return "length";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "?";
}

double parse_quantity(std::string_view text, Dimension dim) {
  std::string_view s = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || !std::isfinite(value)) {
    throw UnitError(fmt::format("cannot parse number in '{}'", text));
  }
  std::string_view unit = trim(std::string_view(ptr, static_cast<size_t>(s.data() + s.size() - ptr)));
  if (dim == Dimension::Dimensionless) {
    if (!unit.empty()) throw UnitError(fmt::format("'{}' must be dimensionless", text));
    return value;
  }
  if (unit.empty()) {
    throw UnitError(fmt::format("'{}' is missing a {} unit suffix", text, dimension_name(dim)));
  }
  for (const auto& u : kUnits) {
    if (u.symbol == unit) {
      if (u.dim != dim) {
        throw UnitError(fmt::format("unit '{}' in '{}' is not a {} unit", unit, text, dimension_name(dim)));
      }
      return value * u.scale;
    }
  }
  throw UnitError(fmt::format("unknown unit '{}' in '{}'", unit, text));
}

std::string format_quantity(double v, Dimension dim) {
  switch (dim) {
    case Dimension::AngularFrequency: {
      // Hz reads better but the 2 pi division does not always survive the round trip.
      std::string hz = fmt::format("{} Hz", v / kTwoPi);
      return parse_quantity(hz, dim) == v ? hz : fmt::format("{} rad/s", v);
    }
    case Dimension::Time: return fmt::format("{} s", v);
    case Dimension::Temperature: return fmt::format("{} K", v);
    case Dimension::MagneticField: return fmt::format("{} T", v);
    case Dimension::Intensity: return fmt::format("{} W/m2", v);
    case Dimension::Length: return fmt::format("{} m", v);
    case Dimension::Dimensionless: return fmt::format("{}", v);
  }
  return {};
}

}  // namespace mcm
