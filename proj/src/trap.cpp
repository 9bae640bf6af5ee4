#include "mcm/trap.hpp"

#include <cmath>
#include <fmt/format.h>

namespace mcm {

void TrapPlan::check() const {
  if (rows < 1 || cols < 1) throw DomainError("trap array must be non-empty");
  auto sized = [](const std::vector<double>& v, int n) { return static_cast<int>(v.size()) == n; };
  if (!sized(row_start, rows) || !sized(row_end, rows) || !sized(col_start, cols) || !sized(col_end, cols)) {
    throw DomainError("tone amplitude lists must match the array dimensions");
  }
  for (const auto* v : {&row_start, &row_end, &col_start, &col_end}) {
    for (double a : *v) {
      if (!(a > 0.0)) throw DomainError("tone amplitudes must be positive");
    }
  }
  if (!(ramp_time > 0.0)) throw DomainError("ramp time must be positive");
  if (!(unit_depth > 0.0)) throw DomainError("unit depth must be positive");
}

double blackman_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = 0.42 * s - 0.5 * std::sin(kTwoPi * s) / kTwoPi + 0.08 * std::sin(2.0 * kTwoPi * s) / (2.0 * kTwoPi);
  return a / 0.42;
}

namespace {

std::vector<double> depths_at(const TrapPlan& p, double f) {
  p.check();
  std::vector<double> d(static_cast<size_t>(p.sites()));
  auto amp = [f](double a0, double a1) { return a0 * std::pow(a1 / a0, f); };
  for (int r = 0; r < p.rows; ++r) {
    const double ar = amp(p.row_start[static_cast<size_t>(r)], p.row_end[static_cast<size_t>(r)]);
    for (int c = 0; c < p.cols; ++c) {
      const double ac = amp(p.col_start[static_cast<size_t>(c)], p.col_end[static_cast<size_t>(c)]);
      d[static_cast<size_t>(p.site(r, c))] = p.unit_depth * ar * ar * ac * ac;
    }
  }
  return d;
}

}  // namespace

std::vector<double> trap_ramp(const TrapPlan& plan, double t) {
  if (!(t >= 0.0 && t <= plan.ramp_time)) {
    throw DomainError(fmt::format("ramp time {} s outside [0, {}] s", t, plan.ramp_time));
  }
  // Endpoints are exact: f = 0 and f = 1 give the start and end amplitudes.
  return depths_at(plan, blackman_step(t / plan.ramp_time));
}

std::vector<double> start_depths(const TrapPlan& plan) { return depths_at(plan, 0.0); }
std::vector<double> end_depths(const TrapPlan& plan) { return depths_at(plan, 1.0); }

bool is_raised_line(int index, int period) { return index % period == 1; }

TrapPlan scale_trap_plan(int rows, int cols, int period, double depth_ratio, ScaleMode mode, double unit_depth,
                         double ramp_time) {
  if (rows < 3 || cols < 3) throw DomainError("array must be at least 3x3");
  if (period < 2) throw DomainError("interleave period must be at least 2");
  if (!(depth_ratio >= 1.0)) throw DomainError("ancilla depth ratio must be >= 1");
  TrapPlan p;
  p.rows = rows;
  p.cols = cols;
  p.ramp_time = ramp_time;
  p.unit_depth = unit_depth;
  // Amplitudes: raised tones a+, lowered tones a-.
  double a_plus = 1.0, a_minus = 1.0;
  if (mode == ScaleMode::Balanced) {
    a_plus = std::pow(depth_ratio, 0.25);
    a_minus = 1.0 / a_plus;
  } else {
    a_plus = std::sqrt(std::sqrt(depth_ratio));  // (P+/P-)^2 = ratio with P- = 1
  }
  auto fill = [&](int n, std::vector<double>& s, std::vector<double>& e) {
    s.assign(static_cast<size_t>(n), 1.0);
    e.resize(static_cast<size_t>(n));
    int raised = 0;
    for (int i = 0; i < n; ++i) {
      const bool up = is_raised_line(i, period);
      raised += up;
      e[static_cast<size_t>(i)] = up ? a_plus : a_minus;
    }
    const double pp = a_plus * a_plus, pm = a_minus * a_minus;
    return (raised * pp + (n - raised) * pm) / n;
  };
  const double boost_r = fill(rows, p.row_start, p.row_end);
  const double boost_c = fill(cols, p.col_start, p.col_end);
  p.input_power_boost = std::max(boost_r, boost_c);
  return p;
}

TrapPlan default_trap_plan() {
  return scale_trap_plan(3, 3, 2, 1.8 / 0.85, ScaleMode::Balanced);
}

}  // namespace mcm
