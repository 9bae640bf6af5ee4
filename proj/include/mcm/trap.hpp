#pragma once

#include <vector>

#include "mcm/atomic_model.hpp"

namespace mcm {

// Crossed-deflector trap array.  Each row and column is one deflector tone; a
// site's depth is unit_depth * P_row * P_col with P the tone power (amplitude^2).
struct TrapPlan {
  int rows = 3;
  int cols = 3;
  std::vector<double> row_start, row_end;  // tone amplitudes
  std::vector<double> col_start, col_end;
  double ramp_time = 200e-6;   // s
  double unit_depth = 0.85e-3;  // K, depth at unit row and column power
  double input_power_boost = 1.0;  // total deflector input power, end relative to start

  void check() const;
  int site(int r, int c) const { return r * cols + c; }
  int sites() const { return rows * cols; }
};

// Monotone Blackman step: cumulative Blackman window on [0, 1].
double blackman_step(double s);

// Per-site depths (K) at time t into the ramp.  Amplitudes are interpolated
// geometrically with a Blackman step so a product of a rising and a falling tone
// never overshoots.  Throws DomainError for t outside [0, ramp_time].
std::vector<double> trap_ramp(const TrapPlan& plan, double t);

// Depths at t = ramp_time.
std::vector<double> end_depths(const TrapPlan& plan);
std::vector<double> start_depths(const TrapPlan& plan);

enum class ScaleMode {
  Balanced,   // P- = 1/P+: sites on one raised and one lowered line keep their depth
  HoldMinus,  // P- held at 1 by boosting the deflector input power
};

// Raised ("+") lines are those with index % period == 1; ancilla sites sit where
// two raised lines cross.  `depth_ratio` is the ancilla depth gain (P+/P-)^2 in
// HoldMinus mode and P+^2 in Balanced mode.
TrapPlan scale_trap_plan(int rows, int cols, int period, double depth_ratio, ScaleMode mode,
                         double unit_depth = 0.85e-3, double ramp_time = 200e-6);

// 3x3 demonstration plan: centre site 0.85 mK -> 1.8 mK.
TrapPlan default_trap_plan();

bool is_raised_line(int index, int period);

}  // namespace mcm
