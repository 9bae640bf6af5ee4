#include <gtest/gtest.h>

#include "mcm/trap.hpp"
#include "oracles/oracles.hpp"

using namespace mcm;

TEST(Blackman, StepIsMonotoneWithExactEnds) {
  EXPECT_EQ(blackman_step(0.0), 0.0);
  EXPECT_EQ(blackman_step(1.0), 1.0);
  EXPECT_NEAR(blackman_step(0.5), 0.5, 1e-15);
  double prev = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double v = blackman_step(i / 1000.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
  // The step is the normalised integral of the Blackman window.
  auto window = [](double s) { return 0.42 - 0.5 * std::cos(2 * oracle::pi * s) + 0.08 * std::cos(4 * oracle::pi * s); };
  for (double s : {0.1, 0.3, 0.7}) EXPECT_NEAR(blackman_step(s), oracle::simpson(window, 0.0, s) / 0.42, 1e-12);
}

TEST(Trap, DefaultPlanDepths) {
  const TrapPlan p = default_trap_plan();
  const auto s = start_depths(p), e = end_depths(p);
  for (double d : s) EXPECT_NEAR(d, 0.85e-3, 1e-15);
  EXPECT_NEAR(e[static_cast<size_t>(p.site(1, 1))], 1.8e-3, 1e-15);
  // Edge-centre sites sit on one raised and one lowered line and keep their depth.
  for (auto [r, c] : std::vector<std::pair<int, int>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}})
    EXPECT_NEAR(e[static_cast<size_t>(p.site(r, c))], 0.85e-3, 1e-15);
  // Corners lose by the same factor the centre gains.
  EXPECT_NEAR(e[0] * e[static_cast<size_t>(p.site(1, 1))], 0.85e-3 * 0.85e-3, 1e-18);
}

TEST(Trap, RampHasNoOvershoot) {
  const TrapPlan p = default_trap_plan();
  const auto s = start_depths(p), e = end_depths(p);
  for (int i = 0; i <= 200; ++i) {
    const auto d = trap_ramp(p, p.ramp_time * i / 200.0);
    for (size_t k = 0; k < d.size(); ++k) {
      EXPECT_GE(d[k], std::min(s[k], e[k]) * (1 - 1e-12));
      EXPECT_LE(d[k], std::max(s[k], e[k]) * (1 + 1e-12));
    }
  }
  EXPECT_EQ(trap_ramp(p, 0.0), s);
  EXPECT_EQ(trap_ramp(p, p.ramp_time), e);
  EXPECT_THROW(trap_ramp(p, -1e-9), DomainError);
  EXPECT_THROW(trap_ramp(p, 2 * p.ramp_time), DomainError);
}

TEST(Trap, ScaledPlansHitTheRequestedRatio) {
  for (auto mode : {ScaleMode::Balanced, ScaleMode::HoldMinus}) {
    const TrapPlan p = scale_trap_plan(9, 7, 3, 2.5, mode);
    const auto s = start_depths(p), e = end_depths(p);
    for (int r = 0; r < p.rows; ++r)
      for (int c = 0; c < p.cols; ++c) {
        const size_t k = static_cast<size_t>(p.site(r, c));
        const bool rr = is_raised_line(r, 3), rc = is_raised_line(c, 3);
        if (rr && rc) {
          EXPECT_NEAR(e[k] / s[k], 2.5, 1e-12);
        } else if (mode == ScaleMode::Balanced && rr != rc) {
          EXPECT_NEAR(e[k] / s[k], 1.0, 1e-12);
        } else if (mode == ScaleMode::HoldMinus && !rr && !rc) {
          EXPECT_NEAR(e[k] / s[k], 1.0, 1e-12);
        }
      }
    if (mode == ScaleMode::HoldMinus) EXPECT_GT(p.input_power_boost, 1.0);
  }
  EXPECT_THROW(scale_trap_plan(2, 3, 2, 2.0, ScaleMode::Balanced), DomainError);
  EXPECT_THROW(scale_trap_plan(3, 3, 1, 2.0, ScaleMode::Balanced), DomainError);
  EXPECT_THROW(scale_trap_plan(3, 3, 2, 0.5, ScaleMode::Balanced), DomainError);
}

TEST(Trap, PlanValidation) {
  TrapPlan p = default_trap_plan();
  p.row_end.pop_back();
  EXPECT_THROW(p.check(), DomainError);
  p = default_trap_plan();
  p.col_start[0] = 0.0;
  EXPECT_THROW(p.check(), DomainError);
}
