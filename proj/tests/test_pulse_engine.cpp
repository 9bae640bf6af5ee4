#include <gtest/gtest.h>

#include <random>

#include "mcm/pulse_engine.hpp"
#include "oracles/oracles.hpp"

using namespace mcm;

namespace {

const FieldEnvironment kEnv;

// Bare-frame two-level pulse built from a dense matrix exponential.
Mat2 expm_two_level(double rabi, double detuning, double phase, double t) {
  const Complex g = 0.5 * rabi * std::exp(Complex(0.0, -phase));
  Eigen::MatrixXcd h(2, 2);
  h << 0.0, std::conj(g), g, -detuning;
  Mat2 u = oracle::expm_propagator(h, t);
  u.row(1) *= std::exp(Complex(0.0, -detuning * t));
  return u;
}

double rabi_formula(double rabi, double detuning, double t) {
  const double w2 = rabi * rabi + detuning * detuning;
  const double s = std::sin(0.5 * std::sqrt(w2) * t);
  return rabi * rabi / w2 * s * s;
}

Mat2 block(const Unitary& u, const Level& a, const Level& b) {
  Mat2 m;
  m << u(a.index(), a.index()), u(a.index(), b.index()), u(b.index(), a.index()), u(b.index(), b.index());
  return m;
}

}  // namespace

TEST(TwoLevel, MatchesMatrixExponential) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double rabi = 1e5 * (1.1 + u(rng)), det = 1e5 * u(rng), ph = 3.0 * u(rng), t = 3e-5 * (1.0 + u(rng));
    const Mat2 a = two_level_unitary(rabi, det, ph, t);
    const Mat2 b = expm_two_level(rabi, det, ph, t);
    EXPECT_LT((a - b).norm(), 1e-10) << i;
  }
}

TEST(TwoLevel, GeneralizedRabiFormula) {
  for (double det : {0.0, 0.3, 1.0, 2.5}) {
    for (double t : {0.5, 1.0, 3.14, 7.0}) {
      const Mat2 u = two_level_unitary(1.0, det, 0.4, t);
      EXPECT_NEAR(std::norm(u(1, 0)), rabi_formula(1.0, det, t), 1e-13);
    }
  }
}

TEST(PulseEngine, ClockPiPulseTransfers) {
  const double rabi = kTwoPi * 62.8e3;
  AtomState s = AtomState::basis(kQubit0);
  apply_pulse(s, rotation(kQubit0, kQubit1, rabi, kPi, 0.0), kEnv);
  EXPECT_NEAR(s.population(kQubit1), 1.0, 1e-12);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
}

TEST(PulseEngine, ClockBlockMatchesTwoLevelWithCarrierOffset) {
  PulseOp op = rotation(kQubit0, kQubit1, kTwoPi * 62.8e3, 1.3, 0.7);
  op.detuning = kTwoPi * 9e3;
  const Mat2 m = block(pulse_unitary(op, kEnv), kQubit0, kQubit1);
  const Mat2 ref = expm_two_level(op.rabi, op.detuning, op.phase, op.duration);
  // Equal up to a global phase of the block.
  const Complex ph = (ref.adjoint() * m).trace() / 2.0;
  EXPECT_NEAR(std::abs(ph), 1.0, 1e-10);
  EXPECT_LT((m - ph * ref).norm(), 1e-10);
}

TEST(PulseEngine, LevelShiftActsAsDetuning) {
  const double rabi = kTwoPi * 62.8e3;
  for (double frac : {0.1, 0.5, 1.0}) {
    LevelShifts sh = zero_shifts();
    sh[static_cast<size_t>(kQubit1.index())] = frac * rabi;
    PulseOp op = rotation(kQubit0, kQubit1, rabi, 2.2, 0.0);
    AtomState s = AtomState::basis(kQubit0);
    apply_pulse(s, op, kEnv, sh);
    EXPECT_NEAR(s.population(kQubit1), rabi_formula(rabi, frac * rabi, op.duration), 1e-10) << frac;
  }
}

TEST(PulseEngine, RandomPulsesStayUnitary) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto cal = RabiCalibration::defaults();
  std::vector<std::pair<Level, Level>> pairs;
  for (const auto& [k, v] : cal.entries()) pairs.push_back(k);
  for (int i = 0; i < 300; ++i) {
    const auto& [a, b] = pairs[static_cast<size_t>(i) % pairs.size()];
    PulseOp op = rotation(a, b, kTwoPi * 1e5 * (0.1 + u01(rng)), 0.0, kTwoPi * u01(rng));
    op.duration = 4e-5 * u01(rng);
    op.detuning = kTwoPi * 2e5 * (u01(rng) - 0.5);
    Polarization pol;
    for (auto& c : pol) c = std::polar(0.1 + u01(rng), kTwoPi * u01(rng));
    op.polarization = normalized(pol);
    const Unitary U = pulse_unitary(op, kEnv);
    EXPECT_LT((U.adjoint() * U - Unitary::Identity()).norm(), 1e-10) << i;
  }
}

TEST(PulseEngine, SpectatorScaledByClebschGordan) {
  // A sigma- drive on the 3,0 <-> 4,-1 anchor also reaches 3,1 <-> 4,0 if the window is wide
  // enough; with the linear Zeeman model that spectator is detuned by (g4 - g3) * muB * B * 1.
  PulseOp op = rotation({3, 0}, {4, -1}, kTwoPi * 22.4e3, kPi, 0.0, {1.0, 0.0, 0.0});
  PulseEngineOptions narrow;
  narrow.window_factor = 1.0;
  PulsePropagator p_narrow(op, kEnv, narrow);
  EXPECT_EQ(p_narrow.transitions(), 1);
  PulseEngineOptions wide;
  wide.window_factor = 1e6;
  PulsePropagator p_wide(op, kEnv, wide);
  EXPECT_EQ(p_wide.transitions(), 7);  // every sigma- pair 3,m <-> 4,m-1
  // Anchor block sees the requested rabi frequency.
  AtomState s = AtomState::basis({3, 0});
  apply_pulse(s, op, kEnv);
  EXPECT_NEAR(s.population({4, -1}), 1.0, 1e-10);
}

TEST(PulseEngine, RejectsBadInput) {
  EXPECT_THROW(rotation({3, 0}, {4, 0}, -1.0, kPi, 0.0), DomainError);
  EXPECT_THROW(rotation({3, 0}, {4, 0}, 1.0, -1.0, 0.0), DomainError);
  // Pure pi polarization cannot drive a sigma anchor.
  EXPECT_THROW(pulse_unitary(rotation({3, 0}, {4, 1}, 1e5, kPi, 0.0), kEnv), DomainError);
  AtomState s = AtomState::basis(kQubit0);
  s.amp *= 1.1;
  EXPECT_THROW(apply_pulse(s, rotation(kQubit0, kQubit1, 1e5, kPi, 0.0), kEnv), DomainError);
}

TEST(Corpse, SuppressesResonanceError) {
  const double rabi = kTwoPi * 62.8e3;
  const auto ideal = block(pulse_unitary(rotation(kQubit0, kQubit1, rabi, kPi, 0.0), kEnv), kQubit0, kQubit1);
  auto infidelity = [&](const Mat2& m) { return 1.0 - std::norm((ideal.adjoint() * m).trace() / 2.0); };
  for (double frac : {0.02, 0.05, 0.1}) {
    LevelShifts sh = zero_shifts();
    sh[static_cast<size_t>(kQubit1.index())] = frac * rabi;
    const double plain = infidelity(block(pulse_unitary(rotation(kQubit0, kQubit1, rabi, kPi, 0.0), kEnv, sh),
                                          kQubit0, kQubit1));
    Unitary c = Unitary::Identity();
    for (const auto& seg : corpse(kQubit0, kQubit1, rabi, 0.0)) c = pulse_unitary(seg, kEnv, sh) * c;
    EXPECT_LT(infidelity(block(c, kQubit0, kQubit1)), 0.1 * plain) << frac;
  }
  // Segment layout: 7pi/3, 5pi/3, pi/3 with the middle phase flipped.
  const auto seg = corpse(kQubit0, kQubit1, rabi, 0.3);
  EXPECT_NEAR(seg[0].duration * rabi, 7 * kPi / 3, 1e-12);
  EXPECT_NEAR(seg[1].duration * rabi, 5 * kPi / 3, 1e-12);
  EXPECT_NEAR(seg[2].duration * rabi, kPi / 3, 1e-12);
  EXPECT_NEAR(seg[1].phase - seg[0].phase, kPi, 1e-12);
}

TEST(Horn, SolvesRequestedRatio) {
  const HornDrive drive;
  const auto iv = achievable_ratio_interval(drive);
  EXPECT_LT(iv.lo, 2.0);
  EXPECT_GT(iv.hi, 2.0);
  for (double r : {0.5, 1.0, 2.0, 3.0}) {
    if (r < iv.lo || r > iv.hi) continue;
    const auto sol = solve_horn_phase(drive, r);
    EXPECT_NEAR(sol.ratio / r, 1.0, 1e-9);
    EXPECT_NEAR(shelving_rabi_ratio(drive, sol.horn_phase) / r, 1.0, 1e-9);
    // Coupling ratio from the synthesized field, computed through the coupling table.
    const double direct = std::abs(mw_coupling({4, 0}, {3, -1}, sol.polarization)) /
                          std::abs(mw_coupling({3, 0}, {4, -1}, sol.polarization));
    EXPECT_NEAR(direct / r, 1.0, 1e-9);
  }
  if (std::isfinite(iv.hi)) EXPECT_THROW(solve_horn_phase(drive, 2.0 * iv.hi), SolverError);
  EXPECT_THROW(solve_horn_phase(drive, -1.0), SolverError);
}

TEST(Horn, BestPhaseMaximizesComponent) {
  const HornDrive drive;
  const auto sol = best_horn_phase(drive, {3, 0}, {4, 0});
  const auto frac = [&](double x) {
    const auto p = drive.synthesize(x);
    return std::norm(p[1]) / (std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]));
  };
  for (int i = 0; i < 360; ++i) EXPECT_GE(frac(sol.horn_phase) + 1e-9, frac(kTwoPi * i / 360.0));
}

TEST(TwoPulse, TransfersAcrossAdmissibleRange) {
  const double rabi2 = 1.0;
  for (double ratio : {0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75}) {
    const auto s = two_pulse_shelving_solve(ratio, rabi2);
    // The reference transition makes a full 2 pi cycle per pulse.
    EXPECT_NEAR(std::hypot(rabi2, s.detuning) * s.duration, kTwoPi, 1e-9);
    // Replay through the matrix-exponential oracle starting in the upper level.
    const Mat2 a = expm_two_level(ratio * rabi2, s.detuning, 0.0, s.duration);
    const Mat2 b = expm_two_level(ratio * rabi2, s.detuning, s.phase, s.duration);
    EXPECT_GE(std::norm((b * a)(0, 1)), 0.999) << ratio;
    EXPECT_NEAR(std::norm((b * a)(0, 1)), s.transfer, 1e-9);
    EXPECT_GE(s.return_probability, 0.999);
  }
  for (double bad : {0.1, 0.2, 0.8, 0.95}) EXPECT_THROW(two_pulse_shelving_solve(bad, rabi2), SolverError);
}
