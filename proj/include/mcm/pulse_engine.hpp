#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mcm/atomic_model.hpp"

namespace mcm {

using Complex = std::complex<double>;
using StateVector = Eigen::Matrix<Complex, kNumLevels, 1>;
using Unitary = Eigen::Matrix<Complex, kNumLevels, kNumLevels>;
using Mat2 = Eigen::Matrix<Complex, 2, 2>;

// Additive per-level energy offsets (rad/s) on top of the static Zeeman energies:
// noise, trap Stark shifts, site-selective light shifts.
using LevelShifts = std::array<double, kNumLevels>;

inline LevelShifts zero_shifts() { return LevelShifts{}; }

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AtomState {
  StateVector amp = StateVector::Zero();
  bool lost = false;
  double motional_energy = 0.0;  // J

  static AtomState basis(const Level& l);
  double norm() const { return amp.squaredNorm(); }
  double population(const Level& l) const { return std::norm(amp[l.index()]); }
};

enum class PulseKind { Plain, CorpseSegment };

// One square microwave pulse.  The anchor transition fixes the carrier
// (resonance + detuning) and the meaning of `rabi` and `phase`; every other
// transition inside the rotating-wave window is driven with a Rabi frequency
// scaled by its coupling relative to the anchor.
struct PulseOp {
  PulseKind kind = PulseKind::Plain;
  Level lower{3, 0};  // f=3 end of the anchor
  Level upper{4, 0};  // f=4 end of the anchor
  double rabi = 0.0;       // rad/s
  double detuning = 0.0;   // carrier minus anchor resonance, rad/s
  double phase = 0.0;      // rad
  double duration = 0.0;   // s
  Polarization polarization{Complex{0.0}, Complex{1.0}, Complex{0.0}};
  std::uint32_t site_mask = 0xffffffffu;

  void check() const;
};

struct PulseEngineOptions {
  // A transition is kept iff |carrier - resonance| < window_factor * rabi.
  double window_factor = 100.0;
};

// Precomputed coupled blocks for one pulse.  Construction depends only on the
// pulse and the field; shifts are supplied per application.
class PulsePropagator {
 public:
  PulsePropagator(const PulseOp& op, const FieldEnvironment& env, const PulseEngineOptions& opts = {});

  void apply(StateVector& psi, const LevelShifts& shifts) const;
  Unitary unitary(const LevelShifts& shifts) const;
  const PulseOp& op() const { return op_; }
  // Number of transitions kept inside the rotating-wave window.
  int transitions() const { return transitions_; }

 private:
  struct Block {
    std::vector<int> levels;
    Eigen::MatrixXcd h;  // frame diagonal + couplings, shifts excluded
  };
  Eigen::MatrixXcd block_unitary(const Block& b, const LevelShifts& shifts) const;

  PulseOp op_;
  std::array<double, kNumLevels> frame_{};  // diagonal of the bare-frame transform
  std::vector<Block> blocks_;
  std::array<int, kNumLevels> block_of_{};   // -1 when uncoupled
  int transitions_ = 0;
};

// Advances a normalized, present atom by one pulse.  Throws DomainError when the
// input norm deviates from 1 by more than 1e-9.
void apply_pulse(AtomState& state, const PulseOp& op, const FieldEnvironment& env,
                 const LevelShifts& shifts = zero_shifts(), const PulseEngineOptions& opts = {});

Unitary pulse_unitary(const PulseOp& op, const FieldEnvironment& env, const LevelShifts& shifts = zero_shifts(),
                      const PulseEngineOptions& opts = {});

// Free evolution in the bare frame: only the shifts act.
void free_evolution(StateVector& psi, double t, const LevelShifts& shifts);

// Two-level propagator in the same frame convention as the engine.  Basis (lower, upper).
Mat2 two_level_unitary(double rabi, double detuning, double phase, double t);

// Three segments (420, 300, 60 degrees) with phases (phi, phi+pi, phi).
std::array<PulseOp, 3> corpse(const PulseOp& pi_pulse_template);
std::array<PulseOp, 3> corpse(const Level& a, const Level& b, double rabi, double phase,
                              const Polarization& pol = {Complex{0.0}, Complex{1.0}, Complex{0.0}});

// Plain square pulse of rotation angle `angle` on the anchor (a, b).
PulseOp rotation(const Level& a, const Level& b, double rabi, double angle, double phase,
                 const Polarization& pol = {Complex{0.0}, Complex{1.0}, Complex{0.0}});

// ---- polarization synthesis ----------------------------------------------------------

struct HornDrive {
  Polarization horn1{Complex{0.5}, Complex{0.70710678118654752}, Complex{0.5}};
  Polarization horn2{Complex{0.5}, Complex{0.70710678118654752}, Complex{-0.5}};
  Complex amp1{1.0, 0.0};
  Complex amp2{1.0, 0.0};

  Polarization synthesize(double horn_phase) const;
};

// |coupling(4,0 <-> 3,-1)| / |coupling(3,0 <-> 4,-1)| at the given horn phase.
double shelving_rabi_ratio(const HornDrive& drive, double horn_phase);

struct RatioInterval {
  double lo;
  double hi;
};
RatioInterval achievable_ratio_interval(const HornDrive& drive);

struct HornSolution {
  double horn_phase;   // rad in [0, 2pi)
  double ratio;        // achieved coupling ratio
  Polarization polarization;
};

// Smallest horn phase in [0, 2pi) giving the requested ratio to 1e-9 relative.
// Throws SolverError naming the achievable interval when out of reach.
HornSolution solve_horn_phase(const HornDrive& drive, double target_ratio);

// Horn phase maximizing the fraction of field power in the anchor's component.
HornSolution best_horn_phase(const HornDrive& drive, const Level& a, const Level& b);

struct TwoPulseShelving {
  double detuning;   // rad/s
  double duration;   // s, per pulse
  double phase;      // relative phase of the second pulse
  double transfer;   // |4,0> -> |3,-1> population after both pulses
  double half_population;  // |3,-1> population after the first pulse
  double return_probability;  // |3,0> population after both pulses
};

// Two equal-length detuned pulses: 2pi rotations for the transition with rabi2,
// full transfer for the transition with rabi1 = ratio * rabi2.
TwoPulseShelving two_pulse_shelving_solve(double ratio, double rabi2);

}  // namespace mcm
