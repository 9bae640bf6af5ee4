#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "mcm/noise.hpp"
#include "mcm/pulse_engine.hpp"
#include "mcm/sequence.hpp"

namespace mcm {

// Fluorescence readout physics.  Rates follow from the light parameters stored in
// the sequence; the knobs below are the calibration constants of the model.
struct ReadoutParams {
  double gamma = kTwoPi * 5.2e6;     // 6p3/2 decay rate, rad/s
  double eta = 0.005;                // photoelectrons per scattered photon
  double p_depump = 2e-3;            // per scattered photon, from |4,4> into f=3
  std::array<double, 3> depump_weights{0.2, 0.3, 0.5};  // landing in |3,1>, |3,2>, |3,3>
  double pump_leak = 0.03;           // |4,m<=0> -> {|3,0>, |3,-1>} while being pumped to |4,4>
  double initial_temperature = 10e-6;  // K
  double dff_per_photon = 0.05e-6;   // K of motional energy per photon on top of recoil
  bool loss = true;                  // atom lost once its energy exceeds the trap depth
  double camera_background = 5.0;    // mean photoelectron-equivalent counts
  double camera_sigma = 2.5;
  double threshold_sigmas = 6.4;     // threshold above the background mean
  double wavelength = 852.347e-9;    // m, cycling line

  void check() const;
  double recoil_energy() const;      // J, one photon
  double heating_per_photon() const; // J, absorption + emission recoil plus DFF
  double initial_energy() const;     // J
  double threshold() const { return camera_background + threshold_sigmas * camera_sigma; }
};

// Injected state-preparation and measurement errors.
struct SpamInjection {
  double loss_pre = 0.0115;    // atom lost before the measurement window
  double loss_post = 0.0115;   // atom lost before the final occupancy image
  double prep3 = 0.006;        // prepared in |3,m>0> instead of |3,0>
  double prep4 = 0.009;        // prepared in |4,m>0>
  double blowaway = 0.005;     // an f=4 atom survives the blowaway

  void check() const;
};

struct SimulationConfig {
  ReadoutParams readout;
  NoiseModel noise;                 // quasi-static Zeeman deviate
  double amplitude_sigma = 0.02;    // fractional shot-to-shot microwave amplitude deviate
  SpamInjection spam;
  PulseEngineOptions engine;
  double trap_shift_per_kelvin = kTwoPi * 3.2e6;  // differential f=4 shift per K of extra depth, rad/s
  bool scattering = true;           // stochastic light physics; off gives an ideal coherent run
  int threads = 0;                  // 0: hardware concurrency

  void check() const;
};

// Outcome for one simulated atom.
struct AtomOutcome {
  int site = 0;
  bool prepared_ok = true;   // no injected preparation error
  bool present_at_mcm = true;
  bool retained = false;     // present in the final occupancy image
  bool lost_in_readout = false;
  std::int64_t photons = 0;  // scattered inside the camera window
  double f4_at_readout = 0.0;  // f=4 population when the first light segment starts
};

struct ShotRecord {
  std::uint64_t shot = 0;
  std::int64_t ancilla_counts = 0;  // photoelectrons, camera noise included
  std::vector<AtomOutcome> atoms;   // ancilla first, then data sites
};

// A sequence lowered for repeated simulation: concurrent events merged, pulses
// deduplicated per site class, unitaries cached per quantized noise value.
class CompiledSequence {
 public:
  CompiledSequence(const SequenceIR& ir, const SimulationConfig& cfg);
  ~CompiledSequence();
  CompiledSequence(const CompiledSequence&) = delete;
  CompiledSequence& operator=(const CompiledSequence&) = delete;

  ShotRecord run_shot(std::uint64_t shot) const;
  std::vector<ShotRecord> run(std::uint64_t first_shot, std::uint64_t count) const;

  // Ideal coherent propagator of one data site through the whole schedule
  // (light segments as free evolution, no noise, no SPAM).
  Unitary data_unitary() const;

  const SequenceIR& ir() const { return ir_; }
  const std::vector<int>& simulated_sites() const { return sites_; }

 private:
  struct Impl;
  SequenceIR ir_;
  SimulationConfig cfg_;
  std::vector<int> sites_;
  std::unique_ptr<Impl> impl_;
};

// Fidelity of the clock-qubit block of `u` against the closest phase gate
// diag(1, e^{i phi}); leakage out of the block lowers it.
struct PhaseGateFit {
  double fidelity;
  double phase;
};
PhaseGateFit phase_gate_fidelity(const Unitary& u);

// Gauss-Hermite nodes used to discretize the amplitude deviate.
inline constexpr int kAmplitudeNodes = 5;

}  // namespace mcm
