#pragma once

#include <cstdint>
#include <random>

#include "mcm/atomic_model.hpp"
#include "mcm/pulse_engine.hpp"

namespace mcm {

// Quasi-static field noise: one Gaussian deviate per shot, frozen for the whole
// shot.  `sigma` is the spread of mu_B * dB / hbar in rad/s; a level (f, m)
// moves by g_f * m times the deviate.  Vector Stark noise is lumped in.
struct NoiseModel {
  double sigma = 0.0;
  std::uint64_t seed = 1;
};

// Independent random streams derived from (seed, shot, stream).
enum class Stream : std::uint64_t { Noise = 1, Readout = 2, Spam = 3, Camera = 4, Amplitude = 5 };

std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 shot_rng(std::uint64_t seed, std::uint64_t shot, Stream stream);

double sample_noise(const NoiseModel& model, std::uint64_t shot);

LevelShifts zeeman_noise_shifts(const FieldEnvironment& env, double deviate);

// Coherence left in an equal superposition of |3,0> and |3,-1> after free
// evolution for time t, averaged over `shots` noise draws.
double shelved_ramsey_contrast(const NoiseModel& model, const FieldEnvironment& env, double t, int shots);

// Time at which the simulated shelved-state contrast falls to 1/e.
double simulated_t2star(const NoiseModel& model, const FieldEnvironment& env, int shots);

// Bisection for the sigma whose simulated 1/e time equals t2star.  Common random
// numbers (fixed seed) keep the objective monotone in sigma.
double calibrate_noise_sigma(double t2star, const FieldEnvironment& env, int shots, std::uint64_t seed);

inline constexpr double kShelvedT2Star = 3.2e-3;  // s

}  // namespace mcm
