#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcm/sequence.hpp"
#include "mcm/simulator.hpp"

namespace mcm {

enum class Outcome { Dark, Bright };

// Bright iff count > threshold.
Outcome classify(std::int64_t count, double threshold);

// Binomial proportion with its standard error.
struct Proportion {
  std::int64_t hits = 0;
  std::int64_t trials = 0;
  double value() const { return trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
  double sigma() const;
};

struct ClassSummary {
  std::int64_t n = 0;
  double mean = 0.0;
  double sigma = 0.0;
};

// Integer-binned photoelectron counts with per-class summaries.  Classes are the
// true states of the measured atom at the start of the light (bright, dark, absent).
struct Histogram {
  std::vector<std::int64_t> bins;  // bins[c] = shots with count c
  double threshold = 0.0;
  ClassSummary bright, dark, absent;

  void add(std::int64_t count, std::optional<bool> truly_bright);
  void merge(const Histogram& other);
  std::int64_t total() const;
  // (threshold - dark mean) / dark sigma.
  double threshold_in_dark_sigmas() const;
  // (bright mean - dark mean) / (bright sigma + dark sigma).
  double separation() const;
  // Threshold minimizing the labelled misclassification count; ties go to the lowest.
  double optimal_threshold() const;
  std::int64_t misclassified(double threshold) const;

  std::string to_csv() const;  // bin_left,count
  nlohmann::ordered_json summary_json() const;

 private:
  // Per-class tallies for threshold sweeps and moments; index 0 bright, 1 dark, 2 absent.
  std::vector<std::int64_t> bright_bins_, dark_bins_;
  double sum_[3]{}, sum2_[3]{};
};

struct ExperimentResult {
  std::string input;
  std::int64_t shots = 0;
  Histogram histogram;
  Proportion ancilla_bright;          // classified bright
  Proportion ancilla_dark;            // classified dark
  Proportion ancilla_dark_given_ok;   // dark among correctly prepared atoms present at the start
  Proportion ancilla_bright_given_ok;
  Proportion data_retained;           // all data sites pooled
  std::vector<Proportion> site_retained;  // per simulated site, ancilla first
  std::vector<int> sites;
  Proportion ancilla_lost_in_readout;

  nlohmann::ordered_json to_json() const;
};

// Simulates `shots` repetitions of the given schedule starting at shot index `first_shot`.
ExperimentResult run_experiment(const SequenceIR& ir, const SimulationConfig& sim, std::int64_t shots,
                                std::uint64_t first_shot = 0);

// Convenience: build the MCM schedule for `input` (optional output rotation) and run it.
ExperimentResult run_mcm_experiment(SequenceConfig seq, const std::string& input, const SimulationConfig& sim,
                                    std::int64_t shots);

struct RamseyResult {
  std::vector<double> phases;
  std::vector<Proportion> retained;  // data sites pooled, per phase
  double amplitude = 0.0;            // A in A cos(phi - phi0) + B
  double offset = 0.0;               // B
  double phase = 0.0;                // phi0 in (-pi, pi]
  double contrast = 0.0;             // peak-to-peak 2A
  double minimum = 0.0;              // smallest measured retention

  nlohmann::ordered_json to_json() const;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Least-squares A cos(phi - phi0) + B.  Needs >= 8 points spanning 2 pi; throws FitError
// when the data carry no oscillation.
RamseyResult fit_ramsey(const std::vector<double>& phases, const std::vector<double>& values);

// pi/2 (input x), measurement, pi/2 with phase offset phi, blowaway readout of the data sites.
RamseyResult ramsey_scan(SequenceConfig seq, const SimulationConfig& sim, const std::vector<double>& phases,
                         std::int64_t shots_per_phase);

std::vector<double> uniform_phases(int n);

// Output rotation returning the ideal output of `input` under the phase gate
// diag(1, e^{-i phi0}) to |0>.
Rotation process_output_rotation(const std::string& input, double ramsey_phase);

inline const std::vector<std::string> kProcessInputs{"x", "-x", "y", "-y", "0", "1"};

}  // namespace mcm
