#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "mcm/sequence.hpp"
#include "mcm/simulator.hpp"

namespace mcm {

// Schema violation; `path` locates the offending field ("readout.eta").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct NoiseSettings {
  double t2star = 3.2e-3;               // target for calibrating the Zeeman deviate, s
  std::optional<double> sigma;          // rad/s; absent: calibrate against t2star
  double amplitude_sigma = 0.02;        // fractional microwave amplitude deviate
  int calibration_shots = 20000;
};

struct ExecutionSettings {
  std::int64_t shots = 10000;
  std::uint64_t seed = 1;
  std::string output_dir = "mcm-out";
  int threads = 0;
};

struct RunConfig {
  SequenceConfig sequence;
  ReadoutParams readout;
  SpamInjection spam;
  NoiseSettings noise;
  ExecutionSettings execution;
  double isolation_window = 100.0;      // rotating-wave window in units of the pulse Rabi frequency

  void check() const;  // throws ConfigError
  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);  // unknown keys rejected
  static RunConfig load(const std::string& path);

  // Noise sigma after calibration, if not pinned.
  double resolved_noise_sigma() const;
  SimulationConfig simulation() const;
};

// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "MCM_CONFIG";

// Explicit path, else $MCM_CONFIG, else built-in defaults.
RunConfig load_config(const std::optional<std::string>& path);

}  // namespace mcm
