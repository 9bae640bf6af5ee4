#include "mcm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "mcm/noise.hpp"

namespace mcm {

namespace {

using ojson = nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Walks one JSON object, tracking which keys were read so leftovers can be rejected.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const nlohmann::json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  void number(const std::string& key, double& out) {
    if (auto* v = find(key)) {
      if (!v->is_number()) throw ConfigError(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (auto* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
      out = v->get<Int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (auto* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (auto* v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void quantity(const std::string& key, Dimension dim, double& out) {
    if (auto* v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key), fmt::format("expected a {} with a unit suffix", dimension_name(dim)));
      try {
        out = parse_quantity(v->get<std::string>(), dim);
      } catch (const UnitError& e) {
        throw ConfigError(at(key), e.what());
      }
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) throw ConfigError(at(k), "unknown key");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string level_text(const Level& l) { return fmt::format("{},{}", l.f, l.m); }

}  // namespace

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

void RunConfig::check() const {
  auto wrap = [](const std::string& path, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
  };
  wrap("physics", [&] { sequence.env.check(); });
  wrap("readout", [&] { readout.check(); });
  wrap("spam", [&] { spam.check(); });
  if (sequence.echoes < 0) throw ConfigError("sequence.echoes", "must be non-negative");
  if (sequence.repumps < 0) throw ConfigError("sequence.repumps", "must be non-negative");
  wrap("sequence", [&] { (void)echo_group_sizes(sequence.echoes, sequence.repumps); });
  if (!(sequence.readout_time > 0.0)) throw ConfigError("sequence.readout_time", "must be positive");
  if (!(sequence.readout_saturation >= 0.0)) throw ConfigError("sequence.readout_saturation", "must be non-negative");
  if (!(sequence.pulse_gap >= 0.0)) throw ConfigError("sequence.pulse_gap", "must be non-negative");
  if (!(sequence.shiftout_pscat >= 0.0 && sequence.shiftout_pscat <= 1.0))
    throw ConfigError("sequence.shiftout_pscat", "must lie in [0,1]");
  if (!(noise.t2star > 0.0)) throw ConfigError("noise.t2star", "must be positive");
  if (noise.sigma && !(*noise.sigma >= 0.0)) throw ConfigError("noise.sigma", "must be non-negative");
  if (!(noise.amplitude_sigma >= 0.0 && noise.amplitude_sigma < 0.5))
    throw ConfigError("noise.amplitude_sigma", "must lie in [0, 0.5)");
  if (noise.calibration_shots < 100) throw ConfigError("noise.calibration_shots", "must be at least 100");
  if (execution.shots <= 0) throw ConfigError("execution.shots", "must be positive");
  if (execution.threads < 0) throw ConfigError("execution.threads", "must be non-negative");
  if (execution.output_dir.empty()) throw ConfigError("execution.output_dir", "must not be empty");
  if (!(isolation_window > 0.0)) throw ConfigError("isolation_window", "must be positive");
}

ojson RunConfig::to_json() const {
  using D = Dimension;
  const auto q = [](double v, D d) { return format_quantity(v, d); };
  ojson j;
  const auto& env = sequence.env;
  j["physics"] = {{"bias_field", q(env.bias_field, D::MagneticField)},
                  {"g3", env.g3},
                  {"g4", env.g4},
                  {"breit_rabi", env.breit_rabi},
                  {"g_j", env.g_j},
                  {"g_i", env.g_i},
                  {"hyperfine", q(env.omega_q, D::AngularFrequency)}};
  auto& rabi = j["calibration"]["rabi"] = ojson::array();
  for (const auto& [key, w] : sequence.rabi.entries())
    rabi.push_back({{"a", level_text(key.first)}, {"b", level_text(key.second)}, {"rabi", q(w, D::AngularFrequency)}});
  j["sequence"] = {{"echoes", sequence.echoes},
                   {"repumps", sequence.repumps},
                   {"readout_time", q(sequence.readout_time, D::Time)},
                   {"readout_saturation", sequence.readout_saturation},
                   {"readout_detuning", q(sequence.readout_detuning, D::AngularFrequency)},
                   {"shiftout_shift", q(sequence.shiftout_shift, D::AngularFrequency)},
                   {"shiftout_pscat", sequence.shiftout_pscat},
                   {"echo_shift", q(sequence.echo_shift, D::AngularFrequency)},
                   {"pulse_gap", q(sequence.pulse_gap, D::Time)},
                   {"include_prep", sequence.include_prep},
                   {"include_blowaway", sequence.include_blowaway},
                   {"isolation_window", isolation_window}};
  j["readout"] = {{"linewidth", q(readout.gamma, D::AngularFrequency)},
                  {"eta", readout.eta},
                  {"p_depump", readout.p_depump},
                  {"depump_weights", readout.depump_weights},
                  {"pump_leak", readout.pump_leak},
                  {"initial_temperature", q(readout.initial_temperature, D::Temperature)},
                  {"dff_per_photon", q(readout.dff_per_photon, D::Temperature)},
                  {"loss", readout.loss},
                  {"camera_background", readout.camera_background},
                  {"camera_sigma", readout.camera_sigma},
                  {"threshold_sigmas", readout.threshold_sigmas},
                  {"wavelength", q(readout.wavelength, D::Length)}};
  j["spam"] = {{"loss_pre", spam.loss_pre},
               {"loss_post", spam.loss_post},
               {"prep3", spam.prep3},
               {"prep4", spam.prep4},
               {"blowaway", spam.blowaway}};
  j["noise"] = {{"t2star", q(noise.t2star, D::Time)},
                {"sigma", noise.sigma ? ojson(q(*noise.sigma, D::AngularFrequency)) : ojson()},
                {"amplitude_sigma", noise.amplitude_sigma},
                {"calibration_shots", noise.calibration_shots}};
  j["execution"] = {{"shots", execution.shots},
                    {"seed", execution.seed},
                    {"output_dir", execution.output_dir},
                    {"threads", execution.threads}};
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  using D = Dimension;
  RunConfig c;
  Reader root(j, "");
  if (auto* v = root.find("physics")) {
    Reader r(*v, "physics");
    auto& env = c.sequence.env;
    r.quantity("bias_field", D::MagneticField, env.bias_field);
    r.number("g3", env.g3);
    r.number("g4", env.g4);
    r.boolean("breit_rabi", env.breit_rabi);
    r.number("g_j", env.g_j);
    r.number("g_i", env.g_i);
    r.quantity("hyperfine", D::AngularFrequency, env.omega_q);
    r.finish();
  }
  if (auto* v = root.find("calibration")) {
    Reader r(*v, "calibration");
    if (auto* rabi = r.find("rabi")) {
      if (!rabi->is_array()) throw ConfigError("calibration.rabi", "expected an array");
      RabiCalibration cal;
      for (std::size_t i = 0; i < rabi->size(); ++i) {
        const auto path = fmt::format("calibration.rabi[{}]", i);
        Reader e((*rabi)[i], path);
        std::string a, b;
        double w = 0.0;
        e.string("a", a);
        e.string("b", b);
        e.quantity("rabi", D::AngularFrequency, w);
        e.finish();
        try {
          cal.set(parse_level(a), parse_level(b), w);
        } catch (const std::exception& ex) {
          throw ConfigError(path, ex.what());
        }
      }
      c.sequence.rabi = cal;
    }
    r.finish();
  }
  if (auto* v = root.find("sequence")) {
    Reader r(*v, "sequence");
    auto& s = c.sequence;
    r.integer("echoes", s.echoes);
    r.integer("repumps", s.repumps);
    r.quantity("readout_time", D::Time, s.readout_time);
    r.number("readout_saturation", s.readout_saturation);
    r.quantity("readout_detuning", D::AngularFrequency, s.readout_detuning);
    r.quantity("shiftout_shift", D::AngularFrequency, s.shiftout_shift);
    r.number("shiftout_pscat", s.shiftout_pscat);
    r.quantity("echo_shift", D::AngularFrequency, s.echo_shift);
    r.quantity("pulse_gap", D::Time, s.pulse_gap);
    r.boolean("include_prep", s.include_prep);
    r.boolean("include_blowaway", s.include_blowaway);
    r.number("isolation_window", c.isolation_window);
    r.finish();
  }
  if (auto* v = root.find("readout")) {
    Reader r(*v, "readout");
    auto& p = c.readout;
    r.quantity("linewidth", D::AngularFrequency, p.gamma);
    r.number("eta", p.eta);
    r.number("p_depump", p.p_depump);
    if (auto* w = r.find("depump_weights")) {
      if (!w->is_array() || w->size() != 3) throw ConfigError("readout.depump_weights", "expected three numbers");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*w)[i].is_number()) throw ConfigError(fmt::format("readout.depump_weights[{}]", i), "expected a number");
        p.depump_weights[i] = (*w)[i].get<double>();
      }
    }
    r.number("pump_leak", p.pump_leak);
    r.quantity("initial_temperature", D::Temperature, p.initial_temperature);
    r.quantity("dff_per_photon", D::Temperature, p.dff_per_photon);
    r.boolean("loss", p.loss);
    r.number("camera_background", p.camera_background);
    r.number("camera_sigma", p.camera_sigma);
    r.number("threshold_sigmas", p.threshold_sigmas);
    r.quantity("wavelength", D::Length, p.wavelength);
    r.finish();
  }
  if (auto* v = root.find("spam")) {
    Reader r(*v, "spam");
    r.number("loss_pre", c.spam.loss_pre);
    r.number("loss_post", c.spam.loss_post);
    r.number("prep3", c.spam.prep3);
    r.number("prep4", c.spam.prep4);
    r.number("blowaway", c.spam.blowaway);
    r.finish();
  }
  if (auto* v = root.find("noise")) {
    Reader r(*v, "noise");
    r.quantity("t2star", D::Time, c.noise.t2star);
    if (auto* s = r.find("sigma"); s && !s->is_null()) {
      double sigma = 0.0;
      r.quantity("sigma", D::AngularFrequency, sigma);
      c.noise.sigma = sigma;
    }
    r.number("amplitude_sigma", c.noise.amplitude_sigma);
    r.integer("calibration_shots", c.noise.calibration_shots);
    r.finish();
  }
  if (auto* v = root.find("execution")) {
    Reader r(*v, "execution");
    r.integer("shots", c.execution.shots);
    r.integer("seed", c.execution.seed);
    r.string("output_dir", c.execution.output_dir);
    r.integer("threads", c.execution.threads);
    r.finish();
  }
  root.finish();
  c.check();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
  return from_json(j);
}

double RunConfig::resolved_noise_sigma() const {
  if (noise.sigma) return *noise.sigma;
  // Fixed calibration stream: sigma depends on the target alone, not on the run seed.
  return calibrate_noise_sigma(noise.t2star, sequence.env, noise.calibration_shots, 1);
}

SimulationConfig RunConfig::simulation() const {
  SimulationConfig s;
  s.readout = readout;
  s.spam = spam;
  s.noise.sigma = resolved_noise_sigma();
  s.noise.seed = execution.seed;
  s.amplitude_sigma = noise.amplitude_sigma;
  s.engine.window_factor = isolation_window;
  s.threads = execution.threads;
  return s;
}

RunConfig load_config(const std::optional<std::string>& path) {
  if (path) return RunConfig::load(*path);
  if (const char* env = std::getenv(kConfigEnv); env && *env) return RunConfig::load(env);
  RunConfig c;
  c.check();
  return c;
}

}  // namespace mcm
