#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mcm/budget.hpp"
#include "mcm/config.hpp"
#include "mcm/cooling.hpp"
#include "mcm/readout.hpp"
#include "mcm/report.hpp"
#include "mcm/reproduce.hpp"
#include "mcm/sequence.hpp"
#include "mcm/spam.hpp"

using namespace mcm;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

int report_error(const std::string& kind, const std::string& message, const std::string& path = "") {
  ojson e{{"error", kind}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  std::cerr << e.dump() << "\n";
  return kind == "config" ? kExitConfig : kExitNumeric;
}

double quantity(const std::string& text, Dimension d, const std::string& flag) {
  try {
    return parse_quantity(text, d);
  } catch (const UnitError& e) {
    throw ConfigError(flag, e.what());
  }
}

struct Common {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> shots;

  RunConfig load() const {
    RunConfig c = load_config(config);
    if (seed) c.execution.seed = *seed;
    if (shots) c.execution.shots = *shots;
    c.check();
    return c;
  }
  std::string dir(const RunConfig& c, const std::string& name) const {
    return out ? *out : c.execution.output_dir + "/" + name;
  }
};

ojson run_meta(const RunConfig& c, const std::string& command) {
  return {{"command", command}, {"seed", c.execution.seed}, {"config_sha256", sha256_hex(json_text(c.to_json()))}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mid-circuit measurement simulator and analytics"};
  app.require_subcommand(1);
  app.fallthrough();  // global --config and --out may follow the subcommand
  Common common;
  app.add_option("--config", common.config, fmt::format("Config file (default: ${} or built-in)", kConfigEnv));
  app.add_option("--out", common.out, "Output directory");

  // sequence
  auto* seq = app.add_subcommand("sequence", "Compile and inspect the MCM schedule");
  seq->require_subcommand(1);
  std::string seq_input = "0";
  auto* seq_dump = seq->add_subcommand("dump", "Write the canonical IR JSON");
  seq_dump->add_option("--input", seq_input, "Input state: 0, 1, x, -x, y, -y");
  auto* seq_validate = seq->add_subcommand("validate", "Run the IR checks and print the report");
  seq_validate->add_option("--input", seq_input, "Input state");

  // run
  auto* run = app.add_subcommand("run", "Simulate the MCM experiment");
  std::string run_input = "0";
  run->add_option("--shots", common.shots, "Number of shots");
  run->add_option("--seed", common.seed, "Random seed");
  run->add_option("--input", run_input, "Input state");

  // ramsey
  auto* ramsey = app.add_subcommand("ramsey", "Ramsey phase scan of the data qubits across the measurement");
  int ramsey_points = 12;
  ramsey->add_option("--points", ramsey_points, "Phase points");
  ramsey->add_option("--shots", common.shots, "Shots per phase");
  ramsey->add_option("--seed", common.seed, "Random seed");

  // spam
  auto* spam = app.add_subcommand("spam", "SPAM correction");
  spam->require_subcommand(1);
  auto* spam_correct = spam->add_subcommand("correct", "Correct raw fidelities");
  std::optional<std::string> spam_inputs;
  bool spam_independent = false, spam_jacobian = false;
  spam_correct->add_option("--inputs", spam_inputs, "Inputs JSON (default: published values)");
  spam_correct->add_flag("--independent", spam_independent, "Average rows as independent");
  spam_correct->add_flag("--jacobian", spam_jacobian, "Full-Jacobian propagation for ratios");

  // budget
  auto* budget = app.add_subcommand("budget", "Analytic error budgets");
  budget->require_subcommand(1);
  std::string lifetime = "165 ns", detuning = "-24 GHz", rabi_mw = "22.4 kHz", shift;
  std::string duration = "4 ms";
  std::optional<double> target;
  double eta = 0.005, saturation = 3.0;
  std::string readout_detuning = "-10.4 MHz";
  auto* b_shift = budget->add_subcommand("shiftout", "Shift-out scattering and rotation errors");
  b_shift->add_option("--lifetime", lifetime, "Excited-state lifetime");
  b_shift->add_option("--detuning", detuning, "Shift-out detuning from the f=4 line");
  b_shift->add_option("--rabi", rabi_mw, "Microwave Rabi frequency");
  b_shift->add_option("--shift", shift, "Differential light shift (default: compiled sequence value)");
  auto* b_photons = budget->add_subcommand("photons", "Readout photon and time budget");
  b_photons->add_option("--duration", duration, "Readout duration");
  b_photons->add_option("--target", target, "Photoelectron target (overrides --duration)");
  b_photons->add_option("--eta", eta, "Photoelectrons per scattered photon");
  b_photons->add_option("--saturation", saturation, "I/I_sat on the cycling line");
  b_photons->add_option("--detuning", readout_detuning, "Readout detuning");
  auto* b_opt = budget->add_subcommand("optimize", "Optimal shift-out epsilon and minimum error");
  b_opt->add_option("--lifetime", lifetime, "Excited-state lifetime");

  // cooling
  auto* cooling = app.add_subcommand("cooling", "Sisyphus cooling model");
  cooling->require_subcommand(1);
  double c_ratio = 0.3, c_lo = 0.1, c_hi = 10.0;
  int c_points = 61;
  std::vector<double> molasses;
  bool no_saturation = false;
  auto* c_rate = cooling->add_subcommand("rate", "Cooling rate at one trap frequency");
  c_rate->add_option("--ratio", c_ratio, "omega_g / gamma");
  auto* c_scan = cooling->add_subcommand("scan", "Cooling rate versus omega_g / gamma");
  c_scan->add_option("--lo", c_lo, "Lowest ratio");
  c_scan->add_option("--hi", c_hi, "Highest ratio");
  c_scan->add_option("--points", c_points, "Grid points (log-spaced)");
  c_scan->add_option("--molasses", molasses, "Molasses scattering rates for crossover points, 1/s");
  for (auto* c : {c_rate, c_scan}) c->add_flag("--no-saturation", no_saturation, "Drop I/I_s from the Lorentzian");

  // reproduce-paper
  auto* repro = app.add_subcommand("reproduce-paper", "Run every acceptance check and print a pass/fail table");
  std::vector<std::string> only;
  ReproduceOptions ropts;
  repro->add_option("--only", only, "Criterion keys or numbers")->delimiter(',');
  repro->add_option("--seed", common.seed, "Random seed");
  repro->add_option("--shots", ropts.shots, "Shots per end-to-end experiment");
  repro->add_option("--ramsey-shots", ropts.ramsey_shots, "Shots per Ramsey phase");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (seq->parsed()) {
      const RunConfig cfg = common.load();
      SequenceConfig sc = cfg.sequence;
      sc.input = seq_input;
      const SequenceIR ir = build_mcm_sequence(sc);
      if (seq_dump->parsed()) {
        const std::string text = dump_canonical(ir);
        if (common.out) {
          RunDirectory dir(*common.out);
          dir.write("sequence.json", text);
          dir.finalize(run_meta(cfg, "sequence dump"));
        } else {
          std::cout << text;
        }
        return 0;
      }
      const auto rep = validate(ir);
      std::cout << json_text(rep.to_json());
      return rep.ok ? 0 : kExitFail;
    }

    if (run->parsed()) {
      const RunConfig cfg = common.load();
      const auto res = run_mcm_experiment(cfg.sequence, run_input, cfg.simulation(), cfg.execution.shots);
      RunDirectory dir(common.dir(cfg, "run"));
      dir.write_json("config.json", cfg.to_json());
      dir.write_json("result.json", res.to_json());
      dir.write("histogram.csv", res.histogram.to_csv());
      dir.finalize(run_meta(cfg, "run"));
      std::cout << fmt::format("P(bright) = {:.4f} +- {:.4f}, data retained = {:.4f}  ->  {}\n",
                               res.ancilla_bright.value(), res.ancilla_bright.sigma(), res.data_retained.value(),
                               dir.path().string());
      return 0;
    }

    if (ramsey->parsed()) {
      RunConfig cfg = common.load();
      const auto res = ramsey_scan(cfg.sequence, cfg.simulation(), uniform_phases(ramsey_points),
                                   common.shots ? *common.shots : 2500);
      RunDirectory dir(common.dir(cfg, "ramsey"));
      dir.write_json("config.json", cfg.to_json());
      dir.write_json("ramsey.json", res.to_json());
      std::string csv = "phase_rad,retained,sigma\n";
      for (std::size_t i = 0; i < res.phases.size(); ++i)
        csv += fmt::format("{:.6f},{:.6f},{:.6f}\n", res.phases[i], res.retained[i].value(), res.retained[i].sigma());
      dir.write("ramsey.csv", csv);
      dir.finalize(run_meta(cfg, "ramsey"));
      std::cout << fmt::format("contrast = {:.4f}, phase = {:.4f} rad  ->  {}\n", res.contrast, res.phase,
                               dir.path().string());
      return 0;
    }

    if (spam_correct->parsed()) {
      SpamInputs in = SpamInputs::published();
      if (spam_inputs) {
        std::ifstream f(*spam_inputs);
        if (!f) throw ConfigError(*spam_inputs, "cannot open inputs file");
        try {
          in = SpamInputs::from_json(nlohmann::json::parse(f));
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(*spam_inputs, e.what());
        } catch (const std::invalid_argument& e) {
          throw ConfigError(*spam_inputs, e.what());
        }
      }
      const auto rep = spam_report(in, spam_independent ? Correlation::Independent : Correlation::Correlated,
                                   spam_jacobian ? Propagation::Jacobian : Propagation::SplitRatio);
      std::cout << rep.to_csv();
      std::cout << fmt::format("ancilla: P(D|0) = {:.4f}({:.4f}), P(B|1) = {:.4f}({:.4f})\n",
                               rep.ancilla.dark_given_0.value, rep.ancilla.dark_given_0.sigma,
                               rep.ancilla.bright_given_1.value, rep.ancilla.bright_given_1.sigma);
      if (common.out) {
        RunDirectory dir(*common.out);
        dir.write_json("inputs.json", in.to_json());
        dir.write_json("spam.json", rep.to_json());
        dir.write("spam.csv", rep.to_csv());
        dir.finalize({{"command", "spam correct"}});
      }
      return 0;
    }

    if (budget->parsed()) {
      ojson j;
      if (b_shift->parsed()) {
        BudgetParams p = BudgetParams::defaults();
        p.gamma = 1.0 / quantity(lifetime, Dimension::Time, "--lifetime");
        p.detuning = quantity(detuning, Dimension::AngularFrequency, "--detuning");
        p.omega_mw = quantity(rabi_mw, Dimension::AngularFrequency, "--rabi");
        const double dls = shift.empty() ? SequenceConfig{}.shiftout_shift
                                         : quantity(shift, Dimension::AngularFrequency, "--shift");
        p.omega_beam = std::sqrt(4.0 * p.detuning * p.detuning * dls / p.omega_q);
        j = shiftout_budget(p).to_json();
      } else if (b_photons->parsed()) {
        PhotonParams p;
        p.eta = eta;
        p.saturation = saturation;
        p.detuning = quantity(readout_detuning, Dimension::AngularFrequency, "--detuning");
        const auto b = target ? shelved_cost_for_target(p, *target)
                              : shelved_cost(p, quantity(duration, Dimension::Time, "--duration"));
        j = b.to_json();
      } else {
        const double gamma = 1.0 / quantity(lifetime, Dimension::Time, "--lifetime");
        const auto o = optimize_total_error(gamma, kTwoPi * kCsHyperfineHz);
        j = {{"gamma_per_s", gamma},        {"eps_closed", o.eps_closed},       {"eps_reduced", o.eps_reduced},
             {"eps_numeric", o.eps_numeric}, {"p_min_closed", o.p_min_closed},   {"p_min_numeric", o.p_min_numeric},
             {"p_min_percent", 100.0 * o.p_min_closed}};
      }
      std::cout << json_text(j);
      if (common.out) {
        RunDirectory dir(*common.out);
        dir.write_json("budget.json", j);
        dir.finalize({{"command", "budget"}});
      }
      return 0;
    }

    if (cooling->parsed()) {
      CoolingParams p;
      p.saturate = !no_saturation;
      if (c_rate->parsed()) {
        p.omega_g = c_ratio * p.gamma;
        const auto r = mean_cooling_rate(p);
        const ojson j{{"omega_g_over_gamma", c_ratio},
                      {"cooling_rate_uK_per_ms", r.rate_uk_per_ms},
                      {"scatter_rate_per_s", r.scatter_rate}};
        std::cout << json_text(j);
        return 0;
      }
      const auto s = scan(p, c_lo, c_hi, c_points, molasses);
      if (common.out) {
        RunDirectory dir(*common.out);
        dir.write("curve.csv", s.to_csv());
        dir.write_json("scan.json", s.to_json());
        dir.finalize({{"command", "cooling scan"}});
      } else {
        std::cout << s.to_csv();
      }
      std::cerr << fmt::format("best: {:.2f} uK/ms at omega_g/gamma = {:.3f}\n", s.best_rate, s.best_ratio);
      return 0;
    }

    if (repro->parsed()) {
      const RunConfig cfg = common.load();
      ropts.only = only;
      const auto results = reproduce(cfg, ropts);
      std::cout << reproduce_table(results);
      RunDirectory dir(common.dir(cfg, "reproduce"));
      dir.write_json("config.json", cfg.to_json());
      dir.write_json("report.json", reproduce_json(results, cfg));
      dir.finalize(run_meta(cfg, "reproduce-paper"));
      const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass(); });
      return ok ? 0 : kExitFail;
    }
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), e.path());
  } catch (const UnitError& e) {
    return report_error("config", e.what());
  } catch (const ValidationError& e) {
    return report_error("config", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error("config", e.what());
  } catch (const std::exception& e) {
    return report_error("numeric", e.what());
  }
  return 0;
}
