#include "mcm/readout.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace mcm {

Outcome classify(std::int64_t count, double threshold) {
  return static_cast<double>(count) > threshold ? Outcome::Bright : Outcome::Dark;
}

double Proportion::sigma() const {
  if (trials <= 0) return 0.0;
  const double p = value();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

// ---- histogram ------------------------------------------------------------------------

void Histogram::add(std::int64_t count, std::optional<bool> truly_bright) {
  if (count < 0) throw DomainError("photoelectron counts are non-negative");
  const auto c = static_cast<size_t>(count);
  auto grow = [&](std::vector<std::int64_t>& v) {
    if (v.size() <= c) v.resize(c + 1, 0);
  };
  grow(bins);
  grow(bright_bins_);
  grow(dark_bins_);
  ++bins[c];
  const int cls = !truly_bright ? 2 : (*truly_bright ? 0 : 1);
  (cls == 0 ? bright_bins_ : dark_bins_)[c] += 1;
  const double x = static_cast<double>(count);
  sum_[cls] += x;
  sum2_[cls] += x * x;
  ClassSummary* s[3] = {&bright, &dark, &absent};
  ClassSummary& t = *s[cls];
  ++t.n;
  const double n = static_cast<double>(t.n);
  t.mean = sum_[cls] / n;
  t.sigma = t.n > 1 ? std::sqrt(std::max(0.0, (sum2_[cls] - n * t.mean * t.mean) / (n - 1.0))) : 0.0;
}

void Histogram::merge(const Histogram& o) {
  auto add_vec = [](std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  };
  add_vec(bins, o.bins);
  add_vec(bright_bins_, o.bright_bins_);
  add_vec(dark_bins_, o.dark_bins_);
  ClassSummary* s[3] = {&bright, &dark, &absent};
  const ClassSummary* os[3] = {&o.bright, &o.dark, &o.absent};
  for (int k = 0; k < 3; ++k) {
    sum_[k] += o.sum_[k];
    sum2_[k] += o.sum2_[k];
    ClassSummary& t = *s[k];
    t.n += os[k]->n;
    const double n = static_cast<double>(t.n);
    t.mean = t.n > 0 ? sum_[k] / n : 0.0;
    t.sigma = t.n > 1 ? std::sqrt(std::max(0.0, (sum2_[k] - n * t.mean * t.mean) / (n - 1.0))) : 0.0;
  }
}

std::int64_t Histogram::total() const {
  std::int64_t n = 0;
  for (auto b : bins) n += b;
  return n;
}

double Histogram::threshold_in_dark_sigmas() const {
  if (dark.n < 2 || dark.sigma == 0.0) throw DomainError("dark class too small for a spread estimate");
  return (threshold - dark.mean) / dark.sigma;
}

double Histogram::separation() const {
  if (bright.n < 2 || dark.n < 2) throw DomainError("both classes need at least two shots");
  const double s = bright.sigma + dark.sigma;
  if (s == 0.0) throw DomainError("degenerate histogram");
  return (bright.mean - dark.mean) / s;
}

std::int64_t Histogram::misclassified(double thr) const {
  std::int64_t bad = 0;
  for (size_t c = 0; c < bins.size(); ++c) {
    const bool bright_call = static_cast<double>(c) > thr;
    bad += bright_call ? dark_bins_[c] : bright_bins_[c];
  }
  return bad;
}

double Histogram::optimal_threshold() const {
  double best = 0.0;
  std::int64_t best_bad = std::numeric_limits<std::int64_t>::max();
  for (size_t c = 0; c < bins.size(); ++c) {
    const std::int64_t bad = misclassified(static_cast<double>(c));
    if (bad < best_bad) {
      best_bad = bad;
      best = static_cast<double>(c);
    }
  }
  return best;
}

std::string Histogram::to_csv() const {
  std::string out = "bin_left,count\n";
  for (size_t c = 0; c < bins.size(); ++c) out += fmt::format("{},{}\n", c, bins[c]);
  return out;
}

nlohmann::ordered_json Histogram::summary_json() const {
  auto cls = [](const ClassSummary& s) { return nlohmann::ordered_json{{"n", s.n}, {"mean", s.mean}, {"sigma", s.sigma}}; };
  nlohmann::ordered_json j;
  j["threshold"] = threshold;
  j["shots"] = total();
  j["bright"] = cls(bright);
  j["dark"] = cls(dark);
  j["absent"] = cls(absent);
  if (dark.n > 1 && dark.sigma > 0.0) j["threshold_dark_sigmas"] = threshold_in_dark_sigmas();
  if (bright.n > 1 && dark.n > 1 && bright.sigma + dark.sigma > 0.0) j["separation"] = separation();
  j["misclassified"] = misclassified(threshold);
  return j;
}

// ---- experiments ----------------------------------------------------------------------

namespace {

nlohmann::ordered_json prop_json(const Proportion& p) {
  return {{"value", p.value()}, {"sigma", p.sigma()}, {"hits", p.hits}, {"trials", p.trials}};
}

}  // namespace

nlohmann::ordered_json ExperimentResult::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input;
  j["shots"] = shots;
  j["ancilla_bright"] = prop_json(ancilla_bright);
  j["ancilla_dark"] = prop_json(ancilla_dark);
  j["ancilla_dark_given_prepared"] = prop_json(ancilla_dark_given_ok);
  j["ancilla_bright_given_prepared"] = prop_json(ancilla_bright_given_ok);
  j["ancilla_lost_in_readout"] = prop_json(ancilla_lost_in_readout);
  j["data_retained"] = prop_json(data_retained);
  auto sites_j = nlohmann::ordered_json::array();
  for (size_t i = 0; i < sites.size(); ++i) {
    auto x = prop_json(site_retained[i]);
    x["site"] = sites[i];
    sites_j.push_back(x);
  }
  j["site_retained"] = sites_j;
  j["histogram"] = histogram.summary_json();
  return j;
}

ExperimentResult run_experiment(const SequenceIR& ir, const SimulationConfig& sim, std::int64_t shots,
                                std::uint64_t first_shot) {
  if (shots < 1) throw DomainError("need at least one shot");
  CompiledSequence cs(ir, sim);
  const auto records = cs.run(first_shot, static_cast<std::uint64_t>(shots));
  ExperimentResult r;
  r.input = ir.input;
  r.shots = shots;
  r.sites = cs.simulated_sites();
  r.site_retained.assign(r.sites.size(), {});
  r.histogram.threshold = sim.readout.threshold();
  for (const auto& rec : records) {
    const auto& anc = rec.atoms.front();
    std::optional<bool> truth;
    if (anc.present_at_mcm) truth = anc.f4_at_readout >= 0.5;
    r.histogram.add(rec.ancilla_counts, truth);
    const bool bright = classify(rec.ancilla_counts, r.histogram.threshold) == Outcome::Bright;
    r.ancilla_bright.trials++;
    r.ancilla_dark.trials++;
    r.ancilla_bright.hits += bright;
    r.ancilla_dark.hits += !bright;
    if (anc.prepared_ok && anc.present_at_mcm) {
      r.ancilla_dark_given_ok.trials++;
      r.ancilla_bright_given_ok.trials++;
      r.ancilla_dark_given_ok.hits += !bright;
      r.ancilla_bright_given_ok.hits += bright;
    }
    r.ancilla_lost_in_readout.trials++;
    r.ancilla_lost_in_readout.hits += anc.lost_in_readout;
    for (size_t a = 0; a < rec.atoms.size(); ++a) {
      r.site_retained[a].trials++;
      r.site_retained[a].hits += rec.atoms[a].retained;
      if (a > 0) {
        r.data_retained.trials++;
        r.data_retained.hits += rec.atoms[a].retained;
      }
    }
  }
  return r;
}

ExperimentResult run_mcm_experiment(SequenceConfig seq, const std::string& input, const SimulationConfig& sim,
                                    std::int64_t shots) {
  seq.input = input;
  return run_experiment(build_mcm_sequence(seq), sim, shots);
}

// ---- Ramsey ---------------------------------------------------------------------------

std::vector<double> uniform_phases(int n) {
  if (n < 1) throw DomainError("need at least one phase");
  std::vector<double> p(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = kTwoPi * i / n;
  return p;
}

RamseyResult fit_ramsey(const std::vector<double>& phases, const std::vector<double>& values) {
  if (phases.size() != values.size()) throw FitError("phase and value lists differ in length");
  if (phases.size() < 8) throw FitError(fmt::format("need at least 8 phase points, got {}", phases.size()));
  const auto n = static_cast<Eigen::Index>(phases.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = phases[static_cast<size_t>(i)];
    a(i, 0) = std::cos(p);
    a(i, 1) = std::sin(p);
    a(i, 2) = 1.0;
    y[i] = values[static_cast<size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) throw FitError("phases do not span the circle");
  const Eigen::Vector3d c = qr.solve(y);
  RamseyResult r;
  r.phases = phases;
  r.amplitude = std::hypot(c[0], c[1]);
  const double resid = (a * c - y).norm() / std::sqrt(static_cast<double>(n));
  if (!(r.amplitude > 1e-12) || r.amplitude < 0.5 * resid) throw FitError("no oscillation in the Ramsey data");
  r.phase = std::atan2(c[1], c[0]);
  r.offset = c[2];
  r.contrast = 2.0 * r.amplitude;
  r.minimum = *std::min_element(values.begin(), values.end());
  return r;
}

nlohmann::ordered_json RamseyResult::to_json() const {
  nlohmann::ordered_json j;
  j["contrast"] = contrast;
  j["phase_rad"] = phase;
  j["amplitude"] = amplitude;
  j["offset"] = offset;
  j["minimum"] = minimum;
  auto pts = nlohmann::ordered_json::array();
  for (size_t i = 0; i < phases.size(); ++i) {
    nlohmann::ordered_json p{{"phase_rad", phases[i]}};
    if (i < retained.size()) {
      p["retained"] = retained[i].value();
      p["sigma"] = retained[i].sigma();
    }
    pts.push_back(p);
  }
  j["points"] = pts;
  return j;
}

RamseyResult ramsey_scan(SequenceConfig seq, const SimulationConfig& sim, const std::vector<double>& phases,
                         std::int64_t shots_per_phase) {
  if (phases.size() < 8) throw FitError(fmt::format("need at least 8 phase points, got {}", phases.size()));
  seq.input = "x";
  std::vector<Proportion> props;
  std::vector<double> values;
  std::uint64_t first = 0;
  for (double phi : phases) {
    seq.output = Rotation{kPi / 2, phi + kPi / 2};
    const auto r = run_experiment(build_mcm_sequence(seq), sim, shots_per_phase, first);
    first += static_cast<std::uint64_t>(shots_per_phase);
    props.push_back(r.data_retained);
    values.push_back(r.data_retained.value());
  }
  RamseyResult fit = fit_ramsey(phases, values);
  fit.retained = std::move(props);
  return fit;
}

Rotation process_output_rotation(const std::string& input, double ramsey_phase) {
  const auto rot = input_rotation(input);
  std::complex<double> c0{1.0, 0.0}, c1{0.0, 0.0};
  if (rot) {
    c0 = std::cos(rot->angle / 2);
    c1 = std::complex<double>(0.0, -1.0) * std::sin(rot->angle / 2) * std::polar(1.0, -rot->phase);
  }
  // The measurement acts as diag(1, e^{-i phi0}).
  c1 *= std::polar(1.0, -ramsey_phase);
  return unrotate(c0, c1);
}

}  // namespace mcm
