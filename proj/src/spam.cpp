#include "mcm/spam.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace mcm {

namespace {

struct Arg {
  std::string name;
  Measured m;
  bool shared = false;
};

using Fn = std::function<double(const std::vector<double>&)>;

double derivative(const Fn& f, std::vector<double> x, std::size_t i) {
  // Every formula here is a ratio of affine forms, so a fixed small step is accurate to ~1e-10.
  const double h = 1e-6;
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  return (fp - f(x)) / (2.0 * h);
}

double spread(const Fn& f, const std::vector<double>& x, const std::vector<Arg>& args) {
  double var = 0.0;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const double c = derivative(f, x, i) * args[i].m.sigma;
    var += c * c;
  }
  return std::sqrt(var);
}

// Delta-method propagation of num/den.
CorrectedFidelity propagate(const Fn& num, const Fn& den, const std::vector<Arg>& args, std::string formula,
                            Propagation prop) {
  std::vector<double> x;
  for (const auto& a : args) x.push_back(a.m.value);
  const Fn f = [&](const std::vector<double>& v) { return num(v) / den(v); };
  CorrectedFidelity out;
  out.value = f(x);
  out.formula = std::move(formula);
  double var = 0.0;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const double c = derivative(f, x, i) * args[i].m.sigma;
    out.contributions.push_back({args[i].name, c, args[i].shared});
    var += c * c;
  }
  out.sigma_jacobian = std::sqrt(var);
  if (prop == Propagation::Jacobian) {
    out.sigma = out.sigma_jacobian;
  } else {
    const double n = num(x), d = den(x);
    const double rn = n != 0.0 ? spread(num, x, args) / n : 0.0;
    const double rd = spread(den, x, args) / d;
    out.sigma = n != 0.0 ? std::abs(out.value) * std::hypot(rn, rd) : spread(num, x, args) / std::abs(d);
  }
  out.above_one = out.value > 1.0;
  return out;
}

const Fn kOne = [](const std::vector<double>&) { return 1.0; };

nlohmann::ordered_json measured_json(const Measured& m) { return {{"value", m.value}, {"sigma", m.sigma}}; }

Measured measured_from(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw std::invalid_argument(path + ": expected {value, sigma}");
  Measured m;
  for (const auto& [k, v] : j.items()) {
    if (k == "value")
      m.value = v.get<double>();
    else if (k == "sigma")
      m.sigma = v.get<double>();
    else
      throw std::invalid_argument(path + "." + k + ": unknown key");
  }
  return m;
}

}  // namespace

void Measured::check(const std::string& name) const {
  if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument(name + ": probability outside [0,1]");
  if (!(sigma >= 0.0)) throw std::invalid_argument(name + ": negative uncertainty");
}

nlohmann::ordered_json CorrectedFidelity::to_json() const {
  nlohmann::ordered_json j{{"value", value},
                           {"sigma", sigma},
                           {"sigma_jacobian", sigma_jacobian},
                           {"formula", formula},
                           {"above_one", above_one}};
  auto& c = j["contributions"] = nlohmann::ordered_json::array();
  for (const auto& k : contributions) c.push_back({{"input", k.input}, {"sigma", k.sigma}, {"shared", k.shared}});
  return j;
}

CorrectedFidelity correct_data_fidelity(Measured p_db, Measured p_db_min, Measured r3prep, Measured r4prep,
                                        Propagation prop) {
  p_db.check("P_DB");
  p_db_min.check("P_DB_min");
  r3prep.check("R3prep");
  r4prep.check("R4prep");
  if (!(r3prep.value - r4prep.value > 0.0))
    throw DomainError("data-qubit correction: R3prep - R4prep must be positive");
  return propagate([](const std::vector<double>& x) { return x[0] - x[1]; },
                   [](const std::vector<double>& x) { return x[2] - x[3]; },
                   {{"P_DB", p_db, false},
                    {"P_DB_min", p_db_min, true},
                    {"R3prep", r3prep, true},
                    {"R4prep", r4prep, true}},
                   "(P_DB - P_DB_min) / (R3prep - R4prep)", prop);
}

CorrectedFidelity raw_fidelity(Measured p_db) {
  return propagate([](const std::vector<double>& x) { return x[0]; }, kOne, {{"P_DB", p_db, false}}, "P_DB",
                   Propagation::Jacobian);
}

CorrectedFidelity average_process_fidelity(const std::vector<CorrectedFidelity>& rows, Correlation mode) {
  if (rows.size() != 6) throw std::invalid_argument("process average needs exactly six inputs");
  const double n = static_cast<double>(rows.size());
  CorrectedFidelity out;
  out.formula = "mean of six inputs";
  std::map<std::string, double> shared;
  std::vector<std::string> order;
  double var = 0.0;
  for (const auto& r : rows) {
    out.value += r.value / n;
    for (const auto& c : r.contributions) {
      if (mode == Correlation::Correlated && c.shared) {
        if (!shared.contains(c.input)) order.push_back(c.input);
        shared[c.input] += c.sigma / n;
      } else {
        var += (c.sigma / n) * (c.sigma / n);
      }
    }
  }
  const double row_sigma = std::sqrt(var);
  out.contributions.push_back({"per-row", row_sigma, false});
  for (const auto& name : order) {
    var += shared[name] * shared[name];
    out.contributions.push_back({name, shared[name], true});
  }
  out.sigma = std::sqrt(var);
  out.above_one = out.value > 1.0;
  return out;
}

nlohmann::ordered_json AncillaCorrection::to_json() const {
  return {{"P(D|0)", dark_given_0.to_json()},
          {"P(B|1)", bright_given_1.to_json()},
          {"eps_prep", eps_prep.to_json()},
          {"eps_loss_pre", eps_loss_pre.to_json()}};
}

AncillaCorrection correct_ancilla(Measured p1_d, Measured p2_b, Measured r_base, Measured r4prep, Measured r3prep,
                                  Measured r_ba, Propagation prop) {
  p1_d.check("P1_D");
  p2_b.check("P2_B");
  r_base.check("R_base");
  r4prep.check("R4prep");
  r3prep.check("R3prep");
  r_ba.check("R_BA");
  // Argument order below: the measured probability, then R_base, R4prep, R3prep, R_BA.
  const Fn den = [](const std::vector<double>& x) { return 0.5 - x[2] + x[3] - x[1] / 2.0 + x[4]; };
  if (!(den({0.0, r_base.value, r4prep.value, r3prep.value, r_ba.value}) > 0.0))
    throw DomainError("ancilla correction: non-positive denominator");
  const std::string den_text = "(1/2 - R4prep + R3prep - R_base/2 + R_BA)";
  AncillaCorrection out;
  out.dark_given_0 =
      propagate([](const std::vector<double>& x) { return x[0] - 0.5 * (1.0 - x[1]); }, den,
                {{"P1_D", p1_d}, {"R_base", r_base}, {"R4prep", r4prep}, {"R3prep", r3prep}, {"R_BA", r_ba}},
                "(P1_D - (1 - R_base)/2) / " + den_text, prop);
  out.bright_given_1 =
      propagate([](const std::vector<double>& x) { return x[0] - x[2] + x[3] - x[1] + x[4]; }, den,
                {{"P2_B", p2_b}, {"R_base", r_base}, {"R4prep", r4prep}, {"R3prep", r3prep}, {"R_BA", r_ba}},
                "(P2_B - R4prep + R3prep - R_base + R_BA) / " + den_text, prop);
  out.eps_prep = propagate([](const std::vector<double>& x) { return x[0] - x[1] + x[2] - x[3]; }, kOne,
                           {{"R4prep", r4prep}, {"R3prep", r3prep}, {"R_base", r_base}, {"R_BA", r_ba}},
                           "R4prep - R3prep + R_base - R_BA", Propagation::Jacobian);
  out.eps_loss_pre = propagate([](const std::vector<double>& x) { return 0.5 * (1.0 - x[0]); }, kOne,
                               {{"R_base", r_base}}, "(1 - R_base) / 2", Propagation::Jacobian);
  return out;
}

SpamInputs SpamInputs::published() {
  SpamInputs in;
  in.rows = {{"x", {0.930, 0.008}}, {"-x", {0.941, 0.008}}, {"y", {0.934, 0.009}},
             {"-y", {0.934, 0.010}}, {"0", {0.940, 0.004}}, {"1", {0.946, 0.003}}};
  return in;
}

void SpamInputs::check() const {
  for (const auto& r : rows) r.p_db.check("rows." + r.label);
  p_db_min.check("p_db_min");
  data_r3prep.check("data_r3prep");
  data_r4prep.check("data_r4prep");
  p1_d.check("p1_d");
  p2_b.check("p2_b");
  r_base.check("r_base");
  ancilla_r4prep.check("ancilla_r4prep");
  ancilla_r3prep.check("ancilla_r3prep");
  r_ba.check("r_ba");
}

nlohmann::ordered_json SpamInputs::to_json() const {
  nlohmann::ordered_json j;
  auto& r = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) r.push_back({{"label", row.label}, {"value", row.p_db.value}, {"sigma", row.p_db.sigma}});
  j["p_db_min"] = measured_json(p_db_min);
  j["data_r3prep"] = measured_json(data_r3prep);
  j["data_r4prep"] = measured_json(data_r4prep);
  j["p1_d"] = measured_json(p1_d);
  j["p2_b"] = measured_json(p2_b);
  j["r_base"] = measured_json(r_base);
  j["ancilla_r4prep"] = measured_json(ancilla_r4prep);
  j["ancilla_r3prep"] = measured_json(ancilla_r3prep);
  j["r_ba"] = measured_json(r_ba);
  return j;
}

SpamInputs SpamInputs::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("spam inputs: expected an object");
  SpamInputs in = published();
  const std::map<std::string, Measured*> fields{
      {"p_db_min", &in.p_db_min},   {"data_r3prep", &in.data_r3prep},       {"data_r4prep", &in.data_r4prep},
      {"p1_d", &in.p1_d},           {"p2_b", &in.p2_b},                     {"r_base", &in.r_base},
      {"ancilla_r4prep", &in.ancilla_r4prep}, {"ancilla_r3prep", &in.ancilla_r3prep}, {"r_ba", &in.r_ba}};
  for (const auto& [k, v] : j.items()) {
    if (k == "rows") {
      if (!v.is_array()) throw std::invalid_argument("rows: expected an array");
      in.rows.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto path = fmt::format("rows[{}]", i);
        DataRow row;
        for (const auto& [rk, rv] : v[i].items()) {
          if (rk == "label")
            row.label = rv.get<std::string>();
          else if (rk == "value")
            row.p_db.value = rv.get<double>();
          else if (rk == "sigma")
            row.p_db.sigma = rv.get<double>();
          else
            throw std::invalid_argument(path + "." + rk + ": unknown key");
        }
        in.rows.push_back(row);
      }
    } else if (auto it = fields.find(k); it != fields.end()) {
      *it->second = measured_from(v, k);
    } else {
      throw std::invalid_argument(k + ": unknown key");
    }
  }
  in.check();
  return in;
}

std::vector<ErrorTerm> decompose_error_budget(const SpamInputs& in) {
  const auto anc = correct_ancilla(in.p1_d, in.p2_b, in.r_base, in.ancilla_r4prep, in.ancilla_r3prep, in.r_ba);
  std::vector<ErrorTerm> t;
  t.push_back({"eps_loss_pre", anc.eps_loss_pre.value, anc.eps_loss_pre.sigma,
               "(1 - R_base)/2, equal pre and post loss assumed"});
  t.push_back({"eps_loss_post", anc.eps_loss_pre.value, anc.eps_loss_pre.sigma, "taken equal to eps_loss_pre"});
  t.push_back({"eps_prep", anc.eps_prep.value, anc.eps_prep.sigma, anc.eps_prep.formula});
  t.push_back({"eps_BA", in.r_ba.value, in.r_ba.sigma, "R_BA, first order in the loss terms"});
  t.push_back({"eps_sh3_bound", in.p_db_min.value - in.r_ba.value, std::hypot(in.p_db_min.sigma, in.r_ba.sigma),
               "P_DB_min - eps_BA, an upper bound"});
  return t;
}

nlohmann::ordered_json SpamReport::to_json() const {
  nlohmann::ordered_json j;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < labels.size(); ++i)
    rows.push_back({{"input", labels[i]}, {"raw", raw[i].to_json()}, {"corrected", corrected[i].to_json()}});
  j["raw_average"] = raw_average.to_json();
  j["corrected_average"] = corrected_average.to_json();
  j["ancilla"] = ancilla.to_json();
  auto& terms_j = j["error_terms"] = nlohmann::ordered_json::array();
  for (const auto& t : terms)
    terms_j.push_back({{"name", t.name}, {"value", t.value}, {"sigma", t.sigma}, {"note", t.note}});
  return j;
}

std::string SpamReport::to_csv() const {
  std::string s = "input,raw,raw_sigma,corrected,corrected_sigma\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    s += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", labels[i], raw[i].value, raw[i].sigma, corrected[i].value,
                     corrected[i].sigma);
  if (raw.size() == 6)
    s += fmt::format("average,{:.6f},{:.6f},{:.6f},{:.6f}\n", raw_average.value, raw_average.sigma,
                     corrected_average.value, corrected_average.sigma);
  return s;
}

SpamReport spam_report(const SpamInputs& in, Correlation mode, Propagation prop) {
  in.check();
  SpamReport r;
  for (const auto& row : in.rows) {
    r.labels.push_back(row.label);
    r.raw.push_back(raw_fidelity(row.p_db));
    r.corrected.push_back(correct_data_fidelity(row.p_db, in.p_db_min, in.data_r3prep, in.data_r4prep, prop));
  }
  if (in.rows.size() == 6) {
    r.raw_average = average_process_fidelity(r.raw, mode);
    r.corrected_average = average_process_fidelity(r.corrected, mode);
  }
  r.ancilla = correct_ancilla(in.p1_d, in.p2_b, in.r_base, in.ancilla_r4prep, in.ancilla_r3prep, in.r_ba, prop);
  r.terms = decompose_error_budget(in);
  return r;
}

}  // namespace mcm
