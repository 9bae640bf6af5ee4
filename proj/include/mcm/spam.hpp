#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcm/atomic_model.hpp"

namespace mcm {

// A measured probability and its 1-sigma uncertainty.
struct Measured {
  double value = 0.0;
  double sigma = 0.0;

  void check(const std::string& name) const;  // value in [0,1], sigma >= 0
};

// Signed first-order contribution of one input to an output uncertainty.
struct Contribution {
  std::string input;
  double sigma = 0.0;   // d(output)/d(input) * sigma(input)
  bool shared = false;  // same physical constant across the rows of a process average
};

// How the uncertainty of a ratio N/D is propagated.  Jacobian: full first-order
// expansion in the independent inputs.  SplitRatio: sigma_N and sigma_D first, then
// combined in quadrature as relative errors, which ignores inputs shared by N and D.
enum class Propagation { SplitRatio, Jacobian };

struct CorrectedFidelity {
  double value = 0.0;
  double sigma = 0.0;           // per the selected convention
  double sigma_jacobian = 0.0;  // always the full expansion
  std::string formula;
  bool above_one = false;  // reported as is; the correction is a lower bound, not clamped
  std::vector<Contribution> contributions;

  nlohmann::ordered_json to_json() const;
};

// Lower bound on the output fidelity of a data qubit after removing preparation,
// loss and blowaway errors: (P_DB - P_DB_min) / (R3prep - R4prep).
CorrectedFidelity correct_data_fidelity(Measured p_db, Measured p_db_min, Measured r3prep, Measured r4prep,
                                        Propagation prop = Propagation::SplitRatio);

enum class Correlation { Correlated, Independent };

// Mean of six per-input fidelities.  Correlated: contributions flagged shared add linearly
// across rows before the quadrature sum; Independent: every row term in quadrature.
CorrectedFidelity average_process_fidelity(const std::vector<CorrectedFidelity>& rows,
                                           Correlation mode = Correlation::Correlated);

// Raw fidelity wrapped with its own statistical uncertainty, for averaging raw columns.
CorrectedFidelity raw_fidelity(Measured p_db);

struct AncillaCorrection {
  CorrectedFidelity dark_given_0;    // P(D | |0>)
  CorrectedFidelity bright_given_1;  // P(B | |1>)
  CorrectedFidelity eps_prep;        // R4prep - R3prep + R_base - R_BA
  CorrectedFidelity eps_loss_pre;    // (1 - R_base)/2

  nlohmann::ordered_json to_json() const;
};

// SplitRatio by default; sigma_jacobian is reported alongside.
AncillaCorrection correct_ancilla(Measured p1_d, Measured p2_b, Measured r_base, Measured r4prep, Measured r3prep,
                                  Measured r_ba, Propagation prop = Propagation::SplitRatio);

struct DataRow {
  std::string label;
  Measured p_db;
};

// Every measured input of the two correction pipelines.  The data-qubit and ancilla
// contexts were calibrated separately, so each carries its own R3prep/R4prep pair.
struct SpamInputs {
  std::vector<DataRow> rows;
  Measured p_db_min{0.01, 0.01};
  Measured data_r3prep{0.970, 0.003};
  Measured data_r4prep{0.014, 0.002};

  Measured p1_d{0.936, 0.005};
  Measured p2_b{0.943, 0.005};
  Measured r_base{0.977, 0.005};
  Measured ancilla_r4prep{0.020, 0.002};
  Measured ancilla_r3prep{0.977, 0.005};
  Measured r_ba{0.005, 0.002};

  // Published measured values, including the six raw process-fidelity rows.
  static SpamInputs published();

  void check() const;
  nlohmann::ordered_json to_json() const;
  // Missing keys keep the published defaults; unknown keys throw std::invalid_argument
  // naming the offending path.
  static SpamInputs from_json(const nlohmann::json& j);
};

struct ErrorTerm {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
  std::string note;
};

// Individual SPAM error terms recovered from the auxiliary experiments.
std::vector<ErrorTerm> decompose_error_budget(const SpamInputs& in);

struct SpamReport {
  std::vector<std::string> labels;
  std::vector<CorrectedFidelity> raw;
  std::vector<CorrectedFidelity> corrected;
  CorrectedFidelity raw_average;
  CorrectedFidelity corrected_average;
  AncillaCorrection ancilla;
  std::vector<ErrorTerm> terms;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;  // input,raw,raw_sigma,corrected,corrected_sigma
};

SpamReport spam_report(const SpamInputs& in, Correlation mode = Correlation::Correlated,
                       Propagation prop = Propagation::SplitRatio);

}  // namespace mcm
