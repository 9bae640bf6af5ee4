#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcm/atomic_model.hpp"
#include "mcm/pulse_engine.hpp"
#include "mcm/trap.hpp"

namespace mcm {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Channel { Microwave, ShiftOut, ReadoutLight, Trap, Camera, Blowaway };

std::string_view channel_name(Channel c);

struct MicrowavePulse {
  PulseOp op;
  std::string role;  // prep, input, compensate, shelve, shelve-transfer, repump, echo, unshelve, final, output
};

// Site-selective 459 nm light: shifts every f=4 level of the masked sites by
// `light_shift` and scatters a photon with probability `p_scat` per pulse.
struct ShiftOutLight {
  std::uint32_t site_mask = 0;
  double light_shift = 0.0;  // rad/s
  double p_scat = 0.0;
};

struct ReadoutLight {
  double saturation = 3.0;
  double detuning = 0.0;  // rad/s from the shifted cycling resonance
  int segment = 0;
};

struct TrapRamp {
  bool up = true;
};

struct CameraGate {};
struct Blowaway {};

using Payload = std::variant<MicrowavePulse, ShiftOutLight, ReadoutLight, TrapRamp, CameraGate, Blowaway>;

struct Event {
  int id = 0;
  std::int64_t t_start = 0;   // ns
  std::int64_t duration = 0;  // ns
  bool in_readout = false;    // inside the mid-circuit measurement window
  Payload payload;

  Channel channel() const;
  std::int64_t t_end() const { return t_start + duration; }
};

struct SequenceCounts {
  int microwave = 0;
  int microwave_in_readout = 0;
  int echoes = 0;
  int repump_cycles = 0;
  int light_segments = 0;
};

struct SequenceIR {
  std::vector<Event> events;
  int rows = 3;
  int cols = 3;
  int ancilla_site = 4;
  std::vector<int> data_sites;
  std::vector<int> spare_sites;
  FieldEnvironment env;
  TrapPlan trap;
  SequenceCounts counts;
  std::string input;
  double readout_time = 4e-3;
  Level initial{4, 4};  // state every atom starts in (after optical pumping)
};

struct Rotation {
  double angle = 0.0;
  double phase = 0.0;
};

// Clock-transition preparation for a named input state: 0, 1, x, -x, y, -y.
// Returns nullopt for "0" (no pulse).  Throws ValidationError for unknown names.
std::optional<Rotation> input_rotation(const std::string& name);

struct SequenceConfig {
  FieldEnvironment env;
  RabiCalibration rabi = RabiCalibration::defaults();
  HornDrive horns;
  TrapPlan trap = default_trap_plan();
  int echoes = 8;
  int repumps = 46;
  double readout_time = 4e-3;       // total light dwell, s
  double readout_saturation = 3.0;
  double readout_detuning = -2.0 * kTwoPi * 5.2e6;
  std::string input = "0";
  std::optional<Rotation> output;   // clock rotation after the measurement
  double shiftout_shift = kTwoPi * 0.635e6;  // on the ancilla during the shelving pulses
  double shiftout_pscat = 0.0;
  double echo_shift = 0.0;          // low-amplitude light during each echo middle pulse
  double pulse_gap = 1e-6;          // s between consecutive events
  bool include_prep = true;         // optical pumping to |4,4> then transfer to |3,0>
  bool include_blowaway = true;
  bool include_mcm = true;          // false: input and output rotations only
};

SequenceIR build_mcm_sequence(const SequenceConfig& cfg);

// Short characterization schedules feeding the SPAM correction: retention with
// no pulses (Base), preparation then blowaway (Prep3), preparation, clock pi and
// blowaway (Prep4), and blowaway straight after optical pumping (Blowaway).
enum class SpamExperiment { Base, Prep3, Prep4, Blowaway };
SequenceIR build_spam_sequence(const SequenceConfig& cfg, SpamExperiment kind);

// Clock rotation taking c0|0> + c1|1> to |0> (up to a global phase).
Rotation unrotate(std::complex<double> c0, std::complex<double> c1);

// Sizes of the echo groups: each group is `size` light segments with repump
// cycles between them and one echo after.  Alternating sums cancel so static
// detunings refocus.  Throws ValidationError for inconsistent counts.
std::vector<int> echo_group_sizes(int echoes, int repumps);

struct Diagnostic {
  std::string check;
  bool ok = true;
  std::string message;
  std::vector<int> event_ids;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Diagnostic> diagnostics;
  nlohmann::ordered_json to_json() const;
};

ValidationReport validate(const SequenceIR& ir);

// Canonical, versioned JSON form.  Identical IRs serialize byte-identically.
nlohmann::ordered_json to_json(const SequenceIR& ir);
std::string dump_canonical(const SequenceIR& ir);

inline constexpr const char* kSequenceSchema = "mcm-sequence/1";

std::int64_t to_ns(double seconds);

}  // namespace mcm
