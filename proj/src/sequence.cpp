#include "mcm/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

namespace mcm {

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Microwave: return "microwave";
    case Channel::ShiftOut: return "shift-out";
    case Channel::ReadoutLight: return "readout-light";
    case Channel::Trap: return "trap";
    case Channel::Camera: return "camera";
    case Channel::Blowaway: return "blowaway";
  }
  return "?";
}

Channel Event::channel() const {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MicrowavePulse>) return Channel::Microwave;
        else if constexpr (std::is_same_v<T, ShiftOutLight>) return Channel::ShiftOut;
        else if constexpr (std::is_same_v<T, ReadoutLight>) return Channel::ReadoutLight;
        else if constexpr (std::is_same_v<T, TrapRamp>) return Channel::Trap;
        else if constexpr (std::is_same_v<T, CameraGate>) return Channel::Camera;
        else return Channel::Blowaway;
      },
      payload);
}

std::int64_t to_ns(double seconds) {
  if (!(seconds >= 0.0)) throw ValidationError("negative duration");
  // Round up so the physical pulse always fits inside its slot.
  return static_cast<std::int64_t>(std::ceil(seconds * 1e9 - 1e-6));
}

std::optional<Rotation> input_rotation(const std::string& name) {
  if (name == "0" || name == "z") return std::nullopt;
  if (name == "1" || name == "-z") return Rotation{kPi, 0.0};
  if (name == "x") return Rotation{kPi / 2, -kPi / 2};
  if (name == "-x") return Rotation{kPi / 2, kPi / 2};
  if (name == "y") return Rotation{kPi / 2, kPi};
  if (name == "-y") return Rotation{kPi / 2, 0.0};
  throw ValidationError(fmt::format("unknown input state '{}' (expected 0, 1, x, -x, y, -y)", name));
}

std::vector<int> echo_group_sizes(int echoes, int repumps) {
  if (echoes < 0 || repumps < 0) throw ValidationError("echo and repump counts must be non-negative");
  if (echoes == 0) return {};
  if (echoes % 2 != 0) throw ValidationError(fmt::format("echo count {} must be even to restore the data qubits", echoes));
  const int segments = echoes + repumps;
  const int base = segments / echoes;
  const int extra = segments % echoes;
  if (extra % 2 != 0) {
    throw ValidationError(fmt::format("{} light segments cannot be split into {} balanced echo groups", segments, echoes));
  }
  // Spread extra/2 segments evenly over the even-indexed groups and the same over the odd ones.
  const int half = echoes / 2;
  const int per_parity = extra / 2;
  std::vector<int> sizes(static_cast<size_t>(echoes), base);
  for (int parity = 0; parity < 2; ++parity) {
    for (int j = 0; j < half; ++j) {
      const bool gets = (j + 1) * per_parity / half > j * per_parity / half;
      if (gets) ++sizes[static_cast<size_t>(2 * j + parity)];
    }
  }
  return sizes;
}

Rotation unrotate(std::complex<double> c0, std::complex<double> c1) {
  const double a0 = std::abs(c0), a1 = std::abs(c1);
  if (a0 + a1 == 0.0) throw ValidationError("cannot unrotate the zero vector");
  Rotation r{2.0 * std::atan2(a1, a0), 0.0};
  if (a1 > 0.0 && a0 > 0.0) r.phase = std::remainder(kPi / 2 + std::arg(c0) - std::arg(c1), kTwoPi);
  return r;
}

namespace {

class Builder {
 public:
  Builder(const SequenceConfig& cfg, SequenceIR& ir) : cfg_(cfg), ir_(ir) {}

  std::int64_t now() const { return t_; }
  void gap() { t_ += to_ns(cfg_.pulse_gap); }

  int add(std::int64_t start, std::int64_t dur, Payload p) {
    Event e;
    e.id = static_cast<int>(ir_.events.size());
    e.t_start = start;
    e.duration = dur;
    e.in_readout = in_readout_;
    e.payload = std::move(p);
    ir_.events.push_back(std::move(e));
    return ir_.events.back().id;
  }

  const Polarization& polarization(const Level& a, const Level& b) {
    auto key = std::make_pair(a.f == 3 ? a : b, a.f == 3 ? b : a);
    auto it = pol_.find(key);
    if (it == pol_.end()) it = pol_.emplace(key, best_horn_phase(cfg_.horns, a, b).polarization).first;
    return it->second;
  }

  // Appends one microwave pulse at the current time and advances the clock.
  void pulse(const PulseOp& op, const std::string& role, const std::optional<ShiftOutLight>& light = std::nullopt) {
    const std::int64_t dur = to_ns(op.duration);
    if (light) add(t_, dur, *light);
    add(t_, dur, MicrowavePulse{op, role});
    t_ += dur;
    gap();
  }

  void corpse_pulse(const Level& a, const Level& b, double phase, const std::string& role,
                    const std::optional<ShiftOutLight>& light = std::nullopt) {
    for (const auto& seg : corpse(a, b, cfg_.rabi.get(a, b), phase, polarization(a, b))) pulse(seg, role, light);
  }

  void plain(const Level& a, const Level& b, double angle, double phase, const std::string& role) {
    pulse(rotation(a, b, cfg_.rabi.get(a, b), angle, phase, polarization(a, b)), role);
  }

  void set_readout(bool on) { in_readout_ = on; }
  void advance(std::int64_t dt) { t_ += dt; }

 private:
  const SequenceConfig& cfg_;
  SequenceIR& ir_;
  std::int64_t t_ = 0;
  bool in_readout_ = false;
  std::map<std::pair<Level, Level>, Polarization> pol_;
};

std::uint32_t bit(int site) { return 1u << static_cast<unsigned>(site); }

}  // namespace

SequenceIR build_mcm_sequence(const SequenceConfig& cfg) {
  cfg.env.check();
  cfg.trap.check();
  if (!(cfg.readout_time >= 0.0)) throw ValidationError("readout time must be non-negative");
  if (cfg.trap.sites() > 32) throw ValidationError("site masks support at most 32 sites");
  const auto groups = echo_group_sizes(cfg.echoes, cfg.repumps);
  const auto in_rot = input_rotation(cfg.input);

  SequenceIR ir;
  ir.rows = cfg.trap.rows;
  ir.cols = cfg.trap.cols;
  ir.env = cfg.env;
  ir.trap = cfg.trap;
  ir.input = cfg.input;
  ir.readout_time = cfg.readout_time;
  ir.initial = cfg.include_prep ? Level{4, 4} : kQubit0;
  ir.ancilla_site = cfg.trap.site(cfg.trap.rows / 2, cfg.trap.cols / 2);
  {
    const int r0 = cfg.trap.rows / 2, c0 = cfg.trap.cols / 2;
    for (int r = 0; r < ir.rows; ++r) {
      for (int c = 0; c < ir.cols; ++c) {
        const int s = cfg.trap.site(r, c);
        if (s == ir.ancilla_site) continue;
        (std::abs(r - r0) + std::abs(c - c0) == 1 ? ir.data_sites : ir.spare_sites).push_back(s);
      }
    }
  }
  const std::uint32_t anc = bit(ir.ancilla_site);
  Builder b(cfg, ir);

  const Level q0 = kQubit0, q1 = kQubit1;
  const Level sh0{3, -1}, sh1{4, -1};

  if (cfg.include_prep) {
    const Level chain[6] = {{4, 4}, {3, 3}, {4, 3}, {3, 2}, {4, 1}, {3, 0}};
    for (int i = 0; i < 5; ++i) b.corpse_pulse(chain[i], chain[i + 1], 0.0, "prep");
  }
  if (in_rot) b.plain(q0, q1, in_rot->angle, in_rot->phase, "input");

  if (cfg.include_mcm) {
    // Mid-circuit measurement window.
    b.set_readout(true);
    const std::int64_t ramp = to_ns(cfg.trap.ramp_time);
    b.add(b.now(), ramp, TrapRamp{true});
    b.advance(ramp);
    b.gap();
    b.corpse_pulse(q0, q1, 0.0, "compensate");

    // Shelving: polarization pulse (pi on 3,0-4,-1; 2pi on 4,0-3,-1) with the
    // ancilla shifted out, then clock and 4,-1 -> 3,-1 transfers.
    const double ratio = cfg.rabi.get({4, 0}, {3, -1}) / cfg.rabi.get(q0, sh1);
    const HornSolution shelve_pol = solve_horn_phase(cfg.horns, ratio);
    const PulseOp shelve = rotation(q0, sh1, cfg.rabi.get(q0, sh1), kPi, 0.0, shelve_pol.polarization);
    const ShiftOutLight shift{anc, cfg.shiftout_shift, cfg.shiftout_pscat};
    std::vector<std::pair<PulseOp, bool>> shelving;  // (pulse, shifted out)
    shelving.push_back({shelve, true});
    for (const auto& [a, c] : {std::pair{q1, q0}, std::pair{sh1, sh0}}) {
      for (const auto& seg : corpse(a, c, cfg.rabi.get(a, c), 0.0, b.polarization(a, c))) shelving.push_back({seg, false});
    }
    for (const auto& [op, lit] : shelving) {
      b.pulse(op, lit ? "shelve" : "shelve-transfer", lit ? std::optional{shift} : std::nullopt);
    }

    // Readout light interleaved with repump cycles and echoes.
    const int segments = cfg.echoes == 0 ? cfg.repumps + 1 : cfg.echoes + cfg.repumps;
    const std::int64_t dwell = to_ns(cfg.readout_time);
    const std::int64_t light_start = b.now();
    int segment = 0;
    auto light = [&]() {
      const std::int64_t d = (segment + 1) * dwell / segments - segment * dwell / segments;
      b.add(b.now(), d, ReadoutLight{cfg.readout_saturation, cfg.readout_detuning, segment});
      ++segment;
      b.advance(d);
      b.gap();
    };
    auto repump = [&]() {
      b.plain({3, 1}, {4, 1}, kPi, 0.0, "repump");
      b.plain({4, 2}, {3, 2}, kPi, 0.0, "repump");
      b.plain({3, 3}, {4, 3}, kPi, 0.0, "repump");
      ++ir.counts.repump_cycles;
    };
    auto echo = [&]() {
      b.corpse_pulse(q0, q1, 0.0, "echo");
      b.corpse_pulse(sh0, q1, 0.0, "echo", ShiftOutLight{anc, cfg.echo_shift, 0.0});
      b.corpse_pulse(q1, q0, 0.0, "echo");
      ++ir.counts.echoes;
    };
    std::vector<int> light_ids;
    if (groups.empty()) {
      for (int i = 0; i < segments; ++i) {
        if (i > 0) repump();
        light();
      }
    } else {
      for (int g : groups) {
        for (int i = 0; i < g; ++i) {
          if (i > 0) repump();
          light();
        }
        echo();
      }
    }
    ir.counts.light_segments = segment;
    {
      // One camera exposure spanning all light segments.
      std::int64_t last = light_start;
      for (const auto& e : ir.events) {
        if (e.channel() == Channel::ReadoutLight) last = std::max(last, e.t_end());
      }
      b.add(light_start, last - light_start, CameraGate{});
    }

    // Unshelving: exact reverse of the shelving pulses with phases advanced by pi.
    for (auto it = shelving.rbegin(); it != shelving.rend(); ++it) {
      PulseOp op = it->first;
      op.phase += kPi;
      b.pulse(op, "unshelve", it->second ? std::optional{shift} : std::nullopt);
    }
    b.add(b.now(), ramp, TrapRamp{false});
    b.advance(ramp);
    b.gap();
    b.corpse_pulse(q0, q1, 0.0, "final");
    b.set_readout(false);
  }

  if (cfg.output && cfg.output->angle != 0.0) b.plain(q0, q1, cfg.output->angle, cfg.output->phase, "output");
  if (cfg.include_blowaway) {
    b.add(b.now(), to_ns(1e-3), Blowaway{});
    b.advance(to_ns(1e-3));
  }

  for (const auto& e : ir.events) {
    if (e.channel() != Channel::Microwave) continue;
    ++ir.counts.microwave;
    if (e.in_readout) ++ir.counts.microwave_in_readout;
  }
  std::stable_sort(ir.events.begin(), ir.events.end(),
                   [](const Event& x, const Event& y) { return x.t_start < y.t_start; });
  for (size_t i = 0; i < ir.events.size(); ++i) ir.events[i].id = static_cast<int>(i);
  return ir;
}

SequenceIR build_spam_sequence(const SequenceConfig& cfg, SpamExperiment kind) {
  cfg.env.check();
  cfg.trap.check();
  SequenceIR ir;
  ir.rows = cfg.trap.rows;
  ir.cols = cfg.trap.cols;
  ir.env = cfg.env;
  ir.trap = cfg.trap;
  ir.input = "0";
  ir.readout_time = 0.0;
  ir.initial = Level{4, 4};
  ir.ancilla_site = cfg.trap.site(cfg.trap.rows / 2, cfg.trap.cols / 2);
  for (int s = 0; s < cfg.trap.sites(); ++s) {
    if (s != ir.ancilla_site) ir.data_sites.push_back(s);
  }
  Builder b(cfg, ir);
  if (kind == SpamExperiment::Prep3 || kind == SpamExperiment::Prep4) {
    const Level chain[6] = {{4, 4}, {3, 3}, {4, 3}, {3, 2}, {4, 1}, {3, 0}};
    for (int i = 0; i < 5; ++i) b.corpse_pulse(chain[i], chain[i + 1], 0.0, "prep");
  }
  if (kind == SpamExperiment::Prep4) b.corpse_pulse(kQubit0, kQubit1, 0.0, "output");
  if (kind != SpamExperiment::Base) {
    b.add(b.now(), to_ns(1e-3), Blowaway{});
    b.advance(to_ns(1e-3));
  }
  for (const auto& e : ir.events) {
    if (e.channel() == Channel::Microwave) ++ir.counts.microwave;
  }
  return ir;
}

// ---- validation -----------------------------------------------------------------------

nlohmann::ordered_json ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["ok"] = ok;
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& d : diagnostics) {
    j["diagnostics"].push_back({{"check", d.check}, {"ok", d.ok}, {"message", d.message}, {"event_ids", d.event_ids}});
  }
  return j;
}

ValidationReport validate(const SequenceIR& ir) {
  ValidationReport rep;
  auto fail = [&](std::string check, std::string msg, std::vector<int> ids) {
    rep.ok = false;
    rep.diagnostics.push_back({std::move(check), false, std::move(msg), std::move(ids)});
  };

  // Channel exclusivity.  Shift-out light and the camera may overlap other channels,
  // never themselves.
  std::map<Channel, std::vector<const Event*>> by_channel;
  for (const auto& e : ir.events) {
    if (e.duration < 0) fail("duration", fmt::format("event {} has negative duration", e.id), {e.id});
    by_channel[e.channel()].push_back(&e);
  }
  bool exclusive = true;
  for (auto& [ch, list] : by_channel) {
    std::sort(list.begin(), list.end(), [](const Event* a, const Event* b) { return a->t_start < b->t_start; });
    for (size_t i = 1; i < list.size(); ++i) {
      if (list[i]->t_start < list[i - 1]->t_end()) {
        exclusive = false;
        fail("channel-exclusivity",
             fmt::format("{} events {} and {} overlap", channel_name(ch), list[i - 1]->id, list[i]->id),
             {list[i - 1]->id, list[i]->id});
      }
    }
  }
  if (exclusive) rep.diagnostics.push_back({"channel-exclusivity", true, "no overlapping events per channel", {}});

  // Frame consistency: anchors must be driven microwave transitions.
  bool frames = true;
  for (const auto& e : ir.events) {
    const auto* mw = std::get_if<MicrowavePulse>(&e.payload);
    if (!mw) continue;
    const PulseOp& op = mw->op;
    std::string err;
    if (op.lower.f != 3 || op.upper.f != 4 || !op.lower.valid() || !op.upper.valid()) {
      err = "anchor must join f=3 and f=4 levels";
    } else if (!coupling_component(op.lower, op.upper)) {
      err = fmt::format("anchor {} <-> {} is not a microwave transition", op.lower.label(), op.upper.label());
    } else if (std::abs(mw_coupling(op.lower, op.upper, op.polarization)) == 0.0) {
      err = fmt::format("polarization does not drive {} <-> {}", op.lower.label(), op.upper.label());
    } else if (to_ns(op.duration) > e.duration) {
      err = "pulse longer than its slot";
    }
    if (!err.empty()) {
      frames = false;
      fail("frame", fmt::format("event {}: {}", e.id, err), {e.id});
    }
  }
  if (frames) rep.diagnostics.push_back({"frame", true, "every pulse anchors a driven transition", {}});

  // Count audit against the stored metadata.
  SequenceCounts c;
  for (const auto& e : ir.events) {
    if (e.channel() == Channel::Microwave) {
      ++c.microwave;
      if (e.in_readout) ++c.microwave_in_readout;
    }
    if (e.channel() == Channel::ReadoutLight) ++c.light_segments;
  }
  const bool counts_ok = c.microwave == ir.counts.microwave && c.microwave_in_readout == ir.counts.microwave_in_readout &&
                         c.light_segments == ir.counts.light_segments;
  if (counts_ok) {
    rep.diagnostics.push_back({"counts", true,
                               fmt::format("{} microwave pulses, {} in readout, {} echoes, {} repump cycles",
                                           c.microwave, c.microwave_in_readout, ir.counts.echoes,
                                           ir.counts.repump_cycles),
                               {}});
  } else {
    fail("counts", "event counts disagree with the sequence metadata", {});
  }
  if (ir.ancilla_site < 0 || ir.ancilla_site >= ir.rows * ir.cols) fail("sites", "ancilla site outside the array", {});
  return rep;
}

// ---- serialization --------------------------------------------------------------------

namespace {

nlohmann::ordered_json level_json(const Level& l) { return nlohmann::ordered_json::array({l.f, l.m}); }

nlohmann::ordered_json payload_json(const Payload& p) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        nlohmann::ordered_json j;
        if constexpr (std::is_same_v<T, MicrowavePulse>) {
          j["role"] = v.role;
          j["kind"] = v.op.kind == PulseKind::Plain ? "plain" : "corpse-segment";
          j["lower"] = level_json(v.op.lower);
          j["upper"] = level_json(v.op.upper);
          j["rabi_rad_s"] = v.op.rabi;
          j["detuning_rad_s"] = v.op.detuning;
          j["phase_rad"] = v.op.phase;
          j["duration_s"] = v.op.duration;
          auto pol = nlohmann::ordered_json::array();
          for (const auto& c : v.op.polarization) pol.push_back({c.real(), c.imag()});
          j["polarization"] = pol;
          j["site_mask"] = v.op.site_mask;
        } else if constexpr (std::is_same_v<T, ShiftOutLight>) {
          j["site_mask"] = v.site_mask;
          j["light_shift_rad_s"] = v.light_shift;
          j["p_scat"] = v.p_scat;
        } else if constexpr (std::is_same_v<T, ReadoutLight>) {
          j["saturation"] = v.saturation;
          j["detuning_rad_s"] = v.detuning;
          j["segment"] = v.segment;
        } else if constexpr (std::is_same_v<T, TrapRamp>) {
          j["direction"] = v.up ? "up" : "down";
        }
        return j;
      },
      p);
}

}  // namespace

nlohmann::ordered_json to_json(const SequenceIR& ir) {
  nlohmann::ordered_json j;
  j["schema"] = kSequenceSchema;
  j["array"] = {{"rows", ir.rows}, {"cols", ir.cols}};
  j["sites"] = {{"ancilla", ir.ancilla_site}, {"data", ir.data_sites}, {"spare", ir.spare_sites}};
  j["input"] = ir.input;
  j["counts"] = {{"microwave", ir.counts.microwave},
                 {"microwave_in_readout", ir.counts.microwave_in_readout},
                 {"echoes", ir.counts.echoes},
                 {"repump_cycles", ir.counts.repump_cycles},
                 {"light_segments", ir.counts.light_segments}};
  auto ev = nlohmann::ordered_json::array();
  for (const auto& e : ir.events) {
    nlohmann::ordered_json x;
    x["id"] = e.id;
    x["t_start_ns"] = e.t_start;
    x["duration_ns"] = e.duration;
    x["channel"] = channel_name(e.channel());
    x["in_readout"] = e.in_readout;
    x["payload"] = payload_json(e.payload);
    ev.push_back(std::move(x));
  }
  j["events"] = std::move(ev);
  return j;
}

std::string dump_canonical(const SequenceIR& ir) { return to_json(ir).dump(2) + "\n"; }

}  // namespace mcm
