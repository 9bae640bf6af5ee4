#include "mcm/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <set>
#include <thread>

#include "mcm/trap.hpp"

namespace mcm {

namespace {

constexpr Complex kI{0.0, 1.0};

// Probabilists' Gauss-Hermite rule, 5 nodes.
constexpr std::array<double, kAmplitudeNodes> kGhNodes{-2.856970013872806, -1.355626179974266, 0.0,
                                                       1.355626179974266, 2.856970013872806};
constexpr std::array<double, kAmplitudeNodes> kGhWeights{0.011257411327720691, 0.22207592200561266,
                                                         0.5333333333333333, 0.22207592200561266,
                                                         0.011257411327720691};

// Pulses use the noise deviate rounded to this fraction of sigma; the remainder
// is applied as a diagonal phase after the pulse.
constexpr double kNoiseBinsPerSigma = 4.0;
constexpr int kNoiseBinLimit = 24;  // 6 sigma

double f4_population(const StateVector& a) {
  double p = 0.0;
  for (int k = 7; k < kNumLevels; ++k) p += std::norm(a[k]);
  return p;
}

template <class Rng>
int sample_level(const StateVector& a, int lo, int hi, Rng& rng) {
  double total = 0.0;
  for (int k = lo; k < hi; ++k) total += std::norm(a[k]);
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (int k = lo; k < hi; ++k) {
    u -= std::norm(a[k]);
    if (u <= 0.0) return k;
  }
  return hi - 1;
}

}  // namespace

// ---- parameter checks ------------------------------------------------------------------

void ReadoutParams::check() const {
  if (!(gamma > 0.0)) throw DomainError("readout decay rate must be positive");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("collection efficiency must lie in [0, 1]");
  if (!(p_depump >= 0.0 && p_depump <= 1.0)) throw DomainError("depump probability must lie in [0, 1]");
  if (!(pump_leak >= 0.0 && pump_leak <= 1.0)) throw DomainError("pump leak must lie in [0, 1]");
  double w = 0.0;
  for (double x : depump_weights) {
    if (!(x >= 0.0)) throw DomainError("depump weights must be non-negative");
    w += x;
  }
  if (!(w > 0.0)) throw DomainError("depump weights must not all vanish");
  if (!(initial_temperature >= 0.0) || !(dff_per_photon >= 0.0)) throw DomainError("heating parameters must be non-negative");
  if (!(camera_background >= 0.0) || !(camera_sigma >= 0.0)) throw DomainError("camera noise must be non-negative");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
}

double ReadoutParams::recoil_energy() const {
  const double k = kTwoPi / wavelength;
  return kHbar * kHbar * k * k / (2.0 * kCsMass);
}

double ReadoutParams::heating_per_photon() const { return 2.0 * recoil_energy() + kBoltzmann * dff_per_photon; }

double ReadoutParams::initial_energy() const { return 3.0 * kBoltzmann * initial_temperature; }

void SpamInjection::check() const {
  for (double p : {loss_pre, loss_post, prep3, prep4, blowaway}) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("SPAM probabilities must lie in [0, 1]");
  }
  if (prep3 + prep4 > 1.0) throw DomainError("preparation error probabilities exceed 1");
}

void SimulationConfig::check() const {
  readout.check();
  spam.check();
  if (!(noise.sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
  if (!(amplitude_sigma >= 0.0 && amplitude_sigma < 0.2)) throw DomainError("amplitude sigma must lie in [0, 0.2)");
  if (!(engine.window_factor >= 0.0)) throw DomainError("window factor must be non-negative");
  if (threads < 0) throw DomainError("thread count must be non-negative");
}

PhaseGateFit phase_gate_fidelity(const Unitary& u) {
  const Complex a = u(kQubit0.index(), kQubit0.index());
  const Complex d = u(kQubit1.index(), kQubit1.index());
  const double f = std::pow(std::abs(a) + std::abs(d), 2) / 4.0;
  return {f, std::remainder(std::arg(d) - std::arg(a), kTwoPi)};
}

// ---- compiled sequence ----------------------------------------------------------------

struct CompiledSequence::Impl {
  enum class Kind { Pulse, Free, Ramp, Light, PrepDone, Blowaway };
  struct Step {
    Kind kind = Kind::Free;
    double duration = 0.0;             // s
    bool raised = false;               // trap at its end depths
    std::vector<int> kernel;           // per class (Pulse)
    std::vector<double> scatter;       // per class: shift-out scattering probability
    std::vector<double> ramp_phase;    // per class: integral of the trap shift over the ramp (Ramp)
    double bright_rate = 0.0, shelved_rate = 0.0;  // Light
    bool in_camera = true;
  };
  struct Kernel {
    PulseOp op;
    LevelShifts shifts{};
  };
  struct ClassInfo {
    double start_depth = 0.0, end_depth = 0.0;
    std::vector<int> lit;  // shift-out events covering the class
  };

  std::vector<Step> steps;
  std::vector<Kernel> kernels;
  std::vector<ClassInfo> classes;
  std::vector<int> site_class;  // per simulated atom
  LevelShifts zeeman_coeff{};   // level shift per unit noise deviate
  LevelShifts trap_coeff{};     // 1 on f=4 levels
  bool has_prep = false;

  mutable std::mutex mu;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const std::vector<Unitary>>> cache;  // (bin, node)

  std::shared_ptr<const std::vector<Unitary>> unitaries(int bin, int node, const SimulationConfig& cfg,
                                                        const FieldEnvironment& env) const {
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = cache.find({bin, node});
      if (it != cache.end()) return it->second;
    }
    const double xi = bin * cfg.noise.sigma / kNoiseBinsPerSigma;
    const double amp = 1.0 + cfg.amplitude_sigma * kGhNodes[static_cast<size_t>(node)];
    auto out = std::make_shared<std::vector<Unitary>>();
    out->reserve(kernels.size());
    for (const auto& k : kernels) {
      PulseOp op = k.op;
      op.rabi *= amp;
      LevelShifts s = k.shifts;
      for (int i = 0; i < kNumLevels; ++i) s[static_cast<size_t>(i)] += xi * zeeman_coeff[static_cast<size_t>(i)];
      out->push_back(PulsePropagator(op, env, cfg.engine).unitary(s));
    }
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(std::pair{bin, node}, std::move(out)).first->second;
  }
};

CompiledSequence::~CompiledSequence() = default;

CompiledSequence::CompiledSequence(const SequenceIR& ir, const SimulationConfig& cfg)
    : ir_(ir), cfg_(cfg), impl_(std::make_unique<Impl>()) {
  cfg_.check();
  ir_.env.check();
  auto report = validate(ir_);
  if (!report.ok) {
    std::string msg = "sequence failed validation:";
    for (const auto& d : report.diagnostics) {
      if (!d.ok) msg += " " + d.message + ";";
    }
    throw ValidationError(msg);
  }
  Impl& im = *impl_;
  im.zeeman_coeff = zeeman_noise_shifts(ir_.env, 1.0);
  for (int k = 7; k < kNumLevels; ++k) im.trap_coeff[static_cast<size_t>(k)] = 1.0;

  sites_.push_back(ir_.ancilla_site);
  for (int s : ir_.data_sites) sites_.push_back(s);

  // Site classes: same depths and same shift-out exposure.
  const auto d0 = start_depths(ir_.trap);
  const auto d1 = end_depths(ir_.trap);
  std::vector<const Event*> lights;
  for (const auto& e : ir_.events) {
    if (e.channel() == Channel::ShiftOut) lights.push_back(&e);
  }
  for (int s : sites_) {
    Impl::ClassInfo c;
    c.start_depth = d0[static_cast<size_t>(s)];
    c.end_depth = d1[static_cast<size_t>(s)];
    for (const Event* e : lights) {
      if (std::get<ShiftOutLight>(e->payload).site_mask & (1u << static_cast<unsigned>(s))) c.lit.push_back(e->id);
    }
    int found = -1;
    for (size_t i = 0; i < im.classes.size(); ++i) {
      const auto& o = im.classes[i];
      if (o.start_depth == c.start_depth && o.end_depth == c.end_depth && o.lit == c.lit) found = static_cast<int>(i);
    }
    if (found < 0) {
      found = static_cast<int>(im.classes.size());
      im.classes.push_back(c);
    }
    im.site_class.push_back(found);
  }
  const size_t nc = im.classes.size();

  // Ramp integrals of the depth excess, per class.
  std::vector<double> ramp_integral(nc, 0.0);
  for (size_t c = 0; c < nc; ++c) {
    int site = -1;
    for (size_t a = 0; a < sites_.size(); ++a) {
      if (im.site_class[a] == static_cast<int>(c)) site = sites_[a];
    }
    const double base = im.classes[c].start_depth;
    auto f = [&](double t) { return trap_ramp(ir_.trap, t)[static_cast<size_t>(site)] - base; };
    ramp_integral[c] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, ir_.trap.ramp_time, 8, 1e-12);
  }

  std::map<std::string, int> kernel_ids;
  auto kernel_for = [&](const PulseOp& op, const LevelShifts& shifts) {
    std::string key = fmt::format("{}|{}|{}|{}|{}|{:a}|{:a}|{:a}|{:a}", static_cast<int>(op.kind), op.lower.index(),
                                  op.upper.index(), op.site_mask, 0, op.rabi, op.detuning, op.phase, op.duration);
    for (const auto& p : op.polarization) key += fmt::format("|{:a},{:a}", p.real(), p.imag());
    for (double s : shifts) key += fmt::format("|{:a}", s);
    auto it = kernel_ids.find(key);
    if (it != kernel_ids.end()) return it->second;
    const int id = static_cast<int>(im.kernels.size());
    im.kernels.push_back({op, shifts});
    kernel_ids.emplace(key, id);
    return id;
  };

  std::vector<const Event*> order;
  for (const auto& e : ir_.events) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const Event* a, const Event* b) { return a->t_start < b->t_start; });

  std::int64_t cursor = 0;
  bool raised = false;
  std::int64_t cam_lo = 0, cam_hi = -1;
  for (const Event* e : order) {
    if (e->channel() == Channel::Camera) {
      cam_lo = e->t_start;
      cam_hi = e->t_end();
    }
  }
  int last_prep = -1;
  for (size_t i = 0; i < order.size(); ++i) {
    const auto* mw = std::get_if<MicrowavePulse>(&order[i]->payload);
    if (mw && mw->role == "prep") last_prep = static_cast<int>(i);
  }
  im.has_prep = last_prep >= 0;

  auto free_step = [&](std::int64_t ns) {
    if (ns <= 0) return;
    Impl::Step st;
    st.kind = Impl::Kind::Free;
    st.duration = static_cast<double>(ns) * 1e-9;
    st.raised = raised;
    im.steps.push_back(std::move(st));
  };

  for (size_t i = 0; i < order.size(); ++i) {
    const Event& e = *order[i];
    const Channel ch = e.channel();
    if (ch == Channel::ShiftOut || ch == Channel::Camera) continue;  // folded into other steps
    free_step(e.t_start - cursor);
    cursor = std::max(cursor, e.t_start);
    Impl::Step st;
    st.raised = raised;
    if (const auto* mw = std::get_if<MicrowavePulse>(&e.payload)) {
      st.kind = Impl::Kind::Pulse;
      st.duration = mw->op.duration;
      for (size_t c = 0; c < nc; ++c) {
        LevelShifts s{};
        double pscat = 0.0;
        const double trap = raised ? cfg_.trap_shift_per_kelvin * (im.classes[c].end_depth - im.classes[c].start_depth) : 0.0;
        for (int k = 0; k < kNumLevels; ++k) s[static_cast<size_t>(k)] = trap * im.trap_coeff[static_cast<size_t>(k)];
        for (int id : im.classes[c].lit) {
          const Event& le = ir_.events[static_cast<size_t>(id)];
          if (le.t_start < e.t_end() && e.t_start < le.t_end()) {
            const auto& so = std::get<ShiftOutLight>(le.payload);
            for (int k = 7; k < kNumLevels; ++k) s[static_cast<size_t>(k)] += so.light_shift;
            pscat += so.p_scat;
          }
        }
        st.kernel.push_back(kernel_for(mw->op, s));
        st.scatter.push_back(std::min(pscat, 1.0));
      }
      im.steps.push_back(std::move(st));
      cursor = e.t_start + to_ns(mw->op.duration);
      free_step(e.t_end() - cursor);
      cursor = e.t_end();
    } else if (const auto* rl = std::get_if<ReadoutLight>(&e.payload)) {
      st.kind = Impl::Kind::Light;
      st.duration = static_cast<double>(e.duration) * 1e-9;
      st.bright_rate = scattering_rate_bright(cfg_.readout.gamma, rl->saturation, rl->detuning);
      st.shelved_rate = scattering_rate_offresonant(
          shelved_scatter_params(cfg_.readout.gamma, rl->saturation, rl->detuning, ir_.env.omega_q));
      st.in_camera = e.t_start >= cam_lo && e.t_end() <= cam_hi;
      im.steps.push_back(std::move(st));
      cursor = e.t_end();
    } else if (const auto* tr = std::get_if<TrapRamp>(&e.payload)) {
      st.kind = Impl::Kind::Ramp;
      st.duration = static_cast<double>(e.duration) * 1e-9;
      for (size_t c = 0; c < nc; ++c) st.ramp_phase.push_back(cfg_.trap_shift_per_kelvin * ramp_integral[c]);
      im.steps.push_back(std::move(st));
      raised = tr->up;
      cursor = e.t_end();
    } else if (std::holds_alternative<Blowaway>(e.payload)) {
      st.kind = Impl::Kind::Blowaway;
      im.steps.push_back(std::move(st));
      cursor = e.t_end();
    }
    if (static_cast<int>(i) == last_prep) {
      Impl::Step marker;
      marker.kind = Impl::Kind::PrepDone;
      im.steps.push_back(std::move(marker));
    }
  }
}

namespace {

struct ShotNoise {
  double xi = 0.0;
  int bin = 0;
  int node = kAmplitudeNodes / 2;
};

ShotNoise draw_noise(const SimulationConfig& cfg, std::uint64_t shot) {
  ShotNoise n;
  n.xi = sample_noise(cfg.noise, shot);
  if (cfg.noise.sigma > 0.0) {
    const double b = std::round(n.xi / cfg.noise.sigma * kNoiseBinsPerSigma);
    n.bin = static_cast<int>(std::clamp(b, -static_cast<double>(kNoiseBinLimit), static_cast<double>(kNoiseBinLimit)));
  }
  if (cfg.amplitude_sigma > 0.0) {
    auto rng = shot_rng(cfg.noise.seed, shot, Stream::Amplitude);
    std::discrete_distribution<int> d(kGhWeights.begin(), kGhWeights.end());
    n.node = d(rng);
  }
  return n;
}

void apply_phase(StateVector& a, const LevelShifts& coeff, double rate, double t, double extra = 0.0,
                 const LevelShifts* extra_coeff = nullptr) {
  for (int k = 0; k < kNumLevels; ++k) {
    double ph = coeff[static_cast<size_t>(k)] * rate * t;
    if (extra_coeff) ph += (*extra_coeff)[static_cast<size_t>(k)] * extra;
    if (ph != 0.0) a[k] *= std::exp(-kI * ph);
  }
}

}  // namespace

ShotRecord CompiledSequence::run_shot(std::uint64_t shot) const {
  const Impl& im = *impl_;
  const ReadoutParams& rp = cfg_.readout;
  const ShotNoise nz = draw_noise(cfg_, shot);
  const auto units = im.unitaries(nz.bin, nz.node, cfg_, ir_.env);
  const double xi_q = nz.bin * cfg_.noise.sigma / kNoiseBinsPerSigma;
  const double residual = nz.xi - xi_q;

  auto spam_rng = shot_rng(cfg_.noise.seed, shot, Stream::Spam);
  auto phys = shot_rng(cfg_.noise.seed, shot, Stream::Readout);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  const size_t n = sites_.size();
  ShotRecord rec;
  rec.shot = shot;
  std::vector<AtomState> atoms(n, AtomState::basis(ir_.initial));
  rec.atoms.resize(n);
  for (size_t a = 0; a < n; ++a) {
    rec.atoms[a].site = sites_[a];
    atoms[a].motional_energy = rp.initial_energy();
    if (uni(spam_rng) < cfg_.spam.loss_pre) {
      atoms[a].lost = true;
      rec.atoms[a].present_at_mcm = false;
    }
  }
  std::vector<bool> readout_started(n, false);
  const double kb = kBoltzmann;

  for (const auto& st : im.steps) {
    switch (st.kind) {
      case Impl::Kind::PrepDone:
        for (size_t a = 0; a < n; ++a) {
          const double u = uni(spam_rng);
          if (u < cfg_.spam.prep3) {
            const int m = std::uniform_int_distribution<int>(1, 3)(spam_rng);
            atoms[a].amp = AtomState::basis({3, m}).amp;
            rec.atoms[a].prepared_ok = false;
          } else if (u < cfg_.spam.prep3 + cfg_.spam.prep4) {
            const int m = std::uniform_int_distribution<int>(1, 4)(spam_rng);
            atoms[a].amp = AtomState::basis({4, m}).amp;
            rec.atoms[a].prepared_ok = false;
          }
        }
        break;
      case Impl::Kind::Free:
        for (size_t a = 0; a < n; ++a) {
          if (atoms[a].lost) continue;
          const auto& c = im.classes[static_cast<size_t>(im.site_class[a])];
          const double trap = st.raised ? cfg_.trap_shift_per_kelvin * (c.end_depth - c.start_depth) : 0.0;
          apply_phase(atoms[a].amp, im.zeeman_coeff, nz.xi, st.duration, trap * st.duration, &im.trap_coeff);
        }
        break;
      case Impl::Kind::Ramp:
        for (size_t a = 0; a < n; ++a) {
          if (atoms[a].lost) continue;
          const double ph = st.ramp_phase[static_cast<size_t>(im.site_class[a])];
          apply_phase(atoms[a].amp, im.zeeman_coeff, nz.xi, st.duration, ph, &im.trap_coeff);
        }
        break;
      case Impl::Kind::Pulse:
        for (size_t a = 0; a < n; ++a) {
          if (atoms[a].lost) continue;
          const size_t c = static_cast<size_t>(im.site_class[a]);
          atoms[a].amp = (*units)[static_cast<size_t>(st.kernel[c])] * atoms[a].amp;
          apply_phase(atoms[a].amp, im.zeeman_coeff, residual, st.duration);
          if (st.scatter[c] > 0.0 && uni(phys) < st.scatter[c]) {
            // A shift-out photon: collapse, then land in a random ground level.
            const int to = std::uniform_int_distribution<int>(0, kNumLevels - 1)(phys);
            atoms[a].amp = AtomState::basis(Level::from_index(to)).amp;
          }
        }
        break;
      case Impl::Kind::Blowaway:
        for (size_t a = 0; a < n; ++a) {
          if (atoms[a].lost) continue;
          if (uni(phys) < f4_population(atoms[a].amp)) {
            if (uni(spam_rng) >= cfg_.spam.blowaway) atoms[a].lost = true;
          }
          // Projective: survivors are in f=3 (or f=4 on a failed blowaway).
        }
        break;
      case Impl::Kind::Light:
        for (size_t a = 0; a < n; ++a) {
          AtomState& at = atoms[a];
          const auto& c = im.classes[static_cast<size_t>(im.site_class[a])];
          const double depth = st.raised ? c.end_depth : c.start_depth;
          if (!readout_started[a]) {
            readout_started[a] = true;
            rec.atoms[a].f4_at_readout = at.lost ? 0.0 : f4_population(at.amp);
          }
          if (at.lost) continue;
          if (!cfg_.scattering) {
            const double trap = st.raised ? cfg_.trap_shift_per_kelvin * (c.end_depth - c.start_depth) : 0.0;
            apply_phase(at.amp, im.zeeman_coeff, nz.xi, st.duration, trap * st.duration, &im.trap_coeff);
            continue;
          }
          double remaining = st.duration;
          std::int64_t photons = 0;
          const double e_ph = rp.heating_per_photon();
          const double limit = kb * depth;
          // Bright if projected into f=4.
          bool bright = uni(phys) < f4_population(at.amp);
          auto enter_bright = [&]() {
            const int k = sample_level(at.amp, 7, kNumLevels, phys);
            const Level l = Level::from_index(k);
            if (l.m <= 0 && uni(phys) < rp.pump_leak) {
              at.amp = AtomState::basis({3, uni(phys) < 0.5 ? 0 : -1}).amp;
              return false;
            }
            at.amp = AtomState::basis({4, 4}).amp;
            return true;
          };
          if (bright) {
            bright = enter_bright();
          } else {
            // Dark: keep only the f=3 part.
            for (int k = 7; k < kNumLevels; ++k) at.amp[k] = 0.0;
            at.amp /= std::sqrt(at.amp.squaredNorm());
          }
          while (remaining > 0.0 && !at.lost) {
            if (bright) {
              const double mean = st.bright_rate * remaining;
              const std::int64_t total = std::poisson_distribution<std::int64_t>(mean)(phys);
              std::int64_t to_depump = std::numeric_limits<std::int64_t>::max();
              if (rp.p_depump > 0.0) to_depump = 1 + std::geometric_distribution<std::int64_t>(rp.p_depump)(phys);
              std::int64_t to_loss = std::numeric_limits<std::int64_t>::max();
              if (rp.loss) {
                const double room = limit - at.motional_energy;
                to_loss = room < 0.0 ? 1 : static_cast<std::int64_t>(std::floor(room / e_ph)) + 1;
              }
              const std::int64_t k = std::min({total, to_depump, to_loss});
              photons += k;
              at.motional_energy += static_cast<double>(k) * e_ph;
              if (k == total) {
                remaining = 0.0;
                break;
              }
              // Time of the k-th of `total` uniform arrivals.
              std::gamma_distribution<double> ga(static_cast<double>(k), 1.0), gb(static_cast<double>(total - k + 1), 1.0);
              const double x = ga(phys), y = gb(phys);
              remaining -= remaining * x / (x + y);
              if (to_loss <= to_depump) {
                at.lost = true;
                rec.atoms[a].lost_in_readout = true;
                break;
              }
              std::discrete_distribution<int> w(rp.depump_weights.begin(), rp.depump_weights.end());
              at.amp = AtomState::basis({3, 1 + w(phys)}).amp;
              bright = false;
            } else {
              const double t = st.shelved_rate > 0.0 ? std::exponential_distribution<double>(st.shelved_rate)(phys)
                                                     : std::numeric_limits<double>::infinity();
              if (t >= remaining) {
                const double trap = st.raised ? cfg_.trap_shift_per_kelvin * (c.end_depth - c.start_depth) : 0.0;
                apply_phase(at.amp, im.zeeman_coeff, nz.xi, remaining, trap * remaining, &im.trap_coeff);
                remaining = 0.0;
                break;
              }
              remaining -= t;
              photons += 1;
              at.motional_energy += e_ph;
              if (rp.loss && at.motional_energy > limit) {
                at.lost = true;
                rec.atoms[a].lost_in_readout = true;
                break;
              }
              // Raman scattered into a random f=4 level, then pumped.
              const int m = std::uniform_int_distribution<int>(-4, 4)(phys);
              at.amp = AtomState::basis({4, m}).amp;
              bright = enter_bright();
            }
          }
          if (st.in_camera) rec.atoms[a].photons += photons;
        }
        break;
    }
  }

  for (size_t a = 0; a < n; ++a) {
    if (!atoms[a].lost && uni(spam_rng) < cfg_.spam.loss_post) atoms[a].lost = true;
    rec.atoms[a].retained = !atoms[a].lost;
  }

  // Camera: thinned photon count plus Gaussian read noise, clipped at zero.
  auto cam = shot_rng(cfg_.noise.seed, shot, Stream::Camera);
  const std::int64_t signal =
      rec.atoms[0].photons > 0 ? std::binomial_distribution<std::int64_t>(rec.atoms[0].photons, rp.eta)(cam) : 0;
  const double noise = rp.camera_sigma > 0.0
                           ? std::normal_distribution<double>(rp.camera_background, rp.camera_sigma)(cam)
                           : rp.camera_background;
  rec.ancilla_counts = std::max<std::int64_t>(0, signal + static_cast<std::int64_t>(std::llround(noise)));
  return rec;
}

std::vector<ShotRecord> CompiledSequence::run(std::uint64_t first_shot, std::uint64_t count) const {
  std::vector<ShotRecord> out(count);
  // Fill the unitary cache up front so the workers only read it.
  std::set<std::pair<int, int>> keys;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto nz = draw_noise(cfg_, first_shot + i);
    keys.insert({nz.bin, nz.node});
  }
  unsigned threads = cfg_.threads > 0 ? static_cast<unsigned>(cfg_.threads) : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, 64);
  {
    std::vector<std::pair<int, int>> list(keys.begin(), keys.end());
    std::atomic<size_t> next{0};
    auto work = [&]() {
      for (size_t j = next++; j < list.size(); j = next++) impl_->unitaries(list[j].first, list[j].second, cfg_, ir_.env);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
  }
  std::atomic<std::uint64_t> next{0};
  auto work = [&]() {
    for (std::uint64_t j = next++; j < count; j = next++) out[j] = run_shot(first_shot + j);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

Unitary CompiledSequence::data_unitary() const {
  const Impl& im = *impl_;
  if (sites_.size() < 2) throw ValidationError("sequence has no data sites");
  const size_t c = static_cast<size_t>(im.site_class[1]);
  Unitary u = Unitary::Identity();
  const auto& cls = im.classes[c];
  for (const auto& st : im.steps) {
    switch (st.kind) {
      case Impl::Kind::Pulse: {
        const auto& k = im.kernels[static_cast<size_t>(st.kernel[c])];
        u = PulsePropagator(k.op, ir_.env, cfg_.engine).unitary(k.shifts) * u;
        break;
      }
      case Impl::Kind::Free:
      case Impl::Kind::Light: {
        const double trap = st.raised ? cfg_.trap_shift_per_kelvin * (cls.end_depth - cls.start_depth) : 0.0;
        for (int k = 7; k < kNumLevels; ++k) u.row(k) *= std::exp(-kI * trap * st.duration);
        break;
      }
      case Impl::Kind::Ramp:
        for (int k = 7; k < kNumLevels; ++k) u.row(k) *= std::exp(-kI * st.ramp_phase[c]);
        break;
      default:
        break;
    }
  }
  return u;
}

}  // namespace mcm
