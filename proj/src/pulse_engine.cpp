#include "mcm/pulse_engine.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <limits>
#include <numeric>

namespace mcm {

namespace {

constexpr Complex kI{0.0, 1.0};

// Zeeman part of a level energy (hyperfine offset removed).
double zeeman_part(const Level& l, const FieldEnvironment& env) {
  return zeeman_energy(l, env) - (l.f == 4 ? 0.5 : -0.5) * env.omega_q;
}

int find_root(std::array<int, kNumLevels>& parent, int i) {
  while (parent[static_cast<size_t>(i)] != i) i = parent[static_cast<size_t>(i)] = parent[static_cast<size_t>(parent[static_cast<size_t>(i)])];
  return i;
}

}  // namespace

AtomState AtomState::basis(const Level& l) {
  if (!l.valid()) throw DomainError("invalid level");
  AtomState s;
  s.amp[l.index()] = 1.0;
  return s;
}

void PulseOp::check() const {
  if (lower.f != 3 || upper.f != 4 || !lower.valid() || !upper.valid()) {
    throw DomainError(fmt::format("anchor {} <-> {} must run from f=3 to f=4", lower.label(), upper.label()));
  }
  if (!coupling_component(lower, upper)) {
    throw DomainError(fmt::format("anchor {} <-> {} violates the |dm| <= 1 selection rule", lower.label(), upper.label()));
  }
  if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw DomainError("Rabi frequency must be finite and non-negative");
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw DomainError("pulse duration must be finite and non-negative");
  if (!std::isfinite(detuning) || !std::isfinite(phase)) throw DomainError("pulse detuning and phase must be finite");
}

PulsePropagator::PulsePropagator(const PulseOp& op, const FieldEnvironment& env, const PulseEngineOptions& opts)
    : op_(op) {
  op.check();
  env.check();
  block_of_.fill(-1);

  std::array<double, kNumLevels> z{};
  for (int k = 0; k < kNumLevels; ++k) z[static_cast<size_t>(k)] = zeeman_part(Level::from_index(k), env);
  // Carrier offset from the bare hyperfine splitting.
  const double carrier = z[static_cast<size_t>(op.upper.index())] - z[static_cast<size_t>(op.lower.index())] + op.detuning;
  for (int k = 0; k < kNumLevels; ++k) {
    frame_[static_cast<size_t>(k)] = z[static_cast<size_t>(k)] - (k >= 7 ? carrier : 0.0);
  }
  if (op.rabi == 0.0 || op.duration == 0.0) return;

  const Complex ca = mw_coupling(op.lower, op.upper, op.polarization);
  if (std::abs(ca) == 0.0) {
    throw DomainError(fmt::format("polarization does not drive the anchor {} <-> {}", op.lower.label(), op.upper.label()));
  }
  const Complex scale = 0.5 * op.rabi * std::exp(-kI * op.phase) * std::conj(ca) / std::norm(ca);

  struct Link {
    int lo, hi;
    Complex h;  // matrix element <hi|H|lo>
  };
  std::vector<Link> links;
  std::array<int, kNumLevels> parent{};
  std::iota(parent.begin(), parent.end(), 0);
  for (int m3 = -3; m3 <= 3; ++m3) {
    for (int q = -1; q <= 1; ++q) {
      const Level lo{3, m3};
      const Level hi{4, m3 + q};
      if (!hi.valid()) continue;
      const Complex c = mw_coupling(lo, hi, op.polarization);
      if (std::abs(c) == 0.0) continue;
      const bool anchor = lo == op.lower && hi == op.upper;
      const double off = carrier - (z[static_cast<size_t>(hi.index())] - z[static_cast<size_t>(lo.index())]);
      if (!anchor && !(std::abs(off) < opts.window_factor * op.rabi)) continue;
      links.push_back({lo.index(), hi.index(), scale * c});
      parent[static_cast<size_t>(find_root(parent, lo.index()))] = find_root(parent, hi.index());
    }
  }
  transitions_ = static_cast<int>(links.size());

  std::array<int, kNumLevels> root_block{};
  root_block.fill(-1);
  for (const auto& l : links) {
    for (int k : {l.lo, l.hi}) {
      if (block_of_[static_cast<size_t>(k)] >= 0) continue;
      const int r = find_root(parent, k);
      if (root_block[static_cast<size_t>(r)] < 0) {
        root_block[static_cast<size_t>(r)] = static_cast<int>(blocks_.size());
        blocks_.push_back({});
      }
      block_of_[static_cast<size_t>(k)] = root_block[static_cast<size_t>(r)];
      blocks_[static_cast<size_t>(root_block[static_cast<size_t>(r)])].levels.push_back(k);
    }
  }
  for (auto& b : blocks_) {
    std::sort(b.levels.begin(), b.levels.end());
    const auto n = static_cast<Eigen::Index>(b.levels.size());
    b.h = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) b.h(i, i) = frame_[static_cast<size_t>(b.levels[static_cast<size_t>(i)])];
  }
  auto pos = [&](const Block& b, int level) {
    return static_cast<Eigen::Index>(std::lower_bound(b.levels.begin(), b.levels.end(), level) - b.levels.begin());
  };
  for (const auto& l : links) {
    Block& b = blocks_[static_cast<size_t>(block_of_[static_cast<size_t>(l.lo)])];
    const auto i = pos(b, l.hi), j = pos(b, l.lo);
    b.h(i, j) += l.h;
    b.h(j, i) += std::conj(l.h);
  }
}

Eigen::MatrixXcd PulsePropagator::block_unitary(const Block& b, const LevelShifts& shifts) const {
  const double t = op_.duration;
  const auto n = static_cast<Eigen::Index>(b.levels.size());
  Eigen::MatrixXcd h = b.h;
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) += shifts[static_cast<size_t>(b.levels[static_cast<size_t>(i)])];
    mean += h(i, i).real();
  }
  mean /= static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) -= mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const auto& v = es.eigenvectors();
  Eigen::VectorXcd ph(n);
  for (Eigen::Index i = 0; i < n; ++i) ph[i] = std::exp(-kI * es.eigenvalues()[i] * t);
  Eigen::MatrixXcd w = v * ph.asDiagonal() * v.adjoint();
  // Back to the bare frame, restoring the removed mean energy.
  for (Eigen::Index i = 0; i < n; ++i) {
    w.row(i) *= std::exp(kI * (frame_[static_cast<size_t>(b.levels[static_cast<size_t>(i)])] - mean) * t);
  }
  return w;
}

void PulsePropagator::apply(StateVector& psi, const LevelShifts& shifts) const {
  const double t = op_.duration;
  if (t == 0.0) return;
  for (int k = 0; k < kNumLevels; ++k) {
    if (block_of_[static_cast<size_t>(k)] < 0) psi[k] *= std::exp(-kI * shifts[static_cast<size_t>(k)] * t);
  }
  for (const auto& b : blocks_) {
    const auto n = static_cast<Eigen::Index>(b.levels.size());
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = psi[b.levels[static_cast<size_t>(i)]];
    x = block_unitary(b, shifts) * x;
    for (Eigen::Index i = 0; i < n; ++i) psi[b.levels[static_cast<size_t>(i)]] = x[i];
  }
}

Unitary PulsePropagator::unitary(const LevelShifts& shifts) const {
  Unitary u = Unitary::Zero();
  const double t = op_.duration;
  for (int k = 0; k < kNumLevels; ++k) {
    if (block_of_[static_cast<size_t>(k)] < 0) u(k, k) = std::exp(-kI * shifts[static_cast<size_t>(k)] * t);
  }
  if (t == 0.0) return Unitary::Identity();
  for (const auto& b : blocks_) {
    const Eigen::MatrixXcd w = block_unitary(b, shifts);
    for (size_t i = 0; i < b.levels.size(); ++i) {
      for (size_t j = 0; j < b.levels.size(); ++j) {
        u(b.levels[i], b.levels[j]) = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return u;
}

void apply_pulse(AtomState& state, const PulseOp& op, const FieldEnvironment& env, const LevelShifts& shifts,
                 const PulseEngineOptions& opts) {
  if (state.lost) return;
  const double n = state.norm();
  if (std::abs(n - 1.0) > 1e-9) throw DomainError(fmt::format("state norm {} is not 1", n));
  PulsePropagator(op, env, opts).apply(state.amp, shifts);
}

Unitary pulse_unitary(const PulseOp& op, const FieldEnvironment& env, const LevelShifts& shifts,
                      const PulseEngineOptions& opts) {
  return PulsePropagator(op, env, opts).unitary(shifts);
}

void free_evolution(StateVector& psi, double t, const LevelShifts& shifts) {
  if (t < 0.0) throw DomainError("negative evolution time");
  for (int k = 0; k < kNumLevels; ++k) psi[k] *= std::exp(-kI * shifts[static_cast<size_t>(k)] * t);
}

Mat2 two_level_unitary(double rabi, double detuning, double phase, double t) {
  const double w = std::hypot(rabi, detuning);
  Mat2 u = Mat2::Identity();
  if (w > 0.0) {
    const Complex g = 0.5 * rabi * std::exp(-kI * phase);
    Mat2 hs;  // H + (detuning/2) I, traceless
    hs << 0.5 * detuning, std::conj(g), g, -0.5 * detuning;
    const double c = std::cos(0.5 * w * t), s = std::sin(0.5 * w * t);
    u = c * Mat2::Identity() - kI * (s / (0.5 * w)) * hs;
    u *= std::exp(0.5 * kI * detuning * t);
  }
  Mat2 frame = Mat2::Identity();
  frame(1, 1) = std::exp(-kI * detuning * t);
  return frame * u;
}

std::array<PulseOp, 3> corpse(const PulseOp& p) {
  if (!(p.rabi > 0.0)) throw DomainError("CORPSE needs a positive Rabi frequency");
  std::array<PulseOp, 3> out{p, p, p};
  const double angles[3] = {7.0 * kPi / 3.0, 5.0 * kPi / 3.0, kPi / 3.0};
  const double phases[3] = {p.phase, p.phase + kPi, p.phase};
  for (size_t i = 0; i < 3; ++i) {
    out[i].kind = PulseKind::CorpseSegment;
    out[i].duration = angles[i] / p.rabi;
    out[i].phase = phases[i];
  }
  return out;
}

std::array<PulseOp, 3> corpse(const Level& a, const Level& b, double rabi, double phase, const Polarization& pol) {
  return corpse(rotation(a, b, rabi, kPi, phase, pol));
}

PulseOp rotation(const Level& a, const Level& b, double rabi, double angle, double phase, const Polarization& pol) {
  if (!(rabi > 0.0)) throw DomainError("rotation needs a positive Rabi frequency");
  if (!(angle >= 0.0)) throw DomainError("rotation angle must be non-negative");
  PulseOp op;
  op.lower = a.f == 3 ? a : b;
  op.upper = a.f == 3 ? b : a;
  op.rabi = rabi;
  op.phase = phase;
  op.duration = angle / rabi;
  op.polarization = pol;
  op.check();
  return op;
}

// ---- polarization synthesis ----------------------------------------------------------

Polarization HornDrive::synthesize(double horn_phase) const {
  const Complex rot = std::exp(kI * horn_phase);
  Polarization p;
  for (size_t q = 0; q < 3; ++q) p[q] = amp1 * horn1[q] + amp2 * rot * horn2[q];
  return p;
}

double shelving_rabi_ratio(const HornDrive& drive, double horn_phase) {
  const Polarization p = drive.synthesize(horn_phase);
  const double num = std::abs(mw_coupling({3, -1}, {4, 0}, p));
  const double den = std::abs(mw_coupling({3, 0}, {4, -1}, p));
  if (den == 0.0) return num == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
  return num / den;
}

namespace {

constexpr int kPhaseGrid = 3600;

double grid_phase(int i) { return kTwoPi * i / kPhaseGrid; }

// Refines an interior extremum of f near grid point i (maximizes f).
double refine_max(const std::function<double(double)>& f, int i) {
  auto neg = [&](double x) { return -f(x); };
  auto r = boost::math::tools::brent_find_minima(neg, grid_phase(i - 1), grid_phase(i + 1), 52);
  return r.first;
}

double wrap_phase(double x) {
  x = std::fmod(x, kTwoPi);
  if (x < 0.0) x += kTwoPi;
  return x;
}

}  // namespace

RatioInterval achievable_ratio_interval(const HornDrive& drive) {
  auto f = [&](double x) { return std::atan(shelving_rabi_ratio(drive, x)); };
  int imin = 0, imax = 0;
  double fmin = 10.0, fmax = -10.0;
  for (int i = 0; i < kPhaseGrid; ++i) {
    const double v = f(grid_phase(i));
    if (std::isnan(v)) continue;
    if (v < fmin) fmin = v, imin = i;
    if (v > fmax) fmax = v, imax = i;
  }
  double lo = std::tan(std::min(fmin, f(refine_max([&](double x) { return -f(x); }, imin))));
  double hi = fmax >= kPi / 2 ? std::numeric_limits<double>::infinity()
                              : std::tan(std::max(fmax, f(refine_max(f, imax))));
  return {std::max(lo, 0.0), hi};
}

HornSolution solve_horn_phase(const HornDrive& drive, double target) {
  if (!(target > 0.0) || !std::isfinite(target)) throw SolverError("target Rabi ratio must be positive and finite");
  const double goal = std::atan(target);
  auto g = [&](double x) {
    const double r = shelving_rabi_ratio(drive, x);
    return std::isnan(r) ? std::numeric_limits<double>::quiet_NaN() : std::atan(r) - goal;
  };
  double prev = g(0.0);
  for (int i = 1; i <= kPhaseGrid; ++i) {
    const double a = grid_phase(i - 1), b = grid_phase(i);
    const double cur = g(b);
    if (prev == 0.0) {
      return {a, shelving_rabi_ratio(drive, a), drive.synthesize(a)};
    }
    if (!std::isnan(prev) && !std::isnan(cur) && (prev < 0.0) != (cur < 0.0) && cur != 0.0) {
      boost::uintmax_t iters = 200;
      auto tol = boost::math::tools::eps_tolerance<double>(50);
      auto [x0, x1] = boost::math::tools::toms748_solve(g, a, b, prev, cur, tol, iters);
      const double x = wrap_phase(0.5 * (x0 + x1));
      const double r = shelving_rabi_ratio(drive, x);
      if (std::abs(r / target - 1.0) > 1e-9) {
        throw SolverError(fmt::format("horn phase solve stalled at ratio {} (target {})", r, target));
      }
      return {x, r, drive.synthesize(x)};
    }
    prev = cur;
  }
  const auto iv = achievable_ratio_interval(drive);
  throw SolverError(fmt::format("Rabi ratio {} is unreachable; achievable interval is [{:.6g}, {:.6g}]", target,
                                iv.lo, iv.hi));
}

HornSolution best_horn_phase(const HornDrive& drive, const Level& a, const Level& b) {
  auto q = coupling_component(a, b);
  if (!q) throw DomainError(fmt::format("{} <-> {} is not a microwave transition", a.label(), b.label()));
  const auto qi = static_cast<size_t>(*q + 1);
  auto purity = [&](double x) {
    const Polarization p = drive.synthesize(x);
    const double tot = std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]);
    return tot > 0.0 ? std::norm(p[qi]) / tot : 0.0;
  };
  int best = 0;
  double bv = -1.0;
  for (int i = 0; i < kPhaseGrid; ++i) {
    const double v = purity(grid_phase(i));
    if (v > bv + 1e-12) bv = v, best = i;
  }
  if (!(bv > 0.0)) {
    throw SolverError(fmt::format("horns cannot drive {} <-> {} at any phase", a.label(), b.label()));
  }
  double x = wrap_phase(refine_max(purity, best));
  if (purity(x) < bv) x = grid_phase(best);
  return {x, std::numeric_limits<double>::quiet_NaN(), drive.synthesize(x)};
}

TwoPulseShelving two_pulse_shelving_solve(double ratio, double rabi2) {
  if (!(rabi2 > 0.0)) throw SolverError("reference Rabi frequency must be positive");
  if (!(ratio >= 0.25 - 1e-12 && ratio <= 0.75 + 1e-12)) {
    throw SolverError(fmt::format("Rabi ratio {} outside the admissible interval [1/4, 3/4]", ratio));
  }
  // Work in units of rabi2.  The second pulse is the first conjugated by a phase
  // rotation, so the optimal phase and best transfer follow in closed form.
  struct Eval {
    double transfer, phase, half;
  };
  auto eval = [&](double d) {
    const double t = kTwoPi / std::hypot(1.0, d);
    const Mat2 u = two_level_unitary(ratio, d, 0.0, t);
    const Complex p_lo = u(0, 1), p_hi = u(1, 1);  // start in the upper level
    const Complex a = u(0, 0) * p_lo, b = u(0, 1) * p_hi;
    const double tr = std::pow(std::abs(a) + std::abs(b), 2);
    return Eval{tr, wrap_phase(std::arg(a) - std::arg(b)), std::norm(p_lo)};
  };
  constexpr double kStep = 1e-3, kMax = 20.0;
  const int n = static_cast<int>(kMax / kStep);
  std::vector<double> f(static_cast<size_t>(n + 1));
  for (int i = 0; i <= n; ++i) f[static_cast<size_t>(i)] = eval(i * kStep).transfer;
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? f[static_cast<size_t>(i - 1)] : -1.0;
    const double here = f[static_cast<size_t>(i)];
    if (here < left || here < f[static_cast<size_t>(i + 1)] || here < 0.99) continue;
    double d = i * kStep;
    if (i > 0) {
      auto r = boost::math::tools::brent_find_minima([&](double x) { return -eval(x).transfer; },
                                                     (i - 1) * kStep, (i + 1) * kStep, 52);
      d = r.first;
    }
    const Eval e = eval(d);
    if (e.transfer < 0.999) continue;
    const double t = kTwoPi / std::hypot(1.0, d);
    const Mat2 u2 = two_level_unitary(1.0, d, 0.0, t);
    const Mat2 u2b = two_level_unitary(1.0, d, e.phase, t);
    const double ret = std::norm((u2b * u2)(0, 0));
    return {d * rabi2, t / rabi2, e.phase, e.transfer, e.half, ret};
  }
  throw SolverError(fmt::format("no two-pulse shelving solution found for ratio {}", ratio));
}

}  // namespace mcm
