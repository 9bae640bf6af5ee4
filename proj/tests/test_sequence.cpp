#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "mcm/sequence.hpp"

using namespace mcm;

namespace {

int count_roles(const SequenceIR& ir, const std::string& role) {
  int n = 0;
  for (const auto& e : ir.events)
    if (const auto* mw = std::get_if<MicrowavePulse>(&e.payload); mw && mw->role == role) ++n;
  return n;
}

}  // namespace

TEST(Sequence, DefaultCounts) {
  const SequenceIR ir = build_mcm_sequence({});
  EXPECT_EQ(ir.counts.microwave, 245);
  EXPECT_EQ(ir.counts.microwave_in_readout, 230);
  EXPECT_EQ(ir.counts.echoes, 8);
  EXPECT_EQ(ir.counts.repump_cycles, 46);
  EXPECT_EQ(ir.counts.light_segments, 54);
  EXPECT_EQ(count_roles(ir, "echo") % 8, 0);
  EXPECT_EQ(ir.data_sites.size() + ir.spare_sites.size() + 1, 9u);
  EXPECT_EQ(ir.ancilla_site, 4);
}

TEST(Sequence, ValidatesAndIsOrdered) {
  const SequenceIR ir = build_mcm_sequence({});
  const auto rep = validate(ir);
  EXPECT_TRUE(rep.ok) << rep.to_json().dump(2);
  std::int64_t last = -1;
  // Light segments sit inside the measurement window and every window event is contiguous.
  std::int64_t win_lo = -1, win_hi = -1;
  for (const auto& e : ir.events) {
    if (!e.in_readout) continue;
    if (win_lo < 0) win_lo = e.t_start;
    win_hi = std::max(win_hi, e.t_end());
  }
  for (const auto& e : ir.events) {
    if (e.channel() == Channel::ReadoutLight) EXPECT_TRUE(e.in_readout) << e.id;
    const bool inside = e.t_start >= win_lo && e.t_end() <= win_hi;
    if (e.channel() == Channel::Microwave) EXPECT_EQ(inside, e.in_readout) << e.id;
  }
}

TEST(Sequence, ValidatorCatchesOverlap) {
  SequenceIR ir = build_mcm_sequence({});
  Event* a = nullptr;
  Event* b = nullptr;
  for (auto& e : ir.events) {
    if (e.channel() != Channel::Microwave) continue;
    if (!a) a = &e;
    else if (!b) b = &e;
  }
  ASSERT_TRUE(a && b);
  b->t_start = a->t_start;
  const auto rep = validate(ir);
  EXPECT_FALSE(rep.ok);
  bool found = false;
  for (const auto& d : rep.diagnostics)
    if (d.check == "channel-exclusivity" && !d.ok) {
      found = true;
      EXPECT_EQ(d.event_ids.size(), 2u);
    }
  EXPECT_TRUE(found);
}

TEST(Sequence, ValidatorCatchesCountsAndAnchors) {
  SequenceIR ir = build_mcm_sequence({});
  ir.counts.microwave += 1;
  EXPECT_FALSE(validate(ir).ok);

  SequenceIR bad = build_mcm_sequence({});
  for (auto& e : bad.events) {
    if (auto* mw = std::get_if<MicrowavePulse>(&e.payload)) {
      mw->op.lower = {3, 0};
      mw->op.upper = {4, 3};  // not dipole allowed
      break;
    }
  }
  const auto rep = validate(bad);
  EXPECT_FALSE(rep.ok);
  EXPECT_NE(rep.to_json().dump().find("frame"), std::string::npos);
}

TEST(Sequence, CanonicalDumpIsStable) {
  const std::string a = dump_canonical(build_mcm_sequence({}));
  const std::string b = dump_canonical(build_mcm_sequence({}));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find(kSequenceSchema), std::string::npos);
  SequenceConfig other;
  other.input = "x";
  EXPECT_NE(a, dump_canonical(build_mcm_sequence(other)));
}

TEST(Sequence, EchoGroupsBalance) {
  for (auto [echoes, repumps] : std::vector<std::pair<int, int>>{{8, 46}, {4, 10}, {2, 0}, {6, 30}}) {
    const auto g = echo_group_sizes(echoes, repumps);
    ASSERT_EQ(static_cast<int>(g.size()), echoes);
    EXPECT_EQ(std::accumulate(g.begin(), g.end(), 0), echoes + repumps);
    int alt = 0;
    for (size_t i = 0; i < g.size(); ++i) alt += (i % 2 ? -1 : 1) * g[i];
    EXPECT_EQ(alt, 0) << echoes << " " << repumps;
  }
  EXPECT_THROW(echo_group_sizes(3, 10), ValidationError);
  EXPECT_THROW(echo_group_sizes(4, 9), ValidationError);
  EXPECT_TRUE(echo_group_sizes(0, 5).empty());
}

TEST(InputRotation, BlochVectors) {
  // Expected (c0, c1) up to normalization for each named input.
  const std::complex<double> i1{0.0, 1.0};
  const std::vector<std::pair<std::string, std::complex<double>>> cases{
      {"x", 1.0}, {"-x", -1.0}, {"y", i1}, {"-y", -i1}};
  for (const auto& [name, c1] : cases) {
    const auto r = input_rotation(name);
    ASSERT_TRUE(r);
    const Mat2 u = two_level_unitary(1.0, 0.0, r->phase, r->angle);
    const std::complex<double> a0 = u(0, 0), a1 = u(1, 0);
    EXPECT_NEAR(std::abs(a1 / a0 - c1), 0.0, 1e-12) << name;
  }
  EXPECT_FALSE(input_rotation("0"));
  EXPECT_FALSE(input_rotation("z"));
  const auto one = input_rotation("1");
  ASSERT_TRUE(one);
  EXPECT_NEAR(one->angle, kPi, 1e-15);
  EXPECT_THROW(input_rotation("w"), ValidationError);
}

TEST(InputRotation, UnrotateReturnsToZero) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    std::complex<double> c0{n(rng), n(rng)}, c1{n(rng), n(rng)};
    const double norm = std::sqrt(std::norm(c0) + std::norm(c1));
    c0 /= norm;
    c1 /= norm;
    const Rotation r = unrotate(c0, c1);
    const Mat2 u = two_level_unitary(1.0, 0.0, r.phase, r.angle);
    EXPECT_NEAR(std::norm(u(0, 0) * c0 + u(0, 1) * c1), 1.0, 1e-12);
  }
  EXPECT_THROW(unrotate(0.0, 0.0), ValidationError);
}

TEST(Sequence, SpamSchedulesBuild) {
  for (auto k : {SpamExperiment::Base, SpamExperiment::Prep3, SpamExperiment::Prep4, SpamExperiment::Blowaway}) {
    const auto ir = build_spam_sequence({}, k);
    EXPECT_TRUE(validate(ir).ok);
    EXPECT_EQ(ir.counts.microwave_in_readout, 0);
  }
  const auto p3 = build_spam_sequence({}, SpamExperiment::Prep3);
  const auto p4 = build_spam_sequence({}, SpamExperiment::Prep4);
  EXPECT_EQ(p4.counts.microwave, p3.counts.microwave + 3);  // one CORPSE clock pulse
}

TEST(Sequence, UnitConversion) {
  EXPECT_EQ(to_ns(1e-6), 1000);
  EXPECT_EQ(to_ns(22.32e-6), 22320);
}
