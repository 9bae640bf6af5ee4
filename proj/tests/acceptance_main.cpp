// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Optional arguments restrict the run to the given keys or criterion numbers.
#include <cstdio>
#include <exception>

#include <fmt/core.h>

#include "mcm/reproduce.hpp"

int main(int argc, char** argv) {
  try {
    const mcm::RunConfig cfg = mcm::load_config(std::nullopt);
    mcm::ReproduceOptions opts;
    for (int i = 1; i < argc; ++i) opts.only.emplace_back(argv[i]);

    const auto results = mcm::reproduce(cfg, opts);
    bool ok = true;
    for (const auto& r : results) {
      const bool in_time = r.seconds <= r.budget_seconds;
      const bool pass = r.pass() && in_time;
      ok = ok && pass;
      fmt::print("{} criterion {:>2} {:<32} {:7.2f}s / {:.0f}s\n", pass ? "PASS" : "FAIL", r.id, r.title, r.seconds,
                 r.budget_seconds);
      for (const auto& c : r.checks)
        if (!c.pass) fmt::print("     failed: {} measured {:.6g} target {} tol {}\n", c.name, c.measured, c.target, c.tolerance);
      if (!in_time) fmt::print("     over time budget\n");
    }

    // The analytic criteria are re-run so the serialized report itself is compared.
    if (opts.only.empty()) {
      const mcm::ReproduceOptions quick{{"spam", "budget"}};
      const auto a = mcm::reproduce_json(mcm::reproduce(cfg, quick), cfg).dump();
      const auto b = mcm::reproduce_json(mcm::reproduce(cfg, quick), cfg).dump();
      fmt::print("{} report bytes stable across repeated runs\n", a == b ? "PASS" : "FAIL");
      ok = ok && a == b;
    }
    std::fflush(stdout);
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "acceptance aborted: {}\n", e.what());
    return 2;
  }
}
