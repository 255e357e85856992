#include "mpoc/target.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "mpoc/compress.hpp"
#include "mpoc/errors.hpp"
#include "mpoc/trotter.hpp"

namespace mpoc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string TargetBuildReport::to_text() const {
  std::ostringstream os;
  os << "t " << fmt(t) << '\n'
     << "chi " << chi << '\n'
     << "max_bond " << max_bond << '\n'
     << "discarded_weight " << fmt(discarded_weight) << '\n'
     << "budget " << fmt(budget) << '\n'
     << "final_cost " << fmt(final_cost) << '\n';
  for (const auto& [c, cost] : history) os << "ladder " << c << ' ' << fmt(cost) << '\n';
  return os.str();
}

TargetResult build_target(const TermList& terms, double t, const TargetOptions& opt) {
  if (opt.chi_ladder.empty()) throw ConfigError("empty bond-dimension ladder");
  if (!std::is_sorted(opt.chi_ladder.begin(), opt.chi_ladder.end())) {
    throw ConfigError("bond-dimension ladder must be ascending");
  }
  if (!(opt.conv_tol > 0.0)) throw ConfigError("conv_tol must be positive");
  if (opt.k == 0) throw ConfigError("k must be at least 1");

  const Circuit circ = merged_trotterization(step_plan(terms), t, 4, opt.k);
  TargetResult out;
  out.report.t = t;
  std::optional<Mpo> prev;
  double last_cost = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t chi : opt.chi_ladder) {
    TruncationStats stats;
    Mpo cur = circuit_to_mpo(circ, Truncation{chi, 1e-14}, &stats);
    const bool unbounded = cur.max_bond() < chi;
    if (prev) {
      last_cost = hst_cost(*prev, cur);
      out.report.history.push_back({chi, last_cost});
    } else if (unbounded) {
      out.report.history.push_back({chi, 0.0});
    }
    if (unbounded || (prev && last_cost < opt.conv_tol)) {
      out.report.chi = chi;
      out.report.max_bond = cur.max_bond();
      out.report.discarded_weight = stats.discarded_weight;
      out.mpo = std::move(cur);
      return out;
    }
    prev = std::move(cur);
  }
  throw CapacityError("target MPO did not converge within chi " +
                          std::to_string(opt.chi_ladder.back()) + " at t = " + fmt(t),
                      last_cost);
}

TimeSweepResult longest_time_sweep(const TermList& terms, const std::vector<double>& grid,
                                   std::size_t chi_cap, TargetOptions opt) {
  if (grid.empty()) throw ConfigError("empty time grid");
  std::vector<std::size_t> ladder;
  for (std::size_t c : opt.chi_ladder)
    if (c <= chi_cap) ladder.push_back(c);
  if (ladder.empty() || ladder.back() != chi_cap) ladder.push_back(chi_cap);
  opt.chi_ladder = ladder;

  TimeSweepResult r;
  r.times = grid;
  bool any = false;
  for (double t : grid) {
    bool ok = true;
    try {
      build_target(terms, t, opt);
    } catch (const CapacityError&) {
      ok = false;
    }
    r.feasible.push_back(ok);
    if (ok) {
      r.longest = any ? std::max(r.longest, t) : t;
      any = true;
    }
  }
  if (!any) throw CapacityError("no grid time converges within chi " + std::to_string(chi_cap), 1.0);
  return r;
}

TargetResult precompress_target(const Mpo& mpo, double error_budget, TargetBuildReport report) {
  if (!(error_budget > 0.0)) throw ConfigError("error budget must be positive");
  report.budget = error_budget;
  const std::size_t full = mpo.max_bond();
  for (std::size_t chi = 1; chi < full; chi *= 2) {
    CompressResult c = variational_compress(mpo, chi);
    const double cost = hst_cost(mpo, c.mpo);
    if (cost < error_budget) {
      report.final_cost = cost;
      report.max_bond = c.mpo.max_bond();
      return {std::move(c.mpo), report};
    }
  }
  report.final_cost = 0.0;
  report.max_bond = full;
  return {mpo, report};
}

}  // namespace mpoc
