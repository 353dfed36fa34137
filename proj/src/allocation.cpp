#include "m2m/allocation.hpp"

#include "m2m/feasibility.hpp"

#include <algorithm>
#include <cmath>

namespace m2m {

namespace {

void require_subset(std::span<const NodeSpec> nodes, const GainMatrix& gains) {
  if (nodes.empty()) throw Error("allocation needs a nonempty link subset");
  if (gains.size() != nodes.size()) throw Error("gain matrix does not match the link subset");
}

double max_time(std::span<const NodeSpec> nodes, std::span<const std::size_t> levels, const RateTable& table) {
  double t = 0.0;
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    t = std::max(t, nodes[l].packet_bits / table.rate_at(levels[l]));
  }
  return t;
}

AllocationResult discrete_result(std::span<const NodeSpec> nodes, std::vector<std::size_t> levels,
                                 FeasibilityReport report, const RateTable& table, std::size_t checks) {
  AllocationResult r;
  r.feasible = true;
  r.rates.resize(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) r.rates[l] = table.rate_at(levels[l]);
  r.slot_length_s = max_time(nodes, levels, table);
  r.levels = std::move(levels);
  r.powers = std::move(report.min_powers);
  r.link_times_s = std::move(report.link_times_s);
  r.feasibility_checks = checks;
  return r;
}

}  // namespace

AllocationResult lttf(std::span<const NodeSpec> nodes, const GainMatrix& gains, const RateTable& table,
                      const RadioConfig& radio) {
  require_subset(nodes, gains);
  const std::size_t top = table.size() - 1;

  std::vector<std::size_t> levels(nodes.size());
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    auto q = table.lowest_level_meeting(nodes[l].packet_bits, nodes[l].delay_bound_s);
    if (!q) return AllocationResult::infeasible();
    levels[l] = *q;
  }

  std::size_t checks = 0;
  std::optional<std::vector<std::size_t>> best_levels;
  FeasibilityReport best_report;
  for (;;) {
    auto report = check_levels(nodes, gains, levels, table, radio);
    ++checks;
    if (!report.feasible()) break;
    best_levels = levels;
    best_report = std::move(report);

    std::size_t bottleneck = 0;
    double longest = -1.0;
    for (std::size_t l = 0; l < nodes.size(); ++l) {
      const double t = nodes[l].packet_bits / table.rate_at(levels[l]);
      if (t > longest) {
        longest = t;
        bottleneck = l;
      }
    }
    if (levels[bottleneck] >= top) break;
    ++levels[bottleneck];
  }

  if (!best_levels) return AllocationResult::infeasible(checks);
  return discrete_result(nodes, std::move(*best_levels), std::move(best_report), table, checks);
}

AllocationResult brute_force_optimal(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                     const RateTable& table, const RadioConfig& radio) {
  require_subset(nodes, gains);
  if (nodes.size() > kBruteForceMaxLinks || table.size() > kBruteForceMaxLevels) {
    throw Error("brute_force_optimal is limited to 4 links and 8 rate levels");
  }
  const std::size_t n = nodes.size();
  const std::size_t q = table.size();

  std::vector<std::size_t> levels(n, 0);
  std::optional<std::vector<std::size_t>> best;
  FeasibilityReport best_report;
  double best_t = kInfinity;
  std::size_t checks = 0;
  // Odometer over levels; the last link varies fastest, giving lexicographic order.
  for (bool done = false; !done;) {
    const double t = max_time(nodes, levels, table);
    if (t < best_t) {
      auto report = check_levels(nodes, gains, levels, table, radio);
      ++checks;
      if (report.feasible()) {
        best_t = t;
        best = levels;
        best_report = std::move(report);
      }
    }
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++levels[pos] < q) break;
      levels[pos] = 0;
      if (pos == 0) done = true;
    }
  }
  if (!best) return AllocationResult::infeasible(checks);
  return discrete_result(nodes, std::move(*best), std::move(best_report), table, checks);
}

AllocationResult continuous_optimal(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                    const RadioConfig& radio) {
  require_subset(nodes, gains);
  gains.check();
  const std::size_t n = nodes.size();
  const double bandwidth = radio.bandwidth_hz;

  // A link whose delay bound is below the common slot length sends in its
  // bound instead, so the search runs up to the loosest bound.
  double t_hi = 0.0;
  double t_lo = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    t_hi = std::max(t_hi, nodes[l].delay_bound_s);
    const double solo_rate = shannon_rate(bandwidth, radio.p_max_w * gains.direct(l) / radio.noise_w);
    t_lo = std::max(t_lo, nodes[l].packet_bits / solo_rate);
  }

  std::size_t checks = 0;
  auto link_time = [&](std::size_t l, double t) { return std::min(t, nodes[l].delay_bound_s); };
  auto evaluate = [&](double t) {
    std::vector<double> targets(n);
    std::vector<double> times(n);
    for (std::size_t l = 0; l < n; ++l) {
      times[l] = link_time(l, t);
      targets[l] = shannon_sinr_for_rate(bandwidth, nodes[l].packet_bits / times[l]);
    }
    ++checks;
    return check_targets(nodes, gains, targets, times, radio);
  };
  auto finish = [&](double t, FeasibilityReport report) {
    AllocationResult r;
    r.feasible = true;
    r.slot_length_s = t;
    r.rates.resize(n);
    r.link_times_s.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
      r.link_times_s[l] = link_time(l, t);
      r.rates[l] = nodes[l].packet_bits / r.link_times_s[l];
    }
    r.powers = std::move(report.min_powers);
    r.feasibility_checks = checks;
    return r;
  };
  // Shrinks a bracket [lo infeasible, hi feasible]; any infeasible midpoint
  // moves the lower end.
  auto refine = [&](double lo, double hi, FeasibilityReport hi_report) {
    while (hi - lo > kContinuousRelTolerance * hi) {
      const double mid = 0.5 * (lo + hi);
      auto report = evaluate(mid);
      if (report.feasible()) {
        hi = mid;
        hi_report = std::move(report);
      } else {
        lo = mid;
      }
    }
    return finish(hi, std::move(hi_report));
  };
  // Energy use t * p(t) need not be monotone in t, so an energy failure can
  // hide feasible points on either side; scan a grid and refine the first hit.
  auto grid_scan = [&]() {
    constexpr int kPoints = 512;
    const double step = (t_hi - t_lo) / (kPoints - 1);
    double prev = t_lo;
    for (int k = 0; k < kPoints; ++k) {
      const double t = k == kPoints - 1 ? t_hi : t_lo + step * k;
      auto report = evaluate(t);
      if (report.feasible()) {
        if (k == 0) return finish(t, std::move(report));
        return refine(prev, t, std::move(report));
      }
      prev = t;
    }
    return AllocationResult::infeasible(checks);
  };

  if (!(t_lo <= t_hi)) return AllocationResult::infeasible(checks);

  auto hi_report = evaluate(t_hi);
  if (!hi_report.feasible()) {
    if (hi_report.verdict == Verdict::InfeasibleEnergy) return grid_scan();
    return AllocationResult::infeasible(checks);
  }
  auto lo_report = evaluate(t_lo);
  if (lo_report.feasible()) return finish(t_lo, std::move(lo_report));
  if (lo_report.verdict == Verdict::InfeasibleEnergy) return grid_scan();

  double lo = t_lo;
  double hi = t_hi;
  while (hi - lo > kContinuousRelTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    auto report = evaluate(mid);
    if (report.feasible()) {
      hi = mid;
      hi_report = std::move(report);
    } else if (report.verdict == Verdict::InfeasibleEnergy) {
      return grid_scan();
    } else {
      lo = mid;
    }
  }
  return finish(hi, std::move(hi_report));
}

}  // namespace m2m
