#include "m2m/scheduling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace m2m {

// ---------------------------------------------------------------------------
// Pricers

ChannelPricer::ChannelPricer(std::vector<NodeSpec> nodes, const ChannelRealization& channel, RadioConfig radio,
                             RateTable table)
    : nodes_(std::move(nodes)), channel_(channel), radio_(radio), table_(std::move(table)) {}

ChannelPricer::ChannelPricer(std::vector<NodeSpec> nodes, const ChannelRealization& channel, RadioConfig radio)
    : nodes_(std::move(nodes)), channel_(channel), radio_(radio) {}

AllocationResult ChannelPricer::price(std::span<const std::size_t> members) const {
  std::vector<std::size_t> key(members.begin(), members.end());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  std::vector<NodeSpec> subset;
  subset.reserve(members.size());
  for (std::size_t m : members) subset.push_back(nodes_.at(m));
  const GainMatrix gains = channel_.subset(members);
  AllocationResult r = table_ ? lttf(subset, gains, *table_, radio_) : continuous_optimal(subset, gains, radio_);
  cache_.emplace(std::move(key), r);
  return r;
}

FixturePricer::FixturePricer(std::map<std::vector<std::size_t>, double> slot_lengths_s)
    : slot_lengths_s_(std::move(slot_lengths_s)) {}

AllocationResult FixturePricer::price(std::span<const std::size_t> members) const {
  const std::vector<std::size_t> key(members.begin(), members.end());
  auto it = slot_lengths_s_.find(key);
  if (it == slot_lengths_s_.end()) return AllocationResult::infeasible();
  AllocationResult r;
  r.feasible = true;
  r.slot_length_s = it->second;
  r.link_times_s.assign(members.size(), it->second);
  return r;
}

// ---------------------------------------------------------------------------
// Frame bookkeeping

namespace {

bool controllers_distinct(std::span<const std::size_t> members, const CheckedInstance& instance) {
  std::set<int> seen;
  for (std::size_t m : members) {
    if (!seen.insert(instance.nodes[m].controller_id).second) return false;
  }
  return true;
}

std::size_t distinct_controllers(std::span<const std::size_t> members, const CheckedInstance& instance) {
  std::set<int> seen;
  for (std::size_t m : members) seen.insert(instance.nodes[m].controller_id);
  return seen.size();
}

std::vector<int> occupied_subframes(int offset, int period, int subframe_count) {
  std::vector<int> out;
  for (int m = offset; m < subframe_count; m += period) out.push_back(m);
  return out;
}

std::string describe(std::span<const std::size_t> members) {
  std::string s = "{";
  for (std::size_t i = 0; i < members.size(); ++i) s += (i ? "," : "") + std::to_string(members[i]);
  return s + "}";
}

// Minimum-cost partition of a small class into priced subsets. `cost[mask]`
// is the slot length of the subset with that local bitmask (+inf when the
// subset is not allowed); returns the best total per mask and the subset
// chosen for the mask's lowest member.
struct PartitionTable {
  std::vector<double> best;
  std::vector<unsigned> choice;
};

PartitionTable partition_dp(std::size_t k, const std::vector<double>& cost) {
  const unsigned full = (1u << k);
  PartitionTable t{std::vector<double>(full, kInfinity), std::vector<unsigned>(full, 0)};
  t.best[0] = 0.0;
  for (unsigned mask = 1; mask < full; ++mask) {
    const unsigned low = mask & (~mask + 1u);
    const unsigned rest = mask ^ low;
    // Submasks of `rest`, each joined with the lowest member.
    for (unsigned sub = rest;; sub = (sub - 1) & rest) {
      const unsigned group = sub | low;
      if (std::isfinite(cost[group]) && std::isfinite(t.best[mask ^ group])) {
        const double total = cost[group] + t.best[mask ^ group];
        if (total < t.best[mask]) {
          t.best[mask] = total;
          t.choice[mask] = group;
        }
      }
      if (sub == 0) break;
    }
  }
  return t;
}

std::vector<std::size_t> members_of(unsigned mask, std::span<const std::size_t> universe) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (mask & (1u << i)) out.push_back(universe[i]);
  }
  return out;
}

// Summed in sorted order so that the same groups listed differently give
// bit-identical active lengths.
double total_slot(const std::vector<Group>& groups) {
  std::vector<double> slots;
  slots.reserve(groups.size());
  for (const auto& g : groups) slots.push_back(g.allocation.slot_length_s);
  std::sort(slots.begin(), slots.end());
  double t = 0.0;
  for (double x : slots) t += x;
  return t;
}

}  // namespace

ScheduleMetrics compute_metrics(const Frame& frame) {
  ScheduleMetrics m;
  m.active_lengths_s.assign(static_cast<std::size_t>(frame.subframe_count), 0.0);
  for (std::size_t s = 0; s < frame.groups.size(); ++s) m.active_lengths_s[s] = total_slot(frame.groups[s]);
  m.max_active_s = m.active_lengths_s.empty()
                       ? 0.0
                       : *std::max_element(m.active_lengths_s.begin(), m.active_lengths_s.end());
  return m;
}

int relative_period(const CheckedInstance& instance, std::size_t index) {
  return instance.nodes.at(index).period / instance.min_period;
}

std::optional<std::string> verify_frame(const Frame& frame, const CheckedInstance& instance) {
  const std::size_t n = instance.nodes.size();
  if (frame.subframe_count != instance.subframe_count) return "subframe count mismatch";
  if (frame.offsets.size() != n) return "offset vector has wrong size";
  if (frame.groups.size() != static_cast<std::size_t>(frame.subframe_count)) return "group table has wrong size";

  for (int m = 0; m < frame.subframe_count; ++m) {
    std::vector<int> appearances(n, 0);
    for (const auto& g : frame.groups[static_cast<std::size_t>(m)]) {
      if (g.members.empty()) return "empty group in subframe " + std::to_string(m);
      if (!g.allocation.feasible || !std::isfinite(g.allocation.slot_length_s)) {
        return "infeasible group " + describe(g.members) + " in subframe " + std::to_string(m);
      }
      if (!controllers_distinct(g.members, instance)) {
        return "group " + describe(g.members) + " shares a controller";
      }
      const int p0 = relative_period(instance, g.members.front());
      for (std::size_t node : g.members) {
        if (node >= n) return "group references unknown node";
        if (relative_period(instance, node) != p0) return "group " + describe(g.members) + " mixes periods";
        ++appearances[node];
      }
    }
    for (std::size_t l = 0; l < n; ++l) {
      const int p = relative_period(instance, l);
      const int offset = frame.offsets[l];
      if (offset < 0 || offset >= p) return "node " + std::to_string(l) + " has offset outside its period";
      const int expected = (m % p == offset) ? 1 : 0;
      if (appearances[l] != expected) {
        return "node " + std::to_string(l) + " appears " + std::to_string(appearances[l]) + " times in subframe " +
               std::to_string(m) + ", expected " + std::to_string(expected);
      }
    }
  }
  return std::nullopt;
}

std::vector<double> solo_times(const CheckedInstance& instance, const SubsetPricer& pricer) {
  std::vector<double> t(instance.nodes.size());
  for (std::size_t l = 0; l < t.size(); ++l) {
    const std::size_t member[] = {l};
    const auto r = pricer.price(member);
    if (!r.feasible) {
      throw InfeasibleInstance("node " + std::to_string(instance.nodes[l].id) + " cannot transmit even alone");
    }
    t[l] = r.slot_length_s;
  }
  return t;
}

// ---------------------------------------------------------------------------
// SNA

std::vector<int> sna_assign(const CheckedInstance& instance, const SubsetPricer& pricer) {
  const auto solo = solo_times(instance, pricer);
  const std::size_t n = solo.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return solo[a] > solo[b]; });

  std::vector<double> active(static_cast<std::size_t>(instance.subframe_count), 0.0);
  std::vector<int> offsets(n, 0);
  for (std::size_t node : order) {
    const int period = relative_period(instance, node);
    int best_offset = 0;
    double best_peak = kInfinity;
    for (int o = 0; o < period; ++o) {
      double peak = 0.0;
      for (int m : occupied_subframes(o, period, instance.subframe_count)) {
        peak = std::max(peak, active[static_cast<std::size_t>(m)] + solo[node]);
      }
      if (peak < best_peak) {
        best_peak = peak;
        best_offset = o;
      }
    }
    offsets[node] = best_offset;
    for (int m : occupied_subframes(best_offset, period, instance.subframe_count)) {
      active[static_cast<std::size_t>(m)] += solo[node];
    }
  }
  return offsets;
}

// ---------------------------------------------------------------------------
// MLA

namespace {

struct Candidate {
  std::vector<std::size_t> members;  // global indices, ascending
  AllocationResult allocation;
};

// All feasible controller-distinct subsets of `members` with at most
// `max_size` nodes, in lexicographic order.
std::vector<Candidate> feasible_subsets(std::span<const std::size_t> members, const CheckedInstance& instance,
                                        const SubsetPricer& pricer) {
  const std::size_t max_size = distinct_controllers(members, instance);
  std::vector<Candidate> out;
  std::vector<std::size_t> current;
  std::set<int> used;
  std::function<void(std::size_t)> grow = [&](std::size_t start) {
    for (std::size_t i = start; i < members.size(); ++i) {
      const int ctrl = instance.nodes[members[i]].controller_id;
      if (used.count(ctrl)) continue;
      current.push_back(members[i]);
      used.insert(ctrl);
      auto r = pricer.price(current);
      if (r.feasible) out.push_back({current, std::move(r)});
      if (current.size() < max_size) grow(i + 1);
      used.erase(ctrl);
      current.pop_back();
    }
  };
  grow(0);
  return out;
}

std::vector<Group> exact_cover(std::span<const std::size_t> members, const std::vector<Candidate>& candidates) {
  const std::size_t k = members.size();
  std::vector<double> cost(1u << k, kInfinity);
  std::vector<const Candidate*> by_mask(1u << k, nullptr);
  for (const auto& c : candidates) {
    unsigned mask = 0;
    for (std::size_t node : c.members) {
      const auto pos = static_cast<std::size_t>(std::find(members.begin(), members.end(), node) - members.begin());
      mask |= 1u << pos;
    }
    cost[mask] = c.allocation.slot_length_s;
    by_mask[mask] = &c;
  }
  const auto table = partition_dp(k, cost);
  const unsigned full = (1u << k) - 1u;
  if (!std::isfinite(table.best[full])) throw InfeasibleInstance("no feasible partition of class " + describe(members));
  std::vector<Group> groups;
  for (unsigned mask = full; mask != 0; mask ^= table.choice[mask]) {
    const Candidate* c = by_mask[table.choice[mask]];
    groups.push_back({c->members, c->allocation});
  }
  return groups;
}

std::vector<Group> greedy_cover(std::span<const std::size_t> members, const std::vector<Candidate>& candidates,
                                const SubsetPricer& pricer) {
  std::set<std::size_t> uncovered(members.begin(), members.end());
  std::vector<const Candidate*> chosen;
  while (!uncovered.empty()) {
    const Candidate* best = nullptr;
    double best_ratio = kInfinity;
    for (const auto& c : candidates) {
      const auto fresh = static_cast<double>(
          std::count_if(c.members.begin(), c.members.end(), [&](std::size_t m) { return uncovered.count(m) > 0; }));
      if (fresh == 0.0) continue;
      const double ratio = c.allocation.slot_length_s / fresh;
      // Candidates arrive in lexicographic order, so strict comparisons keep
      // the lexicographically first among exact ties.
      if (ratio < best_ratio ||
          (best && ratio == best_ratio && c.allocation.slot_length_s < best->allocation.slot_length_s)) {
        best = &c;
        best_ratio = ratio;
      }
    }
    if (!best) {
      throw InfeasibleInstance("node " + std::to_string(*uncovered.begin()) + " is in no feasible subset");
    }
    chosen.push_back(best);
    for (std::size_t m : best->members) uncovered.erase(m);
  }

  // Keep each node only in the cheapest selected subset that covers it.
  std::vector<std::vector<std::size_t>> kept(chosen.size());
  for (std::size_t node : members) {
    std::size_t home = chosen.size();
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto& mem = chosen[i]->members;
      if (std::find(mem.begin(), mem.end(), node) == mem.end()) continue;
      if (home == chosen.size() || chosen[i]->allocation.slot_length_s < chosen[home]->allocation.slot_length_s) {
        home = i;
      }
    }
    kept[home].push_back(node);
  }
  std::vector<Group> groups;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (kept[i].empty()) continue;
    std::sort(kept[i].begin(), kept[i].end());
    if (kept[i] == chosen[i]->members) {
      groups.push_back({kept[i], chosen[i]->allocation});
    } else {
      auto r = pricer.price(kept[i]);
      if (!r.feasible) throw Error("shrunken subset " + describe(kept[i]) + " became infeasible");
      groups.push_back({kept[i], std::move(r)});
    }
  }
  return groups;
}

}  // namespace

std::vector<Group> mla_allocate(std::span<const std::size_t> members, const CheckedInstance& instance,
                                const SubsetPricer& pricer) {
  if (members.empty()) return {};
  std::vector<std::size_t> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  const auto candidates = feasible_subsets(sorted, instance, pricer);
  for (std::size_t node : sorted) {
    const bool covered = std::any_of(candidates.begin(), candidates.end(), [&](const Candidate& c) {
      return std::find(c.members.begin(), c.members.end(), node) != c.members.end();
    });
    if (!covered) throw InfeasibleInstance("node " + std::to_string(node) + " is in no feasible subset");
  }
  if (sorted.size() <= kExactCoverMaxNodes) return exact_cover(sorted, candidates);
  return greedy_cover(sorted, candidates, pricer);
}

// ---------------------------------------------------------------------------
// MUA

std::vector<Group> mua_allocate(std::span<const std::size_t> members, const CheckedInstance& instance,
                                const SubsetPricer& pricer) {
  std::vector<std::size_t> remaining(members.begin(), members.end());
  std::sort(remaining.begin(), remaining.end());
  std::map<std::size_t, double> solo;
  for (std::size_t m : remaining) {
    const std::size_t one[] = {m};
    const auto r = pricer.price(one);
    if (!r.feasible) throw InfeasibleInstance("node " + std::to_string(m) + " is in no feasible subset");
    solo[m] = r.slot_length_s;
  }

  std::vector<Group> groups;
  while (!remaining.empty()) {
    auto seed_it = std::max_element(remaining.begin(), remaining.end(),
                                    [&](std::size_t a, std::size_t b) { return solo[a] < solo[b]; });
    std::vector<std::size_t> current = {*seed_it};
    remaining.erase(seed_it);
    AllocationResult current_alloc = pricer.price(current);
    double current_utility = 0.0;

    for (;;) {
      std::optional<std::size_t> best_pick;
      double best_utility = current_utility;
      AllocationResult best_alloc;
      for (std::size_t cand : remaining) {
        std::vector<std::size_t> trial = current;
        trial.insert(std::upper_bound(trial.begin(), trial.end(), cand), cand);
        if (!controllers_distinct(trial, instance)) continue;
        auto r = pricer.price(trial);
        if (!r.feasible) continue;
        double solo_sum = 0.0;
        for (std::size_t m : trial) solo_sum += solo[m];
        const double utility = solo_sum - r.slot_length_s;
        if (utility > best_utility) {
          best_utility = utility;
          best_pick = cand;
          best_alloc = std::move(r);
        }
      }
      if (!best_pick) break;
      current.insert(std::upper_bound(current.begin(), current.end(), *best_pick), *best_pick);
      remaining.erase(std::find(remaining.begin(), remaining.end(), *best_pick));
      current_alloc = std::move(best_alloc);
      current_utility = best_utility;
    }
    groups.push_back({std::move(current), std::move(current_alloc)});
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Composition

std::string to_string(Strategy s) { return s == Strategy::SnaMla ? "sna-mla" : "sna-mua"; }

Strategy strategy_from_string(const std::string& name) {
  if (name == "sna-mla") return Strategy::SnaMla;
  if (name == "sna-mua") return Strategy::SnaMua;
  throw Error("unknown strategy '" + name + "'");
}

namespace {

// Fills the frame's groups from per-(period, offset) class allocations.
Frame assemble_frame(const CheckedInstance& instance, std::vector<int> offsets, double subframe_duration_s,
                     const std::function<std::vector<Group>(std::span<const std::size_t>)>& allocate) {
  Frame frame;
  frame.subframe_count = instance.subframe_count;
  frame.subframe_duration_s = subframe_duration_s;
  frame.groups.resize(static_cast<std::size_t>(instance.subframe_count));

  std::map<std::pair<int, int>, std::vector<std::size_t>> classes;
  for (std::size_t l = 0; l < instance.nodes.size(); ++l) {
    classes[{relative_period(instance, l), offsets[l]}].push_back(l);
  }
  for (const auto& [key, members] : classes) {
    const auto [period, offset] = key;
    const auto groups = allocate(members);
    for (int m : occupied_subframes(offset, period, instance.subframe_count)) {
      auto& slot = frame.groups[static_cast<std::size_t>(m)];
      slot.insert(slot.end(), groups.begin(), groups.end());
    }
  }
  frame.offsets = std::move(offsets);
  return frame;
}

}  // namespace

Schedule schedule(const CheckedInstance& instance, const SubsetPricer& pricer, Strategy strategy,
                  double subframe_duration_s) {
  auto offsets = sna_assign(instance, pricer);
  Schedule out;
  out.frame = assemble_frame(instance, std::move(offsets), subframe_duration_s, [&](std::span<const std::size_t> members) {
    return strategy == Strategy::SnaMla ? mla_allocate(members, instance, pricer)
                                        : mua_allocate(members, instance, pricer);
  });
  out.metrics = compute_metrics(out.frame);
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive

bool within_guard(const CheckedInstance& instance, const ExhaustiveGuard& guard) {
  return instance.nodes.size() <= guard.max_nodes && instance.subframe_count <= guard.max_subframes;
}

Schedule exhaustive_schedule(const CheckedInstance& instance, const SubsetPricer& pricer, double subframe_duration_s,
                             const ExhaustiveGuard& guard) {
  if (!within_guard(instance, guard)) {
    throw Error("exhaustive_schedule is limited to " + std::to_string(guard.max_nodes) + " nodes and " +
                std::to_string(guard.max_subframes) + " subframes");
  }
  const std::size_t n = instance.nodes.size();
  if (n > 16) throw Error("exhaustive_schedule supports at most 16 nodes");
  const unsigned full = 1u << n;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  // Price every controller-distinct, equal-period subset once.
  std::vector<double> cost(full, kInfinity);
  std::vector<AllocationResult> priced(full);
  for (unsigned mask = 1; mask < full; ++mask) {
    const auto mem = members_of(mask, all);
    const int p0 = relative_period(instance, mem.front());
    const bool same_period =
        std::all_of(mem.begin(), mem.end(), [&](std::size_t m) { return relative_period(instance, m) == p0; });
    if (!same_period || !controllers_distinct(mem, instance)) continue;
    priced[mask] = pricer.price(mem);
    if (priced[mask].feasible) cost[mask] = priced[mask].slot_length_s;
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (!std::isfinite(cost[1u << l])) {
      throw InfeasibleInstance("node " + std::to_string(instance.nodes[l].id) + " cannot transmit even alone");
    }
  }
  const auto classes = partition_dp(n, cost);

  // Offsets are searched node by node with a running per-subframe class
  // mask. A class's optimal cost never drops when a node joins it, so the
  // partial peak bounds every completion. Rotating all offsets is a symmetry
  // of the frame, which fixes the first node at offset 0.
  const int sub = instance.subframe_count;
  std::vector<int> periods;
  for (std::size_t l = 0; l < n; ++l) periods.push_back(relative_period(instance, l));
  std::vector<int> distinct_periods(periods.begin(), periods.end());
  std::sort(distinct_periods.begin(), distinct_periods.end());
  distinct_periods.erase(std::unique(distinct_periods.begin(), distinct_periods.end()), distinct_periods.end());
  auto period_slot = [&](int p) {
    return static_cast<std::size_t>(std::lower_bound(distinct_periods.begin(), distinct_periods.end(), p) -
                                     distinct_periods.begin());
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return periods[a] > periods[b]; });

  const std::size_t np = distinct_periods.size();
  std::vector<unsigned> class_mask(static_cast<std::size_t>(sub) * np, 0u);
  auto subframe_cost = [&](int m) {
    double c = 0.0;
    for (std::size_t k = 0; k < np; ++k) c += classes.best[class_mask[static_cast<std::size_t>(m) * np + k]];
    return c;
  };

  // Bisection noise in continuous pricing can break exact monotonicity by a
  // relative 1e-6; keep the pruning margin well above that.
  constexpr double kPruneMargin = 1e-5;
  std::vector<int> offsets(n, 0);
  std::vector<int> best_offsets;
  double best_peak = kInfinity;

  std::function<void(std::size_t, double)> search = [&](std::size_t depth, double peak) {
    if (depth == n) {
      if (peak < best_peak) {
        best_peak = peak;
        best_offsets = offsets;
      }
      return;
    }
    const std::size_t node = order[depth];
    const int p = periods[node];
    const std::size_t ps = period_slot(p);
    const int max_offset = depth == 0 ? 1 : p;
    for (int o = 0; o < max_offset; ++o) {
      double new_peak = peak;
      for (int m = o; m < sub; m += p) {
        class_mask[static_cast<std::size_t>(m) * np + ps] |= 1u << node;
        new_peak = std::max(new_peak, subframe_cost(m));
      }
      offsets[node] = o;
      if (std::isfinite(new_peak) && new_peak < best_peak * (1.0 + kPruneMargin)) search(depth + 1, new_peak);
      for (int m = o; m < sub; m += p) class_mask[static_cast<std::size_t>(m) * np + ps] &= ~(1u << node);
    }
  };
  search(0, 0.0);
  if (best_offsets.empty()) throw InfeasibleInstance("no feasible schedule exists");

  Schedule out;
  out.frame = assemble_frame(instance, best_offsets, subframe_duration_s, [&](std::span<const std::size_t> members) {
    unsigned mask = 0;
    for (std::size_t m : members) mask |= 1u << m;
    std::vector<Group> groups;
    for (unsigned rest = mask; rest != 0; rest ^= classes.choice[rest]) {
      const unsigned g = classes.choice[rest];
      groups.push_back({members_of(g, all), priced[g]});
    }
    return groups;
  });
  out.metrics = compute_metrics(out.frame);
  return out;
}

}  // namespace m2m
