// TDMA frame construction: node-to-subframe assignment (SNA), concurrency
// allocation within a subframe (MLA, MUA) and an exhaustive optimal
// scheduler for small instances.

#pragma once

#include "m2m/allocation.hpp"
#include "m2m/channel.hpp"
#include "m2m/model.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace m2m {

/// Prices a set of concurrently transmitting nodes. Members are indices into
/// the instance's node list, sorted ascending.
class SubsetPricer {
public:
  virtual ~SubsetPricer() = default;
  virtual AllocationResult price(std::span<const std::size_t> members) const = 0;
};

enum class RateModel { Continuous, Discrete };

/// Prices subsets from a channel realization with LTTF (discrete table) or the
/// continuous Shannon baseline. Results are memoized per subset.
class ChannelPricer final : public SubsetPricer {
public:
  /// Discrete-rate pricing with `table`.
  ChannelPricer(std::vector<NodeSpec> nodes, const ChannelRealization& channel, RadioConfig radio, RateTable table);
  /// Continuous-rate pricing.
  ChannelPricer(std::vector<NodeSpec> nodes, const ChannelRealization& channel, RadioConfig radio);

  AllocationResult price(std::span<const std::size_t> members) const override;
  RateModel model() const { return table_ ? RateModel::Discrete : RateModel::Continuous; }

private:
  std::vector<NodeSpec> nodes_;
  ChannelRealization channel_;
  RadioConfig radio_;
  std::optional<RateTable> table_;
  mutable std::map<std::vector<std::size_t>, AllocationResult> cache_;
};

/// Slot lengths given directly per subset. Subsets without an entry are
/// infeasible.
class FixturePricer final : public SubsetPricer {
public:
  explicit FixturePricer(std::map<std::vector<std::size_t>, double> slot_lengths_s);
  AllocationResult price(std::span<const std::size_t> members) const override;

private:
  std::map<std::vector<std::size_t>, double> slot_lengths_s_;
};

struct Group {
  std::vector<std::size_t> members;
  AllocationResult allocation;
};

struct Frame {
  int subframe_count = 1;
  double subframe_duration_s = 0.0;
  /// Offset of each node in subframes; a node with (relative) period s
  /// occupies offset, offset + s, ... within [0, subframe_count).
  std::vector<int> offsets;
  /// Groups of each subframe.
  std::vector<std::vector<Group>> groups;
};

struct ScheduleMetrics {
  std::vector<double> active_lengths_s;
  double max_active_s = 0.0;
};

struct Schedule {
  Frame frame;
  ScheduleMetrics metrics;
};

ScheduleMetrics compute_metrics(const Frame& frame);

/// Empty when the frame satisfies coverage, controller exclusivity, equal
/// periods within groups and feasibility of every group; otherwise the first
/// violation found.
std::optional<std::string> verify_frame(const Frame& frame, const CheckedInstance& instance);

/// Relative period of node `index` (period / shortest period).
int relative_period(const CheckedInstance& instance, std::size_t index);

/// Solo transmission time of every node. Throws InfeasibleInstance when some
/// node cannot transmit even alone.
std::vector<double> solo_times(const CheckedInstance& instance, const SubsetPricer& pricer);

/// Sorted node assignment: nodes in descending solo time (ties by index) each
/// take the offset minimizing the largest active length among the subframes
/// they would occupy, with active lengths tracked using solo times. Ties go to
/// the smallest offset.
std::vector<int> sna_assign(const CheckedInstance& instance, const SubsetPricer& pricer);

/// Minimum length allocation for one (subframe, period) class: price every
/// controller-distinct subset and select a cover of minimum total slot length.
/// Classes of up to kExactCoverMaxNodes nodes are solved exactly; larger ones
/// use greedy weighted set cover, then drop duplicated nodes from all but
/// their cheapest selected subset.
inline constexpr std::size_t kExactCoverMaxNodes = 6;
std::vector<Group> mla_allocate(std::span<const std::size_t> members, const CheckedInstance& instance,
                                const SubsetPricer& pricer);

/// Maximum utility allocation: seed each subset with the unassigned node of
/// largest solo time, then repeatedly add the node maximizing the utility
/// (sum of solo times minus the concurrent slot length) while it strictly
/// improves.
std::vector<Group> mua_allocate(std::span<const std::size_t> members, const CheckedInstance& instance,
                                const SubsetPricer& pricer);

enum class Strategy { SnaMla, SnaMua };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

/// SNA followed by the chosen allocator on every (subframe, period) class.
Schedule schedule(const CheckedInstance& instance, const SubsetPricer& pricer, Strategy strategy,
                  double subframe_duration_s);

struct ExhaustiveGuard {
  std::size_t max_nodes = 8;
  int max_subframes = 8;
};

bool within_guard(const CheckedInstance& instance, const ExhaustiveGuard& guard);

/// Minimum max-active-length schedule over every offset assignment and every
/// partition of each class into controller-distinct groups. Throws Error
/// outside the guard and InfeasibleInstance when no schedule exists.
Schedule exhaustive_schedule(const CheckedInstance& instance, const SubsetPricer& pricer,
                             double subframe_duration_s, const ExhaustiveGuard& guard = {});

}  // namespace m2m
