// Domain types shared by the power control, rate adaptation and scheduling
// code: discrete rate tables, sensor node requirements, channel gains and
// radio parameters.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace m2m {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Thrown for malformed inputs (bad tables, invalid node parameters, guard
/// violations). Infeasibility is not an error and is reported in results.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an instance cannot be scheduled at all, e.g. a node whose
/// solo transmission is infeasible.
class InfeasibleInstance : public Error {
public:
  using Error::Error;
};

double db_to_linear(double db);
double linear_to_db(double linear);

/// Shannon capacity W*log2(1 + sinr) in bits/s.
double shannon_rate(double bandwidth_hz, double sinr_linear);

/// Minimum SINR (linear) that supports `rate_bps` under the Shannon mapping.
double shannon_sinr_for_rate(double bandwidth_hz, double rate_bps);

struct RateLevel {
  double sinr_threshold;  // linear
  double rate_bps;
};

/// Ordered set of usable transmission rates and the SINR each one needs.
///
/// Levels are strictly increasing in both threshold and rate. Levels that
/// would carry no data (a -inf dB threshold maps to zero rate) are not usable;
/// they are kept in `dropped_db()` for reporting only.
class RateTable {
public:
  RateTable(std::vector<RateLevel> levels, double bandwidth_hz,
            std::vector<double> dropped_db = {});

  std::size_t size() const { return levels_.size(); }
  const RateLevel& level(std::size_t index) const { return levels_.at(index); }
  const std::vector<RateLevel>& levels() const { return levels_; }
  double bandwidth_hz() const { return bandwidth_hz_; }
  const std::vector<double>& dropped_db() const { return dropped_db_; }

  double rate_at(std::size_t index) const { return levels_.at(index).rate_bps; }
  double sinr_at(std::size_t index) const { return levels_.at(index).sinr_threshold; }

  /// Index of the level with exactly this rate, if any.
  std::optional<std::size_t> index_of(double rate_bps) const;

  /// Lowest level whose per-packet time bits/rate fits within `delay_s`.
  std::optional<std::size_t> lowest_level_meeting(double bits, double delay_s) const;

private:
  std::vector<RateLevel> levels_;
  double bandwidth_hz_;
  std::vector<double> dropped_db_;
};

/// Builds a table from dB thresholds using r = W*log2(1 + gamma).
RateTable build_rate_table(std::span<const double> sinr_thresholds_db, double bandwidth_hz);

/// The two level sets used in the simulations: disc4 = {-inf,10,20,30} dB and
/// disc8 = {-inf,0,5,...,30} dB.
std::vector<double> disc4_thresholds_db();
std::vector<double> disc8_thresholds_db();

struct NodeSpec {
  int id = 0;
  int controller_id = 0;
  double packet_bits = 0.0;
  /// Packet generation period in subframes.
  int period = 1;
  double delay_bound_s = 0.0;
  /// Per-packet transmit energy cap; +inf when not binding.
  double energy_budget_j = kInfinity;
};

struct RadioConfig {
  double p_max_w = 0.25;
  /// Total receiver noise power in watts (not a spectral density). The
  /// default puts a link at the 1 m reference distance (70 dB loss, no
  /// shadowing or fading) transmitting at p_max exactly on the 30 dB level.
  double noise_w = 2.5e-11;
  double bandwidth_hz = 100e6;
};

void validate(const RadioConfig& radio);

/// Dense n x n linear power gains; at(l, k) is the gain from the transmitter
/// of link l to the receiver of link k.
class GainMatrix {
public:
  GainMatrix() = default;
  explicit GainMatrix(std::size_t n, double fill = 0.0);
  GainMatrix(std::size_t n, std::vector<double> row_major);

  std::size_t size() const { return n_; }
  double& at(std::size_t from, std::size_t to) { return g_[from * n_ + to]; }
  double at(std::size_t from, std::size_t to) const { return g_[from * n_ + to]; }
  double direct(std::size_t link) const { return at(link, link); }

  /// Throws unless every entry is finite and strictly positive.
  void check() const;

private:
  std::size_t n_ = 0;
  std::vector<double> g_;
};

using RateVector = std::vector<double>;
using PowerVector = std::vector<double>;

/// Rates, minimum powers and slot length for one concurrently transmitting
/// subset. `levels` is filled when the rates come from a RateTable.
struct AllocationResult {
  bool feasible = false;
  RateVector rates;
  std::vector<std::size_t> levels;
  PowerVector powers;
  double slot_length_s = kInfinity;
  std::vector<double> link_times_s;
  /// Number of rate vectors tested for feasibility while producing this.
  std::size_t feasibility_checks = 0;

  static AllocationResult infeasible(std::size_t checks = 0) {
    AllocationResult r;
    r.feasible = false;
    r.feasibility_checks = checks;
    return r;
  }
};

struct CheckedInstance {
  std::vector<NodeSpec> nodes;
  RadioConfig radio;
  /// Subframes per frame: max period / min period.
  int subframe_count = 1;
  int min_period = 1;
};

/// Rejects duplicate ids, nonpositive parameters and non-nested periods
/// (every period must be a power-of-two multiple of the shortest one).
CheckedInstance validate_instance(std::vector<NodeSpec> nodes, const RadioConfig& radio,
                                  const RateTable& table);

}  // namespace m2m
