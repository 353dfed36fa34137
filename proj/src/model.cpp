#include "m2m/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace m2m {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double shannon_rate(double bandwidth_hz, double sinr_linear) {
  return bandwidth_hz * std::log2(1.0 + sinr_linear);
}

double shannon_sinr_for_rate(double bandwidth_hz, double rate_bps) {
  return std::exp2(rate_bps / bandwidth_hz) - 1.0;
}

RateTable::RateTable(std::vector<RateLevel> levels, double bandwidth_hz,
                     std::vector<double> dropped_db)
    : levels_(std::move(levels)), bandwidth_hz_(bandwidth_hz), dropped_db_(std::move(dropped_db)) {
  if (!(bandwidth_hz_ > 0.0) || !std::isfinite(bandwidth_hz_)) {
    throw Error("rate table bandwidth must be positive");
  }
  if (levels_.empty()) {
    throw Error("no positive rate levels");
  }
  for (std::size_t q = 0; q < levels_.size(); ++q) {
    const auto& lv = levels_[q];
    if (!(lv.rate_bps > 0.0) || !(lv.sinr_threshold > 0.0) || !std::isfinite(lv.rate_bps) ||
        !std::isfinite(lv.sinr_threshold)) {
      throw Error("rate level " + std::to_string(q) + " must have positive finite rate and SINR");
    }
    if (q > 0 && !(levels_[q - 1].rate_bps < lv.rate_bps &&
                   levels_[q - 1].sinr_threshold < lv.sinr_threshold)) {
      throw Error("rate levels must be strictly increasing in rate and SINR threshold");
    }
  }
}

std::optional<std::size_t> RateTable::index_of(double rate_bps) const {
  for (std::size_t q = 0; q < levels_.size(); ++q) {
    if (levels_[q].rate_bps == rate_bps) return q;
  }
  return std::nullopt;
}

std::optional<std::size_t> RateTable::lowest_level_meeting(double bits, double delay_s) const {
  for (std::size_t q = 0; q < levels_.size(); ++q) {
    if (bits / levels_[q].rate_bps <= delay_s) return q;
  }
  return std::nullopt;
}

RateTable build_rate_table(std::span<const double> sinr_thresholds_db, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw Error("bandwidth must be positive");
  for (std::size_t i = 1; i < sinr_thresholds_db.size(); ++i) {
    if (!(sinr_thresholds_db[i - 1] < sinr_thresholds_db[i])) {
      throw Error("SINR thresholds must be strictly increasing");
    }
  }
  std::vector<RateLevel> levels;
  std::vector<double> dropped;
  for (double db : sinr_thresholds_db) {
    const double gamma = db_to_linear(db);
    const double rate = shannon_rate(bandwidth_hz, gamma);
    if (rate > 0.0 && std::isfinite(rate)) {
      levels.push_back({gamma, rate});
    } else {
      dropped.push_back(db);
    }
  }
  if (levels.empty()) throw Error("no positive rate levels");
  return RateTable(std::move(levels), bandwidth_hz, std::move(dropped));
}

std::vector<double> disc4_thresholds_db() {
  return {-kInfinity, 10.0, 20.0, 30.0};
}

std::vector<double> disc8_thresholds_db() {
  return {-kInfinity, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
}

void validate(const RadioConfig& radio) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(radio.p_max_w)) throw Error("p_max must be positive");
  if (!positive(radio.noise_w)) throw Error("noise power must be positive");
  if (!positive(radio.bandwidth_hz)) throw Error("bandwidth must be positive");
}

GainMatrix::GainMatrix(std::size_t n, double fill) : n_(n), g_(n * n, fill) {}

GainMatrix::GainMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), g_(std::move(row_major)) {
  if (g_.size() != n_ * n_) throw Error("gain matrix data does not match its dimension");
}

void GainMatrix::check() const {
  for (double v : g_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error("gain matrix entries must be positive and finite");
    }
  }
}

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::string node_label(const NodeSpec& n) { return "node " + std::to_string(n.id); }

}  // namespace

CheckedInstance validate_instance(std::vector<NodeSpec> nodes, const RadioConfig& radio,
                                  const RateTable& table) {
  validate(radio);
  if (table.size() == 0) throw Error("no positive rate levels");
  if (nodes.empty()) throw Error("instance has no nodes");

  std::set<int> ids;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second) throw Error("duplicate node id " + std::to_string(n.id));
    if (!(n.packet_bits > 0.0) || !std::isfinite(n.packet_bits)) {
      throw Error(node_label(n) + ": packet_bits must be positive");
    }
    if (n.period < 1) throw Error(node_label(n) + ": period must be at least 1");
    if (!(n.delay_bound_s > 0.0) || !std::isfinite(n.delay_bound_s)) {
      throw Error(node_label(n) + ": delay bound must be positive");
    }
    if (!(n.energy_budget_j > 0.0) || std::isnan(n.energy_budget_j)) {
      throw Error(node_label(n) + ": energy budget must be positive");
    }
  }

  const auto [lo, hi] = std::minmax_element(nodes.begin(), nodes.end(),
                                            [](const auto& a, const auto& b) { return a.period < b.period; });
  const int min_period = lo->period;
  for (const auto& n : nodes) {
    if (n.period % min_period != 0 || !is_power_of_two(n.period / min_period)) {
      std::ostringstream msg;
      msg << "non-nested periods: " << node_label(n) << " has period " << n.period
          << ", not a power-of-two multiple of " << min_period;
      throw Error(msg.str());
    }
  }

  CheckedInstance out;
  out.subframe_count = hi->period / min_period;
  out.min_period = min_period;
  out.nodes = std::move(nodes);
  out.radio = radio;
  return out;
}

}  // namespace m2m
