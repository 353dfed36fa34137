// Seeded simulation sweeps: random deployments scheduled under several rate
// models and strategies, normalized by the continuous-rate optimum.

#pragma once

#include "m2m/channel.hpp"
#include "m2m/model.hpp"
#include "m2m/scheduling.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace m2m {

class ConfigError : public Error {
public:
  using Error::Error;
};

enum class SweepVar { NSensors, Density };

std::string to_string(SweepVar v);

struct ExperimentConfig {
  SweepVar sweep_var = SweepVar::NSensors;
  std::vector<double> sweep_values = {4.0};
  std::size_t n_sensors = 4;  // used when sweeping density
  std::size_t n_controllers = 3;
  double density_per_m2 = 5.0;  // used when sweeping node count
  std::size_t seeds = 100;
  /// Any of "cont", "disc4", "disc8".
  std::vector<std::string> rate_models = {"cont", "disc4", "disc8"};
  std::vector<Strategy> strategies = {Strategy::SnaMla, Strategy::SnaMua};
  RadioConfig radio;
  PathLossParams channel;
  std::vector<int> period_set = {1, 2, 4, 8};
  /// Seconds per unit of `period_set`.
  double period_unit_s = 1e-3;
  std::vector<double> packet_bits_set = {50.0, 100.0};
  /// Delay bound in seconds; unset means one subframe.
  std::optional<double> delay_s;
  /// Energy budget e_l = energy_scale * p_max * d_l (1 never binds).
  double energy_scale = 1.0;
  std::uint64_t master_seed = 1;
  ExhaustiveGuard guard;
};

/// Parses the JSON config document. Throws ConfigError.
ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);

/// One random network: deployment, channel and traffic.
struct InstanceDraw {
  Topology topology;
  ChannelRealization channel;
  CheckedInstance instance;
  double subframe_duration_s = 0.0;
};

/// Deterministic draw for (sweep point, seed index) under the config.
InstanceDraw draw_instance(const ExperimentConfig& config, std::size_t sweep_index, std::size_t seed_index);

std::optional<RateTable> rate_table_for(const std::string& model, double bandwidth_hz);

struct ReferenceResult {
  std::optional<double> max_active_s;
  bool exhaustive = false;
};

/// Continuous-model normalizer: the exhaustive optimum when the instance is
/// within the guard, otherwise the better of the two continuous heuristics.
ReferenceResult continuous_reference(const InstanceDraw& draw, const ExhaustiveGuard& guard);

struct ResultRow {
  std::string sweep_var;
  double value = 0.0;
  std::string strategy;
  std::string rate_model;
  /// Seeds that entered the averages.
  std::size_t seed_count = 0;
  /// Seeds excluded because the schedule or its reference was infeasible.
  std::size_t infeasible_count = 0;
  double mean_norm = 0.0;
  double std_norm = 0.0;
  double mean_max_active_s = 0.0;
  /// How many included seeds were normalized by the exhaustive optimum.
  std::size_t exhaustive_reference_count = 0;

  /// Means are NaN when no seed entered the averages; NaN compares equal to
  /// NaN here.
  bool operator==(const ResultRow& other) const;
};

struct ExperimentResults {
  std::vector<ResultRow> rows;
  bool operator==(const ExperimentResults&) const = default;
};

ExperimentResults run_experiment(const ExperimentConfig& config);

enum class OutputFormat { Csv, Json };

OutputFormat format_from_string(const std::string& name);

inline constexpr std::string_view kCsvHeader =
    "sweep_var,value,strategy,rate_model,seed_count,infeasible_count,mean_norm,std_norm,mean_max_active_s";

std::string results_to_csv(const ExperimentResults& results);
std::string results_to_json(const ExperimentResults& results);
ExperimentResults results_from_json(std::string_view text);

/// Writes results to `path`. Throws Error when the file cannot be written.
void emit_results(const ExperimentResults& results, const std::filesystem::path& path, OutputFormat format);

}  // namespace m2m
