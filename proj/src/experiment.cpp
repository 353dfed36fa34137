#include "m2m/experiment.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace m2m {

using nlohmann::json;

namespace {

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::vector<double> number_or_list(const json& v, const char* key) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array() && !v.empty()) {
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(std::string(key) + " must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  throw ConfigError(std::string(key) + " must be a number or a nonempty list of numbers");
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) throw ConfigError(std::string(what) + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

bool ResultRow::operator==(const ResultRow& o) const {
  return sweep_var == o.sweep_var && same_double(value, o.value) && strategy == o.strategy &&
         rate_model == o.rate_model && seed_count == o.seed_count && infeasible_count == o.infeasible_count &&
         same_double(mean_norm, o.mean_norm) && same_double(std_norm, o.std_norm) &&
         same_double(mean_max_active_s, o.mean_max_active_s) &&
         exhaustive_reference_count == o.exhaustive_reference_count;
}

std::string to_string(SweepVar v) { return v == SweepVar::NSensors ? "n_sensors" : "density"; }

std::optional<RateTable> rate_table_for(const std::string& model, double bandwidth_hz) {
  if (model == "cont") return std::nullopt;
  if (model == "disc4") return build_rate_table(disc4_thresholds_db(), bandwidth_hz);
  if (model == "disc8") return build_rate_table(disc8_thresholds_db(), bandwidth_hz);
  throw ConfigError("unknown rate model '" + model + "'");
}

ExperimentConfig config_from_json(std::string_view text) {
  ExperimentConfig cfg;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  require_keys(doc,
               {"n_sensors", "n_controllers", "density", "seeds", "rate_models", "strategies", "radio", "channel",
                "period_set", "period_unit_s", "packet_bits_set", "delay_rule", "energy_scale", "master_seed",
                "exhaustive_guard", "exhaustive_max_subframes"},
               "config");
  try {
    std::vector<double> n_list = {static_cast<double>(cfg.n_sensors)};
    std::vector<double> d_list = {cfg.density_per_m2};
    if (doc.contains("n_sensors")) n_list = number_or_list(doc["n_sensors"], "n_sensors");
    if (doc.contains("density")) d_list = number_or_list(doc["density"], "density");
    const bool n_swept = doc.contains("n_sensors") && doc["n_sensors"].is_array();
    const bool d_swept = doc.contains("density") && doc["density"].is_array();
    if (n_swept && d_swept && n_list.size() > 1 && d_list.size() > 1) {
      throw ConfigError("sweep either n_sensors or density, not both");
    }
    if (d_swept && d_list.size() > 1) {
      cfg.sweep_var = SweepVar::Density;
      cfg.sweep_values = d_list;
      cfg.n_sensors = as_count(n_list.front(), "n_sensors");
    } else {
      cfg.sweep_var = SweepVar::NSensors;
      cfg.sweep_values = n_list;
      cfg.density_per_m2 = d_list.front();
    }
    for (double v : cfg.sweep_values) {
      if (cfg.sweep_var == SweepVar::NSensors) as_count(v, "n_sensors");
    }
    for (double d : d_list) {
      if (!(d > 0.0)) throw ConfigError("density must be positive");
    }

    if (doc.contains("n_controllers")) cfg.n_controllers = as_count(doc["n_controllers"].get<double>(), "n_controllers");
    if (doc.contains("seeds")) cfg.seeds = as_count(doc["seeds"].get<double>(), "seeds");
    if (doc.contains("rate_models")) {
      cfg.rate_models = doc["rate_models"].get<std::vector<std::string>>();
      if (cfg.rate_models.empty()) throw ConfigError("rate_models is empty");
      for (const auto& m : cfg.rate_models) rate_table_for(m, 1.0);
    }
    if (doc.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& s : doc["strategies"].get<std::vector<std::string>>()) {
        try {
          cfg.strategies.push_back(strategy_from_string(s));
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
      }
      if (cfg.strategies.empty()) throw ConfigError("strategies is empty");
    }
    if (doc.contains("radio")) {
      const auto& r = doc["radio"];
      require_keys(r, {"p_max_w", "noise_w", "bandwidth_hz"}, "radio");
      cfg.radio.p_max_w = r.value("p_max_w", cfg.radio.p_max_w);
      cfg.radio.noise_w = r.value("noise_w", cfg.radio.noise_w);
      cfg.radio.bandwidth_hz = r.value("bandwidth_hz", cfg.radio.bandwidth_hz);
    }
    if (doc.contains("channel")) {
      const auto& c = doc["channel"];
      require_keys(c, {"pl_d0_db", "alpha", "sigma_z_db", "d0_m"}, "channel");
      cfg.channel.pl_d0_db = c.value("pl_d0_db", cfg.channel.pl_d0_db);
      cfg.channel.alpha = c.value("alpha", cfg.channel.alpha);
      cfg.channel.sigma_z_db = c.value("sigma_z_db", cfg.channel.sigma_z_db);
      cfg.channel.d0_m = c.value("d0_m", cfg.channel.d0_m);
      if (!(cfg.channel.d0_m > 0.0) || cfg.channel.sigma_z_db < 0.0) throw ConfigError("bad channel parameters");
    }
    if (doc.contains("period_set")) {
      cfg.period_set = doc["period_set"].get<std::vector<int>>();
      if (cfg.period_set.empty()) throw ConfigError("period_set is empty");
      for (int p : cfg.period_set) {
        if (p < 1) throw ConfigError("periods must be positive integers");
      }
      const int shortest = *std::min_element(cfg.period_set.begin(), cfg.period_set.end());
      for (int p : cfg.period_set) {
        const int ratio = p / shortest;
        if (p % shortest != 0 || (ratio & (ratio - 1)) != 0) {
          throw ConfigError("period_set must be nested (power-of-two multiples of the shortest period)");
        }
      }
    }
    if (doc.contains("period_unit_s")) cfg.period_unit_s = doc["period_unit_s"].get<double>();
    if (!(cfg.period_unit_s > 0.0)) throw ConfigError("period_unit_s must be positive");
    if (doc.contains("packet_bits_set")) {
      cfg.packet_bits_set = doc["packet_bits_set"].get<std::vector<double>>();
      if (cfg.packet_bits_set.empty()) throw ConfigError("packet_bits_set is empty");
      for (double b : cfg.packet_bits_set) {
        if (!(b > 0.0)) throw ConfigError("packet sizes must be positive");
      }
    }
    if (doc.contains("delay_rule")) {
      const auto& d = doc["delay_rule"];
      if (d.is_string() && d.get<std::string>() == "subframe") {
        cfg.delay_s.reset();
      } else if (d.is_number() && d.get<double>() > 0.0) {
        cfg.delay_s = d.get<double>();
      } else {
        throw ConfigError("delay_rule must be \"subframe\" or a positive number of seconds");
      }
    }
    if (doc.contains("energy_scale")) {
      const auto& e = doc["energy_scale"];
      if (e.is_string() && e.get<std::string>() == "inf") {
        cfg.energy_scale = kInfinity;
      } else {
        cfg.energy_scale = e.get<double>();
      }
      if (!(cfg.energy_scale > 0.0)) throw ConfigError("energy_scale must be positive");
    }
    if (doc.contains("master_seed")) cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
    if (doc.contains("exhaustive_guard")) {
      cfg.guard.max_nodes = as_count(doc["exhaustive_guard"].get<double>(), "exhaustive_guard");
    }
    if (doc.contains("exhaustive_max_subframes")) {
      cfg.guard.max_subframes = static_cast<int>(as_count(doc["exhaustive_max_subframes"].get<double>(),
                                                          "exhaustive_max_subframes"));
    }
    validate(cfg.radio);
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> strategies;
  for (auto s : cfg.strategies) strategies.push_back(to_string(s));
  json doc = {
      {"n_controllers", cfg.n_controllers},
      {"seeds", cfg.seeds},
      {"rate_models", cfg.rate_models},
      {"strategies", strategies},
      {"radio", {{"p_max_w", cfg.radio.p_max_w}, {"noise_w", cfg.radio.noise_w}, {"bandwidth_hz", cfg.radio.bandwidth_hz}}},
      {"channel",
       {{"pl_d0_db", cfg.channel.pl_d0_db},
        {"alpha", cfg.channel.alpha},
        {"sigma_z_db", cfg.channel.sigma_z_db},
        {"d0_m", cfg.channel.d0_m}}},
      {"period_set", cfg.period_set},
      {"period_unit_s", cfg.period_unit_s},
      {"packet_bits_set", cfg.packet_bits_set},
      {"master_seed", cfg.master_seed},
      {"exhaustive_guard", cfg.guard.max_nodes},
      {"exhaustive_max_subframes", cfg.guard.max_subframes},
  };
  if (cfg.sweep_var == SweepVar::NSensors) {
    doc["n_sensors"] = cfg.sweep_values;
    doc["density"] = cfg.density_per_m2;
  } else {
    doc["n_sensors"] = cfg.n_sensors;
    doc["density"] = cfg.sweep_values;
  }
  if (cfg.delay_s) {
    doc["delay_rule"] = *cfg.delay_s;
  } else {
    doc["delay_rule"] = "subframe";
  }
  if (std::isinf(cfg.energy_scale)) {
    doc["energy_scale"] = "inf";
  } else {
    doc["energy_scale"] = cfg.energy_scale;
  }
  return doc.dump(2);
}

InstanceDraw draw_instance(const ExperimentConfig& cfg, std::size_t sweep_index, std::size_t seed_index) {
  const double value = cfg.sweep_values.at(sweep_index);
  const std::size_t n = cfg.sweep_var == SweepVar::NSensors ? static_cast<std::size_t>(value) : cfg.n_sensors;
  const double density = cfg.sweep_var == SweepVar::Density ? value : cfg.density_per_m2;
  const std::uint64_t counter = (static_cast<std::uint64_t>(sweep_index) << 32) | seed_index;

  auto topo = generate_topology(n, cfg.n_controllers, density, derive_seed(cfg.master_seed, 1, counter));
  auto channel = realize_channel(topo, cfg.channel, derive_seed(cfg.master_seed, 2, counter));

  std::mt19937_64 traffic(derive_seed(cfg.master_seed, 3, counter));
  std::uniform_int_distribution<std::size_t> pick_period(0, cfg.period_set.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_bits(0, cfg.packet_bits_set.size() - 1);
  std::vector<NodeSpec> nodes(n);
  for (std::size_t l = 0; l < n; ++l) {
    nodes[l].id = static_cast<int>(l);
    nodes[l].controller_id = topo.controller_of[l];
    nodes[l].period = cfg.period_set[pick_period(traffic)];
    nodes[l].packet_bits = cfg.packet_bits_set[pick_bits(traffic)];
  }
  const int min_period =
      std::min_element(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.period < b.period; })
          ->period;
  const double subframe = min_period * cfg.period_unit_s;
  const double delay = cfg.delay_s.value_or(subframe);
  for (auto& node : nodes) {
    node.delay_bound_s = delay;
    node.energy_budget_j = cfg.energy_scale * cfg.radio.p_max_w * delay;
  }
  const auto table = build_rate_table(disc8_thresholds_db(), cfg.radio.bandwidth_hz);
  auto instance = validate_instance(std::move(nodes), cfg.radio, table);
  return InstanceDraw{std::move(topo), std::move(channel), std::move(instance), subframe};
}

namespace {

std::optional<double> try_schedule(const InstanceDraw& draw, const SubsetPricer& pricer, Strategy s) {
  try {
    return schedule(draw.instance, pricer, s, draw.subframe_duration_s).metrics.max_active_s;
  } catch (const InfeasibleInstance&) {
    return std::nullopt;
  }
}

ReferenceResult reference_with(const InstanceDraw& draw, const ChannelPricer& cont, const ExhaustiveGuard& guard) {
  ReferenceResult ref;
  if (within_guard(draw.instance, guard)) {
    ref.exhaustive = true;
    try {
      ref.max_active_s = exhaustive_schedule(draw.instance, cont, draw.subframe_duration_s, guard).metrics.max_active_s;
    } catch (const InfeasibleInstance&) {
    }
    return ref;
  }
  for (Strategy s : {Strategy::SnaMla, Strategy::SnaMua}) {
    if (auto t = try_schedule(draw, cont, s)) {
      ref.max_active_s = ref.max_active_s ? std::min(*ref.max_active_s, *t) : *t;
    }
  }
  return ref;
}

}  // namespace

ReferenceResult continuous_reference(const InstanceDraw& draw, const ExhaustiveGuard& guard) {
  const ChannelPricer cont(draw.instance.nodes, draw.channel, draw.instance.radio);
  return reference_with(draw, cont, guard);
}

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
  struct Samples {
    std::vector<double> norm;
    std::vector<double> max_active;
    std::size_t infeasible = 0;
    std::size_t exhaustive = 0;
  };
  std::map<std::string, std::optional<RateTable>> tables;
  for (const auto& m : cfg.rate_models) tables[m] = rate_table_for(m, cfg.radio.bandwidth_hz);

  ExperimentResults results;
  for (std::size_t si = 0; si < cfg.sweep_values.size(); ++si) {
    // Keyed by (strategy, model) in config order.
    std::vector<Samples> samples(cfg.strategies.size() * cfg.rate_models.size());
    for (std::size_t seed = 0; seed < cfg.seeds; ++seed) {
      const auto draw = draw_instance(cfg, si, seed);
      const ChannelPricer cont(draw.instance.nodes, draw.channel, draw.instance.radio);
      const auto ref = reference_with(draw, cont, cfg.guard);

      for (std::size_t mi = 0; mi < cfg.rate_models.size(); ++mi) {
        const auto& table = tables.at(cfg.rate_models[mi]);
        std::optional<ChannelPricer> discrete;
        if (table) discrete.emplace(draw.instance.nodes, draw.channel, draw.instance.radio, *table);
        const SubsetPricer& pricer = discrete ? static_cast<const SubsetPricer&>(*discrete) : cont;
        for (std::size_t ti = 0; ti < cfg.strategies.size(); ++ti) {
          auto& bucket = samples[ti * cfg.rate_models.size() + mi];
          const auto t = try_schedule(draw, pricer, cfg.strategies[ti]);
          if (!t || !ref.max_active_s) {
            ++bucket.infeasible;
            continue;
          }
          bucket.norm.push_back(*t / *ref.max_active_s);
          bucket.max_active.push_back(*t);
          if (ref.exhaustive) ++bucket.exhaustive;
        }
      }
    }

    for (std::size_t ti = 0; ti < cfg.strategies.size(); ++ti) {
      for (std::size_t mi = 0; mi < cfg.rate_models.size(); ++mi) {
        const auto& b = samples[ti * cfg.rate_models.size() + mi];
        ResultRow row;
        row.sweep_var = to_string(cfg.sweep_var);
        row.value = cfg.sweep_values[si];
        row.strategy = to_string(cfg.strategies[ti]);
        row.rate_model = cfg.rate_models[mi];
        row.seed_count = b.norm.size();
        row.infeasible_count = b.infeasible;
        row.exhaustive_reference_count = b.exhaustive;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        if (b.norm.empty()) {
          row.mean_norm = row.std_norm = row.mean_max_active_s = nan;
        } else {
          const double k = static_cast<double>(b.norm.size());
          double sum = 0.0, sum_t = 0.0;
          for (std::size_t i = 0; i < b.norm.size(); ++i) {
            sum += b.norm[i];
            sum_t += b.max_active[i];
          }
          row.mean_norm = sum / k;
          row.mean_max_active_s = sum_t / k;
          double ss = 0.0;
          for (double v : b.norm) ss += (v - row.mean_norm) * (v - row.mean_norm);
          row.std_norm = b.norm.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
        }
        results.rows.push_back(std::move(row));
      }
    }
  }
  return results;
}

OutputFormat format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + name + "'");
}

namespace {

std::string fmt_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double from_nullable(const json& v) { return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>(); }

}  // namespace

std::string results_to_csv(const ExperimentResults& results) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : results.rows) {
    out += r.sweep_var + ',' + fmt_number(r.value) + ',' + r.strategy + ',' + r.rate_model + ',' +
           std::to_string(r.seed_count) + ',' + std::to_string(r.infeasible_count) + ',' + fmt_number(r.mean_norm) +
           ',' + fmt_number(r.std_norm) + ',' + fmt_number(r.mean_max_active_s) + '\n';
  }
  return out;
}

std::string results_to_json(const ExperimentResults& results) {
  json rows = json::array();
  for (const auto& r : results.rows) {
    rows.push_back({
        {"sweep_var", r.sweep_var},
        {"value", r.value},
        {"strategy", r.strategy},
        {"rate_model", r.rate_model},
        {"seed_count", r.seed_count},
        {"infeasible_count", r.infeasible_count},
        {"mean_norm", nullable(r.mean_norm)},
        {"std_norm", nullable(r.std_norm)},
        {"mean_max_active_s", nullable(r.mean_max_active_s)},
        {"exhaustive_reference_count", r.exhaustive_reference_count},
    });
  }
  return json{{"rows", rows}}.dump(2) + "\n";
}

ExperimentResults results_from_json(std::string_view text) {
  ExperimentResults out;
  try {
    const json doc = json::parse(text);
    for (const auto& r : doc.at("rows")) {
      ResultRow row;
      row.sweep_var = r.at("sweep_var").get<std::string>();
      row.value = r.at("value").get<double>();
      row.strategy = r.at("strategy").get<std::string>();
      row.rate_model = r.at("rate_model").get<std::string>();
      row.seed_count = r.at("seed_count").get<std::size_t>();
      row.infeasible_count = r.at("infeasible_count").get<std::size_t>();
      row.mean_norm = from_nullable(r.at("mean_norm"));
      row.std_norm = from_nullable(r.at("std_norm"));
      row.mean_max_active_s = from_nullable(r.at("mean_max_active_s"));
      row.exhaustive_reference_count = r.value("exhaustive_reference_count", std::size_t{0});
      out.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("bad results document: ") + e.what());
  }
  return out;
}

void emit_results(const ExperimentResults& results, const std::filesystem::path& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << (format == OutputFormat::Csv ? results_to_csv(results) : results_to_json(results));
  out.flush();
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace m2m
