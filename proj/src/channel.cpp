#include "m2m/channel.hpp"

#include "json.hpp"

#include <cmath>

namespace m2m {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ stream) ^ counter);
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Topology generate_topology(std::size_t n_sensors, std::size_t n_controllers, double density_per_m2,
                           std::uint64_t seed) {
  if (n_sensors == 0) throw Error("topology needs at least one sensor");
  if (n_controllers == 0) throw Error("topology needs at least one controller");
  if (!(density_per_m2 > 0.0) || !std::isfinite(density_per_m2)) throw Error("density must be positive");

  Topology topo;
  topo.seed = seed;
  topo.density_per_m2 = density_per_m2;
  topo.side_m = std::sqrt(static_cast<double>(n_sensors) / density_per_m2);

  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> coord(0.0, topo.side_m);
  topo.controllers.resize(n_controllers);
  for (auto& c : topo.controllers) c = {coord(engine), coord(engine)};
  topo.sensors.resize(n_sensors);
  for (auto& s : topo.sensors) s = {coord(engine), coord(engine)};

  topo.controller_of.resize(n_sensors);
  for (std::size_t s = 0; s < n_sensors; ++s) {
    int best = 0;
    double best_d = distance(topo.sensors[s], topo.controllers[0]);
    for (std::size_t c = 1; c < n_controllers; ++c) {
      const double d = distance(topo.sensors[s], topo.controllers[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    topo.controller_of[s] = best;
  }
  return topo;
}

std::string topology_to_json(const Topology& topo) {
  using nlohmann::json;
  auto points = [](const std::vector<Point>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x, p.y});
    return arr;
  };
  json doc = {
      {"side_m", topo.side_m},
      {"density_per_m2", topo.density_per_m2},
      {"seed", topo.seed},
      {"sensors", points(topo.sensors)},
      {"controllers", points(topo.controllers)},
      {"controller_of", topo.controller_of},
  };
  return doc.dump(2);
}

Topology topology_from_json(std::string_view text) {
  using nlohmann::json;
  Topology topo;
  try {
    const json doc = json::parse(text);
    topo.side_m = doc.at("side_m").get<double>();
    topo.density_per_m2 = doc.at("density_per_m2").get<double>();
    topo.seed = doc.at("seed").get<std::uint64_t>();
    auto points = [](const json& arr) {
      std::vector<Point> pts;
      for (const auto& p : arr) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      return pts;
    };
    topo.sensors = points(doc.at("sensors"));
    topo.controllers = points(doc.at("controllers"));
    topo.controller_of = doc.at("controller_of").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw Error(std::string("bad topology document: ") + e.what());
  }
  if (topo.controller_of.size() != topo.sensors.size()) throw Error("bad topology document: controller_of size");
  for (int c : topo.controller_of) {
    if (c < 0 || static_cast<std::size_t>(c) >= topo.controllers.size()) {
      throw Error("bad topology document: controller index out of range");
    }
  }
  return topo;
}

double path_loss_db(double distance_m, const PathLossParams& params, double shadowing_db) {
  const double d = std::max(distance_m, params.d0_m);
  return params.pl_d0_db + 10.0 * params.alpha * std::log10(d / params.d0_m) + shadowing_db;
}

double gain_from_path_loss(double path_loss_db, double fading_power) {
  return std::pow(10.0, -path_loss_db / 10.0) * fading_power;
}

FadingSampler::FadingSampler(std::uint64_t seed, double sigma_z_db)
    : engine_(seed), shadowing_(0.0, sigma_z_db > 0.0 ? sigma_z_db : 1.0), sigma_z_db_(sigma_z_db), fading_(1.0) {
  if (sigma_z_db < 0.0 || !std::isfinite(sigma_z_db)) throw Error("shadowing deviation must be nonnegative");
}

double FadingSampler::shadowing_db() { return sigma_z_db_ > 0.0 ? shadowing_(engine_) : 0.0; }

double FadingSampler::fading_power() { return fading_(engine_); }

ChannelRealization::ChannelRealization(std::size_t n_sensors, std::size_t n_controllers, std::vector<double> gains,
                                       std::vector<int> controller_of)
    : n_sensors_(n_sensors),
      n_controllers_(n_controllers),
      g_(std::move(gains)),
      controller_of_(std::move(controller_of)) {
  if (g_.size() != n_sensors_ * n_controllers_) throw Error("channel gain table has wrong size");
  if (controller_of_.size() != n_sensors_) throw Error("controller attachment has wrong size");
  for (double v : g_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("channel gains must be positive and finite");
  }
}

GainMatrix ChannelRealization::subset(std::span<const std::size_t> members) const {
  GainMatrix g(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      g.at(i, j) = gain(members[i], static_cast<std::size_t>(controller_of(members[j])));
    }
  }
  return g;
}

ChannelRealization realize_channel(const Topology& topo, const PathLossParams& params, std::uint64_t seed) {
  const std::size_t ns = topo.sensors.size();
  const std::size_t nc = topo.controllers.size();
  FadingSampler sampler(seed, params.sigma_z_db);
  std::vector<double> gains(ns * nc);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double pl = path_loss_db(distance(topo.sensors[s], topo.controllers[c]), params, sampler.shadowing_db());
      gains[s * nc + c] = gain_from_path_loss(pl, sampler.fading_power());
    }
  }
  return ChannelRealization(ns, nc, std::move(gains), topo.controller_of);
}

}  // namespace m2m
