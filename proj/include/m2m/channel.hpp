// Random deployments and channel gains: uniform placement in a square,
// log-distance path loss with log-normal shadowing, and Rayleigh fading.

#pragma once

#include "m2m/model.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace m2m {

/// SplitMix64 finalizer over (master, stream, counter); used to fan a master
/// seed out into independent per-topology streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Topology {
  double side_m = 0.0;
  double density_per_m2 = 0.0;
  std::uint64_t seed = 0;
  std::vector<Point> sensors;
  std::vector<Point> controllers;
  /// Index into `controllers` for each sensor (nearest controller).
  std::vector<int> controller_of;
};

/// Places sensors and controllers uniformly in a square of side
/// sqrt(n_sensors / density) and attaches each sensor to its nearest
/// controller (ties to the lower index). Density counts sensors only.
Topology generate_topology(std::size_t n_sensors, std::size_t n_controllers, double density_per_m2,
                           std::uint64_t seed);

std::string topology_to_json(const Topology& topo);
Topology topology_from_json(std::string_view text);

struct PathLossParams {
  double pl_d0_db = 70.0;
  double alpha = 3.5;
  double sigma_z_db = 4.0;
  double d0_m = 1.0;
};

/// PL(d) = PL(d0) + 10*alpha*log10(d/d0) + Z in dB, with d clamped to >= d0.
double path_loss_db(double distance_m, const PathLossParams& params, double shadowing_db);

/// Linear power gain 10^{-PL/10} scaled by a fading power factor.
double gain_from_path_loss(double path_loss_db, double fading_power);

/// Draws the random parts of the channel: Z ~ N(0, sigma_z^2) in dB and a
/// unit-mean exponential power factor (Rayleigh amplitude).
class FadingSampler {
public:
  FadingSampler(std::uint64_t seed, double sigma_z_db);

  double shadowing_db();
  double fading_power();

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> shadowing_;
  double sigma_z_db_;
  std::exponential_distribution<double> fading_;
};

/// Gains from every sensor to every controller.
class ChannelRealization {
public:
  ChannelRealization(std::size_t n_sensors, std::size_t n_controllers, std::vector<double> gains,
                     std::vector<int> controller_of);

  std::size_t sensor_count() const { return n_sensors_; }
  std::size_t controller_count() const { return n_controllers_; }
  double gain(std::size_t sensor, std::size_t controller) const { return g_.at(sensor * n_controllers_ + controller); }
  int controller_of(std::size_t sensor) const { return controller_of_.at(sensor); }
  const std::vector<double>& raw() const { return g_; }

  /// Link gain matrix for a sensor subset: entry (i, j) is the gain from
  /// sensor members[i] to the controller serving members[j].
  GainMatrix subset(std::span<const std::size_t> members) const;

private:
  std::size_t n_sensors_;
  std::size_t n_controllers_;
  std::vector<double> g_;
  std::vector<int> controller_of_;
};

/// Gains for every sensor-controller pair. Fading applies to interfering
/// links as well as to the desired ones.
ChannelRealization realize_channel(const Topology& topo, const PathLossParams& params, std::uint64_t seed);

}  // namespace m2m
