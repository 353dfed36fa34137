// Random instance generators and independent oracles shared by the tests.

#pragma once

#include "m2m/feasibility.hpp"
#include "m2m/model.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace m2m::testing {

/// The literal simulation radio: p_max = 250 mW, N0 = 1e-8 W, W = 100 MHz.
inline RadioConfig table1_radio() { return RadioConfig{0.25, 1e-8, 100e6}; }

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

/// SINR seen by each link under `powers`, computed straight from the
/// definition p_i g_ii / (N0 + sum_{j != i} p_j g_ji).
inline std::vector<double> achieved_sinr(const GainMatrix& g, const std::vector<double>& powers, double noise) {
  const std::size_t n = g.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double interference = noise;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) interference += powers[j] * g.at(j, i);
    }
    out[i] = powers[i] * g.direct(i) / interference;
  }
  return out;
}

/// Gains with direct links drawn log-uniform in [1e-6, 1e-4] and cross
/// links a log-uniform factor [1e-4, 1e-1] below the receiver's direct gain.
/// With N0 = 1e-8 W and p_max = 0.25 W solo SNR spans roughly 14..34 dB, so
/// every level of the simulation tables is reachable for some links.
inline GainMatrix random_gains(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> direct_exp(-6.0, -4.0);
  std::uniform_real_distribution<double> cross_exp(-4.0, -1.0);
  GainMatrix g(n);
  for (std::size_t k = 0; k < n; ++k) g.at(k, k) = std::pow(10.0, direct_exp(rng));
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      if (l != k) g.at(l, k) = g.direct(k) * std::pow(10.0, cross_exp(rng));
    }
  }
  return g;
}

/// Nodes with packets of 50 or 100 bits, a delay bound that sometimes forces
/// a high rate level, and an energy budget that is binding for some links.
inline std::vector<NodeSpec> random_nodes(std::size_t n, std::mt19937_64& rng, bool energy_binding = true) {
  std::uniform_int_distribution<int> bits(0, 1);
  std::uniform_real_distribution<double> delay_exp(-7.2, -5.5);
  std::uniform_real_distribution<double> energy_exp(-9.0, -7.0);
  std::bernoulli_distribution tight_energy(0.3);
  std::vector<NodeSpec> nodes(n);
  for (std::size_t l = 0; l < n; ++l) {
    nodes[l].id = static_cast<int>(l);
    nodes[l].controller_id = static_cast<int>(l);
    nodes[l].packet_bits = bits(rng) ? 100.0 : 50.0;
    nodes[l].period = 1;
    nodes[l].delay_bound_s = std::pow(10.0, delay_exp(rng));
    nodes[l].energy_budget_j =
        (energy_binding && tight_energy(rng)) ? std::pow(10.0, energy_exp(rng)) : kInfinity;
  }
  return nodes;
}

}  // namespace m2m::testing
