// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "m2m/allocation.hpp"
#include "m2m/experiment.hpp"
#include "m2m/feasibility.hpp"
#include "m2m/scheduling.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>

using namespace m2m;
using namespace m2m::testing;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_ratio(const std::vector<double>& bits, const std::vector<double>& rates) {
  double t = 0.0;
  for (std::size_t l = 0; l < bits.size(); ++l) t = std::max(t, bits[l] / rates[l]);
  return t;
}

void lttf_optimality() {
  const auto d4 = build_rate_table(disc4_thresholds_db(), 100e6);
  const auto d8 = build_rate_table(disc8_thresholds_db(), 100e6);
  const auto radio = table1_radio();
  std::mt19937_64 rng(1001);
  int mismatches = 0, both_inf = 0, finite = 0;
  const auto start = std::chrono::steady_clock::now();
  constexpr int kInstances = 500;
  for (int i = 0; i < kInstances; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 3);
    const auto nodes = random_nodes(n, rng);
    const auto g = random_gains(n, rng);
    const RateTable& table = i % 2 ? d8 : d4;
    const double a = lttf(nodes, g, table, radio).slot_length_s;
    const double b = brute_force_optimal(nodes, g, table, radio).slot_length_s;
    if (!(a == b)) ++mismatches;
    if (std::isinf(a) && std::isinf(b)) ++both_inf;
    if (std::isfinite(b)) ++finite;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(1, mismatches == 0 && secs < 10.0, "LTTF slot length equals brute-force optimum",
         fmt("%d instances, %d mismatches, %d finite, %d inf/inf, %.2f s", kInstances, mismatches, finite, both_inf,
             secs));
}

void min_power_correctness() {
  const double noise = table1_radio().noise_w;
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> db(0.0, 30.0);
  int solved = 0, draws = 0;
  double worst = 0.0;
  while (solved < 1000) {
    ++draws;
    const std::size_t n = 1 + static_cast<std::size_t>(draws % 6);
    const auto g = random_gains(n, rng);
    std::vector<double> gamma(n);
    for (auto& x : gamma) x = db_to_linear(db(rng));
    const auto r = min_power_vector(g, gamma, noise);
    if (!r.powers) continue;
    ++solved;
    const auto sinr = achieved_sinr(g, *r.powers, noise);
    for (std::size_t l = 0; l < n; ++l) worst = std::max(worst, std::abs(sinr[l] - gamma[l]) / gamma[l]);
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_closed = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double direct = std::pow(10.0, -7.0 + 2.0 * unit(rng));
    const double gamma = db_to_linear(30.0 * unit(rng));
    const double beta = (0.98 * unit(rng) + 0.01) / gamma;  // gamma * beta in (0.01, 0.99)
    GainMatrix g(2, {direct, beta * direct, beta * direct, direct});
    const double targets[] = {gamma, gamma};
    const auto r = min_power_vector(g, targets, noise);
    const double expected = gamma * noise / (direct * (1.0 - gamma * beta));
    if (!r.powers) {
      worst_closed = kInfinity;
      continue;
    }
    for (double p : *r.powers) worst_closed = std::max(worst_closed, std::abs(p - expected) / expected);
  }
  report(2, worst <= 1e-9 && worst_closed <= 1e-9, "minimum power vector meets targets with equality",
         fmt("%d feasible of %d draws, max SINR rel err %.2e; symmetric pair max rel err %.2e", solved, draws, worst,
             worst_closed));
}

void rate_order_properties() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> rate(1e6, 1e9);
  std::uniform_real_distribution<double> frac(1e-3, 1.0);
  int l2 = 0, l3 = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 5);
    std::vector<double> bits(n), r(n);
    for (std::size_t l = 0; l < n; ++l) {
      bits[l] = (rng() & 1) ? 100.0 : 50.0;
      r[l] = rate(rng);
    }
    auto rd = r;
    for (auto& x : rd) x *= (rng() & 1) ? frac(rng) : 1.0;
    if (max_ratio(bits, rd) < max_ratio(bits, r)) ++l2;

    std::size_t arg = 0;
    for (std::size_t l = 1; l < n; ++l)
      if (bits[l] / r[l] > bits[arg] / r[arg]) arg = l;
    const std::size_t pick = static_cast<std::size_t>(rng() % n);
    auto up = r;
    if (pick != arg) up[pick] /= frac(rng);
    if (max_ratio(bits, up) < max_ratio(bits, r)) ++l3;
  }

  const auto d8 = build_rate_table(disc8_thresholds_db(), 100e6);
  const auto radio = table1_radio();
  int pairs = 0, infeasible_desc = 0, l1 = 0;
  while (pairs < 1000) {
    const std::size_t n = 2 + static_cast<std::size_t>(pairs % 3);
    const auto nodes = random_nodes(n, rng);
    const auto g = random_gains(n, rng);
    std::vector<std::size_t> lo(n), hi(n);
    bool delay_ok = true;
    for (std::size_t l = 0; l < n && delay_ok; ++l) {
      const auto base = d8.lowest_level_meeting(nodes[l].packet_bits, nodes[l].delay_bound_s);
      if (!base) {
        delay_ok = false;
        break;
      }
      lo[l] = std::uniform_int_distribution<std::size_t>(*base, d8.size() - 1)(rng);
      hi[l] = std::uniform_int_distribution<std::size_t>(lo[l], d8.size() - 1)(rng);
    }
    if (!delay_ok) continue;
    ++pairs;
    if (check_levels(nodes, g, lo, d8, radio).feasible()) continue;
    ++infeasible_desc;
    if (check_levels(nodes, g, hi, d8, radio).feasible()) ++l1;
  }
  report(3, l1 == 0 && l2 == 0 && l3 == 0, "slot length and infeasibility under rate changes",
         fmt("1e4 pairs: %d + %d violations; %d delay-feasible pairs (%d infeasible descendants): %d violations", l2,
             l3, pairs, infeasible_desc, l1));
}

void granularity_ordering() {
  const auto d4 = build_rate_table(disc4_thresholds_db(), 100e6);
  const auto d8 = build_rate_table(disc8_thresholds_db(), 100e6);
  const auto radio = table1_radio();
  std::mt19937_64 rng(4004);
  int violations = 0, finite = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 3);
    const auto nodes = random_nodes(n, rng);
    const auto g = random_gains(n, rng);
    const double c = continuous_optimal(nodes, g, radio).slot_length_s;
    const double t8 = brute_force_optimal(nodes, g, d8, radio).slot_length_s;
    const double t4 = brute_force_optimal(nodes, g, d4, radio).slot_length_s;
    if (!(c <= t8 && t8 <= t4)) ++violations;
    if (std::isfinite(t4)) ++finite;
  }
  report(4, violations == 0, "continuous <= disc8 <= disc4 optimal slot length",
         fmt("200 instances, %d with finite disc4 optimum, %d violations", finite, violations));
}

void worked_example() {
  std::vector<NodeSpec> nodes;
  const int periods[] = {1, 2, 2, 2};
  for (int i = 0; i < 4; ++i) nodes.push_back(NodeSpec{i + 1, i + 1, 100, periods[i], 1.0, kInfinity});
  const auto inst = validate_instance(nodes, RadioConfig{}, build_rate_table(disc4_thresholds_db(), 100e6));
  const FixturePricer pricer(std::map<std::vector<std::size_t>, double>{
      {{0}, 0.15e-3}, {{1}, 0.20e-3}, {{2}, 0.25e-3}, {{3}, 0.30e-3}, {{1, 2}, 0.30e-3}});
  const double mla = schedule(inst, pricer, Strategy::SnaMla, 1e-3).metrics.max_active_s;
  const double opt = exhaustive_schedule(inst, pricer, 1e-3).metrics.max_active_s;
  const bool ok = std::abs(mla - 0.45e-3) <= 1e-12 && std::abs(opt - 0.45e-3) <= 1e-12;
  report(5, ok, "four-node example reaches 0.45 ms", fmt("SNA-MLA %.6g ms, exhaustive %.6g ms", mla * 1e3, opt * 1e3));
}

void heuristics_vs_optimum() {
  ExperimentConfig cfg;
  cfg.sweep_values = {4, 6, 8};
  std::string detail;
  bool ok = true;
  for (const std::string model : {"cont", "disc4", "disc8"}) {
    const auto table = rate_table_for(model, cfg.radio.bandwidth_hz);
    double sum_mla = 0, sum_mua = 0, min_ratio = kInfinity;
    int counted = 0, skipped = 0;
    for (std::size_t seed = 0; counted < 100; ++seed) {
      const auto draw = draw_instance(cfg, seed % 3, seed / 3);
      if (!within_guard(draw.instance, cfg.guard)) {
        ++skipped;
        continue;
      }
      const auto pricer = table ? ChannelPricer(draw.instance.nodes, draw.channel, cfg.radio, *table)
                                : ChannelPricer(draw.instance.nodes, draw.channel, cfg.radio);
      try {
        const double opt = exhaustive_schedule(draw.instance, pricer, draw.subframe_duration_s, cfg.guard)
                               .metrics.max_active_s;
        const double mla =
            schedule(draw.instance, pricer, Strategy::SnaMla, draw.subframe_duration_s).metrics.max_active_s;
        const double mua =
            schedule(draw.instance, pricer, Strategy::SnaMua, draw.subframe_duration_s).metrics.max_active_s;
        sum_mla += mla / opt;
        sum_mua += mua / opt;
        min_ratio = std::min({min_ratio, mla / opt, mua / opt});
        ++counted;
      } catch (const InfeasibleInstance&) {
        ++skipped;
      }
    }
    const double mean_mla = sum_mla / counted, mean_mua = sum_mua / counted;
    // ratios of equal schedules can differ in the last bit
    ok = ok && mean_mla <= mean_mua * (1 + 1e-12) && min_ratio >= 1.0 - 1e-12;
    detail += fmt("%s%s: MLA %.4f MUA %.4f min %.4f (%d skipped)", detail.empty() ? "" : "; ", model.c_str(),
                  mean_mla, mean_mua, min_ratio, skipped);
  }
  report(6, ok, "mean SNA-MLA/optimum <= SNA-MUA/optimum, all ratios >= 1", "100 instances each, " + detail);
}

void determinism() {
  ExperimentConfig cfg;
  cfg.sweep_values = {4, 6};
  cfg.seeds = 20;
  cfg.master_seed = 77;
  const auto a = results_to_csv(run_experiment(cfg));
  const auto b = results_to_csv(run_experiment(cfg));
  report(7, a == b, "identical CSV across runs", fmt("%zu bytes", a.size()));
}

void granularity_trend() {
  ExperimentConfig cfg;
  cfg.sweep_values = {4, 6, 8};
  cfg.seeds = 100;
  const auto results = run_experiment(cfg);
  std::map<std::tuple<double, std::string, std::string>, const ResultRow*> rows;
  for (const auto& r : results.rows) rows[{r.value, r.strategy, r.rate_model}] = &r;
  bool ok = true;
  std::string detail;
  for (double n : cfg.sweep_values) {
    for (const std::string s : {"sna-mla", "sna-mua"}) {
      const auto* c = rows.at({n, s, "cont"});
      const auto* d4 = rows.at({n, s, "disc4"});
      const auto* d8 = rows.at({n, s, "disc8"});
      const bool here = d8->mean_norm <= d4->mean_norm &&
                        (d8->mean_norm - c->mean_norm) < (d4->mean_norm - c->mean_norm);
      ok = ok && here;
      detail += fmt("%sn=%g %s cont %.3f disc8 %.3f disc4 %.3f (seeds %zu/%zu/%zu)", detail.empty() ? "" : "; ", n,
                    s.c_str(), c->mean_norm, d8->mean_norm, d4->mean_norm, c->seed_count, d8->seed_count,
                    d4->seed_count);
    }
  }
  report(8, ok, "disc8 closer to the continuous model than disc4", detail);
}

}  // namespace

int main() {
  lttf_optimality();
  min_power_correctness();
  rate_order_properties();
  granularity_ordering();
  worked_example();
  heuristics_vs_optimum();
  determinism();
  granularity_trend();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
