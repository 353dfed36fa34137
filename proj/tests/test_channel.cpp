#include "doctest.h"

#include "m2m/channel.hpp"

#include <cmath>
#include <numeric>

using namespace m2m;

TEST_CASE("topology geometry") {
  const auto topo = generate_topology(100, 3, 5.0, 17);
  CHECK(topo.side_m == doctest::Approx(std::sqrt(20.0)));
  CHECK(topo.side_m == doctest::Approx(4.472).epsilon(1e-3));
  REQUIRE(topo.sensors.size() == 100);
  REQUIRE(topo.controllers.size() == 3);
  REQUIRE(topo.controller_of.size() == 100);
  auto inside = [&](const Point& p) { return p.x >= 0 && p.x <= topo.side_m && p.y >= 0 && p.y <= topo.side_m; };
  for (const auto& p : topo.sensors) CHECK(inside(p));
  for (const auto& p : topo.controllers) CHECK(inside(p));

  // nearest controller, brute force
  for (std::size_t s = 0; s < topo.sensors.size(); ++s) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < topo.controllers.size(); ++c)
      if (distance(topo.sensors[s], topo.controllers[c]) < distance(topo.sensors[s], topo.controllers[best])) best = c;
    CHECK(topo.controller_of[s] == static_cast<int>(best));
  }
}

TEST_CASE("topology is a function of its seed") {
  const auto a = generate_topology(20, 3, 5.0, 42);
  const auto b = generate_topology(20, 3, 5.0, 42);
  const auto c = generate_topology(20, 3, 5.0, 43);
  CHECK(topology_to_json(a) == topology_to_json(b));
  CHECK(topology_to_json(a) != topology_to_json(c));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 1, 0) != derive_seed(1, 2, 0));
}

TEST_CASE("topology JSON round trip") {
  const auto a = generate_topology(10, 2, 3.0, 5);
  const auto b = topology_from_json(topology_to_json(a));
  CHECK(b.side_m == a.side_m);
  CHECK(b.seed == a.seed);
  REQUIRE(b.sensors.size() == a.sensors.size());
  for (std::size_t i = 0; i < a.sensors.size(); ++i) {
    CHECK(b.sensors[i].x == a.sensors[i].x);
    CHECK(b.sensors[i].y == a.sensors[i].y);
  }
  CHECK(b.controller_of == a.controller_of);
  CHECK(topology_to_json(b) == topology_to_json(a));
  CHECK_THROWS_AS(topology_from_json("{not json"), Error);
  CHECK_THROWS_AS(topology_from_json("{\"side_m\": 1}"), Error);
}

TEST_CASE("bad topology arguments") {
  CHECK_THROWS_AS(generate_topology(0, 3, 5.0, 1), Error);
  CHECK_THROWS_AS(generate_topology(5, 0, 5.0, 1), Error);
  CHECK_THROWS_AS(generate_topology(5, 3, 0.0, 1), Error);
}

TEST_CASE("path loss values") {
  const PathLossParams params;
  CHECK(path_loss_db(1.0, params, 0.0) == doctest::Approx(70.0));
  CHECK(gain_from_path_loss(70.0, 1.0) == doctest::Approx(1e-7).epsilon(1e-12));
  CHECK(path_loss_db(10.0, params, 0.0) == doctest::Approx(105.0));
  CHECK(gain_from_path_loss(105.0, 1.0) == doctest::Approx(std::pow(10.0, -10.5)).epsilon(1e-12));
  CHECK(path_loss_db(0.2, params, 0.0) == doctest::Approx(70.0));
  CHECK(path_loss_db(0.0, params, 0.0) == doctest::Approx(70.0));
  CHECK(path_loss_db(1.0, params, 3.0) == doctest::Approx(73.0));
  CHECK(gain_from_path_loss(70.0, 2.0) == doctest::Approx(2e-7));
}

TEST_CASE("fading and shadowing statistics") {
  FadingSampler sampler(123, 4.0);
  constexpr int kDraws = 100000;
  double f_sum = 0, z_sum = 0, z_sq = 0;
  int nonpositive = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double f = sampler.fading_power();
    if (!(f > 0.0)) ++nonpositive;
    f_sum += f;
    const double z = sampler.shadowing_db();
    z_sum += z;
    z_sq += z * z;
  }
  const double z_mean = z_sum / kDraws;
  const double z_std = std::sqrt(z_sq / kDraws - z_mean * z_mean);
  CHECK(nonpositive == 0);
  CHECK(f_sum / kDraws >= 0.98);
  CHECK(f_sum / kDraws <= 1.02);
  CHECK(std::abs(z_mean) < 0.05);
  CHECK(z_std >= 3.9);
  CHECK(z_std <= 4.1);
}

TEST_CASE("gain mean") {
  const PathLossParams params;
  const double pl = path_loss_db(3.0, params, 0.0);
  constexpr int kDraws = 100000;

  SUBCASE("fading only") {
    FadingSampler sampler(7, 0.0);
    double sum = 0;
    for (int i = 0; i < kDraws; ++i) sum += gain_from_path_loss(pl + sampler.shadowing_db(), sampler.fading_power());
    CHECK(sum / kDraws == doctest::Approx(std::pow(10.0, -pl / 10)).epsilon(0.02));
  }
  SUBCASE("with shadowing the mean picks up the log-normal factor") {
    FadingSampler sampler(8, 4.0);
    double sum = 0;
    for (int i = 0; i < kDraws; ++i) sum += gain_from_path_loss(pl + sampler.shadowing_db(), sampler.fading_power());
    const double s = 4.0 * std::log(10.0) / 10.0;
    CHECK(sum / kDraws == doctest::Approx(std::pow(10.0, -pl / 10) * std::exp(s * s / 2)).epsilon(0.05));
  }
  SUBCASE("negative sigma") { CHECK_THROWS_AS(FadingSampler(1, -1.0), Error); }
}

TEST_CASE("channel realization and subsets") {
  const auto topo = generate_topology(6, 2, 5.0, 3);
  const auto ch = realize_channel(topo, PathLossParams{}, 99);
  CHECK(ch.sensor_count() == 6);
  CHECK(ch.controller_count() == 2);
  for (double g : ch.raw()) CHECK(g > 0.0);
  for (std::size_t s = 0; s < 6; ++s) CHECK(ch.controller_of(s) == topo.controller_of[s]);

  const std::size_t members[] = {4, 1};
  const auto g = ch.subset(members);
  REQUIRE(g.size() == 2);
  CHECK(g.at(0, 0) == ch.gain(4, static_cast<std::size_t>(ch.controller_of(4))));
  CHECK(g.at(0, 1) == ch.gain(4, static_cast<std::size_t>(ch.controller_of(1))));
  CHECK(g.at(1, 0) == ch.gain(1, static_cast<std::size_t>(ch.controller_of(4))));

  const auto again = realize_channel(topo, PathLossParams{}, 99);
  CHECK(again.raw() == ch.raw());
  const auto other = realize_channel(topo, PathLossParams{}, 100);
  CHECK(other.raw() != ch.raw());
}
