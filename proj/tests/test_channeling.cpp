#include "catch2/catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dbclock/channeling.hpp"

using namespace dbclock::channeling;
using Catch::Approx;

namespace {

ChannelParams unit_params() {
  ChannelParams p;
  p.L = 1.0;
  p.K = 1.0;
  p.m = 1.0;
  return p;
}

ChannelParams small_run() {
  ChannelParams p;
  p.n_steps = 200;
  p.n_traj = 300;
  return p;
}

std::vector<TransmissionPoint> synthetic_dip(double depth, double fwhm, std::size_t n) {
  const double s = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  std::vector<TransmissionPoint> out;
  for (double t : tilt_grid(-4.0 * fwhm, 4.0 * fwhm, n)) {
    const double f = 0.9 - depth * std::exp(-0.5 * (t / s) * (t / s));
    out.push_back({.tilt = t, .n_transmitted = 0, .n_total = 100000, .fraction = f,
                   .std_error = std::sqrt(f * (1.0 - f) / 100000.0)});
  }
  return out;
}

}  // namespace

TEST_CASE("step deflection", "[channeling]") {
  const auto p = unit_params();
  CHECK(step_deflection(0.0, 0.7, 0.3, p).d_theta_x == 0.0);
  CHECK(step_deflection(0.5, 1.0, 1.0, p).d_theta_x == 1.0);
  CHECK(step_deflection(0.5, 1.0, 1.0, p).d_theta_y == 0.5);
  CHECK(step_deflection(0.5, 1.0, 0.0, p).d_theta_x == 0.0);

  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  ChannelParams p_long;
  p_long.L = 2.0 * p_long.d;
  ChannelParams p_strong;
  p_strong.K = 2.0 * p_long.K;
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen);
    const double y = u(gen);
    const double z = u(gen);
    const auto a = step_deflection(x, y, z, p_long);
    const auto b = step_deflection(x, y, z, p_strong);
    CHECK(a.d_theta_x == b.d_theta_x);
    CHECK(a.d_theta_y == b.d_theta_y);

    const auto k = step_deflection(x, y, z, p);
    CHECK(step_deflection(-x, y, z, p).d_theta_x == -k.d_theta_x);
    CHECK(step_deflection(x, -y, z, p).d_theta_x == k.d_theta_x);
    CHECK(step_deflection(x, y, -z, p).d_theta_x == k.d_theta_x);
    CHECK(step_deflection(x, -y, z, p).d_theta_y == -k.d_theta_y);
    CHECK(step_deflection(y, x, z, p).d_theta_y == k.d_theta_x);
  }
}

TEST_CASE("z laws", "[channeling]") {
  SECTION("normalized weight keeps <z^2> = z_ref^2 for every sigma") {
    for (double sigma : {0.125, 0.25, 0.5}) {
      ChannelParams p;
      p.sigma = sigma;
      TrajectoryRng rng(1, 2, 3);
      double sum = 0.0;
      const int n = 200000;
      for (int i = 0; i < n; ++i) {
        const double z = draw_z(rng, p);
        sum += z * z;
      }
      CHECK(sum / n == Approx(p.z_ref * p.z_ref).epsilon(0.01));
    }
  }
  SECTION("gaussian law variance") {
    ChannelParams p;
    p.z_law = ZLaw::gaussian;
    TrajectoryRng rng(4, 5, 6);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = draw_z(rng, p);
      sum += z * z;
    }
    CHECK(sum / n == Approx(p.sigma * p.sigma).epsilon(0.01));
  }
  CHECK(parse_z_law("gaussian") == ZLaw::gaussian);
  CHECK(parse_z_law(to_string(ZLaw::normalized_weight)) == ZLaw::normalized_weight);
  CHECK_FALSE(parse_z_law("lorentzian").has_value());
}

TEST_CASE("trajectory propagation", "[channeling]") {
  SECTION("free streaming with K = 0") {
    ChannelParams p;
    p.K = 0.0;
    p.n_steps = 100;
    TrajectoryRng rng(9, 0, 0);
    const TrajectoryState on_axis{.x = 0.1, .y = -0.2};
    const auto exit = propagate_trajectory(on_axis, p, rng);
    CHECK(exit.x == on_axis.x);
    CHECK(exit.y == on_axis.y);
    CHECK(exit.theta_x == 0.0);
    CHECK(exit.step_index == 100);
    CHECK_FALSE(exit.lost);

    const TrajectoryState tilted{.theta_x = 1e-4};
    const auto drifted = propagate_trajectory(tilted, p, rng);
    CHECK(drifted.x == Approx(100 * p.d * 1e-4).epsilon(1e-12));
    CHECK(drifted.theta_x == 1e-4);
  }
  SECTION("fixed seed gives a bit-identical exit") {
    const auto p = small_run();
    TrajectoryRng a(77, 3, 4);
    TrajectoryRng b(77, 3, 4);
    const auto ea = propagate_trajectory(sample_entry(1e-4, p, a), p, a);
    const auto eb = propagate_trajectory(sample_entry(1e-4, p, b), p, b);
    CHECK(ea.x == eb.x);
    CHECK(ea.y == eb.y);
    CHECK(ea.theta_x == eb.theta_x);
    CHECK(ea.theta_y == eb.theta_y);
    CHECK(ea.lost == eb.lost);
  }
  SECTION("runaway excursions are lost") {
    ChannelParams p;
    p.periodic_cell = false;
    p.K = 1e6;
    TrajectoryRng rng(1, 1, 1);
    const auto exit = propagate_trajectory({.x = 0.4, .y = 0.4}, p, rng);
    CHECK(exit.lost);
    CHECK(exit.step_index < p.n_steps);
    CHECK_FALSE(is_transmitted(exit, 0.0, p));
  }
  SECTION("kick logs for (2d, K) and (d, 2K) are identical") {
    ChannelParams p_long = small_run();
    p_long.L = 2.0 * p_long.d;
    ChannelParams p_strong = small_run();
    p_strong.K = 2.0 * p_long.K;
    for (std::size_t j = 0; j < 20; ++j) {
      const auto a = trajectory_kick_log(3e-4, 7, j, p_long);
      const auto b = trajectory_kick_log(3e-4, 7, j, p_strong);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].z == b[i].z);
        CHECK(a[i].d_theta_x == b[i].d_theta_x);
        CHECK(a[i].d_theta_y == b[i].d_theta_y);
      }
    }
  }
  SECTION("kick log CSV") {
    const auto log = trajectory_kick_log(0.0, 0, 0, small_run());
    std::ostringstream out;
    write_kick_log(out, log);
    const std::string text = out.str();
    CHECK(text.rfind("step,z,dtheta_x,dtheta_y\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(log.size() + 1));
  }
}

TEST_CASE("entry sampling and acceptance", "[channeling]") {
  ChannelParams p;
  TrajectoryRng rng(5, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_entry(2e-3, p, rng);
    CHECK(std::abs(s.x) <= p.cell_half_width);
    CHECK(std::abs(s.y) <= p.cell_half_width);
    CHECK(s.theta_x == 2e-3);
    CHECK(s.theta_y == 0.0);
  }
  const TrajectoryState inside{.theta_x = 1e-3 + 0.4e-3, .theta_y = -0.4e-3};
  CHECK(is_transmitted(inside, 1e-3, p));
  const TrajectoryState outside{.theta_x = 1e-3 + 0.6e-3};
  CHECK_FALSE(is_transmitted(outside, 1e-3, p));
}

TEST_CASE("transmission scan", "[channeling]") {
  const auto grid = tilt_grid(-2e-3, 2e-3, 9);

  SECTION("K = 0 transmits everything") {
    auto p = small_run();
    p.K = 0.0;
    for (const auto& pt : transmission_scan(grid, p)) {
      CHECK(pt.fraction == 1.0);
      CHECK(pt.n_transmitted == p.n_traj);
      CHECK(pt.std_error == 0.0);
    }
  }
  SECTION("independent of the thread count") {
    const auto p = small_run();
    const auto serial = transmission_scan(grid, p, 1);
    for (unsigned threads : {2U, 3U, 8U, 0U}) {
      const auto parallel = transmission_scan(grid, p, threads);
      REQUIRE(parallel.size() == serial.size());
      for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(parallel[i].n_transmitted == serial[i].n_transmitted);
      }
    }
  }
  SECTION("bookkeeping") {
    const auto p = small_run();
    const auto profile = transmission_scan(grid, p);
    REQUIRE(profile.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(profile[i].tilt == grid[i]);
      CHECK(profile[i].n_total == p.n_traj);
      CHECK(profile[i].fraction >= 0.0);
      CHECK(profile[i].fraction <= 1.0);
    }
  }
  CHECK_THROWS_AS(transmission_scan({}, small_run()), std::domain_error);
  auto bad = small_run();
  bad.sigma = -1.0;
  CHECK_THROWS_AS(transmission_scan(grid, bad), std::domain_error);
}

TEST_CASE("transmission points", "[channeling]") {
  const auto pt = make_point(0.0, 50, 200);
  CHECK(pt.fraction == 0.25);
  CHECK(pt.std_error == Approx(std::sqrt(0.25 * 0.75 / 200.0)).epsilon(1e-15));
  CHECK_THROWS_AS(make_point(0.0, 3, 2), std::domain_error);
  CHECK_THROWS_AS(make_point(0.0, 0, 0), std::domain_error);
}

TEST_CASE("dip statistics", "[channeling]") {
  SECTION("synthetic Gaussian dip") {
    for (double width : {0.5e-3, 1e-3, 2e-3}) {
      const auto stats = dip_statistics(synthetic_dip(0.3, width, 81));
      REQUIRE(stats.detected);
      REQUIRE(stats.fwhm.has_value());
      // The outer fifth sits 2.4 FWHM out, where the tail is below 1e-6.
      CHECK(stats.plateau == Approx(0.9).margin(1e-6));
      CHECK(stats.depth == Approx(0.3).margin(0.01));
      CHECK(*stats.fwhm == Approx(width).epsilon(0.05));
      CHECK(stats.center == 0.0);
    }
  }
  SECTION("flat profile is flagged") {
    std::vector<TransmissionPoint> flat;
    for (double t : tilt_grid(-1.0, 1.0, 11)) flat.push_back(make_point(t, 1000, 1000));
    const auto stats = dip_statistics(flat);
    CHECK_FALSE(stats.detected);
    CHECK(stats.depth == 0.0);
    CHECK_FALSE(stats.fwhm.has_value());
  }
  SECTION("dip below the noise floor is flagged") {
    std::vector<TransmissionPoint> noisy;
    const auto grid = tilt_grid(-1.0, 1.0, 11);
    for (std::size_t i = 0; i < grid.size(); ++i) noisy.push_back(make_point(grid[i], i == 5 ? 495 : 500, 1000));
    const auto stats = dip_statistics(noisy);
    CHECK_FALSE(stats.detected);
    CHECK_FALSE(stats.fwhm.has_value());
  }
  SECTION("symmetric profile is centered") {
    auto profile = synthetic_dip(0.2, 1e-3, 40);
    const auto stats = dip_statistics(profile);
    CHECK(std::abs(stats.center) <= profile[1].tilt - profile[0].tilt);
  }
  CHECK_THROWS_AS(dip_statistics(synthetic_dip(0.3, 1e-3, 4)), std::domain_error);
}

TEST_CASE("rescaled parameters", "[channeling]") {
  ChannelParams p;
  const auto same = rescaled_params(p, 1.0);
  CHECK(same.K == p.K);
  CHECK(same.sigma == p.sigma);
  CHECK(same.L == p.L);

  const auto doubled = rescaled_params(p, 2.0);
  CHECK(doubled.K == 2.0 * p.K);
  CHECK(doubled.sigma == p.d / 2.0);
  CHECK(doubled.L == p.d);

  const auto halved = rescaled_params(p, 0.5);
  CHECK(halved.K == p.K / 2.0);
  CHECK(halved.sigma == p.d / 8.0);

  CHECK_THROWS_AS(rescaled_params(p, 0.0), std::domain_error);
}

TEST_CASE("tilt grid", "[channeling]") {
  const auto g = tilt_grid(-2e-3, 2e-3, 41);
  REQUIRE(g.size() == 41);
  CHECK(g.front() == -2e-3);
  CHECK(g.back() == 2e-3);
  CHECK(g[20] == 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == -g[g.size() - 1 - i]);
  CHECK(tilt_grid(1.0, 3.0, 1) == std::vector<double>{2.0});
  CHECK_THROWS_AS(tilt_grid(1.0, 0.0, 3), std::domain_error);
  CHECK_THROWS_AS(tilt_grid(0.0, 1.0, 0), std::domain_error);
}
