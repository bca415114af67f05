// Copyright 2026 The wkam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wkam/error.hpp"
#include "wkam/oracle_1d.hpp"
#include "wkam/swing_sim.hpp"

using namespace wkam;

namespace {

SwingParams free_motion() {
  SwingParams p = pendulum_as_swing(1.0);
  p.beta = {TrigSeries{}};
  return p;
}

double max_energy_error(const SwingTrajectory& tr) {
  double e = 0.0;
  for (double v : tr.energy) e = std::max(e, std::abs(v - tr.energy.front()));
  return e;
}

}  // namespace

TEST_SUITE("swing") {

TEST_CASE("free motion is exact") {
  const std::vector<double> x0{0.3}, y0{1.7};
  const SwingTrajectory tr = integrate_swing(free_motion(), x0, y0, 50.0, 1e-2, {0.5});
  REQUIRE(tr.samples() == 101);
  CHECK(tr.times.back() == doctest::Approx(50.0));
  for (std::size_t i = 0; i < tr.samples(); ++i) CHECK(tr.x[i] == doctest::Approx(0.3 + 1.7 * tr.times[i]).epsilon(1e-12));
  CHECK(std::abs(rotation_number(tr, 0.1)[0] - 1.7) <= 1e-10);
  CHECK(std::abs(tr.rotation_estimate[0] - 1.7) <= 1e-10);
}

TEST_CASE("constant input accelerates uniformly") {
  SwingParams p = free_motion();
  p.alpha = {0.25};
  const std::vector<double> x0{0.0}, y0{0.0};
  const SwingTrajectory tr = integrate_swing(p, x0, y0, 4.0, 1e-3, {1.0});
  CHECK(tr.y.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tr.x.back() == doctest::Approx(0.5 * 0.25 * 16.0).epsilon(1e-9));
}

TEST_CASE("energy drift over ten thousand steps") {
  const std::vector<double> x0{0.0}, y0{1.5};
  const SwingTrajectory tr = integrate_swing(pendulum_as_swing(1.0), x0, y0, 10.0, 1e-3);
  REQUIRE(tr.samples() == 10001);
  CHECK(max_energy_error(tr) / std::abs(tr.energy.front()) <= 1e-6);
}

TEST_CASE("energy error is second order in the step") {
  const std::vector<double> x0{0.0}, y0{2.2};
  const double e1 = max_energy_error(integrate_swing(pendulum_as_swing(1.0), x0, y0, 20.0, 0.02, {0.1}));
  const double e2 = max_energy_error(integrate_swing(pendulum_as_swing(1.0), x0, y0, 20.0, 0.01, {0.1}));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("time reversal retraces the orbit") {
  const std::vector<double> x0{0.4}, y0{1.1};
  const SwingTrajectory fw = integrate_swing(pendulum_as_swing(1.0), x0, y0, 10.0, 1e-3, {10.0});
  const std::vector<double> x1{fw.x.back()}, y1{-fw.y.back()};
  const SwingTrajectory bw = integrate_swing(pendulum_as_swing(1.0), x1, y1, 10.0, 1e-3, {10.0});
  CHECK(std::abs(bw.x.back() - 0.4) <= 1e-10);
  CHECK(std::abs(bw.y.back() + 1.1) <= 1e-10);
}

TEST_CASE("record spacing is a whole number of steps") {
  const std::vector<double> x0{0.0}, y0{1.0};
  const SwingTrajectory tr = integrate_swing(pendulum_as_swing(1.0), x0, y0, 1.0, 0.03, {0.1});
  REQUIRE(tr.samples() == 11);
  for (std::size_t i = 0; i < tr.samples(); ++i) CHECK(tr.times[i] == doctest::Approx(0.1 * i));
}

TEST_CASE("quasi-periodic forcing and two machines") {
  SwingParams p;
  p.n = 2;
  p.m = 1;
  p.alpha = {0.1, 0.0};
  p.lambda = {1.0, 1.0};
  p.omega = {1.0};
  p.beta.assign(4, TrigSeries{});
  p.beta[1] = TrigSeries{0.5, {{{1}, 0.2, 0.0}}};
  const std::vector<double> x0{0.0, 0.5}, y0{1.0, -0.5};
  const SwingTrajectory tr = integrate_swing(p, x0, y0, 20.0, 1e-3, {0.5});
  CHECK(tr.n == 2);
  CHECK(tr.x.size() == 2 * tr.samples());
  CHECK(std::all_of(tr.x.begin(), tr.x.end(), [](double v) { return std::isfinite(v); }));
}

TEST_CASE("argument checks") {
  const std::vector<double> x0{0.0}, y0{1.0}, two{0.0, 0.0};
  CHECK_THROWS_AS(integrate_swing(pendulum_as_swing(1.0), two, y0, 1.0, 1e-2), Error);
  CHECK_THROWS_AS(integrate_swing(pendulum_as_swing(1.0), x0, y0, 1.0, 0.0), Error);
  const std::vector<double> bad{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(integrate_swing(pendulum_as_swing(1.0), x0, bad, 1.0, 1e-2), Error);
  const SwingTrajectory short_run = integrate_swing(pendulum_as_swing(1.0), x0, y0, 0.5, 0.1);
  CHECK_THROWS_AS(rotation_number(short_run, 0.1), Error);
}

TEST_CASE("blow-up reports the last valid sample") {
  SwingParams p = free_motion();
  p.alpha = {1e308};
  const std::vector<double> x0{0.0}, y0{1e308};
  try {
    integrate_swing(p, x0, y0, 10.0, 1.0);
    FAIL("expected a non-finite error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
    CHECK(std::string(e.what()).find("after sample") != std::string::npos);
  }
}

TEST_CASE("rotating orbits match the slope of the effective Hamiltonian") {
  const Potential1D V = Potential1D::from_model(make_pendulum(1.0));
  std::vector<double> Ps;
  for (int i = 0; i <= 60; ++i) Ps.push_back(-3.0 + 0.1 * i);
  const auto table = oracle_table(V, Ps);
  const std::vector<double> probe{2.0, 2.5, 0.5};
  const auto rows = compare_with_homogenization(pendulum_as_swing(1.0), table, probe);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].gap <= 0.01 * rows[0].rotation_predicted);
  CHECK(rows[1].gap <= 0.01 * rows[1].rotation_predicted);
  // Inside the flat piece the orbit librates.
  CHECK(rows[2].rotation_predicted == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(rows[2].rotation_measured) <= 1e-3);
  CHECK(compare_with_homogenization(pendulum_as_swing(1.0), table, std::size_t{3}).size() == 3);
}

}  // TEST_SUITE
