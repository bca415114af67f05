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

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "wkam/error.hpp"
#include "wkam/torus_field.hpp"

using namespace wkam;

namespace {

using quad = boost::multiprecision::cpp_bin_float_quad;

double lme_reference(const std::vector<double>& f, double k) {
  quad s = 0;
  for (double v : f) s += boost::multiprecision::exp(quad(k) * quad(v));
  return static_cast<double>(boost::multiprecision::log(s / quad(f.size())) / quad(k));
}

}  // namespace

TEST_SUITE("torus") {

TEST_CASE("grid layout and coordinates") {
  TorusGrid g(2, 1, 8, 4);
  CHECK(g.size() == 8u * 8u * 4u);
  CHECK(g.fiber_size() == 64u);
  CHECK(g.fiber_count() == 4u);
  CHECK(g.x(1, 0) == doctest::Approx(g.hx()));
  CHECK(g.x(8, 1) == doctest::Approx(g.hx()));
  CHECK(g.phi(64, 0) == doctest::Approx(g.hphi()));
  CHECK_THROWS_AS(TorusGrid(1, 0, 7), Error);
  CHECK_THROWS_AS(TorusGrid(3, 0, 8), Error);
}

TEST_CASE("spectral derivative is exact on resolved modes") {
  TorusGrid g(1, 0, 32);
  for (int j : {1, 3, 15}) {
    auto f = ScalarField::sample(g, [j](auto x, auto) { return std::sin(j * x[0]) + 0.5 * std::cos(j * x[0]); });
    std::vector<double> d(g.size());
    diff_axis(g, 0, f.values(), d);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i, 0);
      err = std::max(err, std::abs(d[i] - j * (std::cos(j * x) - 0.5 * std::sin(j * x))));
    }
    CHECK(err < 1e-11);
  }
}

TEST_CASE("central differences converge at second order") {
  double prev = 0.0;
  for (int nx : {32, 64, 128}) {
    TorusGrid g(1, 0, nx, 1, DiffMode::central);
    auto f = ScalarField::sample(g, [](auto x, auto) { return std::sin(2 * x[0]); });
    std::vector<double> d(g.size());
    diff_axis(g, 0, f.values(), d);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(d[i] - 2 * std::cos(2 * g.x(i, 0))));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("gradient and divergence are negative adjoints") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (auto mode : {DiffMode::spectral, DiffMode::central}) {
    TorusGrid g(2, 1, 16, 3, mode);
    ScalarField f(g);
    VectorField F(g);
    for (auto& v : f.values()) v = nd(rng);
    for (int a = 0; a < 2; ++a)
      for (auto& v : F.component(a)) v = nd(rng);
    const double lhs = inner(gradient_x(f), F);
    const double rhs = -inner(f, divergence_x(F));
    CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("gradient annihilates constants and has zero mean") {
  TorusGrid g(2, 0, 16);
  ScalarField c(g);
  for (auto& v : c.values()) v = 3.5;
  const VectorField gc = gradient_x(c);
  for (int a = 0; a < 2; ++a)
    for (double v : gc.component(a)) CHECK(std::abs(v) < 1e-13);
  auto f = ScalarField::sample(g, [](auto x, auto) { return std::exp(std::sin(x[0]) * std::cos(x[1])); });
  const VectorField gf = gradient_x(f);
  for (int a = 0; a < 2; ++a) CHECK(std::abs(mean(gf.component(a))) < 1e-13);
}

TEST_CASE("integrate is the normalized mean") {
  TorusGrid g(1, 1, 16, 4);
  auto f = ScalarField::sample(g, [](auto x, auto phi) { return 2.0 + std::cos(x[0]) * std::sin(phi[0]); });
  CHECK(integrate(f) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("log-mean-exp against a 113-bit reference") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> f(257);
  for (auto& v : f) v = u(rng);
  for (double k : {0.5, 8.0, 64.0, 512.0}) CHECK(log_mean_exp(f, k) == doctest::Approx(lme_reference(f, k)).epsilon(1e-14));
}

TEST_CASE("log-mean-exp examples") {
  std::vector<double> c(10, 1.25);
  CHECK(log_mean_exp(c, 7.0) == doctest::Approx(1.25).epsilon(1e-15));
  std::vector<double> two{0.0, 1.0};
  CHECK(log_mean_exp(two, 1.0) == doctest::Approx(std::log((1.0 + std::exp(1.0)) / 2.0)));
  // Large k approaches the max without overflow.
  std::vector<double> big{0.0, 1000.0};
  CHECK(log_mean_exp(big, 50.0) == doctest::Approx(1000.0 - std::log(2.0) / 50.0));
  CHECK_THROWS_AS(log_mean_exp(two, 0.0), Error);
}

TEST_CASE("log-mean-exp lies between the mean and the max and grows with k") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  std::vector<double> f(100);
  for (auto& v : f) v = u(rng);
  double prev = mean(f);
  for (double k : {0.1, 1.0, 4.0, 16.0, 64.0}) {
    const double L = log_mean_exp(f, k);
    CHECK(L >= prev - 1e-15);
    CHECK(L <= *std::max_element(f.begin(), f.end()) + 1e-15);
    prev = L;
  }
}

TEST_CASE("non-finite input is rejected") {
  TorusGrid g(1, 0, 8);
  ScalarField f(g);
  f[2] = std::nan("");
  CHECK_FALSE(f.all_finite());
  CHECK_THROWS_AS(gradient_x(f), Error);
}

}  // TEST_SUITE
