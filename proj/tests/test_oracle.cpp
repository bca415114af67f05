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

#include <cmath>
#include <vector>

#include "wkam/error.hpp"
#include "wkam/oracle_1d.hpp"

using namespace wkam;

namespace {

const double kPi = std::acos(-1.0);

Potential1D cosine(double a) {
  return Potential1D([a](double x) { return a * (1.0 - std::cos(x)); });
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("potential extrema") {
  const Potential1D V = cosine(1.0);
  CHECK(V.v_max() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(V.v_min() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(std::remainder(V.argmax() - kPi, 2 * kPi)) < 1e-6);
}

TEST_CASE("critical momentum of the cosine potential") {
  CHECK(critical_momentum(cosine(1.0)) == doctest::Approx(4.0 / kPi).epsilon(1e-12));
  CHECK(critical_momentum(cosine(2.25)) == doctest::Approx(4.0 * 1.5 / kPi).epsilon(1e-12));
}

TEST_CASE("reference values") {
  const Potential1D V = cosine(1.0);
  CHECK(effective_hamiltonian_1d(V, 1.5) == doctest::Approx(2.244637640628).epsilon(1e-11));
  CHECK(effective_hamiltonian_1d(V, 2.0) == doctest::Approx(3.063795422862).epsilon(1e-11));
  CHECK(effective_hamiltonian_1d(V, 2.5) == doctest::Approx(4.165327623284).epsilon(1e-11));
  CHECK(effective_hamiltonian_1d(V, 3.0) == doctest::Approx(5.527886154984).epsilon(1e-11));
  CHECK(std::abs(effective_hamiltonian_1d(V, 1.5) - 2.26) <= 0.05);
}

TEST_CASE("momentum of energy inverts the effective Hamiltonian") {
  const Potential1D V = cosine(1.0);
  for (double P : {1.4, 2.0, 3.7}) CHECK(momentum_of_energy(V, effective_hamiltonian_1d(V, P)) == doctest::Approx(P).epsilon(1e-11));
  CHECK(momentum_of_energy(V, 2.0) == doctest::Approx(4.0 / kPi).epsilon(1e-12));
  CHECK_THROWS_AS(momentum_of_energy(V, 1.0), Error);
}

TEST_CASE("flat piece, evenness and growth") {
  const Potential1D V = cosine(1.0);
  for (double P : {0.0, 0.3, -1.0, 1.27}) CHECK(effective_hamiltonian_1d(V, P) == doctest::Approx(2.0).epsilon(1e-14));
  for (double P : {0.5, 1.6, 2.9}) CHECK(effective_hamiltonian_1d(V, -P) == doctest::Approx(effective_hamiltonian_1d(V, P)).epsilon(1e-14));
  // Above the flat piece the energy approaches the free value plus the mean of V.
  const double P = 40.0;
  CHECK(effective_hamiltonian_1d(V, P) == doctest::Approx(0.5 * P * P + 1.0).epsilon(1e-5));
}

TEST_CASE("convexity of the sampled table") {
  const Potential1D V = cosine(1.0);
  std::vector<double> Ps;
  for (int i = -30; i <= 30; ++i) Ps.push_back(0.1 * i);
  const auto t = oracle_table(V, Ps);
  REQUIRE(t.size() == Ps.size());
  for (std::size_t i = 1; i + 1 < t.size(); ++i) CHECK(t[i - 1].Hbar + t[i + 1].Hbar - 2 * t[i].Hbar >= -1e-12);
}

TEST_CASE("model extraction") {
  const Potential1D V = Potential1D::from_model(make_pendulum(1.5));
  CHECK(V(kPi) == doctest::Approx(3.0));
  CHECK_THROWS_AS(Potential1D::from_model(make_integrable(2, 0)), Error);
  SwingParams p;
  p.n = 1;
  p.m = 1;
  p.alpha = {0.0};
  p.lambda = {0.5};
  p.omega = {1.0};
  p.beta = {TrigSeries{1.0, {{{1}, 0.5, 0.0}}}};
  try {
    Potential1D::from_model(make_swing(p));
    FAIL("expected an unsupported model error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported);
  }
}

}  // TEST_SUITE
