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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "wkam/wkam.h"

namespace {

const double kPi = std::acos(-1.0);

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and empty error") {
  CHECK(std::string(wkam_version()).size() > 0);
}

TEST_CASE("model evaluation") {
  wkam_model* m = nullptr;
  REQUIRE(wkam_model_pendulum(1.0, &m) == WKAM_OK);
  CHECK(wkam_model_dim(m) == 1);
  CHECK(wkam_model_angle_dim(m) == 0);
  const double x = kPi, y = 2.0;
  double H = 0.0, dy = 0.0, dyy = 0.0;
  REQUIRE(wkam_model_eval(m, &x, &y, nullptr, &H, nullptr, &dy, &dyy) == WKAM_OK);
  CHECK(H == doctest::Approx(4.0));
  CHECK(dy == doctest::Approx(2.0));
  CHECK(dyy == 1.0);
  wkam_model_free(m);
}

TEST_CASE("invalid arguments report a status and a message") {
  wkam_model* m = nullptr;
  CHECK(wkam_model_pendulum(-1.0, &m) == WKAM_ERR_INVALID_ARGUMENT);
  CHECK(m == nullptr);
  CHECK(std::string(wkam_last_error()).size() > 0);
  CHECK(wkam_model_pendulum(1.0, nullptr) == WKAM_ERR_INVALID_ARGUMENT);
  wkam_grid* g = nullptr;
  CHECK(wkam_grid_create(1, 0, 7, 1, 0, &g) == WKAM_ERR_INVALID_ARGUMENT);
  CHECK(wkam_model_from_config("/nonexistent.conf", &m) != WKAM_OK);
  wkam_model_free(nullptr);
  wkam_grid_free(nullptr);
  wkam_solution_free(nullptr);
}

TEST_CASE("integrable solve through the C interface") {
  wkam_model* m = nullptr;
  wkam_grid* g = nullptr;
  wkam_solution* s = nullptr;
  REQUIRE(wkam_model_integrable(1, 0, &m) == WKAM_OK);
  REQUIRE(wkam_grid_create(1, 0, 32, 1, 0, &g) == WKAM_OK);
  CHECK(wkam_grid_size(g) == 32);
  const double P = 0.7;
  REQUIRE(wkam_solve_cell(m, g, &P, 8.0, nullptr, &s) == WKAM_OK);
  CHECK(std::abs(wkam_solution_hbar(s) - 0.245) <= 1e-10);
  CHECK(wkam_solution_converged(s) == 1);
  std::vector<double> v(32);
  REQUIRE(wkam_solution_corrector(s, v.data(), v.size()) == WKAM_OK);
  for (double x : v) CHECK(std::abs(x) <= 1e-10);
  CHECK(wkam_solution_corrector(s, v.data(), 3) == WKAM_ERR_INVALID_ARGUMENT);
  double Q = 0.0, mean = 0.0, var = 0.0, closed = 0.0;
  REQUIRE(wkam_solution_measure(s, &Q, &mean, &var, &closed) == WKAM_OK);
  CHECK(Q == doctest::Approx(0.7));
  wkam_solution_free(s);
  wkam_grid_free(g);
  wkam_model_free(m);
}

TEST_CASE("continuation and the oracle agree from below") {
  wkam_model* m = nullptr;
  wkam_grid* g = nullptr;
  wkam_solution* s = nullptr;
  REQUIRE(wkam_model_pendulum(1.0, &m) == WKAM_OK);
  REQUIRE(wkam_grid_create(1, 0, 256, 1, 0, &g) == WKAM_OK);
  const double P = 2.0, ks[] = {8, 16, 32, 64};
  wkam_solver_options o;
  wkam_solver_options_default(&o);
  CHECK(o.gtol == 1e-8);
  REQUIRE(wkam_solve_continuation(m, g, &P, ks, 4, 4, &o, &s) == WKAM_OK);
  CHECK(wkam_solution_k(s) == 64.0);
  double oracle = 0.0;
  REQUIRE(wkam_oracle_hbar(m, P, &oracle) == WKAM_OK);
  const double gap = oracle - wkam_solution_hbar(s);
  CHECK(gap >= 0.0);
  CHECK(gap <= 0.15);
  wkam_solution_free(s);
  wkam_grid_free(g);
  wkam_model_free(m);
}

TEST_CASE("non-convergence keeps the diagnostic state") {
  wkam_model* m = nullptr;
  wkam_grid* g = nullptr;
  wkam_solution* s = nullptr;
  REQUIRE(wkam_model_pendulum(1.0, &m) == WKAM_OK);
  REQUIRE(wkam_grid_create(1, 0, 128, 1, 0, &g) == WKAM_OK);
  wkam_solver_options o;
  wkam_solver_options_default(&o);
  o.max_iter = 1;
  const double P = 2.0;
  CHECK(wkam_solve_cell(m, g, &P, 64.0, &o, &s) == WKAM_ERR_NOT_CONVERGED);
  REQUIRE(s != nullptr);
  CHECK(wkam_solution_converged(s) == 0);
  CHECK(wkam_solution_iterations(s) == 1);
  wkam_solution_free(s);
  wkam_grid_free(g);
  wkam_model_free(m);
}

TEST_CASE("unsupported oracle model") {
  wkam_model* m = nullptr;
  REQUIRE(wkam_model_integrable(2, 0, &m) == WKAM_OK);
  double out = 0.0;
  CHECK(wkam_oracle_hbar(m, 1.0, &out) == WKAM_ERR_UNSUPPORTED);
  wkam_model_free(m);
}

TEST_CASE("subcommand runner") {
  const auto dir = std::filesystem::temp_directory_path() / "wkam_capi_run";
  std::filesystem::remove_all(dir);
  const std::string out = dir.string();
  wkam_run_request r{};
  r.command = "oracle";
  r.out_dir = out.c_str();
  r.quiet = 1;
  CHECK(wkam_run(&r) == 0);
  CHECK(std::filesystem::exists(dir / "oracle.csv"));
  CHECK(std::string(wkam_last_manifest()) == (dir / "manifest.json").string());
  r.command = "nonsense";
  CHECK(wkam_run(&r) == 1);
  CHECK(std::string(wkam_last_message()).size() > 0);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
