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
#include <filesystem>
#include <string>

#include "wkam/error.hpp"
#include "wkam/run_config.hpp"

using namespace wkam;

namespace {

std::string error_of(const std::string& text, bool validate) {
  try {
    const RunConfig c = parse_config(text);
    if (validate) c.validate();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.model == "pendulum");
  CHECK(c.nx == 256);
  CHECK(c.k_schedule == std::vector<double>{8, 16, 32, 64});
  CHECK(c.momenta() == std::vector<std::vector<double>>{{0.0}});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("comments, spacing and lists") {
  const RunConfig c = parse_config("# header\n  nx = 64   # trailing\n\nk_schedule = 4,8 , 12\nP = 0.5, 1.5\n");
  CHECK(c.nx == 64);
  CHECK(c.k_schedule == std::vector<double>{4, 8, 12});
  CHECK(c.momenta() == std::vector<std::vector<double>>{{0.5}, {1.5}});
  CHECK(c.lines.at("k_schedule") == 4);
}

TEST_CASE("momentum ranges expand to clean decimals") {
  const RunConfig c = parse_config("P_range = -2.5:2.5:0.1\n");
  const auto P = c.momenta();
  REQUIRE(P.size() == 51);
  CHECK(P.front()[0] == -2.5);
  CHECK(P[1][0] == -2.4);
  CHECK(P[25][0] == 0.0);
  CHECK_FALSE(std::signbit(P[25][0]));
  CHECK(P.back()[0] == 2.5);
  CHECK(Range{0.0, 1.0, 0.25}.expand() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("vector momenta and swing parameters") {
  const RunConfig c = parse_config(
      "model = swing\nn = 2\nm = 1\nalpha = 0.1, 0\nlambda = 1, 1\nomega = 0.5\n"
      "beta.1.2 = 0.3; [1]: 0.1, -0.2\nbeta.2.1 = 0.3\nP = 1 0, 0.5 0.5\nsim_x0 = 0, 0\nsim_y0 = 1, 0\n");
  CHECK(c.momenta() == std::vector<std::vector<double>>{{1.0, 0.0}, {0.5, 0.5}});
  REQUIRE(c.swing.beta.size() == 4);
  CHECK(c.swing.beta[1].constant == 0.3);
  REQUIRE(c.swing.beta[1].terms.size() == 1);
  CHECK(c.swing.beta[1].terms[0].wave == std::vector<int>{1});
  CHECK(c.swing.beta[1].terms[0].sin_coef == -0.2);
  CHECK(c.swing.beta[0].is_zero());
  CHECK(c.build_model().tilted());
  CHECK(c.build_grid().m() == 1);
}

TEST_CASE("omitted swing keys take defaults") {
  const RunConfig c = parse_config("model = swing\nm = 1\nbeta.1.1 = 1; [1]: 0.5, 0\n");
  CHECK(c.swing.alpha == std::vector<double>{0.0});
  CHECK(c.swing.lambda == std::vector<double>{0.5});
  CHECK(c.swing.omega == std::vector<double>{1.0});
  CHECK_NOTHROW(c.validate());
  CHECK(c.build_model().periodic_in_x());
}

TEST_CASE("initial data follows the dimension") {
  const RunConfig c = parse_config("model = integrable\nn = 2\nP = 0.7 -0.3\n");
  CHECK(c.sim_x0.size() == 2);
  CHECK(c.sim_y0.size() == 2);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("round trip through the serialized form") {
  const char* texts[] = {
      "",
      "model = integrable\nn = 2\nm = 1\nP = 0.7 -0.3\nk_schedule = 8, 16\ndiff = central\ntail_speed = 2\n",
      "model = swing\nm = 1\nbeta.1.1 = 1; [1]: 0.5, 0.25\nP_range = -1:1:0.5\nfiber_decomposed = true\nseed = 99\n",
      "P = 2\nsim_table = oracle\ndual_table = none\nunwrap = false\ndump_sigma = true\noptimizer = newton_krylov\n",
  };
  for (const char* t : texts) {
    const RunConfig a = parse_config(t);
    const RunConfig b = parse_config(serialize_config(a));
    CHECK(a == b);
    CHECK(serialize_config(a) == serialize_config(b));
  }
}

TEST_CASE("parse errors name the line and key") {
  CHECK(contains(error_of("nx = 64\nk_schedule = 8, x\n", false), "line 2"));
  CHECK(contains(error_of("nx = 64\nk_schedule = 8, x\n", false), "k_schedule"));
  CHECK(contains(error_of("frobnicate = 1\n", false), "unknown key 'frobnicate'"));
  CHECK(contains(error_of("nx = 64\nnx = 32\n", false), "given twice"));
  CHECK(contains(error_of("just words\n", false), "line 1"));
  CHECK(contains(error_of("nx = 6.5\n", false), "nx"));
  CHECK(contains(error_of("model = swing\nbeta.1 = 1\n", false), "beta.I.J"));
  CHECK(contains(error_of("model = swing\nbeta.1.1 = 1; 0.5, 0\n", false), "Fourier term"));
  CHECK(contains(error_of("beta.1.1 = 1\n", false), "only applies"));
  try {
    parse_config("k_schedule = 8, x\n");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
  }
}

TEST_CASE("validation errors name the line and key") {
  const std::string e1 = error_of("model = pendulum\nk_schedule = 16, 8\n", true);
  CHECK(contains(e1, "line 2"));
  CHECK(contains(e1, "k_schedule"));
  CHECK(contains(e1, "strictly increasing"));
  CHECK(contains(error_of("nx = 63\n", true), "nx"));
  CHECK(contains(error_of("model = pendulum\nn = 2\n", true), "n"));
  CHECK(contains(error_of("P = 1 2\n", true), "P"));
  CHECK(contains(error_of("model = integrable\nn = 2\nP_range = 0:1:0.5\n", true), "P_range"));
  CHECK(contains(error_of("gtol = 0\n", true), "gtol"));
  CHECK(contains(error_of("model = magnet\n", true), "model"));
}

TEST_CASE("bundled configurations are valid") {
  namespace fs = std::filesystem;
  int count = 0;
  for (const auto& entry : fs::directory_iterator(WKAM_CONFIG_DIR)) {
    if (entry.path().extension() != ".conf") continue;
    INFO(entry.path().string());
    const RunConfig c = load_config(entry.path().string());
    CHECK_NOTHROW(c.validate());
    ++count;
  }
  CHECK(count >= 5);
  CHECK_THROWS_AS(load_config("/nonexistent/file.conf"), Error);
}

}  // TEST_SUITE
