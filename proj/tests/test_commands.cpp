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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>

#include "wkam/commands.hpp"

using namespace wkam;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("wkam_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

CommandResult run(const std::string& command, const std::string& config, const fs::path& out, int jobs = 1) {
  CommandRequest r;
  r.command = command;
  if (!config.empty()) r.config_path = config;
  if (!out.empty()) r.out_dir = out.string();
  r.jobs = jobs;
  return run_command(r);
}

const char* kSmallSweep =
    "P_range = 0:2:0.5\nnx = 128\nk_schedule = 8, 16\ntau_steps = 2\n";

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("cell writes the tables and a manifest") {
  TempDir t;
  const std::string cfg = t.file("c.conf", "P = 2\nnx = 128\nk_schedule = 8, 16\ndual_range = 0:3:0.5\n");
  CommandRequest r;
  r.command = "cell";
  r.config_path = cfg;
  r.out_dir = (t.path() / "out").string();
  r.dump_sigma = true;
  const CommandResult res = run_command(r);
  REQUIRE(res.exit_code == exit_ok);
  for (const char* f : {"hbar_vs_k.csv", "measures.csv", "sigma.csv", "manifest.json"}) CHECK(fs::exists(t.path() / "out" / f));
  const json m = json::parse(slurp(res.manifest_path));
  CHECK(m["command"] == "cell");
  CHECK(m["status"] == "ok");
  CHECK(m["solves"].size() == 2);
  CHECK(m.contains("versions"));
  CHECK(m.contains("timing"));
  CHECK(m.contains("sigma_profile"));
  CHECK(m["config"]["nx"] == "128");
  CHECK(slurp(t.path() / "out" / "hbar_vs_k.csv").rfind("P,k,tau,Hbar_k,", 0) == 0);
}

TEST_CASE("exit code for invalid configuration") {
  TempDir t;
  CHECK(run("cell", t.file("bad.conf", "k_schedule = 16, 8\n"), t.path() / "o").exit_code == exit_validation);
  CHECK(run("cell", t.file("bad2.conf", "k_schedule = 8, x\n"), t.path() / "o").exit_code == exit_validation);
  CHECK(run("cell", (t.path() / "missing.conf").string(), t.path() / "o").exit_code == exit_validation);
  CHECK(run("dance", "", t.path() / "o").exit_code == exit_validation);
  CommandRequest r;
  r.command = "report";
  r.manifest_path = (t.path() / "none.json").string();
  CHECK(run_command(r).exit_code == exit_validation);
}

TEST_CASE("exit code for non-convergence") {
  TempDir t;
  const CommandResult res = run("cell", t.file("cap.conf", "P = 2\nnx = 128\nmax_iter = 1\nk_schedule = 32\ntau_steps = 1\n"), t.path() / "o");
  CHECK(res.exit_code == exit_not_converged);
  const json m = json::parse(slurp(t.path() / "o" / "manifest.json"));
  CHECK(m["status"] == "not_converged");
  CHECK(m["failures"].size() == 1);
}

TEST_CASE("exit codes for verification") {
  TempDir t;
  CHECK(run("verify", "", t.path() / "ok").exit_code == exit_ok);
  CHECK(fs::exists(t.path() / "ok" / "verify_report.csv"));
  const CommandResult bad = run("verify", std::string(WKAM_CONFIG_DIR) + "/verify_loose_tolerance.conf", t.path() / "bad");
  CHECK(bad.exit_code == exit_verify_failed);
  const std::string report = slurp(t.path() / "bad" / "verify_report.csv");
  CHECK(report.find("closedness") != std::string::npos);
  CHECK(report.find(",false\n") != std::string::npos);
}

TEST_CASE("results do not depend on the worker count") {
  TempDir t;
  const std::string cfg = t.file("s.conf", kSmallSweep);
  REQUIRE(run("sweep", cfg, t.path() / "one", 1).exit_code == exit_ok);
  REQUIRE(run("sweep", cfg, t.path() / "four", 4).exit_code == exit_ok);
  CHECK(slurp(t.path() / "one" / "hbar_table.csv") == slurp(t.path() / "four" / "hbar_table.csv"));
  const json m = json::parse(slurp(t.path() / "one" / "manifest.json"));
  CHECK(m["convexity"]["pass"] == true);
}

TEST_CASE("output directory precedence") {
  TempDir t;
  const std::string cfg = t.file("o.conf", "out_dir = " + (t.path() / "from_config").string() + "\n");
  const std::string env = (t.path() / "from_env").string();
  ::setenv(kOutDirEnv, env.c_str(), 1);
  CHECK(run("oracle", cfg, {}).out_dir == env);
  CHECK(fs::exists(fs::path(env) / "oracle.csv"));
  CHECK(run("oracle", cfg, t.path() / "from_flag").out_dir == (t.path() / "from_flag").string());
  ::unsetenv(kOutDirEnv);
  CHECK(run("oracle", cfg, {}).out_dir == (t.path() / "from_config").string());
}

TEST_CASE("simulate writes trajectory and comparison") {
  TempDir t;
  const std::string cfg = t.file("sim.conf", "P = 2, 2.5\nsim_T = 50\nsim_table = oracle\n");
  REQUIRE(run("simulate", cfg, t.path() / "o").exit_code == exit_ok);
  CHECK(slurp(t.path() / "o" / "trajectory.csv").rfind("t,x,y,energy", 0) == 0);
  const std::string cmp = slurp(t.path() / "o" / "comparison.csv");
  CHECK(cmp.rfind("P,rot_measured,rot_predicted,gap", 0) == 0);
}

TEST_CASE("report regenerates tables from a manifest") {
  TempDir t;
  REQUIRE(run("sweep", t.file("s.conf", kSmallSweep), t.path() / "s").exit_code == exit_ok);
  CommandRequest r;
  r.command = "report";
  r.manifest_path = (t.path() / "s" / "manifest.json").string();
  r.out_dir = (t.path() / "r").string();
  REQUIRE(run_command(r).exit_code == exit_ok);
  CHECK(fs::exists(t.path() / "r" / "Hbar_vs_k.csv"));
  const std::string hp = slurp(t.path() / "r" / "Hbar_vs_P.csv");
  CHECK(hp.rfind("P,k,Hbar_k", 0) == 0);
  CHECK(std::count(hp.begin(), hp.end(), '\n') == 6);
}

TEST_CASE("error codes map to exit codes") {
  CHECK(exit_code_for(ErrorCode::not_converged) == exit_not_converged);
  CHECK(exit_code_for(ErrorCode::non_finite) == exit_not_converged);
  CHECK(exit_code_for(ErrorCode::parse) == exit_validation);
  CHECK(exit_code_for(ErrorCode::io) == exit_validation);
}

}  // TEST_SUITE
