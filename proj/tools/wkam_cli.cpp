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

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "wkam/wkam.h"

int main(int argc, char** argv) {
  CLI::App app{"wkam: effective Hamiltonians, Gibbs measures and swing simulations"};
  app.set_version_flag("--version", std::string(wkam_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, out, manifest;
  int jobs = 0;
  unsigned long long seed = 0;
  bool dump_sigma = false, quiet = false;
  auto* config_opt = app.add_option("--config", config, "Run configuration file (key = value)")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides WKAM_OUT_DIR and the config)");
  app.add_option("--jobs", jobs, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized checks");
  app.add_flag("--dump-sigma", dump_sigma, "Write the Gibbs density at every node");
  app.add_flag("-q,--quiet", quiet, "Only print the summary line");

  app.add_subcommand("cell", "Solve the cell problem for one momentum along the k schedule");
  app.add_subcommand("sweep", "Solve over a list or range of momenta and tabulate Hbar");
  app.add_subcommand("oracle", "Tabulate the one-dimensional action-integral Hbar");
  app.add_subcommand("simulate", "Integrate the swing equation and compare rotation numbers");
  app.add_subcommand("verify", "Run the invariant suites; exit 3 on any failure");
  auto* report = app.add_subcommand("report", "Turn a manifest into plot-ready CSV tables");
  report->add_option("manifest", manifest, "Manifest written by another subcommand")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  wkam_run_request req{};
  const std::string command = app.get_subcommands().front()->get_name();
  req.command = command.c_str();
  req.config_path = *config_opt ? config.c_str() : nullptr;
  req.out_dir = *out_opt ? out.c_str() : nullptr;
  req.manifest_path = manifest.empty() ? nullptr : manifest.c_str();
  req.jobs = jobs;
  req.has_seed = *seed_opt ? 1 : 0;
  req.seed = seed;
  req.dump_sigma = dump_sigma ? 1 : 0;
  req.quiet = quiet ? 1 : 0;

  const int code = wkam_run(&req);
  std::FILE* stream = code == 0 ? stdout : stderr;
  std::fprintf(stream, "%s: %s\n", command.c_str(), wkam_last_message());
  if (*wkam_last_manifest()) std::fprintf(stream, "manifest: %s\n", wkam_last_manifest());
  return code;
}
