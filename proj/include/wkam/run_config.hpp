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

#ifndef WKAM_RUN_CONFIG_HPP
#define WKAM_RUN_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wkam/cell_solver.hpp"
#include "wkam/hamiltonians.hpp"
#include "wkam/torus_field.hpp"

namespace wkam {

/// start:stop:step, inclusive of stop up to rounding.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  std::vector<double> expand() const;
  bool operator==(const Range&) const = default;
};

/// Everything a run needs. Parsed from `key = value` lines; `#` starts a
/// comment. See README for the key list.
struct RunConfig {
  std::string model = "pendulum";  // pendulum | integrable | swing
  double amplitude = 1.0;
  int n = 1;
  int m = 0;
  /// alpha, lambda, omega and beta for swing models.
  SwingParams swing;

  int nx = 256;
  int nphi = 16;
  DiffMode diff = DiffMode::spectral;

  /// Explicit momenta; each entry has n components.
  std::vector<std::vector<double>> P{{0.0}};
  /// When set (n = 1 only), replaces P.
  std::optional<Range> P_range;

  std::vector<double> k_schedule{8.0, 16.0, 32.0, 64.0};
  int tau_steps = 4;
  double gtol = 1e-8;
  double rtol = 1e-6;
  int max_iter = 2000;
  Optimizer optimizer = Optimizer::lbfgs;
  int lbfgs_memory = 20;
  int test_modes = 8;
  bool fiber_decomposed = false;

  std::optional<double> tail_speed;
  /// Source of the Hbar table used for the dual transform: auto | oracle | solver | none.
  std::string dual_table = "auto";
  Range dual_range{-3.0, 3.0, 0.1};

  double sim_T = 400.0;
  double sim_dt = 1e-3;
  double sim_dt_record = 0.1;
  double sim_burn_in = 0.1;
  std::vector<double> sim_x0{0.0};
  std::vector<double> sim_y0{1.0};
  /// Source of the comparison table for `simulate`: auto | oracle | solver | none.
  std::string sim_table = "auto";

  std::string out_dir = "wkam_out";
  std::uint64_t seed = 20240611;
  bool dump_sigma = false;
  bool unwrap = true;
  int jobs = 0;

  /// Line of each key in the parsed text; used for error messages only.
  std::map<std::string, int> lines;

  std::vector<std::vector<double>> momenta() const;
  HamiltonianModel build_model() const;
  TorusGrid build_grid() const;
  SolverOptions solver_options() const;

  /// Throws ErrorCode::invalid_argument naming the key and its line.
  void validate() const;

  bool operator==(const RunConfig& o) const;
};

/// Throws ErrorCode::parse for malformed lines, unknown or repeated keys.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

}  // namespace wkam

#endif  // WKAM_RUN_CONFIG_HPP
