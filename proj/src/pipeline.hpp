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

#ifndef WKAM_SRC_PIPELINE_HPP
#define WKAM_SRC_PIPELINE_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wkam/cell_solver.hpp"
#include "wkam/error.hpp"
#include "wkam/mather_measures.hpp"
#include "wkam/oracle_1d.hpp"
#include "wkam/run_config.hpp"

namespace wkam::detail {

/// Continuation over the k schedule for one momentum plus measure statistics
/// for every converged k.
struct MomentumRun {
  std::vector<double> P;
  ContinuationResult cont;
  std::vector<MeasureStats> stats;
  /// Per-fiber solve at the last k, when requested and m >= 1.
  std::optional<CellSolution> fiber;
  bool failed = false;
  ErrorCode code = ErrorCode::not_converged;
  std::string error;
  double seconds = 0.0;
};

MomentumRun run_momentum(const RunConfig& cfg, const HamiltonianModel& model, const TorusGrid& grid,
                         const std::vector<double>& P, std::span<const HbarSample> table,
                         bool with_stats, int inner_jobs);

/// Runs every momentum on a worker pool; output order follows `momenta`.
std::vector<MomentumRun> run_momenta(const RunConfig& cfg, const HamiltonianModel& model,
                                     const TorusGrid& grid,
                                     const std::vector<std::vector<double>>& momenta,
                                     std::span<const HbarSample> table, bool with_stats, int jobs);

/// Largest-k value of every successful run.
std::vector<HbarSample> final_k_table(const std::vector<MomentumRun>& runs);

/// Potential of an oracle-capable model, or nullopt.
std::optional<Potential1D> oracle_potential(const HamiltonianModel& model);

}  // namespace wkam::detail

#endif  // WKAM_SRC_PIPELINE_HPP
