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

#include "pipeline.hpp"

#include <chrono>
#include <sstream>

#include "parallel.hpp"

namespace wkam::detail {

MomentumRun run_momentum(const RunConfig& cfg, const HamiltonianModel& model, const TorusGrid& grid,
                         const std::vector<double>& P, std::span<const HbarSample> table,
                         bool with_stats, int inner_jobs) {
  const auto start = std::chrono::steady_clock::now();
  MomentumRun run;
  run.P = P;
  const SolverOptions opts = cfg.solver_options();
  try {
    run.cont = continuation_solve(model, P, cfg.k_schedule, cfg.tau_steps, grid, opts);
    if (!run.cont.ok) {
      run.failed = true;
      std::ostringstream msg;
      msg << "no convergence at tau = " << run.cont.failed_tau << ", k = " << run.cont.failed_k;
      run.error = msg.str();
    }
    if (with_stats) {
      for (const CellSolution& sol : run.cont.solutions) {
        CellProblem prob{model, P, sol.k, grid, 1.0};
        run.stats.push_back(measure_stats(sol, prob, cfg.test_modes, cfg.tail_speed, table));
      }
    }
    if (cfg.fiber_decomposed && grid.m() >= 1 && run.cont.ok) {
      CellProblem prob{model, P, cfg.k_schedule.back(), grid, 1.0};
      std::vector<double> ladder(cfg.k_schedule.begin(), cfg.k_schedule.end() - 1);
      run.fiber = fiber_decomposed_solve(prob, opts, inner_jobs, ladder, cfg.tau_steps);
      if (!run.fiber->converged()) {
        run.failed = true;
        run.error = "per-fiber solve did not converge: " + run.fiber->message;
      }
    }
  } catch (const Error& e) {
    run.failed = true;
    run.code = e.code();
    run.error = e.what();
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::vector<MomentumRun> run_momenta(const RunConfig& cfg, const HamiltonianModel& model,
                                     const TorusGrid& grid,
                                     const std::vector<std::vector<double>>& momenta,
                                     std::span<const HbarSample> table, bool with_stats, int jobs) {
  std::vector<MomentumRun> runs(momenta.size());
  const int outer = resolve_jobs(jobs);
  const int inner = momenta.size() >= static_cast<std::size_t>(outer) ? 1 : std::max(1, outer / static_cast<int>(momenta.size()));
  parallel_for(momenta.size(), outer, [&](std::size_t i) {
    runs[i] = run_momentum(cfg, model, grid, momenta[i], table, with_stats, inner);
  });
  return runs;
}

std::vector<HbarSample> final_k_table(const std::vector<MomentumRun>& runs) {
  std::vector<HbarSample> out;
  for (const auto& r : runs)
    if (r.cont.ok && !r.cont.solutions.empty()) out.push_back({r.P, r.cont.solutions.back().Hbar_k});
  return out;
}

std::optional<Potential1D> oracle_potential(const HamiltonianModel& model) {
  try {
    return Potential1D::from_model(model);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::unsupported) return std::nullopt;
    throw;
  }
}

}  // namespace wkam::detail
