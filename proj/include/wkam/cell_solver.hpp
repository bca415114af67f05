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

#ifndef WKAM_CELL_SOLVER_HPP
#define WKAM_CELL_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "wkam/hamiltonians.hpp"
#include "wkam/torus_field.hpp"

namespace wkam {

/// Minimize F_k[v] = (1/k) log integral exp(k H_tau(x, P + D_x v, phi)) over
/// periodic v with zero mean on every fiber.
struct CellProblem {
  HamiltonianModel model;
  std::vector<double> P;
  double k = 1.0;
  TorusGrid grid;
  double tau = 1.0;

  /// Throws on k <= 0, tau outside [0, 1], dimension mismatch, or a model
  /// that is tilted or otherwise not periodic in x.
  void validate() const;
  /// The model actually minimized, H_tau.
  HamiltonianModel effective_model() const;
};

enum class Optimizer { lbfgs, newton_krylov };

enum class SolveStatus { converged, iteration_cap, line_search_failure };

const char* to_string(SolveStatus s);
const char* to_string(Optimizer o);

struct SolverOptions {
  double gtol = 1e-8;
  double rtol = 1e-6;
  int max_iter = 2000;
  Optimizer method = Optimizer::lbfgs;
  int lbfgs_memory = 20;
  int test_modes = 8;
  int cg_max_iter = 400;
};

struct CellSolution {
  explicit CellSolution(ScalarField corrector) : v(std::move(corrector)) {}

  ScalarField v;
  double Hbar_k = 0.0;
  double grad_norm = 0.0;
  double el_residual = 0.0;
  /// Fiber free energies (1/k) log integral_x exp(k H), one per angle node.
  std::vector<double> fiber_values;
  int iterations = 0;
  double sup_Dxu = 0.0;
  SolveStatus status = SolveStatus::converged;
  /// Gibbs weight narrower than the grid can resolve.
  bool resolution_warning = false;
  std::string message;
  std::vector<double> P;
  double k = 0.0;
  double tau = 1.0;
  /// Objective value at every accepted iterate, starting with the initial one.
  std::vector<double> value_trace;
  double wall_seconds = 0.0;

  bool converged() const noexcept { return status == SolveStatus::converged; }
};

/// Node-wise quantities along D_x u = P + D_x v. Vector quantities are
/// stored component-major: dy[a][node].
struct NodeFields {
  std::vector<double> H;
  std::vector<std::vector<double>> momentum;
  std::vector<std::vector<double>> dx;
  std::vector<std::vector<double>> dy;
  /// dyy[a * n + b][node]; filled only when requested.
  std::vector<std::vector<double>> dyy;
};

NodeFields evaluate_nodes(const CellProblem& problem, const ScalarField& v,
                          bool with_hessian = false);

struct ObjectiveValue {
  double value;
  ScalarField gradient;
};

/// Value of F_k and its gradient -div_x(sigma D_y H_tau) with respect to the
/// normalized grid inner product.
ObjectiveValue objective(const CellProblem& problem, const ScalarField& v);

/// Second variation of F_k at v applied to w (symmetric, positive semidefinite).
ScalarField hessian_apply(const CellProblem& problem, const ScalarField& v, const ScalarField& w);

/// Trigonometric test fields: cos/sin(j x_a) for j = 1..modes (capped below
/// the Nyquist mode), each also multiplied by cos/sin(phi_l) when m > 0.
std::vector<ScalarField> trig_test_fields(const TorusGrid& grid, int modes);

/// max_w |integral sigma D_y H . D_x w| over trig_test_fields.
double weak_el_residual(const CellProblem& problem, const ScalarField& v, int modes);

/// Removes the mean of every fiber.
void project_mean_zero(ScalarField& v);

CellSolution solve_cell(const CellProblem& problem,
                        const std::optional<ScalarField>& init = std::nullopt,
                        const SolverOptions& opts = {});

struct ContinuationResult {
  /// One tau = 1 solution per completed k, in schedule order.
  std::vector<CellSolution> solutions;
  /// Homotopy stages at the first k, tau = 1/steps, ..., 1.
  std::vector<CellSolution> homotopy;
  bool ok = true;
  double failed_tau = 0.0;
  double failed_k = 0.0;
};

/// A stage that fails with the configured optimizer is retried once from the
/// same warm start with the other one; tolerances are unchanged.
ContinuationResult continuation_solve(const HamiltonianModel& model, const std::vector<double>& P,
                                      const std::vector<double>& k_schedule, int tau_steps,
                                      const TorusGrid& grid, const SolverOptions& opts = {});

/// Solves every angle fiber independently (in parallel over `jobs` workers)
/// and assembles the joint corrector. Requires m >= 1. Each fiber runs the
/// tau homotopy at the first k of `k_ladder` (entries below problem.k) and
/// then continues in k up to problem.k; an empty ladder with tau_steps <= 1
/// is a cold solve at problem.k.
CellSolution fiber_decomposed_solve(const CellProblem& problem, const SolverOptions& opts = {},
                                    int jobs = 1, const std::vector<double>& k_ladder = {},
                                    int tau_steps = 1);

/// H_yi H_yj u_xixj + H_xi H_yi at every node, u = P.x + v.
ScalarField aronsson_residual(const CellSolution& solution, const CellProblem& problem);

}  // namespace wkam

#endif  // WKAM_CELL_SOLVER_HPP
