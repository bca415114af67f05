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

#include "wkam/wkam.h"

#include <iostream>
#include <memory>
#include <string>

#include "wkam/cell_solver.hpp"
#include "wkam/commands.hpp"
#include "wkam/error.hpp"
#include "wkam/mather_measures.hpp"
#include "wkam/oracle_1d.hpp"
#include "wkam/run_config.hpp"

struct wkam_model {
  wkam::HamiltonianModel model;
};

struct wkam_grid {
  wkam::TorusGrid grid;
};

struct wkam_solution {
  wkam::CellProblem problem;
  wkam::CellSolution solution;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_message;
thread_local std::string last_manifest;

wkam_status status_of(wkam::ErrorCode c) {
  switch (c) {
    case wkam::ErrorCode::invalid_argument: return WKAM_ERR_INVALID_ARGUMENT;
    case wkam::ErrorCode::non_finite: return WKAM_ERR_NON_FINITE;
    case wkam::ErrorCode::not_converged: return WKAM_ERR_NOT_CONVERGED;
    case wkam::ErrorCode::io: return WKAM_ERR_IO;
    case wkam::ErrorCode::parse: return WKAM_ERR_PARSE;
    case wkam::ErrorCode::unsupported: return WKAM_ERR_UNSUPPORTED;
  }
  return WKAM_ERR_INTERNAL;
}

template <class F>
wkam_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const wkam::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    last_error = std::string("internal error: ") + e.what();
    return WKAM_ERR_INTERNAL;
  } catch (...) {
    last_error = "internal error";
    return WKAM_ERR_INTERNAL;
  }
}

wkam_status null_arg(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return WKAM_ERR_INVALID_ARGUMENT;
}

wkam::SolverOptions to_options(const wkam_solver_options* o) {
  wkam::SolverOptions s;
  if (o) {
    s.gtol = o->gtol;
    s.rtol = o->rtol;
    s.max_iter = o->max_iter;
    s.method = o->newton ? wkam::Optimizer::newton_krylov : wkam::Optimizer::lbfgs;
  }
  return s;
}

}  // namespace

extern "C" {

const char* wkam_version(void) { return WKAM_VERSION; }
const char* wkam_last_error(void) { return last_error.c_str(); }
const char* wkam_last_message(void) { return last_message.c_str(); }
const char* wkam_last_manifest(void) { return last_manifest.c_str(); }

wkam_status wkam_model_integrable(int n, int m, wkam_model** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new wkam_model{wkam::make_integrable(n, m)};
    return WKAM_OK;
  });
}

wkam_status wkam_model_pendulum(double amplitude, wkam_model** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new wkam_model{wkam::make_pendulum(amplitude)};
    return WKAM_OK;
  });
}

wkam_status wkam_model_from_config(const char* path, wkam_model** out) {
  if (!out) return null_arg("out");
  if (!path) return null_arg("path");
  return guarded([&] {
    const wkam::RunConfig cfg = wkam::load_config(path);
    cfg.validate();
    *out = new wkam_model{cfg.build_model()};
    return WKAM_OK;
  });
}

void wkam_model_free(wkam_model* model) { delete model; }
int wkam_model_dim(const wkam_model* model) { return model ? model->model.n() : 0; }
int wkam_model_angle_dim(const wkam_model* model) { return model ? model->model.m() : 0; }

wkam_status wkam_model_eval(const wkam_model* model, const double* x, const double* y, const double* phi, double* H,
                            double* dx, double* dy, double* dyy) {
  if (!model) return null_arg("model");
  if (!x || !y) return null_arg("x and y");
  const int n = model->model.n(), m = model->model.m();
  if (m > 0 && !phi) return null_arg("phi");
  return guarded([&] {
    const wkam::HamiltonianEval e = model->model.eval({x, static_cast<std::size_t>(n)}, {y, static_cast<std::size_t>(n)},
                                                      {phi, static_cast<std::size_t>(m)});
    if (H) *H = e.H;
    for (int i = 0; i < n; ++i) {
      if (dx) dx[i] = e.dx[i];
      if (dy) dy[i] = e.dy[i];
      for (int j = 0; j < n && dyy; ++j) dyy[i * n + j] = e.hess(i, j);
    }
    return WKAM_OK;
  });
}

wkam_status wkam_grid_create(int n, int m, int nx, int nphi, int central, wkam_grid** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new wkam_grid{wkam::TorusGrid(n, m, nx, nphi, central ? wkam::DiffMode::central : wkam::DiffMode::spectral)};
    return WKAM_OK;
  });
}

void wkam_grid_free(wkam_grid* grid) { delete grid; }
size_t wkam_grid_size(const wkam_grid* grid) { return grid ? grid->grid.size() : 0; }

void wkam_solver_options_default(wkam_solver_options* opts) {
  if (!opts) return;
  const wkam::SolverOptions d;
  opts->gtol = d.gtol;
  opts->rtol = d.rtol;
  opts->max_iter = d.max_iter;
  opts->newton = 0;
}

wkam_status wkam_solve_cell(const wkam_model* model, const wkam_grid* grid, const double* P, double k,
                            const wkam_solver_options* opts, wkam_solution** out) {
  if (!model || !grid || !P || !out) return null_arg("model, grid, P and out");
  *out = nullptr;
  return guarded([&] {
    wkam::CellProblem prob{model->model, std::vector<double>(P, P + model->model.n()), k, grid->grid, 1.0};
    auto sol = std::make_unique<wkam_solution>(wkam_solution{prob, wkam::solve_cell(prob, std::nullopt, to_options(opts))});
    const bool ok = sol->solution.converged();
    if (!ok) last_error = "solve did not converge: " + sol->solution.message;
    *out = sol.release();
    return ok ? WKAM_OK : WKAM_ERR_NOT_CONVERGED;
  });
}

wkam_status wkam_solve_continuation(const wkam_model* model, const wkam_grid* grid, const double* P,
                                    const double* k_schedule, size_t count, int tau_steps,
                                    const wkam_solver_options* opts, wkam_solution** out) {
  if (!model || !grid || !P || !k_schedule || !out) return null_arg("model, grid, P, k_schedule and out");
  *out = nullptr;
  return guarded([&] {
    const std::vector<double> Pv(P, P + model->model.n());
    const std::vector<double> ks(k_schedule, k_schedule + count);
    wkam::ContinuationResult cr = wkam::continuation_solve(model->model, Pv, ks, tau_steps, grid->grid, to_options(opts));
    wkam::CellSolution last = !cr.solutions.empty() ? cr.solutions.back() : cr.homotopy.back();
    wkam::CellProblem prob{model->model, Pv, last.k, grid->grid, last.tau};
    *out = new wkam_solution{prob, std::move(last)};
    if (!cr.ok) {
      last_error = "continuation stopped at tau = " + std::to_string(cr.failed_tau) + ", k = " + std::to_string(cr.failed_k);
      return WKAM_ERR_NOT_CONVERGED;
    }
    return WKAM_OK;
  });
}

void wkam_solution_free(wkam_solution* solution) { delete solution; }
double wkam_solution_hbar(const wkam_solution* s) { return s ? s->solution.Hbar_k : 0.0; }
double wkam_solution_k(const wkam_solution* s) { return s ? s->solution.k : 0.0; }
double wkam_solution_grad_norm(const wkam_solution* s) { return s ? s->solution.grad_norm : 0.0; }
double wkam_solution_el_residual(const wkam_solution* s) { return s ? s->solution.el_residual : 0.0; }
double wkam_solution_sup_dxu(const wkam_solution* s) { return s ? s->solution.sup_Dxu : 0.0; }
int wkam_solution_iterations(const wkam_solution* s) { return s ? s->solution.iterations : 0; }
int wkam_solution_converged(const wkam_solution* s) { return s && s->solution.converged() ? 1 : 0; }

wkam_status wkam_solution_corrector(const wkam_solution* s, double* out, size_t len) {
  if (!s || !out) return null_arg("solution and out");
  if (len < s->solution.v.size()) {
    last_error = "output buffer too small";
    return WKAM_ERR_INVALID_ARGUMENT;
  }
  const auto v = s->solution.v.values();
  std::copy(v.begin(), v.end(), out);
  return WKAM_OK;
}

wkam_status wkam_solution_measure(const wkam_solution* s, double* Q, double* energy_mean, double* energy_var,
                                  double* closedness) {
  if (!s) return null_arg("solution");
  return guarded([&] {
    const wkam::MeasureStats ms = wkam::measure_stats(s->solution, s->problem);
    if (Q) std::copy(ms.Q.begin(), ms.Q.end(), Q);
    if (energy_mean) *energy_mean = ms.energy_mean;
    if (energy_var) *energy_var = ms.energy_var;
    if (closedness) *closedness = ms.closedness;
    return WKAM_OK;
  });
}

wkam_status wkam_oracle_hbar(const wkam_model* model, double P, double* out) {
  if (!model || !out) return null_arg("model and out");
  return guarded([&] {
    *out = wkam::effective_hamiltonian_1d(wkam::Potential1D::from_model(model->model), P);
    return WKAM_OK;
  });
}

int wkam_run(const wkam_run_request* request) {
  last_manifest.clear();
  if (!request || !request->command) {
    last_message = "request and command must not be NULL";
    return wkam::exit_validation;
  }
  wkam::CommandRequest r;
  r.command = request->command;
  if (request->config_path) r.config_path = request->config_path;
  if (request->out_dir) r.out_dir = request->out_dir;
  if (request->manifest_path) r.manifest_path = request->manifest_path;
  if (request->jobs > 0) r.jobs = request->jobs;
  if (request->has_seed) r.seed = request->seed;
  r.dump_sigma = request->dump_sigma != 0;
  const wkam::CommandResult res = wkam::run_command(r, request->quiet ? nullptr : &std::cout);
  last_message = res.message;
  last_manifest = res.manifest_path;
  return res.exit_code;
}

}  // extern "C"
