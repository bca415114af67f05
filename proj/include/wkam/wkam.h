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

#ifndef WKAM_WKAM_H
#define WKAM_WKAM_H

#include <stddef.h>

#if defined(_WIN32)
#define WKAM_API __declspec(dllexport)
#else
#define WKAM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible call. */
typedef enum wkam_status {
  WKAM_OK = 0,
  WKAM_ERR_INVALID_ARGUMENT = 1,
  WKAM_ERR_NON_FINITE = 2,
  WKAM_ERR_NOT_CONVERGED = 3,
  WKAM_ERR_IO = 4,
  WKAM_ERR_PARSE = 5,
  WKAM_ERR_UNSUPPORTED = 6,
  WKAM_ERR_INTERNAL = 99
} wkam_status;

typedef struct wkam_model wkam_model;
typedef struct wkam_grid wkam_grid;
typedef struct wkam_solution wkam_solution;

WKAM_API const char* wkam_version(void);

/* Message of the last failed call on this thread ("" if none). */
WKAM_API const char* wkam_last_error(void);

/* ---- models ---- */
WKAM_API wkam_status wkam_model_integrable(int n, int m, wkam_model** out);
WKAM_API wkam_status wkam_model_pendulum(double amplitude, wkam_model** out);
/* Model described by a run configuration file. */
WKAM_API wkam_status wkam_model_from_config(const char* path, wkam_model** out);
WKAM_API void wkam_model_free(wkam_model* model);
WKAM_API int wkam_model_dim(const wkam_model* model);
WKAM_API int wkam_model_angle_dim(const wkam_model* model);
/* dx and dy receive n values, dyy n*n row-major; any output may be NULL. */
WKAM_API wkam_status wkam_model_eval(const wkam_model* model, const double* x, const double* y,
                                     const double* phi, double* H, double* dx, double* dy, double* dyy);

/* ---- grids ---- */
/* central != 0 selects second-order differences instead of spectral ones. */
WKAM_API wkam_status wkam_grid_create(int n, int m, int nx, int nphi, int central, wkam_grid** out);
WKAM_API void wkam_grid_free(wkam_grid* grid);
WKAM_API size_t wkam_grid_size(const wkam_grid* grid);

/* ---- cell problem ---- */
typedef struct wkam_solver_options {
  double gtol;
  double rtol;
  int max_iter;
  /* 0: limited-memory quasi-Newton, 1: Newton-Krylov. */
  int newton;
} wkam_solver_options;

WKAM_API void wkam_solver_options_default(wkam_solver_options* opts);

/* Single solve at tau = 1 from a zero corrector. opts may be NULL. On
   WKAM_ERR_NOT_CONVERGED *out still holds the diagnostic state. */
WKAM_API wkam_status wkam_solve_cell(const wkam_model* model, const wkam_grid* grid, const double* P,
                                     double k, const wkam_solver_options* opts, wkam_solution** out);

/* Homotopy plus k continuation; *out receives the solution at the last
   completed k. */
WKAM_API wkam_status wkam_solve_continuation(const wkam_model* model, const wkam_grid* grid,
                                             const double* P, const double* k_schedule, size_t count,
                                             int tau_steps, const wkam_solver_options* opts,
                                             wkam_solution** out);
WKAM_API void wkam_solution_free(wkam_solution* solution);
WKAM_API double wkam_solution_hbar(const wkam_solution* solution);
WKAM_API double wkam_solution_k(const wkam_solution* solution);
WKAM_API double wkam_solution_grad_norm(const wkam_solution* solution);
WKAM_API double wkam_solution_el_residual(const wkam_solution* solution);
WKAM_API double wkam_solution_sup_dxu(const wkam_solution* solution);
WKAM_API int wkam_solution_iterations(const wkam_solution* solution);
WKAM_API int wkam_solution_converged(const wkam_solution* solution);
/* Copies the corrector (wkam_grid_size values). */
WKAM_API wkam_status wkam_solution_corrector(const wkam_solution* solution, double* out, size_t len);
/* Rotation vector and energy statistics of the Gibbs measure; Q has n entries. */
WKAM_API wkam_status wkam_solution_measure(const wkam_solution* solution, double* Q, double* energy_mean,
                                           double* energy_var, double* closedness);

/* ---- one-dimensional oracle ---- */
WKAM_API wkam_status wkam_oracle_hbar(const wkam_model* model, double P, double* out);

/* ---- subcommands ---- */
typedef struct wkam_run_request {
  const char* command;       /* cell | sweep | oracle | simulate | verify | report */
  const char* config_path;   /* NULL: defaults */
  const char* out_dir;       /* NULL: environment, then config */
  const char* manifest_path; /* report only */
  int jobs;                  /* <= 0: configured value */
  int has_seed;
  unsigned long long seed;
  int dump_sigma;
  int quiet; /* nonzero suppresses progress lines on stdout */
} wkam_run_request;

/* Returns the process exit code: 0 ok, 1 validation error, 2 solver
   non-convergence, 3 verification failure. The summary line is available
   from wkam_last_message(). */
WKAM_API int wkam_run(const wkam_run_request* request);
WKAM_API const char* wkam_last_message(void);
/* Manifest written by the last wkam_run on this thread ("" if none). */
WKAM_API const char* wkam_last_manifest(void);

#ifdef __cplusplus
}
#endif

#endif /* WKAM_WKAM_H */
