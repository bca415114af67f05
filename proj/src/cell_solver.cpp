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

#include "wkam/cell_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <string>

#include "parallel.hpp"
#include "poisson.hpp"
#include "wkam/error.hpp"

namespace wkam {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
// Largest accepted change of D_x u per step, relative to max(1, sup |D_x u|).
constexpr double kMomentumStep = 0.5;
// Gibbs weights narrower than this many grid cells trigger a warning.
constexpr double kResolutionLimit = 50.0;

/// Evaluates H_tau and its derivatives along P + D_x v at every node.
class NodeEvaluator {
 public:
  explicit NodeEvaluator(const CellProblem& problem)
      : grid_(problem.grid), model_(problem.effective_model()), P_(problem.P) {
    const std::size_t fs = grid_.fiber_size();
    const int n = grid_.n(), m = grid_.m();
    xs_.assign(fs * n, 0.0);
    for (std::size_t i = 0; i < fs; ++i)
      for (int a = 0; a < n; ++a) xs_[i * n + a] = grid_.x(i, a);
    phis_.assign(grid_.fiber_count() * m, 0.0);
    for (std::size_t f = 0; f < grid_.fiber_count(); ++f)
      grid_.fiber_phi(f, std::span<double>(phis_).subspan(f * m, m));
  }

  const TorusGrid& grid() const { return grid_; }

  void run(std::span<const double> v, bool with_hessian, NodeFields& out) const {
    const std::size_t N = grid_.size(), fs = grid_.fiber_size();
    const int n = grid_.n(), m = grid_.m();
    out.H.resize(N);
    out.momentum.resize(n);
    out.dx.resize(n);
    out.dy.resize(n);
    for (int a = 0; a < n; ++a) {
      out.momentum[a].resize(N);
      out.dx[a].resize(N);
      out.dy[a].resize(N);
      diff_axis(grid_, a, v, out.momentum[a]);
      for (double& p : out.momentum[a]) p += P_[a];
    }
    if (with_hessian) {
      out.dyy.resize(static_cast<std::size_t>(n) * n);
      for (auto& c : out.dyy) c.resize(N);
    } else {
      out.dyy.clear();
    }
    HamiltonianEval ev;
    double y[kMaxDim];
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t f = i / fs, local = i % fs;
      for (int a = 0; a < n; ++a) y[a] = out.momentum[a][i];
      model_.eval(std::span<const double>(xs_).subspan(local * n, n), std::span<const double>(y, n),
                  std::span<const double>(phis_).subspan(f * m, m), ev);
      if (!std::isfinite(ev.H)) fail(ErrorCode::non_finite, "cell solver: non-finite Hamiltonian value");
      out.H[i] = ev.H;
      for (int a = 0; a < n; ++a) {
        out.dx[a][i] = ev.dx[a];
        out.dy[a][i] = ev.dy[a];
      }
      if (with_hessian)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) out.dyy[a * n + b][i] = ev.hess(a, b);
    }
  }

 private:
  TorusGrid grid_;
  HamiltonianModel model_;
  std::vector<double> P_;
  std::vector<double> xs_;
  std::vector<double> phis_;
};

/// Everything the optimizers need at one iterate.
struct Iterate {
  std::vector<double> v;
  NodeFields fields;
  double value = 0.0;
  std::vector<double> sigma;
  std::vector<std::vector<double>> flux;
  std::vector<double> grad;
};

void compute_iterate(const NodeEvaluator& ev, double k, bool with_hessian, Iterate& it) {
  const TorusGrid& g = ev.grid();
  const std::size_t N = g.size();
  const int n = g.n();
  ev.run(it.v, with_hessian, it.fields);
  it.value = log_mean_exp(it.fields.H, k);
  it.sigma.resize(N);
  for (std::size_t i = 0; i < N; ++i) it.sigma[i] = std::exp(k * (it.fields.H[i] - it.value));
  it.flux.resize(n);
  it.grad.assign(N, 0.0);
  std::vector<double> tmp(N);
  for (int a = 0; a < n; ++a) {
    it.flux[a].resize(N);
    for (std::size_t i = 0; i < N; ++i) it.flux[a][i] = it.sigma[i] * it.fields.dy[a][i];
    diff_axis(g, a, it.flux[a], tmp);
    for (std::size_t i = 0; i < N; ++i) it.grad[i] -= tmp[i];
  }
}

void hessian_product(const TorusGrid& g, double k, const Iterate& it, std::span<const double> w,
                     std::vector<double>& out) {
  const std::size_t N = g.size();
  const int n = g.n();
  std::vector<std::vector<double>> s(n, std::vector<double>(N));
  for (int a = 0; a < n; ++a) diff_axis(g, a, w, s[a]);
  std::vector<double> dH(N, 0.0);
  for (int a = 0; a < n; ++a)
    for (std::size_t i = 0; i < N; ++i) dH[i] += it.fields.dy[a][i] * s[a][i];
  const double shift = inner(it.sigma, dH);
  out.assign(N, 0.0);
  std::vector<double> dflux(N), tmp(N);
  for (int a = 0; a < n; ++a) {
    for (std::size_t i = 0; i < N; ++i) {
      double curv = 0.0;
      for (int b = 0; b < n; ++b) curv += it.fields.dyy[a * n + b][i] * s[b][i];
      dflux[i] = it.sigma[i] * (k * (dH[i] - shift) * it.fields.dy[a][i] + curv);
    }
    diff_axis(g, a, dflux, tmp);
    for (std::size_t i = 0; i < N; ++i) out[i] -= tmp[i];
  }
}

void project_fibers(const TorusGrid& g, std::span<double> v) {
  const std::size_t fs = g.fiber_size();
  for (std::size_t f = 0; f < g.fiber_count(); ++f) {
    auto block = v.subspan(f * fs, fs);
    const double mu = mean(block);
    for (double& x : block) x -= mu;
  }
}

/// Gradients of the trig test fields, precomputed once per solve.
class TestFieldSet {
 public:
  TestFieldSet(const TorusGrid& g, int modes) {
    for (const auto& w : trig_test_fields(g, modes)) {
      std::vector<std::vector<double>> dw(g.n(), std::vector<double>(g.size()));
      for (int a = 0; a < g.n(); ++a) diff_axis(g, a, w.values(), dw[a]);
      grads_.push_back(std::move(dw));
    }
  }

  double residual(const std::vector<std::vector<double>>& flux) const {
    double worst = 0.0;
    for (const auto& dw : grads_) {
      double s = 0.0;
      for (std::size_t a = 0; a < dw.size(); ++a) s += inner(flux[a], dw[a]);
      worst = std::max(worst, std::abs(s));
    }
    return worst;
  }

 private:
  std::vector<std::vector<std::vector<double>>> grads_;
};

double norm(std::span<const double> a) { return std::sqrt(inner(a, a)); }

double max_momentum_change(const TorusGrid& g, std::span<const double> dir) {
  const std::size_t N = g.size();
  std::vector<double> sq(N, 0.0), d(N);
  for (int a = 0; a < g.n(); ++a) {
    diff_axis(g, a, dir, d);
    for (std::size_t i = 0; i < N; ++i) sq[i] += d[i] * d[i];
  }
  return std::sqrt(*std::max_element(sq.begin(), sq.end()));
}

double momentum_sup(const NodeFields& f) {
  double top = 0.0;
  for (std::size_t i = 0; i < f.H.size(); ++i) {
    double p2 = 0.0;
    for (const auto& c : f.momentum) p2 += c[i] * c[i];
    top = std::max(top, p2);
  }
  return std::sqrt(top);
}

void axpy(double t, std::span<const double> x, std::span<const double> y, std::vector<double>& out) {
  out.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + t * x[i];
}

/// Approximate inverse of the second variation: G^+ A^{-1} (G^+)^T, where
/// A = sigma (k D_yH D_yH^T + D_yyH) is the node-wise flux Jacobian. In one
/// space dimension the preconditioned operator is the identity plus a
/// low-rank term.
class NewtonPreconditioner {
 public:
  explicit NewtonPreconditioner(const TorusGrid& g) : grid_(g), poisson_(g) {}

  void refresh(double k, const Iterate& it) {
    const std::size_t N = grid_.size();
    const int n = grid_.n();
    const double top = *std::max_element(it.sigma.begin(), it.sigma.end());
    // Relative weight floor |g|^2, capped at 1e-6.
    const double g2 = inner(it.grad, it.grad);
    const double floor = std::clamp(g2, 1e-250, 1e-6);
    inv_.assign(static_cast<std::size_t>(n) * n, std::vector<double>(N));
    for (std::size_t i = 0; i < N; ++i) {
      const double w = std::max(it.sigma[i], floor * top);
      double a[2][2] = {};
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          a[p][q] = w * (k * it.fields.dy[p][i] * it.fields.dy[q][i] + it.fields.dyy[p * n + q][i]);
      if (n == 1) {
        inv_[0][i] = 1.0 / a[0][0];
      } else {
        const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        inv_[0][i] = a[1][1] / det;
        inv_[1][i] = -a[0][1] / det;
        inv_[2][i] = -a[1][0] / det;
        inv_[3][i] = a[0][0] / det;
      }
    }
  }

  void apply(std::span<const double> r, std::vector<double>& z) const {
    const std::size_t N = grid_.size();
    const int n = grid_.n();
    std::vector<double> s(r.begin(), r.end());
    poisson_.apply(s);
    std::vector<std::vector<double>> q(n, std::vector<double>(N));
    for (int a = 0; a < n; ++a) diff_axis(grid_, a, s, q[a]);
    z.assign(N, 0.0);
    std::vector<double> w(N), tmp(N);
    for (int a = 0; a < n; ++a) {
      for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b) acc += inv_[a * n + b][i] * q[b][i];
        w[i] = acc;
      }
      diff_axis(grid_, a, w, tmp);
      for (std::size_t i = 0; i < N; ++i) z[i] -= tmp[i];
    }
    poisson_.apply(z);
  }

 private:
  TorusGrid grid_;
  detail::PoissonInverse poisson_;
  std::vector<std::vector<double>> inv_;
};

/// Two-loop recursion with the Newton preconditioner as initial inverse
/// Hessian.
template <class Precond>
std::vector<double> lbfgs_direction(const std::deque<std::pair<std::vector<double>, std::vector<double>>>& mem,
                                    std::span<const double> grad, const Precond& initial) {
  std::vector<double> q(grad.begin(), grad.end());
  std::vector<double> alpha(mem.size()), rho(mem.size());
  for (std::size_t j = mem.size(); j-- > 0;) {
    const auto& [s, y] = mem[j];
    rho[j] = 1.0 / inner(y, s);
    alpha[j] = rho[j] * inner(s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[j] * y[i];
  }
  std::vector<double> r;
  initial.apply(q, r);
  for (std::size_t j = 0; j < mem.size(); ++j) {
    const auto& [s, y] = mem[j];
    const double beta = rho[j] * inner(y, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += s[i] * (alpha[j] - beta);
  }
  for (double& x : r) x = -x;
  return r;
}

/// Preconditioned CG on the Newton system H d = -g, truncated at relative
/// residual min(0.5, sqrt(|g|)).
std::vector<double> newton_direction(const TorusGrid& g, double k, const Iterate& it, double gnorm,
                                     int max_iter, NewtonPreconditioner& pre) {
  const std::size_t N = g.size();
  pre.refresh(k, it);
  std::vector<double> d(N, 0.0), r(N), z, p, Hp;
  for (std::size_t i = 0; i < N; ++i) r[i] = -it.grad[i];
  pre.apply(r, z);
  p = z;
  double rz = inner(r, z);
  const double eta = std::min(0.5, std::sqrt(gnorm));
  for (int j = 0; j < max_iter; ++j) {
    hessian_product(g, k, it, p, Hp);
    const double pHp = inner(p, Hp);
    if (!(pHp > 1e-300)) {
      if (j == 0) d = z;
      break;
    }
    const double a = rz / pHp;
    for (std::size_t i = 0; i < N; ++i) {
      d[i] += a * p[i];
      r[i] -= a * Hp[i];
    }
    if (norm(r) <= eta * gnorm) break;
    pre.apply(r, z);
    const double rz_new = inner(r, z);
    const double b = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + b * p[i];
  }
  return d;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_cap: return "iteration_cap";
    case SolveStatus::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

const char* to_string(Optimizer o) {
  return o == Optimizer::lbfgs ? "lbfgs" : "newton_krylov";
}

void CellProblem::validate() const {
  require(k > 0.0 && std::isfinite(k), "cell problem: k must be positive");
  require(tau >= 0.0 && tau <= 1.0, "cell problem: tau must be in [0, 1]");
  require(model.n() == grid.n(), "cell problem: model and grid disagree on n");
  require(model.m() == grid.m(), "cell problem: model and grid disagree on m");
  require(static_cast<int>(P.size()) == grid.n(), "cell problem: P needs n entries");
  for (double p : P) require(std::isfinite(p), "cell problem: P must be finite");
  if (model.tilted())
    fail(ErrorCode::unsupported, "cell problem: tilted model (alpha != 0) is simulator-only");
  if (!model.periodic_in_x())
    fail(ErrorCode::unsupported, "cell problem: model is not 2*pi periodic in x");
}

HamiltonianModel CellProblem::effective_model() const { return homotopy(model, tau); }

NodeFields evaluate_nodes(const CellProblem& problem, const ScalarField& v, bool with_hessian) {
  problem.validate();
  require(v.grid().same_shape(problem.grid), "evaluate_nodes: grid mismatch");
  NodeFields out;
  NodeEvaluator(problem).run(v.values(), with_hessian, out);
  return out;
}

ObjectiveValue objective(const CellProblem& problem, const ScalarField& v) {
  problem.validate();
  require(v.grid().same_shape(problem.grid), "objective: grid mismatch");
  NodeEvaluator ev(problem);
  Iterate it;
  it.v.assign(v.values().begin(), v.values().end());
  compute_iterate(ev, problem.k, false, it);
  return {it.value, ScalarField(problem.grid, std::move(it.grad))};
}

ScalarField hessian_apply(const CellProblem& problem, const ScalarField& v, const ScalarField& w) {
  problem.validate();
  require(v.grid().same_shape(problem.grid) && w.grid().same_shape(problem.grid),
          "hessian_apply: grid mismatch");
  NodeEvaluator ev(problem);
  Iterate it;
  it.v.assign(v.values().begin(), v.values().end());
  compute_iterate(ev, problem.k, true, it);
  std::vector<double> out;
  hessian_product(problem.grid, problem.k, it, w.values(), out);
  return ScalarField(problem.grid, std::move(out));
}

std::vector<ScalarField> trig_test_fields(const TorusGrid& grid, int modes) {
  const int top = std::min(modes, grid.nx() / 2 - 1);
  std::vector<ScalarField> out;
  // Angle factors: 1, then cos/sin(phi_l) for each angle axis.
  const int factors = 1 + 2 * grid.m();
  for (int a = 0; a < grid.n(); ++a) {
    for (int j = 1; j <= top; ++j) {
      for (int trig = 0; trig < 2; ++trig) {
        for (int fct = 0; fct < factors; ++fct) {
          out.push_back(ScalarField::sample(grid, [&](std::span<const double> x, std::span<const double> phi) {
            const double base = trig == 0 ? std::cos(j * x[a]) : std::sin(j * x[a]);
            if (fct == 0) return base;
            const int l = (fct - 1) / 2;
            return base * ((fct - 1) % 2 == 0 ? std::cos(phi[l]) : std::sin(phi[l]));
          }));
        }
      }
    }
  }
  return out;
}

double weak_el_residual(const CellProblem& problem, const ScalarField& v, int modes) {
  problem.validate();
  NodeEvaluator ev(problem);
  Iterate it;
  it.v.assign(v.values().begin(), v.values().end());
  compute_iterate(ev, problem.k, false, it);
  return TestFieldSet(problem.grid, modes).residual(it.flux);
}

void project_mean_zero(ScalarField& v) { project_fibers(v.grid(), v.values()); }

CellSolution solve_cell(const CellProblem& problem, const std::optional<ScalarField>& init,
                        const SolverOptions& opts) {
  problem.validate();
  require(opts.gtol > 0.0 && opts.rtol > 0.0, "solve_cell: tolerances must be positive");
  require(opts.max_iter >= 0, "solve_cell: iteration cap must be non-negative");
  const auto start = std::chrono::steady_clock::now();
  const TorusGrid& g = problem.grid;
  const double k = problem.k;
  const bool newton = opts.method == Optimizer::newton_krylov;

  NodeEvaluator ev(problem);
  TestFieldSet tests(g, opts.test_modes);

  Iterate cur;
  if (init) {
    require(init->grid().same_shape(g), "solve_cell: init lives on a different grid");
    require(init->all_finite(), "solve_cell: init has non-finite values");
    cur.v.assign(init->values().begin(), init->values().end());
  } else {
    cur.v.assign(g.size(), 0.0);
  }
  project_fibers(g, cur.v);
  compute_iterate(ev, k, true, cur);

  CellSolution sol{ScalarField(g)};
  sol.P = problem.P;
  sol.k = k;
  sol.tau = problem.tau;
  sol.value_trace.push_back(cur.value);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;
  NewtonPreconditioner pre(g);
  double gnorm = norm(cur.grad);
  double el = tests.residual(cur.flux);
  sol.status = SolveStatus::iteration_cap;
  int iter = 0;
  Iterate trial;
  for (;; ++iter) {
    if (gnorm <= opts.gtol && el <= opts.rtol) {
      sol.status = SolveStatus::converged;
      break;
    }
    if (iter >= opts.max_iter) break;

    std::vector<double> dir = newton ? newton_direction(g, k, cur, gnorm, opts.cg_max_iter, pre)
                                     : (pre.refresh(k, cur), lbfgs_direction(memory, cur.grad, pre));
    double slope = inner(cur.grad, dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir.assign(cur.grad.begin(), cur.grad.end());
      for (double& x : dir) x = -x;
      slope = -gnorm * gnorm;
    }
    project_fibers(g, dir);

    // The exponential weights make full quasi-Newton steps far too long
    // away from the optimum; cap the change in D_x u per step.
    double t = 1.0;
    const double jump = max_momentum_change(g, dir);
    const double cap = kMomentumStep * std::max(1.0, momentum_sup(cur.fields));
    if (jump > cap) t = cap / jump;
    bool accepted = false;
    double trial_gnorm = 0.0;
    for (int ls = 0; ls < kMaxBacktracks; ++ls) {
      axpy(t, dir, cur.v, trial.v);
      project_fibers(g, trial.v);
      compute_iterate(ev, k, true, trial);
      if (std::isfinite(trial.value)) {
        trial_gnorm = norm(trial.grad);
        const bool armijo = trial.value <= cur.value + kArmijo * t * slope;
        // Near the optimum F changes below its rounding level; accept steps
        // that hold F to within a few ulps while shrinking the gradient.
        const bool flat = trial.value <= cur.value + 8.0 * std::numeric_limits<double>::epsilon() *
                                                         std::abs(cur.value) &&
                          trial_gnorm < gnorm;
        if (armijo || flat) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      sol.status = SolveStatus::line_search_failure;
      break;
    }

    if (!newton) {
      std::vector<double> s(g.size()), y(g.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = trial.v[i] - cur.v[i];
        y[i] = trial.grad[i] - cur.grad[i];
      }
      if (inner(s, y) > 1e-14 * norm(s) * norm(y)) {
        memory.emplace_back(std::move(s), std::move(y));
        if (static_cast<int>(memory.size()) > opts.lbfgs_memory) memory.pop_front();
      }
    }
    std::swap(cur, trial);
    gnorm = trial_gnorm;
    el = tests.residual(cur.flux);
    sol.value_trace.push_back(cur.value);
  }

  sol.iterations = iter;
  sol.v = ScalarField(g, cur.v);
  sol.Hbar_k = cur.value;
  sol.grad_norm = gnorm;
  sol.el_residual = el;

  const std::size_t fs = g.fiber_size();
  sol.fiber_values.resize(g.fiber_count());
  for (std::size_t f = 0; f < g.fiber_count(); ++f)
    sol.fiber_values[f] = log_mean_exp(std::span<const double>(cur.fields.H).subspan(f * fs, fs), k);

  double max_force = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double p2 = 0.0, f2 = 0.0;
    for (int a = 0; a < g.n(); ++a) {
      p2 += cur.fields.momentum[a][i] * cur.fields.momentum[a][i];
      f2 += cur.fields.dx[a][i] * cur.fields.dx[a][i];
    }
    sol.sup_Dxu = std::max(sol.sup_Dxu, std::sqrt(p2));
    max_force = std::max(max_force, std::sqrt(f2));
  }
  sol.resolution_warning = k * g.hx() * max_force > kResolutionLimit;

  std::ostringstream msg;
  msg << to_string(sol.status) << " after " << iter << " iterations (" << to_string(opts.method)
      << "), grad_norm=" << gnorm << ", el_residual=" << el;
  if (sol.resolution_warning) msg << "; warning: Gibbs weight below grid resolution";
  sol.message = msg.str();
  sol.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

namespace {

// A stalled stage is retried once from the same warm start with the other optimizer.
CellSolution solve_stage(const CellProblem& prob, const std::optional<ScalarField>& warm,
                         const SolverOptions& opts) {
  CellSolution sol = solve_cell(prob, warm, opts);
  if (sol.converged()) return sol;
  SolverOptions alt = opts;
  alt.method = opts.method == Optimizer::lbfgs ? Optimizer::newton_krylov : Optimizer::lbfgs;
  CellSolution retry = solve_cell(prob, warm, alt);
  if (!retry.converged()) return sol;
  retry.iterations += sol.iterations;
  retry.message += std::string(" (retried after ") + to_string(opts.method) + " " + to_string(sol.status) + ")";
  return retry;
}

}  // namespace

ContinuationResult continuation_solve(const HamiltonianModel& model, const std::vector<double>& P,
                                      const std::vector<double>& k_schedule, int tau_steps,
                                      const TorusGrid& grid, const SolverOptions& opts) {
  require(!k_schedule.empty(), "continuation_solve: empty k schedule");
  for (std::size_t i = 0; i < k_schedule.size(); ++i) {
    require(k_schedule[i] > 0.0, "continuation_solve: k values must be positive");
    if (i > 0) require(k_schedule[i] > k_schedule[i - 1], "continuation_solve: k_schedule must be strictly increasing");
  }
  require(tau_steps >= 1, "continuation_solve: tau_steps must be >= 1");

  ContinuationResult out;
  // tau = 0 is the integrable endpoint, where v = 0 is exact.
  std::optional<ScalarField> warm = ScalarField(grid);
  for (int j = 1; j <= tau_steps; ++j) {
    const double tau = j == tau_steps ? 1.0 : static_cast<double>(j) / tau_steps;
    CellProblem prob{model, P, k_schedule.front(), grid, tau};
    CellSolution sol = solve_stage(prob, warm, opts);
    const bool ok = sol.converged();
    warm = sol.v;
    out.homotopy.push_back(std::move(sol));
    if (!ok) {
      out.ok = false;
      out.failed_tau = tau;
      out.failed_k = k_schedule.front();
      return out;
    }
  }
  out.solutions.push_back(out.homotopy.back());
  for (std::size_t i = 1; i < k_schedule.size(); ++i) {
    CellProblem prob{model, P, k_schedule[i], grid, 1.0};
    CellSolution sol = solve_stage(prob, warm, opts);
    if (!sol.converged()) {
      out.ok = false;
      out.failed_tau = 1.0;
      out.failed_k = k_schedule[i];
      return out;
    }
    warm = sol.v;
    out.solutions.push_back(std::move(sol));
  }
  return out;
}

CellSolution fiber_decomposed_solve(const CellProblem& problem, const SolverOptions& opts, int jobs,
                                    const std::vector<double>& k_ladder, int tau_steps) {
  problem.validate();
  require(problem.grid.m() >= 1, "fiber_decomposed_solve: needs at least one angle axis");
  const auto start = std::chrono::steady_clock::now();
  const TorusGrid& g = problem.grid;
  const TorusGrid sub = g.spatial_only();
  const HamiltonianModel mixed = problem.effective_model();
  const std::size_t fc = g.fiber_count(), fs = g.fiber_size();

  std::vector<double> schedule;
  for (double k : k_ladder)
    if (k > 0.0 && k < problem.k && (schedule.empty() || k > schedule.back())) schedule.push_back(k);
  schedule.push_back(problem.k);

  std::vector<CellSolution> fibers(fc, CellSolution{ScalarField(sub)});
  detail::parallel_for(fc, jobs, [&](std::size_t f) {
    std::vector<double> phi(g.m());
    g.fiber_phi(f, phi);
    const HamiltonianModel fm = restrict_to_fiber(mixed, phi);
    if (schedule.size() == 1 && tau_steps <= 1) {
      fibers[f] = solve_cell(CellProblem{fm, problem.P, problem.k, sub, 1.0}, std::nullopt, opts);
      return;
    }
    ContinuationResult cr = continuation_solve(fm, problem.P, schedule, std::max(1, tau_steps), sub, opts);
    if (cr.ok) {
      fibers[f] = std::move(cr.solutions.back());
    } else {
      fibers[f] = cr.solutions.empty() ? std::move(cr.homotopy.back()) : std::move(cr.solutions.back());
      if (fibers[f].converged()) fibers[f].status = SolveStatus::iteration_cap;
    }
  });

  std::vector<double> v(g.size());
  CellSolution sol{ScalarField(g)};
  sol.status = SolveStatus::converged;
  for (std::size_t f = 0; f < fc; ++f) {
    std::copy(fibers[f].v.values().begin(), fibers[f].v.values().end(), v.begin() + f * fs);
    sol.iterations = std::max(sol.iterations, fibers[f].iterations);
    if (!fibers[f].converged() && sol.converged()) sol.status = fibers[f].status;
    sol.resolution_warning = sol.resolution_warning || fibers[f].resolution_warning;
  }

  // Joint quantities are re-evaluated on the assembled corrector.
  NodeEvaluator ev(problem);
  Iterate it;
  it.v = std::move(v);
  compute_iterate(ev, problem.k, false, it);
  sol.v = ScalarField(g, it.v);
  sol.Hbar_k = it.value;
  sol.grad_norm = norm(it.grad);
  sol.el_residual = TestFieldSet(g, opts.test_modes).residual(it.flux);
  sol.fiber_values.resize(fc);
  for (std::size_t f = 0; f < fc; ++f) {
    sol.fiber_values[f] = log_mean_exp(std::span<const double>(it.fields.H).subspan(f * fs, fs), problem.k);
    sol.sup_Dxu = std::max(sol.sup_Dxu, fibers[f].sup_Dxu);
  }
  sol.P = problem.P;
  sol.k = problem.k;
  sol.tau = problem.tau;
  sol.value_trace = {sol.Hbar_k};
  std::ostringstream msg;
  msg << "fiber decomposition over " << fc << " fibers: " << to_string(sol.status);
  sol.message = msg.str();
  sol.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

ScalarField aronsson_residual(const CellSolution& solution, const CellProblem& problem) {
  const TorusGrid& g = problem.grid;
  const NodeFields nf = evaluate_nodes(problem, solution.v);
  const int n = g.n();
  const std::size_t N = g.size();
  std::vector<std::vector<double>> dv(n, std::vector<double>(N));
  for (int a = 0; a < n; ++a) diff_axis(g, a, solution.v.values(), dv[a]);
  ScalarField out(g);
  std::vector<double> second(N);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      diff_axis(g, b, dv[a], second);
      for (std::size_t i = 0; i < N; ++i) out[i] += nf.dy[a][i] * nf.dy[b][i] * second[i];
    }
    for (std::size_t i = 0; i < N; ++i) out[i] += nf.dx[a][i] * nf.dy[a][i];
  }
  return out;
}

}  // namespace wkam
