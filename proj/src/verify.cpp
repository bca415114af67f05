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

#include "wkam/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "pipeline.hpp"
#include "wkam/error.hpp"
#include "wkam/mather_measures.hpp"
#include "wkam/oracle_1d.hpp"
#include "wkam/swing_sim.hpp"

namespace wkam {

namespace {

using Rng = std::mt19937_64;

class Report {
 public:
  explicit Report(std::vector<CheckResult>& out) : out_(out) {}

  // Passes when value <= threshold.
  void at_most(const std::string& module, const std::string& name, const std::string& anchor, double value,
               double threshold, std::string detail = {}) {
    out_.push_back({module, name, anchor, value, threshold, value <= threshold, std::move(detail)});
  }
  void at_least(const std::string& module, const std::string& name, const std::string& anchor, double value,
                double threshold, std::string detail = {}) {
    out_.push_back({module, name, anchor, value, threshold, value >= threshold, std::move(detail)});
  }
  void holds(const std::string& module, const std::string& name, const std::string& anchor, bool ok,
             std::string detail = {}) {
    out_.push_back({module, name, anchor, ok ? 1.0 : 0.0, 1.0, ok, std::move(detail)});
  }

 private:
  std::vector<CheckResult>& out_;
};

ScalarField random_field(const TorusGrid& g, Rng& rng, double amplitude, int modes = 6) {
  const int jmax = std::min(6, g.nx() / 2 - 1);
  std::uniform_int_distribution<int> jx(-jmax, jmax), jp(-2, 2);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ph(0.0, kTwoPi);
  struct Mode {
    std::vector<int> jx, jp;
    double a, phase;
  };
  std::vector<Mode> ms;
  for (int r = 0; r < modes; ++r) {
    Mode md;
    for (int a = 0; a < g.n(); ++a) md.jx.push_back(jx(rng));
    for (int a = 0; a < g.m(); ++a) md.jp.push_back(jp(rng));
    md.a = amplitude * u(rng);
    md.phase = ph(rng);
    ms.push_back(std::move(md));
  }
  return ScalarField::sample(g, [&](std::span<const double> x, std::span<const double> phi) {
    double s = 0.0;
    for (const auto& md : ms) {
      double arg = md.phase;
      for (std::size_t a = 0; a < x.size(); ++a) arg += md.jx[a] * x[a];
      for (std::size_t a = 0; a < phi.size(); ++a) arg += md.jp[a] * phi[a];
      s += md.a * std::cos(arg);
    }
    return s;
  });
}

std::string describe(const std::vector<double>& P) {
  std::ostringstream o;
  o << "P=(";
  for (std::size_t i = 0; i < P.size(); ++i) o << (i ? "," : "") << P[i];
  o << ")";
  return o.str();
}

void torus_suite(const TorusGrid& g, Rng& rng, Report& rep) {
  const std::string mod = "torus-field";
  double adj = 0.0, const_grad = 0.0, grad_int = 0.0, mono = 0.0, jensen = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const ScalarField f = random_field(g, rng, 1.0);
    VectorField F(g);
    for (int a = 0; a < g.n(); ++a) {
      const ScalarField c = random_field(g, rng, 1.0);
      std::copy(c.values().begin(), c.values().end(), F.component(a).begin());
    }
    const VectorField gf = gradient_x(f);
    const double lhs = inner(gf, F);
    const double rhs = -inner(f, divergence_x(F));
    // Relative to the Cauchy-Schwarz scale, so near-orthogonal pairs do not
    // inflate the error.
    const double scale = std::sqrt(inner(gf, gf) * inner(F, F));
    adj = std::max(adj, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), scale, 1e-300}));

    for (int a = 0; a < g.n(); ++a) grad_int = std::max(grad_int, std::abs(mean(gf.component(a))));

    double prev = -std::numeric_limits<double>::infinity();
    for (double k : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0}) {
      const double v = log_mean_exp(f, k);
      mono = std::max(mono, prev - v);
      jensen = std::max(jensen, integrate(f) - v);
      prev = v;
    }
  }
  const ScalarField c(g, std::vector<double>(g.size(), 0.7316));
  const VectorField gc = gradient_x(c);
  for (int a = 0; a < g.n(); ++a)
    for (double v : gc.component(a)) const_grad = std::max(const_grad, std::abs(v));

  rep.at_most(mod, "gradient/divergence adjointness", "<grad f, F> = -<f, div F> on the torus", adj, 1e-12);
  rep.at_most(mod, "gradient of a constant", "D_x c = 0", const_grad, 0.0);
  rep.at_most(mod, "mean of a gradient", "integral of D_x f vanishes", grad_int, 1e-13);
  rep.at_most(mod, "log-mean-exp monotone in k", "(1/k) log mean exp(k f) nondecreasing in k", mono, 1e-13);
  rep.at_most(mod, "log-mean-exp Jensen bound", "(1/k) log mean exp(k f) >= mean f", jensen, 1e-13);
}

void hamiltonian_suite(const HamiltonianModel& model, Rng& rng, Report& rep) {
  const std::string mod = "hamiltonians";
  const std::string tag = " [" + model.name() + "]";
  const int n = model.n(), m = model.m();
  std::uniform_real_distribution<double> ux(0.0, kTwoPi), uy(-3.0, 3.0);
  std::vector<double> x(n), y(n), phi(m), y2(n), ym(n), beta(n);
  double deriv = 0.0, eig = std::numeric_limits<double>::infinity(), sym = 0.0, convex = -1.0;
  double fenchel_ineq = -1.0, fenchel_eq = 0.0;
  const double h = 1e-5;
  const auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(1.0, std::abs(an)); };
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& v : x) v = ux(rng);
    for (auto& v : y) v = uy(rng);
    for (auto& v : phi) v = ux(rng);
    const HamiltonianEval e = model.eval(x, y, phi);
    for (int i = 0; i < n; ++i) {
      auto xp = x, xm = x, yp = y, yq = y;
      xp[i] += h;
      xm[i] -= h;
      yp[i] += h;
      yq[i] -= h;
      deriv = std::max(deriv, rel((model.energy(xp, y, phi) - model.energy(xm, y, phi)) / (2 * h), e.dx[i]));
      deriv = std::max(deriv, rel((model.energy(x, yp, phi) - model.energy(x, yq, phi)) / (2 * h), e.dy[i]));
      const HamiltonianEval ep = model.eval(x, yp, phi), em = model.eval(x, yq, phi);
      for (int j = 0; j < n; ++j) deriv = std::max(deriv, rel((ep.dy[j] - em.dy[j]) / (2 * h), e.hess(j, i)));
    }
    // Smallest eigenvalue of the 1x1 or 2x2 symmetric block.
    if (n == 1) {
      eig = std::min(eig, e.hess(0, 0));
    } else {
      const double a = e.hess(0, 0), d = e.hess(1, 1), b = 0.5 * (e.hess(0, 1) + e.hess(1, 0));
      eig = std::min(eig, 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b));
      sym = std::max(sym, std::abs(e.hess(0, 1) - e.hess(1, 0)));
    }
    for (auto& v : y2) v = uy(rng);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
      ym[i] = 0.5 * (y[i] + y2[i]);
      d2 += (y[i] - y2[i]) * (y[i] - y2[i]);
    }
    convex = std::max(convex, model.energy(x, ym, phi) -
                                  (0.5 * model.energy(x, y, phi) + 0.5 * model.energy(x, y2, phi) - model.gamma() / 8.0 * d2));
    // Fenchel-Young at a random velocity and at the matched one.
    for (auto& v : beta) v = uy(rng);
    double by = 0.0;
    for (int i = 0; i < n; ++i) by += beta[i] * y[i];
    fenchel_ineq = std::max(fenchel_ineq, by - lagrangian(model, x, beta, phi) - e.H);
    std::vector<double> vel(e.dy.begin(), e.dy.begin() + n);
    double vy = 0.0;
    for (int i = 0; i < n; ++i) vy += vel[i] * y[i];
    fenchel_eq = std::max(fenchel_eq, std::abs(lagrangian(model, x, vel, phi) + e.H - vy));
  }
  rep.at_most(mod, "derivative consistency" + tag, "analytic D_x H, D_y H, D_yy H match central differences", deriv, 1e-6);
  rep.at_least(mod, "uniform convexity" + tag, "smallest eigenvalue of D_yy H >= gamma", eig, model.gamma() - 1e-12);
  if (n > 1) rep.at_most(mod, "Hessian symmetry" + tag, "D_yy H symmetric", sym, 1e-14);
  rep.at_most(mod, "midpoint convexity" + tag, "H(x,(y1+y2)/2) <= (H(y1)+H(y2))/2 - gamma/8 |y1-y2|^2", convex, 1e-12);
  rep.at_most(mod, "Fenchel-Young inequality" + tag, "beta.y <= L(x,beta) + H(x,y)", fenchel_ineq, 1e-10);
  rep.at_most(mod, "Fenchel-Young equality" + tag, "equality at beta = D_y H(x,y)", fenchel_eq, 1e-8);

  if (model.periodic_in_x()) {
    double per = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      for (auto& v : x) v = ux(rng);
      for (auto& v : y) v = uy(rng);
      for (auto& v : phi) v = ux(rng);
      const double base = model.energy(x, y, phi);
      for (int i = 0; i < n; ++i) {
        auto xs = x;
        xs[i] += kTwoPi;
        per = std::max(per, std::abs(model.energy(xs, y, phi) - base) / std::max(1.0, std::abs(base)));
      }
      for (int l = 0; l < m; ++l) {
        auto ps = phi;
        ps[l] += kTwoPi;
        per = std::max(per, std::abs(model.energy(x, y, ps) - base) / std::max(1.0, std::abs(base)));
      }
    }
    rep.at_most(mod, "periodicity" + tag, "H(x + 2 pi e_i, y, phi) = H(x, y, phi + 2 pi e_l) = H(x, y, phi)", per, 1e-13);
  }
}

void solver_suite(const RunConfig& cfg, const HamiltonianModel& model, const TorusGrid& grid,
                  const std::vector<detail::MomentumRun>& runs, Rng& rng, Report& rep) {
  const std::string mod = "cell-solver";
  // Gradient against central differences at a random smooth corrector.
  {
    const auto& P = runs.front().P;
    CellProblem prob{model, P, cfg.k_schedule.front(), grid, 1.0};
    ScalarField v = random_field(grid, rng, 0.3);
    project_mean_zero(v);
    const ObjectiveValue ov = objective(prob, v);
    double worst = 0.0;
    const double eps = 1e-5;
    for (int d = 0; d < 20; ++d) {
      ScalarField w = random_field(grid, rng, 1.0);
      project_mean_zero(w);
      ScalarField vp = v, vm = v;
      for (std::size_t i = 0; i < v.size(); ++i) {
        vp[i] += eps * w[i];
        vm[i] -= eps * w[i];
      }
      const double fd = (objective(prob, vp).value - objective(prob, vm).value) / (2 * eps);
      const double an = inner(ov.gradient, w);
      const double scale = std::sqrt(inner(ov.gradient, ov.gradient) * inner(w, w));
      worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(an), std::abs(fd), 1e-6 * scale, 1e-300}));
    }
    rep.at_most(mod, "gradient check", "first variation equals -div(sigma D_y H), 20 random directions", worst, 1e-5);
  }

  for (const auto& run : runs) {
    const std::string tag = " " + describe(run.P);
    rep.holds(mod, "continuation converged" + tag, "homotopy in tau then warm starts in k reach every stage",
              run.cont.ok && !run.failed, run.error);
    if (run.cont.solutions.empty()) continue;
    double el = 0.0, meanv = 0.0, mono = 0.0, descent = 0.0, infmax = 0.0;
    for (std::size_t i = 0; i < run.cont.solutions.size(); ++i) {
      const CellSolution& s = run.cont.solutions[i];
      el = std::max(el, s.el_residual);
      meanv = std::max(meanv, std::abs(integrate(s.v)));
      if (i > 0) mono = std::max(mono, run.cont.solutions[i - 1].Hbar_k - s.Hbar_k);
      CellProblem prob{model, run.P, s.k, grid, 1.0};
      // inf-max: Hbar_k below the max of H for any candidate corrector.
      std::vector<ScalarField> candidates{s.v, ScalarField(grid)};
      for (int r = 0; r < 3; ++r) {
        ScalarField c = random_field(grid, rng, 0.5);
        project_mean_zero(c);
        candidates.push_back(std::move(c));
      }
      for (const auto& c : candidates) {
        const NodeFields f = evaluate_nodes(prob, c);
        infmax = std::max(infmax, s.Hbar_k - *std::max_element(f.H.begin(), f.H.end()));
      }
    }
    for (const auto* list : {&run.cont.homotopy, &run.cont.solutions})
      for (const auto& s : *list)
        for (std::size_t t = 1; t < s.value_trace.size(); ++t) {
          const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(s.value_trace[t - 1]);
          descent = std::max(descent, s.value_trace[t] - s.value_trace[t - 1] - slack);
        }
    rep.at_most(mod, "stationarity" + tag, "weak Euler-Lagrange residual over trig test fields", el, kClosednessThreshold);
    rep.at_most(mod, "monotone in k" + tag, "Hbar_k nondecreasing along the k schedule", mono, 1e-8);
    rep.at_most(mod, "inf-max upper bound" + tag, "Hbar_k <= max_x H(x, P + D_x w) for every candidate w", infmax, 0.0);
    rep.at_most(mod, "descent" + tag, "objective never increases across accepted iterates", descent, 0.0);
    rep.at_most(mod, "mean zero" + tag, "integral of the corrector vanishes", meanv, 1e-12);

    if (const auto pot = detail::oracle_potential(model)) {
      const double Hbar = std::max(effective_hamiltonian_1d(*pot, run.P[0]), pot->v_max());
      const double bound = 2.0 * std::sqrt(2.0 * (Hbar - pot->v_min()));
      double sup = 0.0;
      for (const auto& s : run.cont.solutions) sup = std::max(sup, s.sup_Dxu);
      rep.at_most(mod, "gradient bound" + tag, "sup |P + D_x v| bounded independently of k", sup, bound);
    }
    if (run.fiber) {
      const double diff = std::abs(run.fiber->Hbar_k - run.cont.solutions.back().Hbar_k);
      rep.at_most(mod, "fiber decomposition" + tag, "per-fiber minimization equals the joint minimization", diff, 1e-8);
    }
  }
}

void measure_suite(const RunConfig& cfg, const HamiltonianModel& model, const TorusGrid& grid,
                   const std::vector<detail::MomentumRun>& runs, Report& rep) {
  const std::string mod = "mather-measures";
  const auto table = detail::final_k_table(runs);
  for (const auto& run : runs) {
    if (run.cont.solutions.empty()) continue;
    const std::string tag = " " + describe(run.P);
    double norm_err = 0.0, renorm = 0.0, ident = 0.0, closed = 0.0, emax = -1e300, emean_lo = -1e300,
           emean_hi = -1e300, qbound = -1e300, ranges = 0.0, gap = -1e300;
    for (const auto& s : run.cont.solutions) {
      CellProblem prob{model, run.P, s.k, grid, 1.0};
      const GibbsMeasure mu = gibbs_measure(s, prob);
      norm_err = std::max(norm_err, std::abs(integrate(mu.sigma) - 1.0));
      renorm = std::max(renorm, std::abs(mu.renormalization - 1.0));
      ident = std::max(ident, mu.identity_error);
      closed = std::max(closed, closedness_residual(mu, s, prob, cfg.test_modes));
      const EnergyStatistics es = energy_statistics(mu, s, prob);
      const double lk = std::log(s.k) / s.k;
      emax = std::max(emax, (es.max - s.Hbar_k) / lk);
      emean_lo = std::max(emean_lo, s.Hbar_k - es.mean);
      emean_hi = std::max(emean_hi, (es.mean - s.Hbar_k) / lk);
      const NodeFields f = evaluate_nodes(prob, s.v);
      double vmax = 0.0;
      for (std::size_t i = 0; i < f.H.size(); ++i) {
        double sp = 0.0;
        for (const auto& c : f.dy) sp += c[i] * c[i];
        vmax = std::max(vmax, std::sqrt(sp));
      }
      const auto Q = rotation_vector(mu, s, prob);
      double qn = 0.0;
      for (double q : Q) qn += q * q;
      qbound = std::max(qbound, std::isfinite(qn) ? std::sqrt(qn) - vmax : 1e300);
      const MeasureStats ms = measure_stats(s, prob, cfg.test_modes, cfg.tail_speed,
                                            table.size() >= 3 && s.k == cfg.k_schedule.back()
                                                ? std::span<const HbarSample>(table)
                                                : std::span<const HbarSample>());
      if (ms.energy_var < 0.0 || ms.tail_mass < 0.0 || ms.tail_mass > 1.0) ranges = 1.0;
      if (ms.duality_gap) gap = std::max(gap, -*ms.duality_gap);
    }
    rep.at_most(mod, "normalization" + tag, "integral of sigma equals 1", norm_err, 1e-10);
    rep.at_most(mod, "renormalization factor" + tag, "raw Gibbs density already integrates to 1", renorm, 1e-8);
    rep.at_most(mod, "definitional identity" + tag, "log sigma = k (H - Hbar_k) nodewise", ident, 1e-10);
    rep.at_most(mod, "closedness" + tag, "integral of D_y H . D_x w dsigma vanishes for trig test fields", closed,
                kClosednessThreshold);
    rep.at_most(mod, "energy max bound" + tag, "(max H - Hbar_k) k / log k <= frozen constant", emax, kEnergyMaxConstant);
    rep.at_most(mod, "energy mean lower bound" + tag, "mean_sigma H >= Hbar_k", emean_lo, 1e-10);
    rep.at_most(mod, "energy mean envelope" + tag, "(mean_sigma H - Hbar_k) k / log k <= frozen constant", emean_hi,
                kEnergyMeanConstant);
    rep.at_most(mod, "rotation vector bounded" + tag, "|Q| <= max grid speed", qbound, 1e-12);
    rep.at_most(mod, "statistic ranges" + tag, "variance >= 0 and tail mass in [0, 1]", ranges, 0.0);
    if (gap > -1e300) rep.at_most(mod, "duality gap sign" + tag, "Lbar(Q) + Hbar_k(P) - P.Q >= 0", gap, 1e-8);
    if (run.cont.solutions.size() >= 2) {
      const auto var_at = [&](const CellSolution& s) {
        CellProblem prob{model, run.P, s.k, grid, 1.0};
        const GibbsMeasure mu = gibbs_measure(s, prob);
        return energy_statistics(mu, s, prob).variance;
      };
      const double first = var_at(run.cont.solutions.front()), last = var_at(run.cont.solutions.back());
      rep.at_most(mod, "concentration" + tag, "energy variance at the largest k <= at the smallest k", last - first, 0.0);
    }
  }
}

void oracle_suite(const HamiltonianModel& model, Report& rep) {
  const std::string mod = "oracle-1d";
  std::vector<std::pair<std::string, Potential1D>> pots;
  pots.emplace_back("pendulum a=1", Potential1D::from_model(make_pendulum(1.0)));
  if (auto p = detail::oracle_potential(model); p && model.name() != "pendulum")
    pots.emplace_back(model.name(), *p);
  for (const auto& [name, pot] : pots) {
    const std::string tag = " [" + name + "]";
    std::vector<double> H(61);
    double even = 0.0;
    for (int i = 0; i < 61; ++i) {
      const double P = -3.0 + 0.1 * i;
      H[i] = effective_hamiltonian_1d(pot, P);
      even = std::max(even, std::abs(H[i] - effective_hamiltonian_1d(pot, -P)));
    }
    double convex = 0.0;
    for (int i = 1; i < 60; ++i) convex = std::max(convex, H[i] - 0.5 * (H[i - 1] + H[i + 1]));
    const double Ps = critical_momentum(pot);
    double flat = 0.0;
    for (int i = 0; i <= 10; ++i) flat = std::max(flat, std::abs(effective_hamiltonian_1d(pot, -Ps + 0.2 * Ps * i) - pot.v_max()));
    rep.at_most(mod, "evenness" + tag, "Hbar(P) = Hbar(-P)", even, 1e-12);
    rep.at_most(mod, "midpoint convexity" + tag, "Hbar convex on 61 points in [-3, 3]", convex, 1e-9);
    rep.at_most(mod, "flat piece" + tag, "Hbar = max V on [-P*, P*]", flat, 0.0);
    if (name == "pendulum a=1") {
      rep.at_least(mod, "superlinear growth" + tag, "Hbar(3) - Hbar(2) >= 1", H[60] - H[50], 1.0);
      rep.at_most(mod, "closed-form critical momentum" + tag, "P* = 4/pi for V = 1 - cos x", std::abs(Ps - 4.0 / M_PI), 1e-10);
    }
  }
}

void swing_suite(Report& rep) {
  const std::string mod = "swing-sim";
  const SwingParams pend = pendulum_as_swing(1.0);
  const double x0[1] = {0.0}, y0[1] = {1.0};
  const auto max_dev = [](const SwingTrajectory& t) {
    double e = 0.0;
    for (double v : t.energy) e = std::max(e, std::abs(v - t.energy.front()));
    return e;
  };
  std::vector<double> errs;
  for (double dt : {0.04, 0.02, 0.01}) errs.push_back(max_dev(integrate_swing(pend, x0, y0, 10.0, dt)));
  const double ratio = std::min(errs[0] / errs[1], errs[1] / errs[2]);
  rep.at_least(mod, "second-order energy error", "energy error shrinks >= 3.5x per dt halving", ratio, 3.5);

  const SwingTrajectory longrun = integrate_swing(pend, x0, y0, 10.0, 1e-3);
  rep.at_most(mod, "energy drift", "relative energy drift over 1e4 steps at dt = 1e-3", max_dev(longrun) / std::abs(longrun.energy.front()), 1e-6);

  const double xe[1] = {longrun.x.back()}, ye[1] = {-longrun.y.back()};
  const SwingTrajectory back = integrate_swing(pend, xe, ye, 10.0, 1e-3);
  const double rev = std::max(std::abs(back.x.back() - x0[0]), std::abs(-back.y.back() - y0[0]));
  rep.at_most(mod, "time reversibility", "forward then backward integration returns to the start", rev, 1e-8);

  SwingParams free = pend;
  free.beta = {TrigSeries{}};
  const double yf[1] = {0.7};
  const SwingTrajectory ft = integrate_swing(free, x0, yf, 50.0, 1e-2, {0.1});
  const double rot = std::abs(rotation_number(ft, 0.0)[0] - 0.7);
  rep.at_most(mod, "free-motion rotation", "rotation number of free motion equals its speed", rot, 1e-10);
}

void cli_suite(const RunConfig& cfg, Report& rep) {
  const std::string mod = "cli";
  const RunConfig again = parse_config(serialize_config(cfg));
  rep.holds(mod, "config round trip", "parse(serialize(config)) == config",
            again == cfg && serialize_config(again) == serialize_config(cfg));

  // Same small sweep on one and on several workers.
  RunConfig small = cfg;
  small.nx = 64;
  small.k_schedule = {4.0, 8.0};
  small.P_range.reset();
  small.P.clear();
  for (double p : {0.3, 1.1, 2.0}) small.P.push_back(std::vector<double>(cfg.n, p));
  const HamiltonianModel model = small.build_model();
  const TorusGrid grid = small.build_grid();
  const auto a = detail::run_momenta(small, model, grid, small.P, {}, false, 1);
  const auto b = detail::run_momenta(small, model, grid, small.P, {}, false, 4);
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    same = a[i].cont.solutions.size() == b[i].cont.solutions.size();
    for (std::size_t j = 0; same && j < a[i].cont.solutions.size(); ++j) {
      const auto& sa = a[i].cont.solutions[j];
      const auto& sb = b[i].cont.solutions[j];
      same = sa.Hbar_k == sb.Hbar_k && sa.iterations == sb.iterations &&
             std::equal(sa.v.values().begin(), sa.v.values().end(), sb.v.values().begin());
    }
  }
  rep.holds(mod, "determinism", "identical results for any worker count", same);
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const RunConfig& config, int jobs) {
  config.validate();
  std::vector<CheckResult> out;
  Report rep(out);
  Rng rng(config.seed);
  const HamiltonianModel model = config.build_model();
  const TorusGrid grid = config.build_grid();

  torus_suite(grid, rng, rep);
  hamiltonian_suite(model, rng, rep);
  if (model.name() != "pendulum") hamiltonian_suite(make_pendulum(1.0), rng, rep);

  RunConfig run_cfg = config;
  run_cfg.fiber_decomposed = grid.m() >= 1;
  const auto runs = detail::run_momenta(run_cfg, model, grid, config.momenta(), {}, false, jobs);
  solver_suite(config, model, grid, runs, rng, rep);
  measure_suite(config, model, grid, runs, rep);
  oracle_suite(model, rep);
  swing_suite(rep);
  cli_suite(config, rep);
  return out;
}

}  // namespace wkam
