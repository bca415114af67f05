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


// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wkam/cell_solver.hpp"
#include "wkam/mather_measures.hpp"
#include "wkam/oracle_1d.hpp"
#include "wkam/swing_sim.hpp"
#include "wkam/verify.hpp"

using namespace wkam;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %2d %s  %s: %s\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const std::vector<double> kLadder{8, 16, 32, 64};
const TorusGrid kPendulumGrid(1, 0, 256);

struct PendulumRun {
  ContinuationResult cr;
  double seconds = 0.0;
};

// Continuation results for the pendulum, cached by momentum.
const PendulumRun& pendulum(double P) {
  static std::map<double, PendulumRun> cache;
  auto it = cache.find(P);
  if (it != cache.end()) return it->second;
  const auto t0 = Clock::now();
  PendulumRun r{continuation_solve(make_pendulum(1.0), {P}, kLadder, 4, kPendulumGrid)};
  r.seconds = seconds_since(t0);
  return cache.emplace(P, std::move(r)).first->second;
}

CellProblem pendulum_problem(double P, double k) { return CellProblem{make_pendulum(1.0), {P}, k, kPendulumGrid}; }

SwingParams forced_swing() {
  SwingParams p;
  p.n = 1;
  p.m = 1;
  p.alpha = {0.0};
  p.lambda = {0.5};
  p.omega = {1.0};
  p.beta = {TrigSeries{1.0, {{{1}, 0.5, 0.0}}}};
  return p;
}

void integrable_exactness() {
  double worst_h = 0.0, worst_v = 0.0, worst_t = 0.0;
  bool ok = true;
  for (double P : {0.0, 0.7, 1.5}) {
    const auto t0 = Clock::now();
    const CellSolution s = solve_cell(CellProblem{make_integrable(1, 0), {P}, 64.0, kPendulumGrid});
    worst_t = std::max(worst_t, seconds_since(t0));
    ok = ok && s.converged();
    worst_h = std::max(worst_h, std::abs(s.Hbar_k - 0.5 * P * P));
    for (double v : s.v.values()) worst_v = std::max(worst_v, std::abs(v));
  }
  report(1, "integrable exactness", ok && worst_h <= 1e-10 && worst_v <= 1e-10 && worst_t < 1.0,
         fmt("max |Hbar_k - P^2/2| = %.2e, max |v| = %.2e, slowest solve %.3f s", worst_h, worst_v, worst_t));
}

const std::vector<double> kOracleMomenta{0.0, 0.5, 1.0, 1.5, 2.0, 2.5};

void oracle_agreement() {
  const Potential1D V = Potential1D::from_model(make_pendulum(1.0));
  double lo = 1e300, hi = -1e300, total = 0.0;
  bool ok = true;
  for (double P : kOracleMomenta) {
    const PendulumRun& r = pendulum(P);
    total += r.seconds;
    ok = ok && r.cr.ok && r.cr.solutions.size() == kLadder.size();
    if (!r.cr.ok) continue;
    const double d = effective_hamiltonian_1d(V, P) - r.cr.solutions.back().Hbar_k;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  report(2, "oracle agreement", ok && lo >= 0.0 && hi <= 0.15 && total <= 60.0,
         fmt("Hbar - Hbar_64 in [%.3e, %.3e] over 6 momenta, %.2f s", lo, hi, total));
}

void monotone_in_k() {
  double worst = -1e300;
  bool ok = true;
  for (double P : kOracleMomenta) {
    const auto& sols = pendulum(P).cr.solutions;
    ok = ok && sols.size() == kLadder.size();
    for (std::size_t i = 1; i < sols.size(); ++i) worst = std::max(worst, sols[i - 1].Hbar_k - sols[i].Hbar_k);
  }
  report(3, "monotone in k", ok && worst <= 1e-8, fmt("largest decrease along the schedule %.3e (slack 1e-8)", worst));
}

void closedness() {
  double worst = 0.0;
  int solves = 0;
  for (double P : kOracleMomenta) {
    for (const auto& s : pendulum(P).cr.solutions) {
      if (!s.converged()) continue;
      const CellProblem pr = pendulum_problem(P, s.k);
      worst = std::max(worst, closedness_residual(gibbs_measure(s, pr), s, pr, 8));
      ++solves;
    }
  }
  report(4, "weak Euler-Lagrange closedness", solves == 24 && worst <= kClosednessThreshold,
         fmt("max residual %.3e over %.0f converged solves", worst, solves));
}

double gradient_check(const CellProblem& pr, std::uint64_t seed, int directions) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto random_field = [&](double scale) {
    ScalarField f(pr.grid);
    for (auto& v : f.values()) v = scale * nd(rng);
    project_mean_zero(f);
    return f;
  };
  const ScalarField v = random_field(0.05);
  const ObjectiveValue ov = objective(pr, v);
  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    const ScalarField w = random_field(1.0);
    const double eps = 1e-5;
    ScalarField vp = v, vm = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
      vp[i] += eps * w[i];
      vm[i] -= eps * w[i];
    }
    const double fd = (objective(pr, vp).value - objective(pr, vm).value) / (2 * eps);
    const double an = inner(ov.gradient, w);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
  }
  return worst;
}

void gradient_correctness() {
  const std::vector<CellProblem> problems{
      {make_pendulum(1.0), {1.0}, 8.0, TorusGrid(1, 0, 64)},
      {make_integrable(2, 0), {0.7, -0.3}, 8.0, TorusGrid(2, 0, 16)},
      {make_swing(forced_swing()), {1.5}, 8.0, TorusGrid(1, 1, 32, 8)},
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < problems.size(); ++i) worst = std::max(worst, gradient_check(problems[i], 17 + i, 20));
  report(5, "gradient correctness", worst <= 1e-5, fmt("max relative error %.3e over 20 directions x 3 models", worst));
}

void energy_concentration() {
  const auto& sols = pendulum(0.0).cr.solutions;
  if (sols.size() != kLadder.size()) {
    report(6, "energy concentration", false, "continuation at P = 0 did not complete");
    return;
  }
  double var8 = 0.0, var64 = 0.0, margin = 1e300;
  for (const auto& s : sols) {
    const CellProblem pr = pendulum_problem(0.0, s.k);
    const EnergyStatistics es = energy_statistics(gibbs_measure(s, pr), s, pr);
    if (s.k == 8.0) var8 = es.variance;
    if (s.k == 64.0) var64 = es.variance;
    margin = std::min(margin, s.Hbar_k + kEnergyMaxConstant * std::log(s.k) / s.k - es.max);
  }
  report(6, "energy concentration", var64 < var8 && margin >= 0.0,
         fmt("variance k=8 %.3e -> k=64 %.3e; min slack of max H <= Hbar_k + %.2f log k/k is %.3e", var8, var64,
             kEnergyMaxConstant, margin));
}

// (h/2) * largest jump between adjacent secant slopes.
double table_resolution(const std::vector<HbarSample>& t) {
  double jump = 0.0;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const double s0 = (t[i].Hbar - t[i - 1].Hbar) / (t[i].P[0] - t[i - 1].P[0]);
    const double s1 = (t[i + 1].Hbar - t[i].Hbar) / (t[i + 1].P[0] - t[i].P[0]);
    jump = std::max(jump, std::abs(s1 - s0) * 0.5 * (t[i + 1].P[0] - t[i].P[0]));
  }
  return jump;
}

void duality() {
  std::vector<HbarSample> table;
  bool ok = true;
  for (int i = -30; i <= 30; ++i) {
    const double P = 0.1 * i;
    const PendulumRun& r = pendulum(P);
    ok = ok && r.cr.ok;
    if (r.cr.ok) table.push_back({{P}, r.cr.solutions.back().Hbar_k});
  }
  const auto& s = pendulum(2.0).cr.solutions.back();
  const CellProblem pr = pendulum_problem(2.0, 64.0);
  const MeasureStats ms = measure_stats(s, pr, 8, std::nullopt, table);
  const double gap = ms.duality_gap.value_or(1e300);
  const double res = table_resolution(table);
  report(7, "duality", ok && !ms.Lbar_at_boundary && std::abs(gap) <= 0.02 + res,
         fmt("|Lbar(Q) + Hbar_64(2) - 2Q| = %.3e, bound 0.02 + %.3e (solver table P in [-3, 3] step 0.1)", std::abs(gap),
             res));
}

void rotation_consistency() {
  const auto& s = pendulum(2.0).cr.solutions.back();
  const CellProblem pr = pendulum_problem(2.0, 64.0);
  const double Q = rotation_vector(gibbs_measure(s, pr), s, pr)[0];
  const auto& up = pendulum(2.05).cr;
  const auto& down = pendulum(1.95).cr;
  bool ok = up.ok && down.ok;
  const double fd = ok ? (up.solutions.back().Hbar_k - down.solutions.back().Hbar_k) / 0.1 : 0.0;
  const double rel = std::abs(Q - fd) / std::abs(fd);

  const Potential1D V = Potential1D::from_model(make_pendulum(1.0));
  const std::vector<double> Ps{2.49, 2.5, 2.51};
  const auto table = oracle_table(V, Ps);
  const std::vector<double> probe{2.5};
  const ComparisonRow row = compare_with_homogenization(pendulum_as_swing(1.0), table, probe).at(0);
  const double sim_rel = row.gap / std::abs(row.rotation_predicted);
  ok = ok && rel <= 0.05 && sim_rel <= 0.10;
  report(8, "rotation consistency", ok,
         fmt("Q = %.6f vs centered difference %.6f (rel %.2e); simulator gap at P = 2.5 rel %.2e", Q, fd, rel, sim_rel));
}

void simulator_integrity() {
  const std::vector<double> x0{0.0}, y0{1.5};
  const SwingTrajectory tr = integrate_swing(pendulum_as_swing(1.0), x0, y0, 10.0, 1e-3);
  double drift = 0.0;
  for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy.front()));
  drift /= std::abs(tr.energy.front());

  SwingParams free = pendulum_as_swing(1.0);
  free.beta = {TrigSeries{}};
  const std::vector<double> fy{1.3};
  const double rot = rotation_number(integrate_swing(free, x0, fy, 100.0, 1e-2, {0.1}), 0.1)[0];
  const double rot_err = std::abs(rot - 1.3);

  auto max_err = [&](double dt) {
    const std::vector<double> y{2.2};
    const SwingTrajectory t = integrate_swing(pendulum_as_swing(1.0), x0, y, 20.0, dt, {0.1});
    double e = 0.0;
    for (double v : t.energy) e = std::max(e, std::abs(v - t.energy.front()));
    return e;
  };
  const double order = std::log2(max_err(0.02) / max_err(0.01));
  report(9, "simulator integrity", tr.samples() == 10001 && drift <= 1e-6 && rot_err <= 1e-10 && std::abs(order - 2.0) <= 0.2,
         fmt("relative drift over 1e4 steps %.2e; free rotation error %.2e; observed order %.3f", drift, rot_err, order));
}

double max_adjacent_jump(const std::vector<double>& f) {
  double j = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) j = std::max(j, std::abs(f[(i + 1) % f.size()] - f[i]));
  return j;
}

void fiber_consistency() {
  const auto t0 = Clock::now();
  const HamiltonianModel model = make_swing(forced_swing());
  double worst = 0.0, ratio_lo = 1e300, ratio_hi = -1e300;
  bool ok = true;
  for (double P : {0.0, 1.5}) {
    double jump[2] = {0.0, 0.0};
    for (int r = 0; r < 2; ++r) {
      const int nphi = r == 0 ? 16 : 32;
      const TorusGrid g(1, 1, 128, nphi);
      const ContinuationResult joint = continuation_solve(model, {P}, kLadder, 4, g);
      const CellSolution fib = fiber_decomposed_solve(CellProblem{model, {P}, 64.0, g}, {}, 1, kLadder, 4);
      ok = ok && joint.ok && fib.converged();
      if (!joint.ok) continue;
      worst = std::max(worst, std::abs(joint.solutions.back().Hbar_k - fib.Hbar_k));
      jump[r] = max_adjacent_jump(fib.fiber_values);
    }
    const double ratio = jump[0] / jump[1];
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
  }
  const double t = seconds_since(t0);
  report(10, "quasi-periodic fiber consistency", ok && worst <= 1e-8 && ratio_lo >= 1.6 && ratio_hi <= 2.4 && t <= 120.0,
         fmt("max |joint - fibered| = %.2e; adjacent-jump ratio N_phi 16 -> 32 in [%.3f, %.3f]; %.2f s", worst, ratio_lo,
             ratio_hi, t));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{
      integrable_exactness, oracle_agreement, monotone_in_k,      closedness,       gradient_correctness,
      energy_concentration, duality,          rotation_consistency, simulator_integrity, fiber_consistency};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      report(0, "unexpected error", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
