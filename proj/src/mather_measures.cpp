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

#include "wkam/mather_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wkam/error.hpp"

namespace wkam {

namespace {

constexpr double kRenormalizationLimit = 1e-4;

void check_pair(const GibbsMeasure& measure, const CellSolution& solution, const CellProblem& problem) {
  require(measure.sigma.grid().same_shape(problem.grid) && solution.v.grid().same_shape(problem.grid),
          "measure diagnostics: grid mismatch");
}

double speed(const NodeFields& f, std::size_t i) {
  double s = 0.0;
  for (const auto& c : f.dy) s += c[i] * c[i];
  return std::sqrt(s);
}

/// Fastest speed available at energy `E` for H = |y|^2/2 + U on the grid.
double max_speed_at_energy(const CellProblem& problem, double E) {
  const TorusGrid& g = problem.grid;
  const HamiltonianModel model = problem.effective_model();
  std::vector<double> x(g.n()), phi(g.m()), zero(g.n(), 0.0);
  double u_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int a = 0; a < g.n(); ++a) x[a] = g.x(i, a);
    for (int a = 0; a < g.m(); ++a) phi[a] = g.phi(i, a);
    u_min = std::min(u_min, model.energy(x, zero, phi));
  }
  return std::sqrt(2.0 * std::max(0.0, E - u_min));
}

}  // namespace

GibbsMeasure gibbs_measure(const CellSolution& solution, const CellProblem& problem) {
  const NodeFields f = evaluate_nodes(problem, solution.v);
  const double k = problem.k;
  GibbsMeasure out{ScalarField(problem.grid)};
  out.k = k;
  out.Hbar_k = solution.Hbar_k;
  for (std::size_t i = 0; i < f.H.size(); ++i) {
    const double exponent = k * (f.H[i] - solution.Hbar_k);
    double w = std::exp(exponent);
    if (w < std::numeric_limits<double>::min()) {
      w = 0.0;
      ++out.clamped_nodes;
    } else {
      out.identity_error = std::max(out.identity_error, std::abs(std::log(w) - exponent));
    }
    out.sigma[i] = w;
  }
  out.renormalization = integrate(out.sigma);
  if (!(std::abs(out.renormalization - 1.0) <= kRenormalizationLimit)) {
    std::ostringstream msg;
    msg << "gibbs_measure: renormalization factor " << out.renormalization
        << " signals a solution inconsistent with the problem";
    fail(ErrorCode::invalid_argument, msg.str());
  }
  for (double& s : out.sigma.values()) s /= out.renormalization;
  return out;
}

std::vector<double> rotation_vector(const GibbsMeasure& measure, const CellSolution& solution,
                                    const CellProblem& problem) {
  check_pair(measure, solution, problem);
  const NodeFields f = evaluate_nodes(problem, solution.v);
  std::vector<double> Q(problem.grid.n());
  for (int a = 0; a < problem.grid.n(); ++a) Q[a] = inner(measure.sigma.values(), f.dy[a]);
  return Q;
}

double closedness_residual(const GibbsMeasure& measure, const CellSolution& solution,
                           const CellProblem& problem, int test_modes) {
  check_pair(measure, solution, problem);
  const TorusGrid& g = problem.grid;
  const NodeFields f = evaluate_nodes(problem, solution.v);
  std::vector<std::vector<double>> flux(g.n(), std::vector<double>(g.size()));
  for (int a = 0; a < g.n(); ++a)
    for (std::size_t i = 0; i < g.size(); ++i) flux[a][i] = measure.sigma[i] * f.dy[a][i];
  double worst = 0.0;
  std::vector<double> dw(g.size());
  for (const auto& w : trig_test_fields(g, test_modes)) {
    double s = 0.0;
    for (int a = 0; a < g.n(); ++a) {
      diff_axis(g, a, w.values(), dw);
      s += inner(flux[a], dw);
    }
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

EnergyStatistics energy_statistics(const GibbsMeasure& measure, const CellSolution& solution,
                                   const CellProblem& problem) {
  check_pair(measure, solution, problem);
  const NodeFields f = evaluate_nodes(problem, solution.v);
  EnergyStatistics out;
  out.mean = inner(measure.sigma.values(), f.H);
  std::vector<double> dev(f.H.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = (f.H[i] - out.mean) * (f.H[i] - out.mean);
  out.variance = std::max(0.0, inner(measure.sigma.values(), dev));
  out.max = *std::max_element(f.H.begin(), f.H.end());
  return out;
}

double tail_mass(const GibbsMeasure& measure, const CellSolution& solution, const CellProblem& problem,
                 double threshold) {
  check_pair(measure, solution, problem);
  require(threshold >= 0.0, "tail_mass: speed threshold must be non-negative");
  const NodeFields f = evaluate_nodes(problem, solution.v);
  double mass = 0.0;
  for (std::size_t i = 0; i < f.H.size(); ++i)
    if (speed(f, i) >= threshold) mass += measure.sigma[i];
  return std::clamp(mass / static_cast<double>(f.H.size()), 0.0, 1.0);
}

DualValue effective_lagrangian(std::span<const HbarSample> table, std::span<const double> Q) {
  require(!table.empty(), "effective_lagrangian: empty table");
  DualValue best;
  best.value = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < table.size(); ++r) {
    require(table[r].P.size() == Q.size(), "effective_lagrangian: P and Q dimensions differ");
    double dot = 0.0;
    for (std::size_t a = 0; a < Q.size(); ++a) dot += table[r].P[a] * Q[a];
    const double val = dot - table[r].Hbar;
    if (val > best.value) {
      best.value = val;
      best.argmax = r;
    }
  }
  // A row is on the boundary when some axis has no sample beyond it.
  const auto& Pm = table[best.argmax].P;
  for (std::size_t a = 0; a < Pm.size() && !best.at_boundary; ++a) {
    bool lower = false, upper = false;
    for (const auto& row : table) {
      lower = lower || row.P[a] < Pm[a];
      upper = upper || row.P[a] > Pm[a];
    }
    best.at_boundary = !(lower && upper);
  }
  return best;
}

MeasureStats measure_stats(const CellSolution& solution, const CellProblem& problem, int test_modes,
                           std::optional<double> tail_speed, std::span<const HbarSample> table) {
  const GibbsMeasure mu = gibbs_measure(solution, problem);
  MeasureStats out;
  out.renormalization = mu.renormalization;
  out.identity_error = mu.identity_error;
  out.Q = rotation_vector(mu, solution, problem);
  const EnergyStatistics es = energy_statistics(mu, solution, problem);
  out.energy_mean = es.mean;
  out.energy_var = es.variance;
  out.energy_max = es.max;
  out.closedness = closedness_residual(mu, solution, problem, test_modes);
  if (tail_speed) {
    out.tail_speed = *tail_speed;
  } else if (problem.model.mechanical()) {
    out.tail_speed = 1.0 + max_speed_at_energy(problem, solution.Hbar_k);
  } else {
    out.tail_speed = 1.0 + solution.sup_Dxu;
  }
  out.tail_mass = tail_mass(mu, solution, problem, out.tail_speed);
  if (!table.empty()) {
    const DualValue dual = effective_lagrangian(table, out.Q);
    out.Lbar_Q = dual.value;
    out.Lbar_at_boundary = dual.at_boundary;
    double pq = 0.0;
    for (std::size_t a = 0; a < out.Q.size(); ++a) pq += solution.P[a] * out.Q[a];
    out.duality_gap = dual.value + solution.Hbar_k - pq;
  }
  return out;
}

}  // namespace wkam
