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

#ifndef WKAM_MATHER_MEASURES_HPP
#define WKAM_MATHER_MEASURES_HPP

#include <optional>
#include <span>
#include <vector>

#include "wkam/cell_solver.hpp"

namespace wkam {

/// Gibbs density sigma = exp(k (H(x, D_x u, phi) - Hbar_k)) with respect to
/// the normalized grid measure. The lifted measure on T^n x R^n x T^m is
/// never stored: its integrals are sigma-weighted grid sums evaluated at
/// velocity D_y H(x, D_x u, phi).
struct GibbsMeasure {
  ScalarField sigma;
  double k = 0.0;
  double Hbar_k = 0.0;
  /// integral of the raw density before renormalization.
  double renormalization = 1.0;
  /// max over nodes of |log sigma_raw - k (H - Hbar_k)|, underflowed nodes excluded.
  double identity_error = 0.0;
  /// Nodes whose weight fell below the smallest normal double and were set to 0.
  std::size_t clamped_nodes = 0;
};

GibbsMeasure gibbs_measure(const CellSolution& solution, const CellProblem& problem);

/// Q_i = integral sigma D_yi H.
std::vector<double> rotation_vector(const GibbsMeasure& measure, const CellSolution& solution,
                                    const CellProblem& problem);

/// max over trig test fields w of |integral sigma D_y H . D_x w|.
double closedness_residual(const GibbsMeasure& measure, const CellSolution& solution,
                           const CellProblem& problem, int test_modes);

struct EnergyStatistics {
  double mean = 0.0;
  double variance = 0.0;
  /// Largest node value of H(x, D_x u, phi).
  double max = 0.0;
};

EnergyStatistics energy_statistics(const GibbsMeasure& measure, const CellSolution& solution,
                                   const CellProblem& problem);

/// Mass of {|D_y H| >= speed}. speed = 0 gives 1.
double tail_mass(const GibbsMeasure& measure, const CellSolution& solution,
                 const CellProblem& problem, double speed);

/// One row of a sampled P -> Hbar table.
struct HbarSample {
  std::vector<double> P;
  double Hbar = 0.0;
};

struct DualValue {
  double value = 0.0;
  std::size_t argmax = 0;
  /// The supremum sits on the edge of the sampled P range.
  bool at_boundary = false;
};

/// Discrete dual transform max_P (P.Q - Hbar(P)) over the table.
DualValue effective_lagrangian(std::span<const HbarSample> table, std::span<const double> Q);

struct MeasureStats {
  std::vector<double> Q;
  double energy_mean = 0.0;
  double energy_var = 0.0;
  double energy_max = 0.0;
  double closedness = 0.0;
  double tail_mass = 0.0;
  double tail_speed = 0.0;
  std::optional<double> Lbar_Q;
  std::optional<double> duality_gap;
  bool Lbar_at_boundary = false;
  double renormalization = 1.0;
  double identity_error = 0.0;
};

/// All diagnostics for one solve. The dual quantities are filled when a
/// table is given. The tail threshold defaults to 1 + the largest speed
/// available at energy Hbar_k for mechanical models, 1 + sup |D_x u| otherwise.
MeasureStats measure_stats(const CellSolution& solution, const CellProblem& problem,
                           int test_modes = 8, std::optional<double> tail_speed = std::nullopt,
                           std::span<const HbarSample> table = {});

}  // namespace wkam

#endif  // WKAM_MATHER_MEASURES_HPP
