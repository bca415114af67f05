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

#ifndef WKAM_SWING_SIM_HPP
#define WKAM_SWING_SIM_HPP

#include <span>
#include <vector>

#include "wkam/hamiltonians.hpp"
#include "wkam/mather_measures.hpp"

namespace wkam {

/// Recorded samples of x' = y, y' = -D_x H(x, y, omega t). Positions live in
/// the covering space (never reduced mod 2 pi). Row-major: x[s * n + i].
struct SwingTrajectory {
  int n = 1;
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> y;
  /// H along the flow; conserved only when the forcing is autonomous.
  std::vector<double> energy;
  std::vector<double> rotation_estimate;

  std::size_t samples() const noexcept { return times.size(); }
};

struct IntegrateOptions {
  /// Spacing of recorded samples; 0 records every step. Rounded to a whole
  /// number of steps, shrinking dt if needed.
  double dt_record = 0.0;
};

/// Kick-drift-kick Stormer-Verlet. Throws ErrorCode::non_finite naming the
/// last valid sample when the state blows up.
SwingTrajectory integrate_swing(const SwingParams& p, std::span<const double> x0,
                                std::span<const double> y0, double T, double dt,
                                IntegrateOptions opts = {});

/// Least-squares slope of each unwrapped coordinate after discarding the
/// first `burn_in` fraction of the samples.
std::vector<double> rotation_number(const SwingTrajectory& traj, double burn_in);

struct ComparisonRow {
  double P = 0.0;
  double rotation_measured = 0.0;
  double rotation_predicted = 0.0;
  double gap = 0.0;
};

struct CompareOptions {
  double T = 400.0;
  double dt = 1e-3;
  double dt_record = 0.1;
  double burn_in = 0.1;
};

/// For each momentum sample, starts the orbit at x = 0 on the energy level
/// Hbar(P) (or with y = P when Hbar(P) does not exceed the potential maximum,
/// giving a trapped orbit), and compares its rotation number with the
/// centered finite-difference slope of the table. n = 1 only.
std::vector<ComparisonRow> compare_with_homogenization(const SwingParams& p,
                                                       std::span<const HbarSample> table,
                                                       std::span<const double> P_samples,
                                                       const CompareOptions& opts = {});

/// Same, with `samples` momenta spread evenly over the interior table rows.
std::vector<ComparisonRow> compare_with_homogenization(const SwingParams& p,
                                                       std::span<const HbarSample> table,
                                                       std::size_t samples,
                                                       const CompareOptions& opts = {});

}  // namespace wkam

#endif  // WKAM_SWING_SIM_HPP
