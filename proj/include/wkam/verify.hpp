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

#ifndef WKAM_VERIFY_HPP
#define WKAM_VERIFY_HPP

#include <string>
#include <vector>

#include "wkam/run_config.hpp"

namespace wkam {

/// Frozen envelope constants for the energy diagnostics:
/// max H - Hbar_k <= kEnergyMaxConstant log k / k and
/// 0 <= mean_sigma H - Hbar_k <= kEnergyMeanConstant log k / k.
inline constexpr double kEnergyMaxConstant = 1.25;
inline constexpr double kEnergyMeanConstant = 1.0;

/// Closedness threshold used by the verification suite. Fixed, so that a
/// loosened solver tolerance shows up as a failure.
inline constexpr double kClosednessThreshold = 1e-6;

struct CheckResult {
  std::string module;
  std::string name;
  /// The mathematical statement being checked.
  std::string anchor;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

/// Runs the invariant suites of every module on the configured model, grid
/// and momenta. Randomized checks draw from `config.seed`.
std::vector<CheckResult> run_verify_suite(const RunConfig& config, int jobs);

}  // namespace wkam

#endif  // WKAM_VERIFY_HPP
