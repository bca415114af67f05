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

#ifndef WKAM_ORACLE_1D_HPP
#define WKAM_ORACLE_1D_HPP

#include <functional>
#include <span>
#include <vector>

#include "wkam/hamiltonians.hpp"
#include "wkam/mather_measures.hpp"

namespace wkam {

/// Effective Hamiltonian of H = y^2/2 + V(x) on the circle from the action
/// integral J(E) = (1/2 pi) int sqrt(2 (E - V)) dx. Independent of the cell
/// solver; used as ground truth for it.
class Potential1D {
 public:
  explicit Potential1D(std::function<double(double)> V);

  /// Extracts V(x) = H(x, 0) from an n = 1, m = 0 mechanical model.
  /// Throws ErrorCode::unsupported for anything else.
  static Potential1D from_model(const HamiltonianModel& model);

  double operator()(double x) const { return V_(x); }
  double v_max() const noexcept { return v_max_; }
  double v_min() const noexcept { return v_min_; }
  double argmax() const noexcept { return argmax_; }

 private:
  std::function<double(double)> V_;
  double v_max_ = 0.0, v_min_ = 0.0, argmax_ = 0.0;
};

/// J(E); requires E >= V_max. Absolute error below 1e-10.
double momentum_of_energy(const Potential1D& pot, double E);

/// J(V_max): half-width of the flat piece of Hbar.
double critical_momentum(const Potential1D& pot);

/// V_max for |P| <= J(V_max), otherwise the root of J(E) = |P|.
double effective_hamiltonian_1d(const Potential1D& pot, double P);

std::vector<HbarSample> oracle_table(const Potential1D& pot, std::span<const double> P);

}  // namespace wkam

#endif  // WKAM_ORACLE_1D_HPP
