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

#ifndef WKAM_HAMILTONIANS_HPP
#define WKAM_HAMILTONIANS_HPP

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wkam {

/// Largest position/momentum dimension any evaluator handles.
inline constexpr int kMaxDim = 4;

/// H and its derivatives at one point (x, y, phi). Only the leading n
/// entries (n x n block of dyy, row-major with stride kMaxDim) are used.
struct HamiltonianEval {
  double H = 0.0;
  std::array<double, kMaxDim> dx{};
  std::array<double, kMaxDim> dy{};
  std::array<double, kMaxDim * kMaxDim> dyy{};

  double& hess(int i, int j) { return dyy[i * kMaxDim + j]; }
  double hess(int i, int j) const { return dyy[i * kMaxDim + j]; }
};

/// Finite trigonometric polynomial on T^m:
///   c0 + sum_t [ a_t cos(w_t . phi) + b_t sin(w_t . phi) ].
struct TrigSeries {
  struct Term {
    std::vector<int> wave;
    double cos_coef = 0.0;
    double sin_coef = 0.0;
    bool operator==(const Term&) const = default;
  };
  double constant = 0.0;
  std::vector<Term> terms;

  double operator()(std::span<const double> phi) const;
  bool is_zero() const;
  bool operator==(const TrigSeries&) const = default;
};

/// Coupled swing model parameters. beta is stored row-major, n x n.
struct SwingParams {
  int n = 1;
  int m = 0;
  std::vector<double> alpha;
  std::vector<double> lambda;
  std::vector<double> omega;
  std::vector<TrigSeries> beta;

  const TrigSeries& beta_at(int i, int j) const { return beta[i * n + j]; }
  void validate() const;
  bool tilted() const;
  bool operator==(const SwingParams&) const = default;
};

class HamiltonianModel {
 public:
  using EvalFn = std::function<void(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> phi, HamiltonianEval& out)>;

  /// Wraps an arbitrary evaluator. `mechanical` promises H = |y|^2/2 + U(x, phi).
  static HamiltonianModel custom(int n, int m, double gamma, std::string name, EvalFn fn,
                                 bool mechanical = false);

  HamiltonianEval eval(std::span<const double> x, std::span<const double> y,
                       std::span<const double> phi) const;
  void eval(std::span<const double> x, std::span<const double> y,
            std::span<const double> phi, HamiltonianEval& out) const;
  double energy(std::span<const double> x, std::span<const double> y,
                std::span<const double> phi) const;

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  double gamma() const noexcept { return gamma_; }
  const std::string& name() const noexcept { return name_; }
  bool mechanical() const noexcept { return mechanical_; }
  /// Contains a non-periodic -<alpha, x> term; usable by the simulator only.
  bool tilted() const noexcept { return tilted_; }
  /// H is 2*pi periodic in every x_i (required by the cell solver).
  bool periodic_in_x() const noexcept { return periodic_; }
  /// Present for swing and pendulum models.
  const SwingParams* swing() const noexcept { return swing_.get(); }
  double amplitude() const noexcept { return amplitude_; }

 private:
  friend HamiltonianModel make_integrable(int, int);
  friend HamiltonianModel make_pendulum(double);
  friend HamiltonianModel make_swing(const SwingParams&);
  friend HamiltonianModel homotopy(const HamiltonianModel&, double);
  friend HamiltonianModel restrict_to_fiber(const HamiltonianModel&, std::span<const double>);

  int n_ = 1, m_ = 0;
  double gamma_ = 1.0;
  std::string name_;
  bool mechanical_ = false;
  bool tilted_ = false;
  bool periodic_ = true;
  double amplitude_ = 0.0;
  std::shared_ptr<const SwingParams> swing_;
  EvalFn fn_;
};

/// H = |y|^2 / 2.
HamiltonianModel make_integrable(int n, int m);
/// H = y^2 / 2 + a (1 - cos x), n = 1, m = 0.
HamiltonianModel make_pendulum(double amplitude);
/// H = |y|^2/2 - <alpha, x> + sum_{i,j} beta_ij(phi) (1 - cos(lambda_i x_i + lambda_j x_j)).
HamiltonianModel make_swing(const SwingParams& params);

/// Swing parameters reproducing make_pendulum(amplitude).
SwingParams pendulum_as_swing(double amplitude);

/// Mixes the model with the integrable endpoint:
/// H_tau = tau H + (1 - tau) |y|^2 / 2.
HamiltonianModel homotopy(const HamiltonianModel& model, double tau);

/// Freezes the angle coordinates at `phi`, giving an m = 0 model.
HamiltonianModel restrict_to_fiber(const HamiltonianModel& model, std::span<const double> phi);

/// L(x, v, phi) = sup_y (v.y - H(x, y, phi)). Closed form for mechanical
/// models, damped Newton otherwise. Optionally returns the maximizing y.
double lagrangian(const HamiltonianModel& model, std::span<const double> x,
                  std::span<const double> velocity, std::span<const double> phi,
                  std::vector<double>* argmax = nullptr);

}  // namespace wkam

#endif  // WKAM_HAMILTONIANS_HPP
