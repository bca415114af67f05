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

#include "wkam/hamiltonians.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "wkam/error.hpp"

namespace wkam {

namespace {

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

void kinetic(int n, std::span<const double> y, HamiltonianEval& out) {
  out = HamiltonianEval{};
  for (int i = 0; i < n; ++i) {
    out.H += 0.5 * y[i] * y[i];
    out.dy[i] = y[i];
    out.hess(i, i) = 1.0;
  }
}

}  // namespace

double TrigSeries::operator()(std::span<const double> phi) const {
  double v = constant;
  for (const auto& t : terms) {
    double arg = 0.0;
    for (std::size_t l = 0; l < t.wave.size() && l < phi.size(); ++l) arg += t.wave[l] * phi[l];
    v += t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg);
  }
  return v;
}

bool TrigSeries::is_zero() const {
  if (constant != 0.0) return false;
  for (const auto& t : terms)
    if (t.cos_coef != 0.0 || t.sin_coef != 0.0) return false;
  return true;
}

void SwingParams::validate() const {
  require(n >= 1 && n <= kMaxDim, "swing: n must be in [1, " + std::to_string(kMaxDim) + "]");
  require(m >= 0 && m <= kMaxDim, "swing: m out of range");
  require(static_cast<int>(alpha.size()) == n, "swing: alpha needs n entries");
  require(static_cast<int>(lambda.size()) == n, "swing: lambda needs n entries");
  require(static_cast<int>(omega.size()) == m, "swing: omega needs m entries");
  require(static_cast<int>(beta.size()) == n * n, "swing: beta needs n*n series");
  for (double a : alpha) require(a >= 0.0 && std::isfinite(a), "swing: alpha entries must be finite and >= 0");
  for (double l : lambda) require(std::isfinite(l), "swing: lambda entries must be finite");
  for (double w : omega) require(std::isfinite(w), "swing: omega entries must be finite");
  for (const auto& b : beta) {
    require(std::isfinite(b.constant), "swing: beta coefficients must be finite");
    for (const auto& t : b.terms) {
      require(static_cast<int>(t.wave.size()) == m, "swing: beta wave vectors need m entries");
      require(std::isfinite(t.cos_coef) && std::isfinite(t.sin_coef),
              "swing: beta coefficients must be finite");
    }
  }
}

bool SwingParams::tilted() const {
  for (double a : alpha)
    if (a != 0.0) return true;
  return false;
}

HamiltonianModel HamiltonianModel::custom(int n, int m, double gamma, std::string name, EvalFn fn,
                                          bool mechanical) {
  require(n >= 1 && n <= kMaxDim, "custom model: n out of range");
  require(m >= 0 && m <= kMaxDim, "custom model: m out of range");
  require(gamma > 0.0, "custom model: convexity constant must be positive");
  require(static_cast<bool>(fn), "custom model: empty evaluator");
  HamiltonianModel h;
  h.n_ = n;
  h.m_ = m;
  h.gamma_ = gamma;
  h.name_ = std::move(name);
  h.mechanical_ = mechanical;
  h.fn_ = std::move(fn);
  return h;
}

void HamiltonianModel::eval(std::span<const double> x, std::span<const double> y,
                            std::span<const double> phi, HamiltonianEval& out) const {
  fn_(x, y, phi, out);
}

HamiltonianEval HamiltonianModel::eval(std::span<const double> x, std::span<const double> y,
                                       std::span<const double> phi) const {
  HamiltonianEval out;
  fn_(x, y, phi, out);
  return out;
}

double HamiltonianModel::energy(std::span<const double> x, std::span<const double> y,
                                std::span<const double> phi) const {
  return eval(x, y, phi).H;
}

HamiltonianModel make_integrable(int n, int m) {
  require(n >= 1 && n <= kMaxDim, "integrable: n out of range");
  require(m >= 0 && m <= kMaxDim, "integrable: m out of range");
  HamiltonianModel h;
  h.n_ = n;
  h.m_ = m;
  h.name_ = "integrable";
  h.mechanical_ = true;
  h.fn_ = [n](std::span<const double>, std::span<const double> y, std::span<const double>,
              HamiltonianEval& out) { kinetic(n, y, out); };
  return h;
}

HamiltonianModel make_pendulum(double amplitude) {
  require(amplitude > 0.0 && std::isfinite(amplitude), "pendulum: amplitude must be positive");
  HamiltonianModel h;
  h.n_ = 1;
  h.m_ = 0;
  h.name_ = "pendulum";
  h.mechanical_ = true;
  h.amplitude_ = amplitude;
  h.swing_ = std::make_shared<const SwingParams>(pendulum_as_swing(amplitude));
  h.fn_ = [amplitude](std::span<const double> x, std::span<const double> y,
                      std::span<const double>, HamiltonianEval& out) {
    kinetic(1, y, out);
    out.H += amplitude * (1.0 - std::cos(x[0]));
    out.dx[0] = amplitude * std::sin(x[0]);
  };
  return h;
}

SwingParams pendulum_as_swing(double amplitude) {
  SwingParams p;
  p.n = 1;
  p.m = 0;
  p.alpha = {0.0};
  p.lambda = {0.5};
  p.beta = {TrigSeries{amplitude, {}}};
  return p;
}

HamiltonianModel make_swing(const SwingParams& params) {
  params.validate();
  HamiltonianModel h;
  h.n_ = params.n;
  h.m_ = params.m;
  h.name_ = "swing";
  h.mechanical_ = true;
  h.tilted_ = params.tilted();
  auto p = std::make_shared<const SwingParams>(params);
  h.swing_ = p;

  // Shifting x_l by 2 pi moves lambda_i x_i + lambda_j x_j by
  // 2 pi (lambda_i [i == l] + lambda_j [j == l]).
  bool periodic = !h.tilted_;
  for (int i = 0; i < p->n && periodic; ++i) {
    for (int j = 0; j < p->n; ++j) {
      if (p->beta_at(i, j).is_zero()) continue;
      if (i == j) {
        periodic = periodic && is_integer(2.0 * p->lambda[i]);
      } else {
        periodic = periodic && is_integer(p->lambda[i]) && is_integer(p->lambda[j]);
      }
    }
  }
  h.periodic_ = periodic;

  h.fn_ = [p](std::span<const double> x, std::span<const double> y,
              std::span<const double> phi, HamiltonianEval& out) {
    const int n = p->n;
    kinetic(n, y, out);
    for (int i = 0; i < n; ++i) {
      out.H -= p->alpha[i] * x[i];
      out.dx[i] = -p->alpha[i];
    }
    // Literal double sum: (i, j) and (j, i) both contribute.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const TrigSeries& b = p->beta_at(i, j);
        if (b.is_zero()) continue;
        const double bij = b(phi);
        const double theta = p->lambda[i] * x[i] + p->lambda[j] * x[j];
        const double s = std::sin(theta);
        out.H += bij * (1.0 - std::cos(theta));
        out.dx[i] += bij * p->lambda[i] * s;
        out.dx[j] += bij * p->lambda[j] * s;
      }
    }
  };
  return h;
}

HamiltonianModel homotopy(const HamiltonianModel& model, double tau) {
  require(tau >= 0.0 && tau <= 1.0, "homotopy: tau must be in [0, 1]");
  if (tau == 1.0) return model;
  const int n = model.n();
  std::ostringstream name;
  name << model.name() << "@tau=" << tau;
  auto fn = [model, tau, n](std::span<const double> x, std::span<const double> y,
                            std::span<const double> phi, HamiltonianEval& out) {
    if (tau == 0.0) {
      kinetic(n, y, out);
      return;
    }
    model.eval(x, y, phi, out);
    out.H *= tau;
    for (int i = 0; i < n; ++i) {
      out.H += (1.0 - tau) * 0.5 * y[i] * y[i];
      out.dx[i] *= tau;
      out.dy[i] = tau * out.dy[i] + (1.0 - tau) * y[i];
      for (int j = 0; j < n; ++j) out.hess(i, j) = tau * out.hess(i, j) + (i == j ? 1.0 - tau : 0.0);
    }
  };
  auto h = HamiltonianModel::custom(n, model.m(), std::min(1.0, model.gamma()), name.str(), fn,
                                    model.mechanical());
  h.tilted_ = model.tilted_;
  h.periodic_ = model.periodic_;
  return h;
}

HamiltonianModel restrict_to_fiber(const HamiltonianModel& model, std::span<const double> phi) {
  require(static_cast<int>(phi.size()) == model.m(), "restrict_to_fiber: phi needs m entries");
  std::vector<double> frozen(phi.begin(), phi.end());
  auto fn = [model, frozen](std::span<const double> x, std::span<const double> y,
                            std::span<const double>, HamiltonianEval& out) {
    model.eval(x, y, frozen, out);
  };
  auto h = HamiltonianModel::custom(model.n(), 0, model.gamma(), model.name() + "|fiber", fn,
                                    model.mechanical());
  h.tilted_ = model.tilted_;
  h.periodic_ = model.periodic_;
  return h;
}

double lagrangian(const HamiltonianModel& model, std::span<const double> x,
                  std::span<const double> velocity, std::span<const double> phi,
                  std::vector<double>* argmax) {
  const int n = model.n();
  require(static_cast<int>(velocity.size()) == n, "lagrangian: velocity needs n entries");
  std::vector<double> y(velocity.begin(), velocity.end());

  if (model.mechanical()) {
    // H = |y|^2/2 + U  =>  L = |v|^2/2 - U, attained at y = v.
    const std::vector<double> zero(n, 0.0);
    double kin = 0.0;
    for (double v : velocity) kin += 0.5 * v * v;
    if (argmax) *argmax = y;
    return kin - model.energy(x, zero, phi);
  }

  auto objective = [&](const std::vector<double>& yy) {
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += velocity[i] * yy[i];
    return dot - model.energy(x, yy, phi);
  };

  HamiltonianEval ev;
  double value = objective(y);
  for (int iter = 0; iter < 100; ++iter) {
    model.eval(x, y, phi, ev);
    Eigen::VectorXd r(n);
    Eigen::MatrixXd hess(n, n);
    double rnorm = 0.0, scale = 1.0;
    for (int i = 0; i < n; ++i) {
      r[i] = velocity[i] - ev.dy[i];
      rnorm = std::max(rnorm, std::abs(r[i]));
      scale = std::max(scale, std::abs(velocity[i]));
      for (int j = 0; j < n; ++j) hess(i, j) = ev.hess(i, j);
    }
    if (rnorm <= 1e-13 * scale) {
      if (argmax) *argmax = y;
      return value;
    }
    const Eigen::VectorXd step = hess.ldlt().solve(r);
    double t = 1.0;
    std::vector<double> trial(n);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < n; ++i) trial[i] = y[i] + t * step[i];
      const double tv = objective(trial);
      if (tv >= value - 1e-15 * (1.0 + std::abs(value))) {
        y = trial;
        value = tv;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  fail(ErrorCode::not_converged, "lagrangian: inner Newton did not converge in 100 iterations");
}

}  // namespace wkam
