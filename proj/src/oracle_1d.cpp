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

#include "wkam/oracle_1d.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <sstream>

#include "wkam/error.hpp"

namespace wkam {

namespace {

constexpr int kSamples = 4096;

// Refines a sampled extremum of s * V with Brent's method on one cell.
std::pair<double, double> refine_min(const std::function<double(double)>& f, double center, double h) {
  const auto r = boost::math::tools::brent_find_minima(f, center - h, center + h,
                                                        std::numeric_limits<double>::digits / 2);
  return {r.first, r.second};
}

}  // namespace

Potential1D::Potential1D(std::function<double(double)> V) : V_(std::move(V)) {
  require(static_cast<bool>(V_), "Potential1D: empty potential");
  const double v0 = V_(0.0), v1 = V_(kTwoPi);
  if (!(std::abs(v0 - v1) <= 1e-12)) {
    std::ostringstream msg;
    msg << "Potential1D: V is not 2*pi periodic (|V(0) - V(2pi)| = " << std::abs(v0 - v1) << ")";
    fail(ErrorCode::invalid_argument, msg.str());
  }
  const double h = kTwoPi / kSamples;
  int imax = 0, imin = 0;
  std::vector<double> s(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    s[i] = V_(i * h);
    if (!std::isfinite(s[i])) fail(ErrorCode::non_finite, "Potential1D: non-finite potential value");
    if (s[i] > s[imax]) imax = i;
    if (s[i] < s[imin]) imin = i;
  }
  const auto neg = [this](double x) { return -V_(x); };
  const auto [xmax, negmax] = refine_min(neg, imax * h, h);
  const auto [xmin, vmin] = refine_min(V_, imin * h, h);
  v_max_ = std::max(s[imax], -negmax);
  argmax_ = -negmax > s[imax] ? xmax : imax * h;
  v_min_ = std::min(s[imin], vmin);
  (void)xmin;
}

Potential1D Potential1D::from_model(const HamiltonianModel& model) {
  if (model.n() != 1 || model.m() != 0)
    fail(ErrorCode::unsupported, "oracle: only n = 1, m = 0 models are supported");
  if (model.tilted()) fail(ErrorCode::unsupported, "oracle: tilted models are not periodic");
  // Probe for y-x cross terms or non-unit kinetic energy.
  for (double x : {0.3, 1.7, 4.1}) {
    for (double y : {-1.3, 0.0, 2.2}) {
      const double xs[1] = {x}, ys[1] = {y};
      const HamiltonianEval ev = model.eval(xs, ys, {});
      if (std::abs(ev.hess(0, 0) - 1.0) > 1e-12 || std::abs(ev.dy[0] - y) > 1e-12)
        fail(ErrorCode::unsupported, "oracle: model is not of the form y^2/2 + V(x)");
    }
  }
  return Potential1D([model](double x) {
    const double xs[1] = {x}, ys[1] = {0.0};
    return model.energy(xs, ys, {});
  });
}

double momentum_of_energy(const Potential1D& pot, double E) {
  if (!(E >= pot.v_max() - 1e-12)) {
    std::ostringstream msg;
    msg << "momentum_of_energy: E = " << E << " is below V_max = " << pot.v_max();
    fail(ErrorCode::invalid_argument, msg.str());
  }
  // Start the period at the maximum so the turning-point kink sits on the
  // interval ends.
  const double x0 = pot.argmax();
  const auto integrand = [&](double x) { return std::sqrt(2.0 * std::max(0.0, E - pot(x))); };
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, x0, x0 + kTwoPi, 25, 1e-15, &err);
  return val / kTwoPi;
}

double critical_momentum(const Potential1D& pot) { return momentum_of_energy(pot, pot.v_max()); }

double effective_hamiltonian_1d(const Potential1D& pot, double P) {
  require(std::isfinite(P), "effective_hamiltonian_1d: P must be finite");
  const double target = std::abs(P);
  if (target <= critical_momentum(pot)) return pot.v_max();
  const double lo = pot.v_max();
  const double hi = pot.v_max() + 10.0 * (1.0 + P * P);
  const auto f = [&](double E) { return momentum_of_energy(pot, E) - target; };
  if (f(hi) < 0.0) {
    std::ostringstream msg;
    msg << "effective_hamiltonian_1d: no root bracket below E = " << hi << " for P = " << P;
    fail(ErrorCode::not_converged, msg.str());
  }
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(a)); };
  const auto r = boost::math::tools::bisect(f, lo, hi, tol);
  return 0.5 * (r.first + r.second);
}

std::vector<HbarSample> oracle_table(const Potential1D& pot, std::span<const double> P) {
  std::vector<HbarSample> out;
  out.reserve(P.size());
  for (double p : P) out.push_back({{p}, effective_hamiltonian_1d(pot, p)});
  return out;
}

}  // namespace wkam
