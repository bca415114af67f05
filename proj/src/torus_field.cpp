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

#include "wkam/torus_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wkam/error.hpp"

namespace wkam {

namespace {

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::vector<std::pair<int, double>> make_stencil(int nx, DiffMode mode) {
  const double h = kTwoPi / nx;
  std::vector<std::pair<int, double>> s;
  if (mode == DiffMode::central) {
    s.emplace_back(1, -1.0 / (2.0 * h));
    return s;
  }
  // Derivative of the periodic sinc interpolant (even nx). The Nyquist
  // offset nx/2 has coefficient cot(pi/2) = 0 and is dropped.
  for (int d = 1; d < nx / 2; ++d) {
    const double sign = (d % 2 == 0) ? 1.0 : -1.0;
    s.emplace_back(d, 0.5 * sign / std::tan(0.5 * d * h));
  }
  return s;
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::non_finite, std::string(what) + ": non-finite input value");
  }
}

}  // namespace

TorusGrid::TorusGrid(int n, int m, int nx, int nphi, DiffMode mode)
    : n_(n), m_(m), nx_(nx), nphi_(m == 0 ? 1 : nphi), mode_(mode) {
  require(n >= 1 && n <= 2, "TorusGrid: n must be 1 or 2");
  require(m >= 0 && m <= 2, "TorusGrid: m must be in [0, 2]");
  require(nx >= 4 && nx % 2 == 0, "TorusGrid: N_x must be even and >= 4");
  require(m == 0 || nphi >= 1, "TorusGrid: N_phi must be >= 1");
  fiber_size_ = ipow(static_cast<std::size_t>(nx_), n_);
  fiber_count_ = ipow(static_cast<std::size_t>(nphi_), m_);
  stencil_ = std::make_shared<const std::vector<std::pair<int, double>>>(make_stencil(nx_, mode_));
}

double TorusGrid::x(std::size_t node, int axis) const {
  std::size_t local = node % fiber_size_;
  for (int a = 0; a < axis; ++a) local /= nx_;
  return hx() * static_cast<double>(local % nx_);
}

double TorusGrid::phi(std::size_t node, int axis) const {
  std::size_t f = node / fiber_size_;
  for (int a = 0; a < axis; ++a) f /= nphi_;
  return hphi() * static_cast<double>(f % nphi_);
}

void TorusGrid::fiber_phi(std::size_t fiber, std::span<double> out) const {
  for (int a = 0; a < m_; ++a) {
    out[a] = hphi() * static_cast<double>(fiber % nphi_);
    fiber /= nphi_;
  }
}

TorusGrid TorusGrid::spatial_only() const { return TorusGrid(n_, 0, nx_, 1, mode_); }

bool TorusGrid::same_shape(const TorusGrid& o) const noexcept {
  return n_ == o.n_ && m_ == o.m_ && nx_ == o.nx_ && nphi_ == o.nphi_ && mode_ == o.mode_;
}

ScalarField::ScalarField(TorusGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(TorusGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_.size(), "ScalarField: value count does not match grid");
}

bool ScalarField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(TorusGrid grid)
    : grid_(std::move(grid)),
      components_(static_cast<std::size_t>(grid_.n()), std::vector<double>(grid_.size(), 0.0)) {}

bool VectorField::all_finite() const noexcept {
  for (const auto& c : components_)
    for (double v : c)
      if (!std::isfinite(v)) return false;
  return true;
}

void diff_axis(const TorusGrid& grid, int axis, std::span<const double> in,
               std::span<double> out) {
  const int nx = grid.nx();
  const std::size_t stride = axis == 0 ? 1 : static_cast<std::size_t>(nx);
  const std::size_t block = stride * nx;
  const auto st = grid.stencil();
  const std::size_t total = in.size();
  // Pairing c_d with c_{nx-d} = -c_d makes the derivative of a constant
  // exactly zero and keeps the operator antisymmetric to the last bit.
  for (std::size_t base = 0; base < total; base += block) {
    for (std::size_t inner_off = 0; inner_off < stride; ++inner_off) {
      const double* f = in.data() + base + inner_off;
      double* g = out.data() + base + inner_off;
      for (int i = 0; i < nx; ++i) {
        double acc = 0.0;
        for (const auto& [d, c] : st) {
          int lo = i - d;
          if (lo < 0) lo += nx;
          int hi = i + d;
          if (hi >= nx) hi -= nx;
          acc += c * (f[lo * stride] - f[hi * stride]);
        }
        g[i * stride] = acc;
      }
    }
  }
}

double mean(std::span<const double> f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s / static_cast<double>(f.size());
}

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / static_cast<double>(a.size());
}

double log_mean_exp(std::span<const double> f, double k) {
  require(k > 0.0, "log_mean_exp: k must be positive");
  const double top = *std::max_element(f.begin(), f.end());
  double s = 0.0;
  for (double v : f) s += std::exp(k * (v - top));
  return top + std::log(s / static_cast<double>(f.size())) / k;
}

VectorField gradient_x(const ScalarField& f) {
  check_finite(f.values(), "gradient_x");
  VectorField out(f.grid());
  for (int a = 0; a < f.grid().n(); ++a) diff_axis(f.grid(), a, f.values(), out.component(a));
  return out;
}

ScalarField divergence_x(const VectorField& field) {
  ScalarField out(field.grid());
  std::vector<double> tmp(field.grid().size());
  for (int a = 0; a < field.dim(); ++a) {
    check_finite(field.component(a), "divergence_x");
    diff_axis(field.grid(), a, field.component(a), tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) out[i] += tmp[i];
  }
  return out;
}

double integrate(const ScalarField& f) { return mean(f.values()); }

double inner(const ScalarField& a, const ScalarField& b) {
  require(a.grid().same_shape(b.grid()), "inner: grid mismatch");
  return inner(a.values(), b.values());
}

double inner(const VectorField& a, const VectorField& b) {
  require(a.grid().same_shape(b.grid()) && a.dim() == b.dim(), "inner: grid mismatch");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += inner(a.component(i), b.component(i));
  return s;
}

double log_mean_exp(const ScalarField& f, double k) { return log_mean_exp(f.values(), k); }

}  // namespace wkam
