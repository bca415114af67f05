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

#ifndef WKAM_TORUS_FIELD_HPP
#define WKAM_TORUS_FIELD_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace wkam {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class DiffMode { spectral, central };

/// Uniform product grid on T^n x T^m, period 2*pi on every axis.
///
/// Nodes are stored with the spatial axes innermost: all N_x^n spatial nodes
/// of one angle node (a "fiber") are contiguous, and spatial axis 0 has unit
/// stride. With m == 0 there is exactly one fiber.
class TorusGrid {
 public:
  /// Supported envelope: 1 <= n <= 2, 0 <= m <= 2, nx >= 4 and even,
  /// nphi >= 1 (ignored when m == 0).
  TorusGrid(int n, int m, int nx, int nphi = 1,
            DiffMode mode = DiffMode::spectral);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int nx() const noexcept { return nx_; }
  int nphi() const noexcept { return nphi_; }
  DiffMode mode() const noexcept { return mode_; }

  std::size_t size() const noexcept { return fiber_size_ * fiber_count_; }
  std::size_t fiber_size() const noexcept { return fiber_size_; }
  std::size_t fiber_count() const noexcept { return fiber_count_; }

  double hx() const noexcept { return kTwoPi / nx_; }
  double hphi() const noexcept { return kTwoPi / nphi_; }

  /// Spatial coordinate of `node` along axis `axis` (< n).
  double x(std::size_t node, int axis) const;
  /// Angle coordinate of `node` along angle axis `axis` (< m).
  double phi(std::size_t node, int axis) const;
  /// Angle coordinates of fiber `fiber`.
  void fiber_phi(std::size_t fiber, std::span<double> out) const;

  /// Grid with the same spatial layout and no angle axes.
  TorusGrid spatial_only() const;

  /// Antisymmetric circulant derivative stencil as (offset d, coefficient
  /// c_d) pairs for 1 <= d < nx/2; the full row is c_{nx-d} = -c_d.
  std::span<const std::pair<int, double>> stencil() const noexcept {
    return *stencil_;
  }

  bool same_shape(const TorusGrid& other) const noexcept;

 private:
  int n_, m_, nx_, nphi_;
  DiffMode mode_;
  std::size_t fiber_size_, fiber_count_;
  std::shared_ptr<const std::vector<std::pair<int, double>>> stencil_;
};

class ScalarField {
 public:
  explicit ScalarField(TorusGrid grid);
  ScalarField(TorusGrid grid, std::vector<double> values);

  /// Samples f(x, phi) at every node; x has n entries and phi has m.
  template <class F>
  static ScalarField sample(const TorusGrid& grid, F&& f) {
    ScalarField out(grid);
    std::vector<double> x(grid.n()), phi(grid.m());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (int a = 0; a < grid.n(); ++a) x[a] = grid.x(i, a);
      for (int a = 0; a < grid.m(); ++a) phi[a] = grid.phi(i, a);
      out.values_[i] = f(std::span<const double>(x), std::span<const double>(phi));
    }
    return out;
  }

  const TorusGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  bool all_finite() const noexcept;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

class VectorField {
 public:
  explicit VectorField(TorusGrid grid);

  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return static_cast<int>(components_.size()); }
  std::span<const double> component(int i) const { return components_.at(i); }
  std::span<double> component(int i) { return components_.at(i); }

  bool all_finite() const noexcept;

 private:
  TorusGrid grid_;
  std::vector<std::vector<double>> components_;
};

// Raw kernels used by the solver hot loops. Input and output must not alias.
void diff_axis(const TorusGrid& grid, int axis, std::span<const double> in,
               std::span<double> out);
double mean(std::span<const double> f);
double inner(std::span<const double> a, std::span<const double> b);
double log_mean_exp(std::span<const double> f, double k);

/// Discrete spatial gradient; angle axes are never differentiated.
VectorField gradient_x(const ScalarField& f);
/// Discrete divergence, the negative adjoint of gradient_x under `inner`.
ScalarField divergence_x(const VectorField& field);
/// Normalized quadrature: integrate(1) == 1.
double integrate(const ScalarField& f);
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);
/// (1/k) log integrate(exp(k f)), evaluated with max subtraction.
double log_mean_exp(const ScalarField& f, double k);

}  // namespace wkam

#endif  // WKAM_TORUS_FIELD_HPP
