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

#include "poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

namespace wkam::detail {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double symbol(int j, int nx, DiffMode mode) {
  const int js = j <= nx / 2 ? j : j - nx;
  if (mode == DiffMode::central) return std::sin(js * kTwoPi / nx) / (kTwoPi / nx);
  return (js == nx / 2 || js == -nx / 2) ? 0.0 : static_cast<double>(js);
}

}  // namespace

struct PoissonInverse::Impl {
  std::size_t fiber_size = 0, fiber_count = 0, spectrum_size = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr, backward = nullptr;
  std::vector<double> weight;
};

PoissonInverse::PoissonInverse(const TorusGrid& grid) : impl_(std::make_unique<Impl>()) {
  const int nx = grid.nx();
  impl_->fiber_size = grid.fiber_size();
  impl_->fiber_count = grid.fiber_count();
  const int half = nx / 2 + 1;
  impl_->spectrum_size = grid.n() == 1 ? half : static_cast<std::size_t>(nx) * half;
  impl_->real = fftw_alloc_real(impl_->fiber_size);
  impl_->spec = fftw_alloc_complex(impl_->spectrum_size);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (grid.n() == 1) {
      impl_->forward = fftw_plan_dft_r2c_1d(nx, impl_->real, impl_->spec, FFTW_ESTIMATE);
      impl_->backward = fftw_plan_dft_c2r_1d(nx, impl_->spec, impl_->real, FFTW_ESTIMATE);
    } else {
      // Row-major: spatial axis 1 is the slow index, axis 0 the fast one.
      impl_->forward = fftw_plan_dft_r2c_2d(nx, nx, impl_->real, impl_->spec, FFTW_ESTIMATE);
      impl_->backward = fftw_plan_dft_c2r_2d(nx, nx, impl_->spec, impl_->real, FFTW_ESTIMATE);
    }
  }
  impl_->weight.assign(impl_->spectrum_size, 0.0);
  const double norm = static_cast<double>(impl_->fiber_size);
  for (std::size_t s = 0; s < impl_->spectrum_size; ++s) {
    const int j0 = static_cast<int>(s % half);
    const int j1 = static_cast<int>(s / half);
    double g2 = std::pow(symbol(j0, nx, grid.mode()), 2);
    if (grid.n() == 2) g2 += std::pow(symbol(j1, nx, grid.mode()), 2);
    impl_->weight[s] = g2 > 1e-300 ? 1.0 / (g2 * norm) : 0.0;
  }
}

PoissonInverse::~PoissonInverse() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(impl_->forward);
  fftw_destroy_plan(impl_->backward);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void PoissonInverse::apply(std::span<double> field) const {
  const std::size_t fs = impl_->fiber_size;
  for (std::size_t f = 0; f < impl_->fiber_count; ++f) {
    double* block = field.data() + f * fs;
    std::copy(block, block + fs, impl_->real);
    fftw_execute(impl_->forward);
    for (std::size_t s = 0; s < impl_->spectrum_size; ++s) {
      impl_->spec[s][0] *= impl_->weight[s];
      impl_->spec[s][1] *= impl_->weight[s];
    }
    fftw_execute(impl_->backward);
    std::copy(impl_->real, impl_->real + fs, block);
  }
}

}  // namespace wkam::detail
