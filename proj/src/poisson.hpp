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

#ifndef WKAM_SRC_POISSON_HPP
#define WKAM_SRC_POISSON_HPP

#include <memory>
#include <span>

#include "wkam/torus_field.hpp"

namespace wkam::detail {

/// Pseudo-inverse of G^T G, where G is the discrete spatial gradient of the
/// grid (spectral or central), applied independently on every fiber. Modes
/// annihilated by G are mapped to zero. One instance per thread.
class PoissonInverse {
 public:
  explicit PoissonInverse(const TorusGrid& grid);
  ~PoissonInverse();
  PoissonInverse(const PoissonInverse&) = delete;
  PoissonInverse& operator=(const PoissonInverse&) = delete;

  void apply(std::span<double> field) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wkam::detail

#endif  // WKAM_SRC_POISSON_HPP
