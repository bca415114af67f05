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

#include "wkam/swing_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkam/error.hpp"
#include "wkam/torus_field.hpp"

namespace wkam {

namespace {

struct Forcing {
  HamiltonianModel model;
  std::vector<double> omega;
  mutable std::vector<double> phi;
  mutable HamiltonianEval ev;

  explicit Forcing(const SwingParams& p) : model(make_swing(p)), omega(p.omega), phi(p.m) {}

  void at(double t) const {
    for (std::size_t l = 0; l < omega.size(); ++l) phi[l] = std::fmod(omega[l] * t, kTwoPi);
  }
  // Writes -D_x H into f.
  void force(std::span<const double> x, std::span<const double> y, double t, std::span<double> f) const {
    at(t);
    model.eval(x, y, phi, ev);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = -ev.dx[i];
  }
  double energy(std::span<const double> x, std::span<const double> y, double t) const {
    at(t);
    return model.energy(x, y, phi);
  }
};

bool finite_all(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

}  // namespace

SwingTrajectory integrate_swing(const SwingParams& p, std::span<const double> x0,
                                std::span<const double> y0, double T, double dt,
                                IntegrateOptions opts) {
  p.validate();
  const int n = p.n;
  require(static_cast<int>(x0.size()) == n && static_cast<int>(y0.size()) == n,
          "integrate_swing: initial state needs n entries");
  require(finite_all(x0) && finite_all(y0), "integrate_swing: initial state must be finite");
  require(dt > 0.0 && std::isfinite(dt), "integrate_swing: dt must be positive");
  require(std::isfinite(T) && T >= dt, "integrate_swing: T must be at least dt");
  require(opts.dt_record >= 0.0, "integrate_swing: dt_record must be non-negative");

  const double rec = opts.dt_record > 0.0 ? std::max(opts.dt_record, dt) : dt;
  const long per_record = std::max(1L, std::lround(std::ceil(rec / dt - 1e-9)));
  const double h = rec / static_cast<double>(per_record);
  const std::size_t records = static_cast<std::size_t>(std::floor(T / rec + 1e-9)) + 1;

  const Forcing forcing(p);
  SwingTrajectory out;
  out.n = n;
  out.times.reserve(records);
  out.x.reserve(records * n);
  out.y.reserve(records * n);
  out.energy.reserve(records);

  std::vector<double> x(x0.begin(), x0.end()), y(y0.begin(), y0.end()), f(n);
  auto record = [&](double t) {
    out.times.push_back(t);
    out.x.insert(out.x.end(), x.begin(), x.end());
    out.y.insert(out.y.end(), y.begin(), y.end());
    out.energy.push_back(forcing.energy(x, y, t));
  };
  record(0.0);
  forcing.force(x, y, 0.0, f);
  for (std::size_t r = 1; r < records; ++r) {
    for (long s = 0; s < per_record; ++s) {
      const double t1 = (static_cast<double>(r - 1) * per_record + s + 1) * h;
      for (int i = 0; i < n; ++i) y[i] += 0.5 * h * f[i];
      for (int i = 0; i < n; ++i) x[i] += h * y[i];
      forcing.force(x, y, t1, f);
      for (int i = 0; i < n; ++i) y[i] += 0.5 * h * f[i];
    }
    if (!finite_all(x) || !finite_all(y)) {
      std::ostringstream msg;
      msg << "integrate_swing: state became non-finite after sample " << (r - 1) << " (t = "
          << out.times.back() << ")";
      fail(ErrorCode::non_finite, msg.str());
    }
    record(static_cast<double>(r) * rec);
  }
  out.rotation_estimate.resize(n);
  const double span_t = out.times.back();
  for (int i = 0; i < n; ++i)
    out.rotation_estimate[i] = span_t > 0.0 ? (out.x[(records - 1) * n + i] - out.x[i]) / span_t : 0.0;
  return out;
}

std::vector<double> rotation_number(const SwingTrajectory& traj, double burn_in) {
  require(burn_in >= 0.0 && burn_in <= 0.9, "rotation_number: burn_in must be in [0, 0.9]");
  const std::size_t total = traj.samples();
  const std::size_t first = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(total)));
  const std::size_t count = total - std::min(first, total);
  if (count < 10) fail(ErrorCode::invalid_argument, "rotation_number: fewer than 10 samples after burn-in");
  const int n = traj.n;
  double tm = 0.0;
  for (std::size_t s = first; s < total; ++s) tm += traj.times[s];
  tm /= static_cast<double>(count);
  double stt = 0.0;
  for (std::size_t s = first; s < total; ++s) stt += (traj.times[s] - tm) * (traj.times[s] - tm);
  std::vector<double> slope(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double xm = 0.0;
    for (std::size_t s = first; s < total; ++s) xm += traj.x[s * n + i];
    xm /= static_cast<double>(count);
    double stx = 0.0;
    for (std::size_t s = first; s < total; ++s) stx += (traj.times[s] - tm) * (traj.x[s * n + i] - xm);
    slope[i] = stx / stt;
  }
  return slope;
}

namespace {

struct Table1D {
  std::vector<double> P, H, slope;

  explicit Table1D(std::span<const HbarSample> table) {
    require(table.size() >= 3, "compare_with_homogenization: table needs at least 3 rows");
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : table) {
      require(r.P.size() == 1, "compare_with_homogenization: only n = 1 tables are supported");
      rows.emplace_back(r.P[0], r.Hbar);
    }
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(i == 0 || rows[i].first > rows[i - 1].first, "compare_with_homogenization: duplicate P rows");
      P.push_back(rows[i].first);
      H.push_back(rows[i].second);
    }
    // Centered differences inside, one-sided at the ends.
    const std::size_t m = P.size();
    slope.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == m ? i : i + 1;
      slope[i] = (H[b] - H[a]) / (P[b] - P[a]);
    }
  }

  double interp(const std::vector<double>& v, double p) const {
    if (p < P.front() || p > P.back()) {
      std::ostringstream msg;
      msg << "compare_with_homogenization: P = " << p << " is outside the table range";
      fail(ErrorCode::invalid_argument, msg.str());
    }
    const auto it = std::upper_bound(P.begin(), P.end(), p);
    const std::size_t hi = std::min<std::size_t>(it - P.begin(), P.size() - 1);
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    if (hi == lo) return v[lo];
    const double w = (p - P[lo]) / (P[hi] - P[lo]);
    return (1.0 - w) * v[lo] + w * v[hi];
  }
};

}  // namespace

std::vector<ComparisonRow> compare_with_homogenization(const SwingParams& p,
                                                       std::span<const HbarSample> table,
                                                       std::span<const double> P_samples,
                                                       const CompareOptions& opts) {
  p.validate();
  if (p.n != 1) fail(ErrorCode::unsupported, "compare_with_homogenization: only n = 1 is supported");
  const Table1D tab(table);
  const HamiltonianModel model = make_swing(p);
  std::vector<double> phi0(p.m, 0.0);
  double u_max = -std::numeric_limits<double>::infinity();
  constexpr int kProbe = 4096;
  for (int s = 0; s < kProbe; ++s) {
    const double xs[1] = {kTwoPi * s / kProbe}, ys[1] = {0.0};
    u_max = std::max(u_max, model.energy(xs, ys, phi0));
  }
  const double x0[1] = {0.0}, zero[1] = {0.0};
  const double u0 = model.energy(x0, zero, phi0);

  std::vector<ComparisonRow> rows;
  rows.reserve(P_samples.size());
  for (double P : P_samples) {
    const double Hbar = tab.interp(tab.H, P);
    double y0 = P;
    if (Hbar > u_max + 1e-9) y0 = (P < 0.0 ? -1.0 : 1.0) * std::sqrt(2.0 * (Hbar - u0));
    const double y0s[1] = {y0};
    const SwingTrajectory traj = integrate_swing(p, x0, y0s, opts.T, opts.dt, {opts.dt_record});
    ComparisonRow row;
    row.P = P;
    row.rotation_measured = rotation_number(traj, opts.burn_in)[0];
    row.rotation_predicted = tab.interp(tab.slope, P);
    row.gap = std::abs(row.rotation_measured - row.rotation_predicted);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ComparisonRow> compare_with_homogenization(const SwingParams& p,
                                                       std::span<const HbarSample> table,
                                                       std::size_t samples, const CompareOptions& opts) {
  const Table1D tab(table);
  require(samples >= 1, "compare_with_homogenization: need at least one sample");
  const std::size_t interior = tab.P.size() - 2;
  std::vector<double> Ps;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t idx = samples == 1 ? interior / 2 : s * (interior - 1) / (samples - 1);
    Ps.push_back(tab.P[1 + std::min(idx, interior - 1)]);
  }
  Ps.erase(std::unique(Ps.begin(), Ps.end()), Ps.end());
  return compare_with_homogenization(p, table, Ps, opts);
}

}  // namespace wkam
