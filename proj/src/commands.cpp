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

#include "wkam/commands.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "format.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "wkam/mather_measures.hpp"
#include "wkam/oracle_1d.hpp"
#include "wkam/run_config.hpp"
#include "wkam/swing_sim.hpp"
#include "wkam/verify.hpp"

#ifndef WKAM_VERSION
#define WKAM_VERSION "unknown"
#endif

namespace wkam {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using detail::fmt;

constexpr double kConvexityThreshold = 1e-3;
constexpr double kCompareStep = 0.01;

struct Ctx {
  RunConfig cfg;
  fs::path out;
  int jobs = 1;
  std::ostream* log = nullptr;

  void say(const std::string& line) const {
    if (log) *log << line << std::endl;
  }
};

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path), f_(path) {
    if (!f_) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
    f_ << "\n";
  }
  ~Csv() { f_.flush(); }

 private:
  fs::path path_;
  std::ofstream f_;
};

std::vector<std::string> axis_names(const std::string& base, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i) out.push_back(count == 1 ? base : base + "_" + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& row, const std::vector<double>& v) {
  for (double x : v) row.push_back(fmt(x));
}

json versions() {
  return {{"wkam", WKAM_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"fftw", std::string(fftw_version)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

json config_echo(const RunConfig& cfg) {
  json out = json::object();
  std::istringstream in(serialize_config(cfg));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

json grid_echo(const TorusGrid& g) {
  return {{"n", g.n()}, {"m", g.m()}, {"nx", g.nx()}, {"nphi", g.m() ? g.nphi() : 1},
          {"diff", g.mode() == DiffMode::spectral ? "spectral" : "central"}};
}

json manifest_header(const Ctx& ctx, const std::string& command) {
  json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["status"] = "ok";
  j["config"] = config_echo(ctx.cfg);
  j["versions"] = versions();
  return j;
}

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json solve_record(const CellSolution& s) {
  json r;
  r["P"] = s.P;
  r["k"] = s.k;
  r["tau"] = s.tau;
  r["Hbar_k"] = s.Hbar_k;
  r["grad_norm"] = s.grad_norm;
  r["el_residual"] = s.el_residual;
  r["iterations"] = s.iterations;
  r["sup_Dxu"] = s.sup_Dxu;
  r["status"] = to_string(s.status);
  r["resolution_warning"] = s.resolution_warning;
  if (s.fiber_values.size() > 1) r["fiber_values"] = s.fiber_values;
  return r;
}

json stats_record(const MeasureStats& m) {
  return {{"Q", m.Q},
          {"energy_mean", m.energy_mean},
          {"energy_var", m.energy_var},
          {"energy_max", m.energy_max},
          {"closedness", m.closedness},
          {"tail_mass", m.tail_mass},
          {"tail_speed", m.tail_speed},
          {"Lbar_Q", opt_number(m.Lbar_Q)},
          {"duality_gap", opt_number(m.duality_gap)},
          {"Lbar_at_boundary", m.Lbar_at_boundary},
          {"renormalization", m.renormalization}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  f << std::setw(2) << j << "\n";
}

// Deterministic order: lexicographic in P.
std::vector<std::size_t> order_by_P(const std::vector<detail::MomentumRun>& runs) {
  std::vector<std::size_t> idx(runs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return runs[a].P < runs[b].P; });
  return idx;
}

void append_runs(json& manifest, json& timing, const std::vector<detail::MomentumRun>& runs) {
  json solves = json::array(), failures = json::array(), per = json::array(), fibers = json::array();
  for (std::size_t i : order_by_P(runs)) {
    const auto& run = runs[i];
    for (std::size_t s = 0; s < run.cont.solutions.size(); ++s) {
      json rec = solve_record(run.cont.solutions[s]);
      if (s < run.stats.size()) rec["measures"] = stats_record(run.stats[s]);
      solves.push_back(std::move(rec));
    }
    if (run.failed) {
      failures.push_back({{"P", run.P},
                          {"error", run.error},
                          {"failed_tau", run.cont.ok ? json(nullptr) : json(run.cont.failed_tau)},
                          {"failed_k", run.cont.ok ? json(nullptr) : json(run.cont.failed_k)}});
    }
    if (run.fiber && !run.cont.solutions.empty()) {
      const auto& fv = run.fiber->fiber_values;
      double jump = 0.0;
      for (std::size_t f = 0; f < fv.size(); ++f) jump = std::max(jump, std::abs(fv[(f + 1) % fv.size()] - fv[f]));
      fibers.push_back({{"P", run.P},
                        {"k", run.fiber->k},
                        {"Hbar_k_fibers", run.fiber->Hbar_k},
                        {"Hbar_k_joint", run.cont.solutions.back().Hbar_k},
                        {"abs_difference", std::abs(run.fiber->Hbar_k - run.cont.solutions.back().Hbar_k)},
                        {"max_adjacent_jump", jump},
                        {"status", to_string(run.fiber->status)},
                        {"fiber_values", fv}});
    }
    per.push_back({{"P", run.P}, {"seconds", run.seconds}});
  }
  manifest["solves"] = std::move(solves);
  manifest["failures"] = std::move(failures);
  if (!fibers.empty()) manifest["fiber_check"] = std::move(fibers);
  timing["per_momentum"] = std::move(per);
}

void write_solve_csvs(const Ctx& ctx, const std::vector<detail::MomentumRun>& runs, int n, const std::string& prefix) {
  std::vector<std::string> h = axis_names("P", n);
  for (const char* c : {"k", "tau", "Hbar_k", "grad_norm", "el_residual", "iterations", "sup_Dxu", "status"}) h.push_back(c);
  Csv hk(ctx.out / (prefix + "hbar_vs_k.csv"), h);
  std::vector<std::string> mh = axis_names("P", n);
  mh.push_back("k");
  for (const auto& q : axis_names("Q", n)) mh.push_back(q);
  for (const char* c : {"energy_mean", "energy_var", "energy_max", "closedness", "tail_mass", "tail_speed", "Lbar_Q",
                        "duality_gap"})
    mh.push_back(c);
  Csv ms(ctx.out / (prefix + "measures.csv"), mh);
  for (std::size_t i : order_by_P(runs)) {
    const auto& run = runs[i];
    for (std::size_t s = 0; s < run.cont.solutions.size(); ++s) {
      const CellSolution& sol = run.cont.solutions[s];
      std::vector<std::string> row;
      append(row, run.P);
      append(row, {sol.k, sol.tau, sol.Hbar_k, sol.grad_norm, sol.el_residual});
      row.push_back(std::to_string(sol.iterations));
      row.push_back(fmt(sol.sup_Dxu));
      row.push_back(to_string(sol.status));
      hk.row(row);
      if (s < run.stats.size()) {
        const MeasureStats& m = run.stats[s];
        std::vector<std::string> r2;
        append(r2, run.P);
        r2.push_back(fmt(sol.k));
        append(r2, m.Q);
        append(r2, {m.energy_mean, m.energy_var, m.energy_max, m.closedness, m.tail_mass, m.tail_speed});
        r2.push_back(m.Lbar_Q ? fmt(*m.Lbar_Q) : "");
        r2.push_back(m.duality_gap ? fmt(*m.duality_gap) : "");
        ms.row(r2);
      }
    }
  }
}

GibbsMeasure final_measure(const detail::MomentumRun& run, const HamiltonianModel& model, const TorusGrid& grid) {
  const CellSolution& s = run.cont.solutions.back();
  return gibbs_measure(s, CellProblem{model, run.P, s.k, grid, 1.0});
}

json sigma_profile(const GibbsMeasure& mu, const detail::MomentumRun& run, const TorusGrid& g) {
  std::vector<double> x(g.nx()), prof(g.nx(), 0.0);
  const double w = static_cast<double>(g.nx()) / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) prof[i % g.nx()] += w * mu.sigma[i];
  for (int i = 0; i < g.nx(); ++i) x[i] = g.x(static_cast<std::size_t>(i), 0);
  return {{"P", run.P}, {"k", mu.k}, {"x", x}, {"sigma", prof}};
}

void dump_sigma(const fs::path& path, const GibbsMeasure& mu, const TorusGrid& g) {
  std::vector<std::string> h = axis_names("x", g.n());
  for (const auto& p : axis_names("phi", g.m())) h.push_back(p);
  h.push_back("sigma");
  Csv c(path, h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::vector<std::string> row;
    for (int a = 0; a < g.n(); ++a) row.push_back(fmt(g.x(i, a)));
    for (int a = 0; a < g.m(); ++a) row.push_back(fmt(g.phi(i, a)));
    row.push_back(fmt(mu.sigma[i]));
    c.row(row);
  }
}

void write_fiber_csv(const fs::path& path, const CellSolution& s, const TorusGrid& g) {
  std::vector<std::string> h{"fiber"};
  for (const auto& p : axis_names("phi", g.m())) h.push_back(p);
  h.push_back("value");
  Csv c(path, h);
  std::vector<double> phi(g.m());
  for (std::size_t f = 0; f < s.fiber_values.size(); ++f) {
    g.fiber_phi(f, phi);
    std::vector<std::string> row{std::to_string(f)};
    append(row, phi);
    row.push_back(fmt(s.fiber_values[f]));
    c.row(row);
  }
}

int failure_exit(const std::vector<detail::MomentumRun>& runs) {
  int code = exit_ok;
  for (const auto& r : runs)
    if (r.failed) code = std::max(code, exit_code_for(r.code));
  return code;
}

void finish_status(json& manifest, int code) {
  manifest["status"] = code == exit_ok ? "ok" : code == exit_not_converged ? "not_converged" : code == exit_verify_failed ? "verification_failed" : "error";
}

std::vector<HbarSample> oracle_rows(const Potential1D& pot, const std::vector<double>& Ps) {
  return oracle_table(pot, Ps);
}

// Hbar table for the dual transform of a cell solve.
std::vector<HbarSample> dual_table(const Ctx& ctx, const HamiltonianModel& model, const TorusGrid& grid,
                                   std::string& source) {
  source = ctx.cfg.dual_table == "auto" ? (ctx.cfg.n == 1 ? "solver" : "none") : ctx.cfg.dual_table;
  if (source == "none") return {};
  if (ctx.cfg.n != 1) fail(ErrorCode::unsupported, "dual_table: tables are only available for n = 1");
  const std::vector<double> Ps = ctx.cfg.dual_range.expand();
  if (source == "oracle") {
    const auto pot = detail::oracle_potential(model);
    if (!pot) fail(ErrorCode::unsupported, "dual_table = oracle needs an n = 1, m = 0 mechanical model");
    return oracle_rows(*pot, Ps);
  }
  std::vector<std::vector<double>> momenta;
  for (double p : Ps) momenta.push_back({p});
  ctx.say("building Hbar table over " + std::to_string(Ps.size()) + " momenta");
  return detail::final_k_table(detail::run_momenta(ctx.cfg, model, grid, momenta, {}, false, ctx.jobs));
}

CommandResult cmd_cell(const Ctx& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const auto momenta = cfg.momenta();
  if (momenta.size() != 1) {
    const auto it = cfg.lines.find(cfg.P_range ? "P_range" : "P");
    fail(ErrorCode::invalid_argument,
         (it == cfg.lines.end() ? std::string("config") : "config line " + std::to_string(it->second)) +
             " ('P'): cell needs exactly one momentum");
  }
  const HamiltonianModel model = cfg.build_model();
  const TorusGrid grid = cfg.build_grid();
  const auto t0 = std::chrono::steady_clock::now();
  std::string source;
  const auto table = dual_table(ctx, model, grid, source);
  ctx.say("solving P = " + fmt(momenta[0][0]) + (cfg.n > 1 ? ", ..." : ""));
  std::vector<detail::MomentumRun> runs{detail::run_momentum(cfg, model, grid, momenta[0], table, true, ctx.jobs)};
  const auto& run = runs[0];

  json manifest = manifest_header(ctx, "cell");
  manifest["grid"] = grid_echo(grid);
  manifest["dual_table_source"] = source;
  json timing;
  append_runs(manifest, timing, runs);
  write_solve_csvs(ctx, runs, grid.n(), "");
  if (!run.cont.solutions.empty()) {
    const GibbsMeasure mu = final_measure(run, model, grid);
    manifest["sigma_profile"] = sigma_profile(mu, run, grid);
    if (cfg.dump_sigma) dump_sigma(ctx.out / "sigma.csv", mu, grid);
    const CellSolution& last = run.fiber ? *run.fiber : run.cont.solutions.back();
    if (grid.m() >= 1) write_fiber_csv(ctx.out / "fiber_values.csv", last, grid);
  }
  const int code = failure_exit(runs);
  finish_status(manifest, code);
  timing["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["timing"] = timing;
  write_json(ctx.out / "manifest.json", manifest);
  for (const auto& s : run.cont.solutions)
    ctx.say("k = " + fmt(s.k) + "  Hbar_k = " + fmt(s.Hbar_k) + "  iterations = " + std::to_string(s.iterations));
  return {code, ctx.out.string(), (ctx.out / "manifest.json").string(), code == exit_ok ? "ok" : run.error};
}

double convexity_violation(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const auto [a, fa] = pts[i - 1];
    const auto [b, fb] = pts[i];
    const auto [c, fc] = pts[i + 1];
    const double w = (c - b) / (c - a);
    worst = std::max(worst, fb - (w * fa + (1.0 - w) * fc));
  }
  return worst;
}

CommandResult cmd_sweep(const Ctx& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const auto momenta = cfg.momenta();
  if (momenta.size() < 3) {
    const auto it = cfg.lines.find(cfg.P_range ? "P_range" : "P");
    fail(ErrorCode::invalid_argument,
         (it == cfg.lines.end() ? std::string("config") : "config line " + std::to_string(it->second)) +
             " ('P'): sweep needs at least 3 momenta");
  }
  const HamiltonianModel model = cfg.build_model();
  const TorusGrid grid = cfg.build_grid();
  const auto t0 = std::chrono::steady_clock::now();
  ctx.say("sweeping " + std::to_string(momenta.size()) + " momenta on " + std::to_string(detail::resolve_jobs(ctx.jobs)) +
          " workers");
  auto runs = detail::run_momenta(cfg, model, grid, momenta, {}, true, ctx.jobs);
  // Dual quantities from the sweep's own largest-k column.
  const auto table = detail::final_k_table(runs);
  for (auto& run : runs) {
    if (run.stats.size() != cfg.k_schedule.size() || table.size() < 3) continue;
    MeasureStats& m = run.stats.back();
    const DualValue d = effective_lagrangian(table, m.Q);
    m.Lbar_Q = d.value;
    m.Lbar_at_boundary = d.at_boundary;
    double pq = 0.0;
    for (std::size_t a = 0; a < m.Q.size(); ++a) pq += run.P[a] * m.Q[a];
    m.duality_gap = d.value + run.cont.solutions.back().Hbar_k - pq;
  }

  json manifest = manifest_header(ctx, "sweep");
  manifest["grid"] = grid_echo(grid);
  json timing;
  append_runs(manifest, timing, runs);
  write_solve_csvs(ctx, runs, grid.n(), "");

  std::vector<std::string> h = axis_names("P", grid.n());
  for (double k : cfg.k_schedule) h.push_back("Hbar_k=" + fmt(k));
  h.push_back("status");
  Csv tab(ctx.out / "hbar_table.csv", h);
  std::vector<std::pair<double, double>> last_col;
  for (std::size_t i : order_by_P(runs)) {
    const auto& run = runs[i];
    std::vector<std::string> row;
    append(row, run.P);
    for (std::size_t s = 0; s < cfg.k_schedule.size(); ++s)
      row.push_back(s < run.cont.solutions.size() ? fmt(run.cont.solutions[s].Hbar_k) : "");
    row.push_back(run.failed ? "failed" : "ok");
    tab.row(row);
    if (!run.failed && run.cont.solutions.size() == cfg.k_schedule.size())
      last_col.emplace_back(run.P[0], run.cont.solutions.back().Hbar_k);
  }
  if (grid.n() == 1) {
    const double viol = convexity_violation(last_col);
    manifest["convexity"] = {{"k", cfg.k_schedule.back()},
                             {"max_violation", viol},
                             {"threshold", kConvexityThreshold},
                             {"pass", viol <= kConvexityThreshold}};
    ctx.say("convexity violation on the k = " + fmt(cfg.k_schedule.back()) + " column: " + fmt(viol));
  }
  if (cfg.dump_sigma) {
    for (std::size_t i : order_by_P(runs))
      if (!runs[i].cont.solutions.empty())
        dump_sigma(ctx.out / ("sigma_" + std::to_string(i) + ".csv"), final_measure(runs[i], model, grid), grid);
  }
  const int code = failure_exit(runs);
  finish_status(manifest, code);
  timing["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["timing"] = timing;
  write_json(ctx.out / "manifest.json", manifest);
  std::size_t failed = 0;
  for (const auto& r : runs) failed += r.failed;
  return {code, ctx.out.string(), (ctx.out / "manifest.json").string(),
          failed ? std::to_string(failed) + " of " + std::to_string(runs.size()) + " momenta failed" : "ok"};
}

CommandResult cmd_oracle(const Ctx& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const HamiltonianModel model = cfg.build_model();
  const auto pot = detail::oracle_potential(model);
  if (!pot) fail(ErrorCode::unsupported, "oracle: model must be n = 1, m = 0, mechanical and untilted");
  std::vector<double> Ps;
  for (const auto& p : cfg.momenta()) Ps.push_back(p[0]);
  std::vector<HbarSample> rows(Ps.size());
  detail::parallel_for(Ps.size(), ctx.jobs, [&](std::size_t i) { rows[i] = {{Ps[i]}, effective_hamiltonian_1d(*pot, Ps[i])}; });
  Csv c(ctx.out / "oracle.csv", {"P", "Hbar"});
  json table = json::array();
  for (const auto& r : rows) {
    c.row({fmt(r.P[0]), fmt(r.Hbar)});
    table.push_back({{"P", r.P[0]}, {"Hbar", r.Hbar}});
  }
  json manifest = manifest_header(ctx, "oracle");
  manifest["oracle"] = {{"V_max", pot->v_max()},
                        {"V_min", pot->v_min()},
                        {"critical_momentum", critical_momentum(*pot)},
                        {"table", table}};
  write_json(ctx.out / "manifest.json", manifest);
  ctx.say("oracle table with " + std::to_string(rows.size()) + " rows, flat piece |P| <= " + fmt(critical_momentum(*pot)));
  return {exit_ok, ctx.out.string(), (ctx.out / "manifest.json").string(), "ok"};
}

SwingParams swing_params(const RunConfig& cfg, const HamiltonianModel& model) {
  if (model.swing()) return *model.swing();
  SwingParams p;
  p.n = cfg.n;
  p.m = cfg.m;
  p.alpha.assign(cfg.n, 0.0);
  p.lambda.assign(cfg.n, 0.5);
  p.omega.assign(cfg.m, 1.0);
  p.beta.assign(static_cast<std::size_t>(cfg.n * cfg.n), TrigSeries{});
  return p;
}

CommandResult cmd_simulate(const Ctx& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const HamiltonianModel model = cfg.build_model();
  const SwingParams sp = swing_params(cfg, model);
  const auto t0 = std::chrono::steady_clock::now();
  const SwingTrajectory traj = integrate_swing(sp, cfg.sim_x0, cfg.sim_y0, cfg.sim_T, cfg.sim_dt, {cfg.sim_dt_record});
  const auto rot = rotation_number(traj, cfg.sim_burn_in);
  const int n = traj.n;
  {
    std::vector<std::string> h{"t"};
    for (const auto& s : axis_names("x", n)) h.push_back(s);
    for (const auto& s : axis_names("y", n)) h.push_back(s);
    h.push_back("energy");
    Csv c(ctx.out / "trajectory.csv", h);
    for (std::size_t s = 0; s < traj.samples(); ++s) {
      std::vector<std::string> row{fmt(traj.times[s])};
      for (int i = 0; i < n; ++i) {
        double x = traj.x[s * n + i];
        if (!cfg.unwrap) {
          x = std::fmod(x, kTwoPi);
          if (x < 0.0) x += kTwoPi;
        }
        row.push_back(fmt(x));
      }
      for (int i = 0; i < n; ++i) row.push_back(fmt(traj.y[s * n + i]));
      row.push_back(fmt(traj.energy[s]));
      c.row(row);
    }
  }
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - traj.energy.front()));
  json manifest = manifest_header(ctx, "simulate");
  manifest["trajectory"] = {{"samples", traj.samples()},
                            {"rotation_number", rot},
                            {"rotation_estimate", traj.rotation_estimate},
                            {"max_energy_deviation", drift}};

  // Homogenized comparison over the configured momenta.
  std::string source = cfg.sim_table;
  const auto pot = detail::oracle_potential(model);
  if (source == "auto") source = n != 1 ? "none" : pot ? "oracle" : model.tilted() ? "none" : "solver";
  if (source != "none" && n != 1) fail(ErrorCode::unsupported, "simulate: comparison needs n = 1");
  if (source == "oracle" && !pot) fail(ErrorCode::unsupported, "sim_table = oracle needs an n = 1, m = 0 mechanical model");
  if (source == "solver" && model.tilted()) fail(ErrorCode::unsupported, "sim_table = solver needs alpha = 0");
  manifest["comparison_table_source"] = source;
  int code = exit_ok;
  if (source != "none") {
    std::vector<double> Ps;
    for (const auto& p : cfg.momenta()) Ps.push_back(p[0]);
    std::vector<double> nodes;
    for (double p : Ps)
      for (double d : {-kCompareStep, 0.0, kCompareStep}) nodes.push_back(p + d);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                nodes.end());
    std::vector<HbarSample> table;
    if (source == "oracle") {
      table = oracle_rows(*pot, nodes);
    } else {
      std::vector<std::vector<double>> momenta;
      for (double p : nodes) momenta.push_back({p});
      const auto runs = detail::run_momenta(cfg, model, cfg.build_grid(), momenta, {}, false, ctx.jobs);
      table = detail::final_k_table(runs);
      if (table.size() != nodes.size()) {
        code = exit_not_converged;
        manifest["comparison_error"] = "some table solves did not converge";
      }
    }
    CompareOptions co{cfg.sim_T, cfg.sim_dt, cfg.sim_dt_record, cfg.sim_burn_in};
    std::vector<ComparisonRow> rows(Ps.size());
    if (code == exit_ok) {
      detail::parallel_for(Ps.size(), ctx.jobs, [&](std::size_t i) {
        const double one[1] = {Ps[i]};
        rows[i] = compare_with_homogenization(sp, table, one, co).front();
      });
      Csv c(ctx.out / "comparison.csv", {"P", "rot_measured", "rot_predicted", "gap"});
      json arr = json::array();
      for (const auto& r : rows) {
        c.row({fmt(r.P), fmt(r.rotation_measured), fmt(r.rotation_predicted), fmt(r.gap)});
        arr.push_back({{"P", r.P}, {"rot_measured", r.rotation_measured}, {"rot_predicted", r.rotation_predicted}, {"gap", r.gap}});
        ctx.say("P = " + fmt(r.P) + "  rotation " + fmt(r.rotation_measured) + "  predicted " + fmt(r.rotation_predicted));
      }
      manifest["comparison"] = arr;
    }
  }
  finish_status(manifest, code);
  manifest["timing"] = {{"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  write_json(ctx.out / "manifest.json", manifest);
  return {code, ctx.out.string(), (ctx.out / "manifest.json").string(), code == exit_ok ? "ok" : "comparison table failed"};
}

CommandResult cmd_verify(const Ctx& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = run_verify_suite(ctx.cfg, ctx.jobs);
  Csv c(ctx.out / "verify_report.csv", {"module", "invariant", "anchor", "value", "threshold", "pass"});
  json arr = json::array();
  std::size_t failed = 0;
  for (const auto& ch : checks) {
    // Anchors may contain commas; quote them.
    c.row({ch.module, "\"" + ch.name + "\"", "\"" + ch.anchor + "\"", fmt(ch.value), fmt(ch.threshold), ch.pass ? "true" : "false"});
    arr.push_back({{"module", ch.module},
                   {"invariant", ch.name},
                   {"anchor", ch.anchor},
                   {"value", ch.value},
                   {"threshold", ch.threshold},
                   {"pass", ch.pass},
                   {"detail", ch.detail}});
    failed += !ch.pass;
    ctx.say(std::string(ch.pass ? "PASS " : "FAIL ") + ch.module + ": " + ch.name + " (" + ch.anchor + ") value " +
            fmt(ch.value) + " threshold " + fmt(ch.threshold));
  }
  json manifest = manifest_header(ctx, "verify");
  manifest["checks"] = arr;
  manifest["summary"] = {{"total", checks.size()}, {"failed", failed}};
  const int code = failed ? exit_verify_failed : exit_ok;
  finish_status(manifest, code);
  manifest["timing"] = {{"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  write_json(ctx.out / "manifest.json", manifest);
  return {code, ctx.out.string(), (ctx.out / "manifest.json").string(),
          failed ? std::to_string(failed) + " of " + std::to_string(checks.size()) + " checks failed"
                 : "all " + std::to_string(checks.size()) + " checks passed"};
}

std::vector<double> as_vector(const json& v) {
  if (v.is_array()) return v.get<std::vector<double>>();
  return {v.get<double>()};
}

CommandResult cmd_report(const std::string& manifest_path, const fs::path& out, std::ostream* log) {
  std::ifstream f(manifest_path);
  if (!f) fail(ErrorCode::io, "report: cannot read manifest '" + manifest_path + "'");
  json m;
  try {
    m = json::parse(f);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("report: corrupt manifest: ") + e.what());
  }
  if (!m.is_object() || !m.contains("schema_version") || !m.contains("command"))
    fail(ErrorCode::parse, "report: '" + manifest_path + "' is not a wkam manifest");
  fs::create_directories(out);
  std::vector<std::string> written;
  try {
    if (m.contains("solves") && !m["solves"].empty()) {
      struct Row {
        std::vector<double> P;
        double k, H;
      };
      std::vector<Row> rows;
      for (const auto& s : m["solves"]) rows.push_back({as_vector(s.at("P")), s.at("k").get<double>(), s.at("Hbar_k").get<double>()});
      std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.P != b.P ? a.P < b.P : a.k < b.k; });
      const int n = static_cast<int>(rows.front().P.size());
      std::vector<std::string> h = axis_names("P", n);
      h.push_back("k");
      h.push_back("Hbar_k");
      {
        Csv c(out / "Hbar_vs_k.csv", h);
        for (const auto& r : rows) {
          std::vector<std::string> row;
          append(row, r.P);
          append(row, {r.k, r.H});
          c.row(row);
        }
      }
      {
        Csv c(out / "Hbar_vs_P.csv", h);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (i + 1 < rows.size() && rows[i + 1].P == rows[i].P) continue;  // keep the largest k
          std::vector<std::string> row;
          append(row, rows[i].P);
          append(row, {rows[i].k, rows[i].H});
          c.row(row);
        }
      }
      written.insert(written.end(), {"Hbar_vs_k.csv", "Hbar_vs_P.csv"});
    }
    if (m.contains("sigma_profile")) {
      const auto& sp = m["sigma_profile"];
      const auto x = sp.at("x").get<std::vector<double>>();
      const auto s = sp.at("sigma").get<std::vector<double>>();
      if (x.size() != s.size()) fail(ErrorCode::parse, "report: sigma_profile columns differ in length");
      Csv c(out / "sigma_profile.csv", {"x", "sigma"});
      for (std::size_t i = 0; i < x.size(); ++i) c.row({fmt(x[i]), fmt(s[i])});
      written.push_back("sigma_profile.csv");
    }
    if (m.contains("comparison")) {
      Csv c(out / "rotation_comparison.csv", {"P", "rot_measured", "rot_predicted", "gap"});
      for (const auto& r : m["comparison"])
        c.row({fmt(r.at("P").get<double>()), fmt(r.at("rot_measured").get<double>()),
               fmt(r.at("rot_predicted").get<double>()), fmt(r.at("gap").get<double>())});
      written.push_back("rotation_comparison.csv");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string("report: corrupt manifest: ") + e.what());
  }
  if (written.empty()) fail(ErrorCode::invalid_argument, "report: manifest has no reportable tables");
  std::string msg = "wrote";
  for (const auto& w : written) msg += " " + w;
  if (log) *log << msg << std::endl;
  return {exit_ok, out.string(), manifest_path, msg};
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_converged:
    case ErrorCode::non_finite:
      return exit_not_converged;
    default:
      return exit_validation;
  }
}

CommandResult run_command(const CommandRequest& request, std::ostream* log) {
  static const char* const known[] = {"cell", "sweep", "oracle", "simulate", "verify", "report"};
  if (std::find(std::begin(known), std::end(known), request.command) == std::end(known))
    return {exit_validation, {}, {}, "unknown command '" + request.command + "'"};
  try {
    const char* env = std::getenv(kOutDirEnv);
    if (request.command == "report") {
      if (request.manifest_path.empty()) fail(ErrorCode::invalid_argument, "report: a manifest path is required");
      fs::path out = request.out_dir ? fs::path(*request.out_dir)
                     : env && *env ? fs::path(env)
                                   : fs::path(request.manifest_path).parent_path();
      if (out.empty()) out = ".";
      return cmd_report(request.manifest_path, out, log);
    }
    Ctx ctx;
    ctx.log = log;
    ctx.cfg = request.config_path ? load_config(*request.config_path) : RunConfig{};
    if (request.seed) ctx.cfg.seed = *request.seed;
    if (request.jobs) ctx.cfg.jobs = *request.jobs;
    if (request.dump_sigma) ctx.cfg.dump_sigma = true;
    if (env && *env) ctx.cfg.out_dir = env;
    if (request.out_dir) ctx.cfg.out_dir = *request.out_dir;
    ctx.cfg.validate();
    ctx.jobs = ctx.cfg.jobs;
    ctx.out = ctx.cfg.out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) fail(ErrorCode::io, "cannot create output directory '" + ctx.out.string() + "': " + ec.message());
    if (request.command == "cell") return cmd_cell(ctx);
    if (request.command == "sweep") return cmd_sweep(ctx);
    if (request.command == "oracle") return cmd_oracle(ctx);
    if (request.command == "simulate") return cmd_simulate(ctx);
    return cmd_verify(ctx);
  } catch (const Error& e) {
    return {exit_code_for(e.code()), {}, {}, e.what()};
  } catch (const std::exception& e) {
    return {exit_validation, {}, {}, std::string("internal error: ") + e.what()};
  }
}

}  // namespace wkam
