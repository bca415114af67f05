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

#include "wkam/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "format.hpp"
#include "wkam/error.hpp"

namespace wkam {

namespace {

using detail::fmt;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string fmt_list(const std::vector<double>& v, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + fmt(v[i]);
  return out;
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  fail(ErrorCode::parse, "config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& s, int line, const std::string& key) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end)
    parse_fail(line, "key '" + key + "': '" + s + "' is not a number");
  return v;
}

long to_long(const std::string& s, int line, const std::string& key) {
  long v = 0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end)
    parse_fail(line, "key '" + key + "': '" + s + "' is not an integer");
  return v;
}

int to_int(const std::string& s, int line, const std::string& key) {
  const long v = to_long(s, line, key);
  if (v < -1000000000L || v > 1000000000L) parse_fail(line, "key '" + key + "': integer out of range");
  return static_cast<int>(v);
}

bool to_bool(const std::string& s, int line, const std::string& key) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  parse_fail(line, "key '" + key + "': expected true or false, got '" + s + "'");
}

std::vector<double> to_list(const std::string& s, int line, const std::string& key) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& item : split(s, ',')) out.push_back(to_double(item, line, key));
  return out;
}

Range to_range(const std::string& s, int line, const std::string& key) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) parse_fail(line, "key '" + key + "': expected start:stop:step");
  return {to_double(parts[0], line, key), to_double(parts[1], line, key), to_double(parts[2], line, key)};
}

// "c0; [w1 w2]: a, b; ..."
TrigSeries to_series(const std::string& s, int line, const std::string& key) {
  TrigSeries out;
  const auto parts = split(s, ';');
  out.constant = to_double(parts[0], line, key);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const std::string& t = parts[i];
    const auto open = t.find('['), close = t.find(']'), colon = t.find(':');
    if (open != 0 || close == std::string::npos || colon == std::string::npos || colon < close)
      parse_fail(line, "key '" + key + "': Fourier term must look like '[w1 w2]: cos_coef, sin_coef'");
    TrigSeries::Term term;
    for (const auto& w : words(t.substr(1, close - 1))) term.wave.push_back(to_int(w, line, key));
    const auto coefs = split(t.substr(colon + 1), ',');
    if (coefs.size() != 2) parse_fail(line, "key '" + key + "': Fourier term needs cos_coef, sin_coef");
    term.cos_coef = to_double(coefs[0], line, key);
    term.sin_coef = to_double(coefs[1], line, key);
    out.terms.push_back(std::move(term));
  }
  return out;
}

std::string fmt_series(const TrigSeries& s) {
  std::string out = fmt(s.constant);
  for (const auto& t : s.terms) {
    out += "; [";
    for (std::size_t i = 0; i < t.wave.size(); ++i) out += (i ? " " : "") + std::to_string(t.wave[i]);
    out += "]: " + fmt(t.cos_coef) + ", " + fmt(t.sin_coef);
  }
  return out;
}

const char* to_string(DiffMode d) { return d == DiffMode::spectral ? "spectral" : "central"; }

// Swing fields not given in the file get neutral defaults so that the
// serialized form is complete.
void complete_swing(RunConfig& c, const std::set<std::string>& seen) {
  if (c.model != "swing") return;
  SwingParams& s = c.swing;
  s.n = c.n;
  s.m = c.m;
  if (!seen.count("alpha")) s.alpha.assign(c.n, 0.0);
  if (!seen.count("lambda")) s.lambda.assign(c.n, 0.5);
  if (!seen.count("omega")) s.omega.assign(c.m, 1.0);
  s.beta.resize(static_cast<std::size_t>(std::max(0, c.n * c.n)));
}

}  // namespace

std::vector<double> Range::expand() const {
  std::vector<double> out;
  if (!(step > 0.0) || !(stop >= start)) return out;
  const long count = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) {
    // Round to six digits below the step so decimal ranges print as written.
    const double scale = std::pow(10.0, 6.0 - std::floor(std::log10(step)));
    double v = std::round((start + static_cast<double>(i) * step) * scale) / scale;
    out.push_back(v == 0.0 ? 0.0 : v);
  }
  return out;
}

std::vector<std::vector<double>> RunConfig::momenta() const {
  if (!P_range) return P;
  std::vector<std::vector<double>> out;
  for (double p : P_range->expand()) out.push_back({p});
  return out;
}

HamiltonianModel RunConfig::build_model() const {
  if (model == "pendulum") return make_pendulum(amplitude);
  if (model == "integrable") return make_integrable(n, m);
  if (model == "swing") {
    SwingParams p = swing;
    p.n = n;
    p.m = m;
    return make_swing(p);
  }
  fail(ErrorCode::invalid_argument, "unknown model '" + model + "'");
}

TorusGrid RunConfig::build_grid() const {
  const int mm = model == "pendulum" ? 0 : m;
  return TorusGrid(model == "pendulum" ? 1 : n, mm, nx, mm == 0 ? 1 : nphi, diff);
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.gtol = gtol;
  o.rtol = rtol;
  o.max_iter = max_iter;
  o.method = optimizer;
  o.lbfgs_memory = lbfgs_memory;
  o.test_modes = test_modes;
  return o;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return serialize_config(*this) == serialize_config(o);
}

void RunConfig::validate() const {
  const auto bad = [this](const std::string& key, const std::string& msg) {
    const auto it = lines.find(key);
    const std::string where =
        it == lines.end() ? "config (default for '" + key + "')" : "config line " + std::to_string(it->second) + " ('" + key + "')";
    fail(ErrorCode::invalid_argument, where + ": " + msg);
  };
  if (model != "pendulum" && model != "integrable" && model != "swing")
    bad("model", "must be pendulum, integrable or swing");
  if (model == "pendulum") {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) bad("amplitude", "must be positive");
    if (n != 1) bad("n", "pendulum has n = 1");
    if (m != 0) bad("m", "pendulum has m = 0");
  }
  if (n < 1 || n > 2) bad("n", "must be 1 or 2");
  if (m < 0 || m > 2) bad("m", "must be in [0, 2]");
  if (model == "swing") {
    if (static_cast<int>(swing.alpha.size()) != n) bad("alpha", "needs n entries");
    if (static_cast<int>(swing.lambda.size()) != n) bad("lambda", "needs n entries");
    if (static_cast<int>(swing.omega.size()) != m) bad("omega", "needs m entries");
    for (double a : swing.alpha)
      if (!(a >= 0.0) || !std::isfinite(a)) bad("alpha", "entries must be finite and non-negative");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (const auto& t : swing.beta_at(i, j).terms)
          if (static_cast<int>(t.wave.size()) != m) {
            const std::string key = "beta." + std::to_string(i + 1) + "." + std::to_string(j + 1);
            bad(key, "wave vectors need m entries");
          }
    try {
      build_model();
    } catch (const Error& e) {
      bad("model", e.what());
    }
  }
  if (nx < 4 || nx % 2 != 0) bad("nx", "must be even and at least 4");
  if (nphi < 1) bad("nphi", "must be at least 1");
  if (P_range) {
    if (n != 1) bad("P_range", "only available for n = 1; use P");
    if (!(P_range->step > 0.0)) bad("P_range", "step must be positive");
    if (!(P_range->stop >= P_range->start)) bad("P_range", "stop must not be below start");
  } else {
    if (P.empty()) bad("P", "needs at least one momentum");
    for (const auto& p : P) {
      if (static_cast<int>(p.size()) != n) bad("P", "every momentum needs n components");
      for (double v : p)
        if (!std::isfinite(v)) bad("P", "entries must be finite");
    }
  }
  if (k_schedule.empty()) bad("k_schedule", "must not be empty");
  for (std::size_t i = 0; i < k_schedule.size(); ++i) {
    if (!(k_schedule[i] > 0.0) || !std::isfinite(k_schedule[i])) bad("k_schedule", "entries must be positive");
    if (i > 0 && !(k_schedule[i] > k_schedule[i - 1])) bad("k_schedule", "must be strictly increasing");
  }
  if (tau_steps < 1) bad("tau_steps", "must be at least 1");
  if (!(gtol > 0.0)) bad("gtol", "must be positive");
  if (!(rtol > 0.0)) bad("rtol", "must be positive");
  if (max_iter < 1) bad("max_iter", "must be at least 1");
  if (lbfgs_memory < 1) bad("lbfgs_memory", "must be at least 1");
  if (test_modes < 1) bad("test_modes", "must be at least 1");
  if (tail_speed && !(*tail_speed >= 0.0)) bad("tail_speed", "must be non-negative");
  for (const auto& [key, value] : {std::pair{"dual_table", &dual_table}, std::pair{"sim_table", &sim_table}})
    if (*value != "auto" && *value != "oracle" && *value != "solver" && *value != "none")
      bad(key, "must be auto, oracle, solver or none");
  if (!(dual_range.step > 0.0) || !(dual_range.stop > dual_range.start)) bad("dual_range", "needs start < stop and step > 0");
  if (!(sim_dt > 0.0)) bad("sim_dt", "must be positive");
  if (!(sim_T >= sim_dt)) bad("sim_T", "must be at least sim_dt");
  if (!(sim_dt_record >= 0.0)) bad("sim_dt_record", "must be non-negative");
  if (!(sim_burn_in >= 0.0 && sim_burn_in <= 0.9)) bad("sim_burn_in", "must be in [0, 0.9]");
  if (static_cast<int>(sim_x0.size()) != n) bad("sim_x0", "needs n entries");
  if (static_cast<int>(sim_y0.size()) != n) bad("sim_y0", "needs n entries");
  if (out_dir.empty()) bad("out_dir", "must not be empty");
  if (jobs < 0) bad("jobs", "must be non-negative");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  using Setter = std::function<void(const std::string&, int, const std::string&)>;
  std::map<std::string, Setter> setters;
  auto num = [&](double& field) {
    return [&field](const std::string& v, int line, const std::string& key) { field = to_double(v, line, key); };
  };
  auto integer = [&](int& field) {
    return [&field](const std::string& v, int line, const std::string& key) { field = to_int(v, line, key); };
  };
  auto boolean = [&](bool& field) {
    return [&field](const std::string& v, int line, const std::string& key) { field = to_bool(v, line, key); };
  };
  auto list = [&](std::vector<double>& field) {
    return [&field](const std::string& v, int line, const std::string& key) { field = to_list(v, line, key); };
  };
  auto word = [&](std::string& field) {
    return [&field](const std::string& v, int, const std::string&) { field = v; };
  };
  setters["model"] = word(c.model);
  setters["amplitude"] = num(c.amplitude);
  setters["n"] = integer(c.n);
  setters["m"] = integer(c.m);
  setters["alpha"] = list(c.swing.alpha);
  setters["lambda"] = list(c.swing.lambda);
  setters["omega"] = list(c.swing.omega);
  setters["nx"] = integer(c.nx);
  setters["nphi"] = integer(c.nphi);
  setters["diff"] = [&](const std::string& v, int line, const std::string& key) {
    if (v == "spectral") c.diff = DiffMode::spectral;
    else if (v == "central") c.diff = DiffMode::central;
    else parse_fail(line, "key '" + key + "': expected spectral or central");
  };
  setters["P"] = [&](const std::string& v, int line, const std::string& key) {
    c.P.clear();
    for (const auto& item : split(v, ',')) {
      std::vector<double> p;
      for (const auto& w : words(item)) p.push_back(to_double(w, line, key));
      if (p.empty()) parse_fail(line, "key 'P': empty momentum");
      c.P.push_back(std::move(p));
    }
  };
  setters["P_range"] = [&](const std::string& v, int line, const std::string& key) { c.P_range = to_range(v, line, key); };
  setters["k_schedule"] = list(c.k_schedule);
  setters["tau_steps"] = integer(c.tau_steps);
  setters["gtol"] = num(c.gtol);
  setters["rtol"] = num(c.rtol);
  setters["max_iter"] = integer(c.max_iter);
  setters["optimizer"] = [&](const std::string& v, int line, const std::string& key) {
    if (v == "lbfgs") c.optimizer = Optimizer::lbfgs;
    else if (v == "newton_krylov" || v == "newton") c.optimizer = Optimizer::newton_krylov;
    else parse_fail(line, "key '" + key + "': expected lbfgs or newton_krylov");
  };
  setters["lbfgs_memory"] = integer(c.lbfgs_memory);
  setters["test_modes"] = integer(c.test_modes);
  setters["fiber_decomposed"] = boolean(c.fiber_decomposed);
  setters["tail_speed"] = [&](const std::string& v, int line, const std::string& key) {
    if (v == "auto") c.tail_speed.reset();
    else c.tail_speed = to_double(v, line, key);
  };
  setters["dual_table"] = word(c.dual_table);
  setters["dual_range"] = [&](const std::string& v, int line, const std::string& key) { c.dual_range = to_range(v, line, key); };
  setters["sim_T"] = num(c.sim_T);
  setters["sim_dt"] = num(c.sim_dt);
  setters["sim_dt_record"] = num(c.sim_dt_record);
  setters["sim_burn_in"] = num(c.sim_burn_in);
  setters["sim_x0"] = list(c.sim_x0);
  setters["sim_y0"] = list(c.sim_y0);
  setters["sim_table"] = word(c.sim_table);
  setters["out_dir"] = word(c.out_dir);
  setters["seed"] = [&](const std::string& v, int line, const std::string& key) {
    std::uint64_t s = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), s);
    if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
      parse_fail(line, "key '" + key + "': expected a non-negative integer");
    c.seed = s;
  };
  setters["dump_sigma"] = boolean(c.dump_sigma);
  setters["unwrap"] = boolean(c.unwrap);
  setters["jobs"] = integer(c.jobs);

  // beta entries need n first, so they are applied after the main pass.
  std::vector<std::tuple<int, int, std::string, int, std::string>> betas;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) parse_fail(line, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) parse_fail(line, "missing key");
    if (!seen.insert(key).second) parse_fail(line, "key '" + key + "' given twice");
    c.lines[key] = line;
    if (key.rfind("beta.", 0) == 0) {
      const auto idx = split(key.substr(5), '.');
      if (idx.size() != 2) parse_fail(line, "beta keys look like beta.I.J");
      betas.emplace_back(to_int(idx[0], line, key), to_int(idx[1], line, key), value, line, key);
      continue;
    }
    const auto it = setters.find(key);
    if (it == setters.end()) parse_fail(line, "unknown key '" + key + "'");
    it->second(value, line, key);
  }
  complete_swing(c, seen);
  // Unset initial data repeats the scalar default along every axis.
  if (c.n >= 1 && !seen.contains("sim_x0")) c.sim_x0.assign(c.n, c.sim_x0.front());
  if (c.n >= 1 && !seen.contains("sim_y0")) c.sim_y0.assign(c.n, c.sim_y0.front());
  for (const auto& [i, j, value, l, key] : betas) {
    if (c.model != "swing") parse_fail(l, "key '" + key + "' only applies to model = swing");
    if (i < 1 || j < 1 || i > c.n || j > c.n) parse_fail(l, "key '" + key + "': indices must be in 1..n");
    c.swing.beta[(i - 1) * c.n + (j - 1)] = to_series(value, l, key);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::io, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  o << "model = " << c.model << "\n";
  if (c.model == "pendulum") o << "amplitude = " << fmt(c.amplitude) << "\n";
  o << "n = " << c.n << "\n";
  o << "m = " << c.m << "\n";
  if (c.model == "swing") {
    o << "alpha = " << fmt_list(c.swing.alpha) << "\n";
    o << "lambda = " << fmt_list(c.swing.lambda) << "\n";
    o << "omega = " << fmt_list(c.swing.omega) << "\n";
    for (int i = 0; i < c.n; ++i)
      for (int j = 0; j < c.n; ++j)
        if (static_cast<std::size_t>(i * c.n + j) < c.swing.beta.size())
          o << "beta." << i + 1 << "." << j + 1 << " = " << fmt_series(c.swing.beta_at(i, j)) << "\n";
  }
  o << "nx = " << c.nx << "\n";
  o << "nphi = " << c.nphi << "\n";
  o << "diff = " << to_string(c.diff) << "\n";
  if (c.P_range) {
    o << "P_range = " << fmt(c.P_range->start) << ":" << fmt(c.P_range->stop) << ":" << fmt(c.P_range->step) << "\n";
  } else {
    o << "P = ";
    for (std::size_t i = 0; i < c.P.size(); ++i) o << (i ? ", " : "") << fmt_list(c.P[i], " ");
    o << "\n";
  }
  o << "k_schedule = " << fmt_list(c.k_schedule) << "\n";
  o << "tau_steps = " << c.tau_steps << "\n";
  o << "gtol = " << fmt(c.gtol) << "\n";
  o << "rtol = " << fmt(c.rtol) << "\n";
  o << "max_iter = " << c.max_iter << "\n";
  o << "optimizer = " << to_string(c.optimizer) << "\n";
  o << "lbfgs_memory = " << c.lbfgs_memory << "\n";
  o << "test_modes = " << c.test_modes << "\n";
  o << "fiber_decomposed = " << (c.fiber_decomposed ? "true" : "false") << "\n";
  o << "tail_speed = " << (c.tail_speed ? fmt(*c.tail_speed) : std::string("auto")) << "\n";
  o << "dual_table = " << c.dual_table << "\n";
  o << "dual_range = " << fmt(c.dual_range.start) << ":" << fmt(c.dual_range.stop) << ":" << fmt(c.dual_range.step) << "\n";
  o << "sim_T = " << fmt(c.sim_T) << "\n";
  o << "sim_dt = " << fmt(c.sim_dt) << "\n";
  o << "sim_dt_record = " << fmt(c.sim_dt_record) << "\n";
  o << "sim_burn_in = " << fmt(c.sim_burn_in) << "\n";
  o << "sim_x0 = " << fmt_list(c.sim_x0) << "\n";
  o << "sim_y0 = " << fmt_list(c.sim_y0) << "\n";
  o << "sim_table = " << c.sim_table << "\n";
  o << "out_dir = " << c.out_dir << "\n";
  o << "seed = " << c.seed << "\n";
  o << "dump_sigma = " << (c.dump_sigma ? "true" : "false") << "\n";
  o << "unwrap = " << (c.unwrap ? "true" : "false") << "\n";
  o << "jobs = " << c.jobs << "\n";
  return o.str();
}

}  // namespace wkam
