// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/experiments.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#ifndef SQWP_VERSION
#define SQWP_VERSION "0.1.0"
#endif

namespace sqwp {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"decay-compare", "fit-approach1", "fit-approach2",
                                              "mollow",        "spectra-sweep", "convergence",
                                              "choi",          "trajectories"};
  return names;
}

// ---------------------------------------------------------------- config

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

bool is_auto(const YAML::Node& n) { return n && n.IsScalar() && n.Scalar() == "auto"; }

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML parse error: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  check_keys(root, "config", {"experiment", "physics", "numerics", "out"});
  ExperimentConfig cfg;
  read(root, "experiment", cfg.experiment, "config");
  read(root, "out", cfg.out_dir, "config");

  const YAML::Node ph = root["physics"];
  check_keys(ph, "physics",
             {"gamma", "omega", "r", "er", "db", "phi", "delta_c", "r_markov", "packet", "n_max",
              "field", "coeffs", "initial_state"});
  auto& p = cfg.physics;
  if (ph) {
    read(ph, "gamma", p.gamma, "physics");
    read(ph, "omega", p.omega, "physics");
    read(ph, "phi", p.phi, "physics");
    read(ph, "delta_c", p.delta_c, "physics");
    read(ph, "r_markov", p.r_markov, "physics");
    read(ph, "initial_state", p.initial_state, "physics");
    const int given = !!ph["r"] + !!ph["er"] + !!ph["db"];
    if (given > 1) throw ConfigError("physics: give only one of r, er, db");
    read(ph, "r", p.r, "physics");
    if (ph["er"]) {
      double er = 1.0;
      read(ph, "er", er, "physics");
      if (!(er >= 1.0)) throw ConfigError("physics.er: must be >= 1");
      p.r = std::log(er);
    }
    if (ph["db"]) {
      double db = 0.0;
      read(ph, "db", db, "physics");
      if (db < 0.0) throw ConfigError("physics.db: must be >= 0");
      p.r = db_to_r(db);
    }
    if (const auto pk = ph["packet"]) {
      check_keys(pk, "physics.packet", {"shape", "T", "center", "sigma", "file"});
      read(pk, "shape", p.packet, "physics.packet");
      read(pk, "T", p.T, "physics.packet");
      read(pk, "center", p.center, "physics.packet");
      read(pk, "sigma", p.sigma, "physics.packet");
      read(pk, "file", p.packet_file, "physics.packet");
    }
    if (ph["n_max"] && !is_auto(ph["n_max"])) {
      int n = 0;
      read(ph, "n_max", n, "physics");
      p.n_max = n;
    }
    if (const auto f = ph["field"]) {
      if (f.IsMap()) {
        check_keys(f, "physics.field", {"number"});
        p.field = "number";
        read(f, "number", p.field_number, "physics.field");
      } else {
        read(ph, "field", p.field, "physics");
      }
    }
    if (const auto c = ph["coeffs"]) {
      if (!c.IsSequence()) throw ConfigError("physics.coeffs: expected a list of [m, n, re, im]");
      for (const auto& e : c) {
        if (!e.IsSequence() || (e.size() != 3 && e.size() != 4)) {
          throw ConfigError("physics.coeffs: each entry is [m, n, re] or [m, n, re, im]");
        }
        try {
          FieldCoeff fc{e[0].as<int>(), e[1].as<int>(),
                        cd(e[2].as<double>(), e.size() == 4 ? e[3].as<double>() : 0.0)};
          p.coeffs.push_back(fc);
        } catch (const YAML::Exception&) {
          throw ConfigError("physics.coeffs: wrong type");
        }
      }
    }
  }

  const YAML::Node nu = root["numerics"];
  check_keys(nu, "numerics",
             {"h", "hierarchy", "t_end", "tau_max", "n_tau", "omega_grid", "window",
              "subtract_coherent", "ref_times", "dt_list", "nmax_sweep", "nodes", "fit_tol", "n_traj",
              "record", "lo_phase", "record_every", "records_to_write", "seed"});
  auto& q = cfg.numerics;
  if (nu) {
    if (nu["h"] && !is_auto(nu["h"])) {
      double h = 0.0;
      read(nu, "h", h, "numerics");
      q.h = h;
    }
    read(nu, "hierarchy", q.hierarchy, "numerics");
    read(nu, "t_end", q.t_end, "numerics");
    read(nu, "tau_max", q.tau_max, "numerics");
    read(nu, "n_tau", q.n_tau, "numerics");
    if (const auto g = nu["omega_grid"]) {
      check_keys(g, "numerics.omega_grid", {"min", "max", "points"});
      read(g, "min", q.omega_min, "numerics.omega_grid");
      read(g, "max", q.omega_max, "numerics.omega_grid");
      read(g, "points", q.omega_points, "numerics.omega_grid");
    }
    if (nu["window"]) {
      std::string w;
      read(nu, "window", w, "numerics");
      try {
        q.window = window_from_string(w);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("numerics.window: ") + e.what());
      }
    }
    read(nu, "subtract_coherent", q.subtract_coherent, "numerics");
    read(nu, "ref_times", q.ref_times, "numerics");
    read(nu, "dt_list", q.dt_list, "numerics");
    read(nu, "nmax_sweep", q.nmax_sweep, "numerics");
    read(nu, "nodes", q.nodes, "numerics");
    read(nu, "fit_tol", q.fit_tol, "numerics");
    read(nu, "n_traj", q.n_traj, "numerics");
    read(nu, "record", q.record, "numerics");
    read(nu, "lo_phase", q.lo_phase, "numerics");
    read(nu, "record_every", q.record_every, "numerics");
    read(nu, "records_to_write", q.records_to_write, "numerics");
    read(nu, "seed", q.seed, "numerics");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str());
  cfg.source = path;
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    throw ConfigError("experiment: unknown name '" + cfg.experiment + "'");
  }
  const auto& p = cfg.physics;
  const auto& q = cfg.numerics;
  if (!(p.gamma > 0.0)) throw ConfigError("physics.gamma: must be > 0");
  if (p.r < 0.0) throw ConfigError("physics.r: must be >= 0");
  if (p.r_markov < 0.0) throw ConfigError("physics.r_markov: must be >= 0");
  static const std::set<std::string> shapes{"square", "gaussian", "custom", "none"};
  if (!shapes.count(p.packet)) throw ConfigError("physics.packet.shape: unknown '" + p.packet + "'");
  if (p.packet == "square" && !(p.T > 0.0)) throw ConfigError("physics.packet.T: must be > 0");
  if (p.packet == "gaussian" && !(p.sigma > 0.0)) throw ConfigError("physics.packet.sigma: must be > 0");
  if (p.packet == "custom" && p.packet_file.empty()) throw ConfigError("physics.packet.file: required for custom");
  if (p.n_max && *p.n_max < 0) throw ConfigError("physics.n_max: must be >= 0");
  static const std::set<std::string> fields{"squeezed_vacuum", "vacuum", "number", "custom"};
  if (!fields.count(p.field)) throw ConfigError("physics.field: unknown '" + p.field + "'");
  if (p.field == "number" && p.field_number < 0) throw ConfigError("physics.field.number: must be >= 0");
  if (p.field == "custom") {
    if (p.coeffs.empty()) throw ConfigError("physics.coeffs: required for a custom field");
    FieldState fs;
    for (const auto& c : p.coeffs) fs.coeffs[{c.m, c.n}] = c.value;
    try {
      fs.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("physics.coeffs: ") + e.what());
    }
  }
  const int nmax = resolve_nmax(p);
  const int need = p.field == "number" ? p.field_number
                   : p.field == "custom" ? FieldState{[&] {
                       std::map<std::pair<int, int>, cd> m;
                       for (const auto& c : p.coeffs) m[{c.m, c.n}] = c.value;
                       return m;
                     }()}.max_index()
                                         : 0;
  if (need > nmax) throw ConfigError("physics.n_max: smaller than the largest field index");
  if (q.hierarchy != "squeezed" && q.hierarchy != "fock") {
    throw ConfigError("numerics.hierarchy: must be squeezed or fock");
  }
  if (q.h && !(*q.h > 0.0)) throw ConfigError("numerics.h: must be > 0");
  if (q.t_end < 0.0) throw ConfigError("numerics.t_end: must be >= 0");
  if (!(q.tau_max > 0.0) || q.n_tau < 2) throw ConfigError("numerics: need tau_max > 0 and n_tau >= 2");
  if (!(q.omega_max > q.omega_min) || q.omega_points < 3) {
    throw ConfigError("numerics.omega_grid: need max > min and points >= 3");
  }
  for (double t : q.ref_times) {
    if (t < 0.0) throw ConfigError("numerics.ref_times: must be >= 0");
  }
  for (double dt : q.dt_list) {
    if (!(dt > 0.0)) throw ConfigError("numerics.dt_list: entries must be > 0");
  }
  for (int n : q.nmax_sweep) {
    if (n < 0) throw ConfigError("numerics.nmax_sweep: entries must be >= 0");
  }
  if (q.nodes < 2) throw ConfigError("numerics.nodes: must be >= 2");
  if (!(q.fit_tol > 0.0)) throw ConfigError("numerics.fit_tol: must be > 0");
  if (q.n_traj < 1) throw ConfigError("numerics.n_traj: must be >= 1");
  if (q.record != "counting" && q.record != "homodyne" && q.record != "heterodyne") {
    throw ConfigError("numerics.record: must be counting, homodyne or heterodyne");
  }
  if (q.record_every < 1) throw ConfigError("numerics.record_every: must be >= 1");
  if (q.records_to_write < 0) throw ConfigError("numerics.records_to_write: must be >= 0");
  if (cfg.experiment == "convergence" && p.omega != 0.0) {
    throw ConfigError("physics.omega: convergence needs H = 0");
  }
  if (cfg.experiment == "trajectories" && q.hierarchy != "squeezed") {
    throw ConfigError("numerics.hierarchy: trajectories use the squeezed hierarchy");
  }
  if (!p.initial_state.empty()) {
    static const std::set<std::string> states{"bloch45", "excited", "ground", "plus", "steady"};
    if (!states.count(p.initial_state)) {
      throw ConfigError("physics.initial_state: unknown '" + p.initial_state + "'");
    }
  }
}

// ---------------------------------------------------------------- inputs

SLHTriple two_level_slh(double gamma, double omega) {
  const auto& b = two_level_basis();
  return {b.id, std::sqrt(gamma) * b.sm, 0.5 * omega * b.sx};
}

CMatrix initial_state(const std::string& name, const SLHTriple& slh) {
  const auto& b = two_level_basis();
  if (name == "bloch45") return 0.5 * (b.id + b.sx / std::sqrt(2.0) + b.sy / std::sqrt(2.0));
  if (name == "excited") return b.pe;
  if (name == "ground") return b.pg;
  if (name == "plus") return 0.5 * (b.id + b.sx);
  if (name == "steady") {
    return steady_state(
        [&](const CMatrix& r) { return CMatrix(-I_UNIT * commutator(slh.H, r) + dissipator(slh.L, r)); },
        slh.dim());
  }
  throw ConfigError("initial_state: unknown '" + name + "'");
}

WavePacket make_packet(const PhysicsConfig& p) {
  if (p.packet == "square") return WavePacket::square(p.T, p.delta_c);
  if (p.packet == "gaussian") return WavePacket::gaussian(p.center, p.sigma, p.delta_c);
  if (p.packet == "custom") return WavePacket::load_custom(p.packet_file, p.delta_c);
  return WavePacket::none();
}

int resolve_nmax(const PhysicsConfig& p) {
  if (p.n_max) return *p.n_max;
  return p.r > 0.0 ? nmax_for_tolerance(1e-4, p.r) : 0;
}

FieldState make_field(const PhysicsConfig& p, int n_max, HierarchyKind kind, double* residual) {
  if (residual) *residual = 0.0;
  const SqueezeParams sq(p.r, p.phi);
  if (p.field == "squeezed_vacuum") {
    if (kind == HierarchyKind::fock) return FieldState::truncated_squeezed_vacuum(sq, n_max, residual);
    return FieldState::squeezed_vacuum();
  }
  if (p.field == "vacuum") {
    if (kind == HierarchyKind::fock) return FieldState::number(0);
    return FieldState::vacuum_in_squeezed_basis(sq, n_max, residual);
  }
  if (p.field == "number") return FieldState::number(p.field_number);
  FieldState fs;
  for (const auto& c : p.coeffs) fs.coeffs[{c.m, c.n}] = c.value;
  return fs;
}

// ---------------------------------------------------------------- output

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header, const std::vector<std::string>& comments = {})
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (const auto& c : comments) out_ << "# " << c << '\n';
    out_ << header << '\n';
  }
  void row(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << num(v[i]);
    out_ << '\n';
  }
  std::ofstream& raw() { return out_; }

 private:
  std::ofstream out_;
};

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  RunSummary summary;
  json results = json::object();

  fs::path file(const std::string& name) {
    summary.files.push_back(name);
    return dir / name;
  }
  void warn(const std::string& w) { summary.warnings.push_back(w); }
};

struct Setup {
  SLHTriple slh;
  SqueezeParams sq;
  WavePacket wp;
  int n_max;
  HierarchyKind kind;
  FieldState field;
  double field_residual = 0.0;
};

Setup make_setup(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  Setup s{two_level_slh(p.gamma, p.omega), SqueezeParams(p.r, p.phi), make_packet(p), resolve_nmax(p),
          ctx.cfg.numerics.hierarchy == "fock" ? HierarchyKind::fock : HierarchyKind::squeezed,
          FieldState{}};
  s.field = make_field(p, s.n_max, s.kind, &s.field_residual);
  if (std::abs(s.field_residual) > 1e-6) {
    ctx.warn("field coefficients truncated at n_max=" + std::to_string(s.n_max) + " lost " +
             num(s.field_residual) + " of their norm and were renormalized");
  }
  ctx.results["n_max"] = s.n_max;
  ctx.results["discarded_population_squeezed"] = discarded_population_squeezed(s.n_max, p.r);
  return s;
}

double step_for(Context& ctx, const HierarchyModel& model) {
  const double h = ctx.cfg.numerics.h.value_or(default_step(model));
  if (model.step_gate(h) >= 0.1) {
    ctx.warn("step gate max|xi| n_max cosh(r) h = " + num(model.step_gate(h)) + " >= 0.1; reduce h");
  }
  ctx.results["h"] = h;
  return h;
}

std::string initial_name(const Context& ctx, const char* fallback) {
  return ctx.cfg.physics.initial_state.empty() ? fallback : ctx.cfg.physics.initial_state;
}

double packet_end(const PhysicsConfig& p, const WavePacket& wp) {
  if (p.packet == "none") return 1.0;
  return std::max(wp.support_end(), 1e-9);
}

// ---------------------------------------------------------------- experiments

void run_decay_compare(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  const auto& q = ctx.cfg.numerics;
  Setup s = make_setup(ctx);
  HierarchyModel model(s.slh, s.wp, s.sq, s.n_max);
  const double h = step_for(ctx, model);
  const CMatrix rho0 = initial_state(initial_name(ctx, "bloch45"), s.slh);
  const double t_end = q.t_end > 0.0 ? q.t_end : packet_end(p, s.wp);
  const auto nodes = uniform_nodes(0.0, t_end, 401);
  const auto& b = two_level_basis();

  auto emit = [&](const SampledSolution& sol, const std::string& suffix, const std::vector<std::string>& c) {
    Csv bloch(ctx.file("bloch" + suffix + ".csv"), "t,x,y,z", c);
    Csv exc(ctx.file("excitation" + suffix + ".csv"), "t,Pe", c);
    Csv pur(ctx.file("purity" + suffix + ".csv"), "t,purity", c);
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
      const CMatrix& r = sol.rho[i];
      bloch.row({sol.t[i], (b.sx * r).trace().real(), (b.sy * r).trace().real(), (b.sz * r).trace().real()});
      exc.row({sol.t[i], r(1, 1).real()});
      pur.row({sol.t[i], (r * r).trace().real()});
    }
  };
  const SampledSolution wp = sample_hierarchy(model, s.field, rho0, nodes, h, s.kind);
  emit(wp, "", {"wave packet, " + q.hierarchy + " hierarchy, r=" + num(p.r) + ", n_max=" +
                   std::to_string(s.n_max)});
  const SampledSolution bb = sample_broadband(p.r_markov, 0.0, s.slh, rho0, nodes, std::min(h, 1e-3));
  emit(bb, "_broadband", {"broadband squeezing, r_M=" + num(p.r_markov)});
  ctx.results["t_end"] = t_end;
}

void run_fit(Context& ctx, bool approach1) {
  const auto& p = ctx.cfg.physics;
  const auto& q = ctx.cfg.numerics;
  Setup s = make_setup(ctx);
  if (s.kind != HierarchyKind::squeezed) throw ConfigError("numerics.hierarchy: fits use the squeezed hierarchy");
  HierarchyModel model(s.slh, s.wp, s.sq, s.n_max);
  const double h = step_for(ctx, model);
  const CMatrix rho0 = initial_state(initial_name(ctx, "bloch45"), s.slh);
  const double t0 = approach1 ? 0.0 : 5.0;
  const double t1 = q.t_end > 0.0 ? q.t_end : (approach1 ? 1.0 : 9.0);
  if (!(t1 > t0)) throw ConfigError("numerics.t_end: window end must exceed its start");

  auto fit_with = [&](int count) {
    const auto nodes = uniform_nodes(t0, t1, count);
    const SampledSolution wp = sample_hierarchy(model, s.field, rho0, nodes, h);
    auto obj = [&](double r) {
      return approach1 ? bloch_objective(r, wp, rho0, s.slh) : excitation_objective(r, wp, rho0, s.slh);
    };
    return std::make_pair(minimize_scalar(obj, {0.0, 1.5}, q.fit_tol), wp);
  };
  const auto [fit, wp] = fit_with(q.nodes);
  const auto [fit2, wp2] = fit_with(2 * q.nodes);
  (void)wp2;
  if (!fit.interior) ctx.warn(fit.flag);
  const SampledSolution m = sample_broadband(fit.r_M, 0.0, s.slh, rho0, wp.t);
  const auto& b = two_level_basis();
  const std::vector<std::string> c{"r_wp=" + num(p.r) + ", r_M=" + num(fit.r_M) + ", n_max=" +
                                   std::to_string(s.n_max)};
  if (approach1) {
    Csv out(ctx.file("bloch_fit.csv"), "t,x_wp,y_wp,x_M,y_M", c);
    for (std::size_t i = 0; i < wp.t.size(); ++i) {
      out.row({wp.t[i], (b.sx * wp.rho[i]).trace().real(), (b.sy * wp.rho[i]).trace().real(),
               (b.sx * m.rho[i]).trace().real(), (b.sy * m.rho[i]).trace().real()});
    }
  } else {
    Csv out(ctx.file("excitation_fit.csv"), "t,Pe_wp,Pe_M", c);
    double mean = 0.0;
    for (std::size_t i = 0; i < wp.t.size(); ++i) {
      out.row({wp.t[i], wp.rho[i](1, 1).real(), m.rho[i](1, 1).real()});
      mean += wp.rho[i](1, 1).real() / wp.t.size();
    }
    ctx.results["late_mean_Pe"] = mean;
    if (mean < 0.5) ctx.results["r_from_steady_excitation"] = r_from_steady_excitation(mean);
  }
  ctx.results["r_M"] = fit.r_M;
  ctx.results["objective_value"] = fit.objective_value;
  ctx.results["n_evals"] = fit.n_evals;
  ctx.results["bracket"] = {fit.bracket.first, fit.bracket.second};
  ctx.results["interior"] = fit.interior;
  ctx.results["r_M_doubled_nodes"] = fit2.r_M;
  ctx.results["window"] = {t0, t1};
  const auto [gx, gy] = bloch_rates(broadband_nm(SqueezeParams(fit.r_M, 0.0)));
  ctx.results["gamma_x"] = gx;
  ctx.results["gamma_y"] = gy;
}

void write_spectrum(Context& ctx, const std::string& name, const SpectrumResult& s,
                    const std::string& params) {
  Csv out(ctx.file(name), "omega,S",
          {"t=" + num(s.reference_time) + " tau_max=" + num(s.tau_max) + " window=" + to_string(s.window),
           params});
  for (std::size_t i = 0; i < s.omega.size(); ++i) out.row({s.omega[i], s.values[i]});
}

CorrelationOptions correlation_options(const NumericsConfig& q, HierarchyKind kind, double h) {
  CorrelationOptions o;
  o.tau_max = q.tau_max;
  o.n_tau = q.n_tau;
  o.h_max = h;
  o.kind = kind;
  o.subtract_coherent = q.subtract_coherent;
  return o;
}

void run_mollow(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  const auto& q = ctx.cfg.numerics;
  const SLHTriple slh = two_level_slh(p.gamma, p.omega);
  HierarchyModel model(slh, WavePacket::none(), SqueezeParams(), 0);
  const double h = q.h.value_or(1e-3);
  ctx.results["h"] = h;
  const CMatrix rho0 = initial_state(initial_name(ctx, "steady"), slh);
  const auto& b = two_level_basis();
  const Correlation c = two_time_correlation(model, FieldState::squeezed_vacuum(), rho0, 0.0, b.sp, b.sm,
                                             correlation_options(q, HierarchyKind::squeezed, h));
  const auto omega = uniform_omega_grid(q.omega_min, q.omega_max, q.omega_points);
  const SpectrumResult s = fluorescence_spectrum(c, omega, q.window);
  write_spectrum(ctx, "spectrum.csv", s, "vacuum drive omega=" + num(p.omega));
  Csv pk(ctx.file("peaks.csv"), "omega,S");
  json peaks = json::array();
  for (int i : find_peaks(s)) {
    pk.row({s.omega[i], s.values[i]});
    peaks.push_back(s.omega[i]);
  }
  ctx.results["peaks"] = peaks;
  ctx.results["C0"] = c.values.front().real();
}

void run_spectra_sweep(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  const auto& q = ctx.cfg.numerics;
  Setup s = make_setup(ctx);
  HierarchyModel model(s.slh, s.wp, s.sq, s.n_max);
  const double h = step_for(ctx, model);
  const CMatrix rho0 = initial_state(initial_name(ctx, "steady"), s.slh);
  std::vector<double> ts = q.ref_times;
  if (ts.empty()) {
    const double T = packet_end(p, s.wp);
    for (double f : {1.0 / 16, 0.25, 0.5, 0.75, 15.0 / 16}) ts.push_back(f * T);
  }
  const auto omega = uniform_omega_grid(q.omega_min, q.omega_max, q.omega_points);
  const auto spectra =
      reference_time_sweep(model, s.field, rho0, ts, omega, correlation_options(q, s.kind, h), q.window);
  const std::string params = "r=" + num(p.r) + " phi=" + num(p.phi) + " omega=" + num(p.omega) +
                             " delta_c=" + num(p.delta_c) + " n_max=" + std::to_string(s.n_max) +
                             " hierarchy=" + q.hierarchy;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "spectrum_%02zu.csv", i);
    write_spectrum(ctx, name, spectra[i], params);
  }
  Csv pw(ctx.file("pairwise.csv"), "t_i,t_j,relative_sup_difference");
  double worst = 0.0;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (std::size_t j = i + 1; j < spectra.size(); ++j) {
      const double d = relative_sup_difference(spectra[i], spectra[j]);
      worst = std::max(worst, d);
      pw.row({ts[i], ts[j], d});
    }
  }
  ctx.results["ref_times"] = ts;
  ctx.results["max_pairwise_relative_difference"] = worst;
}

void run_convergence(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  const auto& q = ctx.cfg.numerics;
  const SLHTriple slh = two_level_slh(p.gamma, 0.0);
  const CMatrix rho0 = initial_state(initial_name(ctx, "bloch45"), slh);
  const int n_max = p.n_max.value_or(4);
  const auto pts = short_packet_convergence(p.r, p.phi, q.dt_list, slh, rho0, n_max);
  Csv out(ctx.file("convergence.csv"), "dt,deviation", {"r=" + num(p.r) + " n_max=" + std::to_string(n_max)});
  json dev = json::array();
  for (const auto& c : pts) {
    out.row({c.dt, c.deviation});
    dev.push_back(c.deviation);
  }
  ctx.results["deviation"] = dev;

  // Vacuum written in the squeezed basis, for each n_max in the sweep.
  const double T = p.T;
  const double h = q.h.value_or(1e-3);
  const TimeGrid grid = TimeGrid::with_max_step(0.0, T, h);
  Csv vd(ctx.file("vacuum_diffs.csv"), "n_max,sup_difference",
         {"r=" + num(p.r) + " T=" + num(T) + " h=" + num(grid.h())});
  json sups = json::array();
  for (int n : q.nmax_sweep) {
    const auto r = vacuum_in_squeezed_basis_diff(p.r, T, n, grid, rho0, p.gamma);
    if (!r.warning.empty()) ctx.warn(r.warning);
    vd.row({double(n), r.sup});
    sups.push_back(r.sup);
  }
  ctx.results["vacuum_diff_sup"] = sups;
}

void write_eigs(Context& ctx, const std::string& name, const ChannelReport& rep, const std::string& note) {
  Csv out(ctx.file(name), "rank,eigenvalue", {note});
  for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) out.row({double(i), rep.eigenvalues[i]});
}

void run_choi(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  const auto& q = ctx.cfg.numerics;
  PhysicsConfig pp = p;
  if (!pp.n_max) pp.n_max = 9;
  const SLHTriple slh = two_level_slh(p.gamma, p.omega);
  const WavePacket wp = make_packet(p);
  const int n = *pp.n_max;
  const SqueezeParams sq(p.r, p.phi);
  HierarchyModel model(slh, wp, sq, n);
  const double h = step_for(ctx, model);
  const TimeGrid grid = TimeGrid::with_max_step(0.0, q.t_end > 0.0 ? q.t_end : packet_end(p, wp), h);
  const auto fock = hierarchy_extended_channel(model, grid, HierarchyKind::fock);
  const auto sqz = hierarchy_extended_channel(model, grid, HierarchyKind::squeezed);
  const auto fock_r = hierarchy_channel(model, FieldState::truncated_squeezed_vacuum(sq, n), grid, HierarchyKind::fock);
  const auto sqz_r = hierarchy_channel(model, FieldState::squeezed_vacuum(), grid, HierarchyKind::squeezed);
  const std::string note = "system to system-plus-hierarchy map, n_max=" + std::to_string(n);
  write_eigs(ctx, "eigvals_fock.csv", fock, note);
  write_eigs(ctx, "eigvals_squeezed.csv", sqz, note);
  write_eigs(ctx, "eigvals_fock_reduced.csv", fock_r, "reduced system map, truncated squeezed vacuum input");
  write_eigs(ctx, "eigvals_squeezed_reduced.csv", sqz_r, "reduced system map, squeezed vacuum input");
  ctx.results["n_max"] = n;
  ctx.results["min_eigenvalue_fock"] = fock.min_eigenvalue;
  ctx.results["min_eigenvalue_squeezed"] = sqz.min_eigenvalue;
  ctx.results["min_eigenvalue_fock_reduced"] = fock_r.min_eigenvalue;
  ctx.results["min_eigenvalue_squeezed_reduced"] = sqz_r.min_eigenvalue;
  ctx.results["trace_residual_fock"] = fock.trace_preserving_residual;
  ctx.results["trace_residual_squeezed"] = sqz.trace_preserving_residual;
}

RecordKind record_kind(const std::string& s) {
  if (s == "homodyne") return RecordKind::homodyne;
  if (s == "heterodyne") return RecordKind::heterodyne;
  return RecordKind::counting;
}

void run_trajectories(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  const auto& q = ctx.cfg.numerics;
  Setup s = make_setup(ctx);
  HierarchyModel model(s.slh, s.wp, s.sq, s.n_max);
  const double h = step_for(ctx, model);
  const CMatrix rho0 = initial_state(initial_name(ctx, "excited"), s.slh);
  EnsembleConfig ec;
  ec.kind = record_kind(q.record);
  ec.lo_phase = q.lo_phase;
  ec.t_end = q.t_end > 0.0 ? q.t_end : packet_end(p, s.wp);
  ec.h = h;
  ec.record_every = q.record_every;
  ec.base_seed = q.seed;
  ec.keep_records = q.records_to_write > 0;
  const EnsembleResult res = simulate_ensemble(model, s.field, rho0, ec, q.n_traj);

  Csv sum(ctx.file("summary.csv"), "t,Pe_mean,Pe_stderr,x_mean,y_mean,purity_mean",
          {"record=" + q.record + " n_ok=" + std::to_string(res.n_ok) + " seed=" + std::to_string(q.seed)});
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    sum.row({res.times[i], res.pe_mean[i], res.pe_stderr[i], res.x_mean[i], res.y_mean[i], res.purity_mean[i]});
  }
  // Unconditional reference on the same nodes and step.
  const SampledSolution ref = sample_hierarchy(model, s.field, rho0, res.times, ec.t_end / std::lround(ec.t_end / h));
  Csv rf(ctx.file("reference.csv"), "t,Pe");
  for (std::size_t i = 0; i < ref.t.size(); ++i) rf.row({ref.t[i], ref.rho[i](1, 1).real()});
  if (ec.kind == RecordKind::counting) {
    Csv jr(ctx.file("jump_rates.csv"), "t_begin,t_end,rate_mean,rate_stderr");
    for (std::size_t j = 0; j < res.jump_rate_mean.size(); ++j) {
      jr.row({res.times[j], res.times[j + 1], res.jump_rate_mean[j], res.jump_rate_stderr[j]});
    }
    double mean = 0.0;
    for (int c : res.jump_counts) mean += c;
    ctx.results["mean_jump_count"] = res.n_ok > 0 ? mean / res.n_ok : 0.0;
  }
  for (std::size_t k = 0; k < res.records.size() && static_cast<int>(k) < q.records_to_write; ++k) {
    char name[40];
    std::snprintf(name, sizeof name, "traj_%05zu.csv", k);
    Csv rc(ctx.file(name), "t,kind,outcome");
    const auto& r = res.records[k];
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      std::string kind = to_string(r.kind);
      if (r.kind == RecordKind::heterodyne) kind += r.quadrature[i] ? ":pi/2" : ":0";
      rc.raw() << num(r.times[i]) << ',' << kind << ',' << r.outcomes[i] << '\n';
    }
  }
  const Chi2Result chi = martingale_chi2(res);
  ctx.results["n_ok"] = res.n_ok;
  ctx.results["n_degenerate"] = res.n_degenerate;
  ctx.results["chi2"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
  if (res.n_degenerate > 0) ctx.warn(std::to_string(res.n_degenerate) + " degenerate trajectories excluded");
}

json config_json(const ExperimentConfig& cfg) {
  const auto& p = cfg.physics;
  const auto& q = cfg.numerics;
  json coeffs = json::array();
  for (const auto& c : p.coeffs) coeffs.push_back({c.m, c.n, c.value.real(), c.value.imag()});
  json phys = {{"gamma", p.gamma},       {"omega", p.omega},   {"r", p.r},
               {"phi", p.phi},           {"delta_c", p.delta_c}, {"r_markov", p.r_markov},
               {"packet", {{"shape", p.packet}, {"T", p.T}, {"center", p.center}, {"sigma", p.sigma},
                           {"file", p.packet_file}}},
               {"n_max", p.n_max ? json(*p.n_max) : json("auto")},
               {"field", p.field == "number" ? json({{"number", p.field_number}}) : json(p.field)},
               {"coeffs", coeffs},
               {"initial_state", p.initial_state.empty() ? json("default") : json(p.initial_state)}};
  json num = {{"h", q.h ? json(*q.h) : json("auto")},
              {"hierarchy", q.hierarchy},
              {"t_end", q.t_end},
              {"tau_max", q.tau_max},
              {"n_tau", q.n_tau},
              {"omega_grid", {{"min", q.omega_min}, {"max", q.omega_max}, {"points", q.omega_points}}},
              {"window", to_string(q.window)},
              {"subtract_coherent", q.subtract_coherent},
              {"ref_times", q.ref_times},
              {"dt_list", q.dt_list},
              {"nmax_sweep", q.nmax_sweep},
              {"nodes", q.nodes},
              {"fit_tol", q.fit_tol},
              {"n_traj", q.n_traj},
              {"record", q.record},
              {"lo_phase", q.lo_phase},
              {"record_every", q.record_every},
              {"records_to_write", q.records_to_write},
              {"seed", q.seed}};
  return {{"experiment", cfg.experiment}, {"physics", phys}, {"numerics", num}, {"out", cfg.out_dir}};
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  Context ctx{cfg, fs::path(cfg.out_dir), {}, json::object()};
  fs::create_directories(ctx.dir);
  const auto& e = cfg.experiment;
  if (e == "decay-compare") run_decay_compare(ctx);
  else if (e == "fit-approach1") run_fit(ctx, true);
  else if (e == "fit-approach2") run_fit(ctx, false);
  else if (e == "mollow") run_mollow(ctx);
  else if (e == "spectra-sweep") run_spectra_sweep(ctx);
  else if (e == "convergence") run_convergence(ctx);
  else if (e == "choi") run_choi(ctx);
  else run_trajectories(ctx);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest = {{"version", SQWP_VERSION},
                   {"experiment", e},
                   {"config_source", cfg.source},
                   {"inputs", config_json(cfg)},
                   {"seed", cfg.numerics.seed},
                   {"wall_time_s", wall},
                   {"files", ctx.summary.files},
                   {"warnings", ctx.summary.warnings},
                   {"results", ctx.results}};
  ctx.summary.manifest_json = manifest.dump(2);
  std::ofstream(ctx.dir / "manifest.json") << ctx.summary.manifest_json << '\n';
  return ctx.summary;
}

}  // namespace sqwp
