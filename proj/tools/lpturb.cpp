// lpturb: command-line pipelines over the lpturb library.
//
//   generate -> simulate -> diagnose -> estimate-delta -> check-bounds -> report
//
// Exit codes: 0 success, 1 runtime error (JSON on stderr), 2 usage error,
// 3 a bound check failed (report still written).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lpturb/intermittency.hpp"
#include "lpturb/phenomenology.hpp"
#include "lpturb/snapshot_io.hpp"
#include "lpturb/solver.hpp"
#include "lpturb/tables.hpp"

namespace fs = std::filesystem;
using namespace lpturb;

namespace {

constexpr const char* tool_version = "1.0.0";
constexpr int exit_bound_failed = 3;

// ---------------------------------------------------------------------------
// Manifest

struct Manifest {
  std::string subcommand;
  fs::path dir;  // output paths are recorded relative to this
  json config = json::object();
  json seeds = json::object();
  json extra = json::object();
  json inputs = json::array();
  json outputs = json::array();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void input(const fs::path& p) {
    inputs.push_back({{"path", p.string()}, {"crc64", hex64(crc64_file(p.string()))}});
  }
  void output(const fs::path& p) {
    std::string rel = p.lexically_relative(dir).string();
    if (rel.empty() || rel.rfind("..", 0) == 0) rel = p.string();
    outputs.push_back({{"path", rel}, {"crc64", hex64(crc64_file(p.string()))}, {"bytes", fs::file_size(p)}});
  }
  void write(const fs::path& path, int threads) const {
    json j;
    j["tool"] = "lpturb";
    j["version"] = tool_version;
    j["subcommand"] = subcommand;
    j["checksum"] = "crc-64/go-iso";
    j["config"] = config;
    j["seeds"] = seeds;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    j["threads"] = threads;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(path.string(), j);
  }
};

/// Every option of a subcommand as given or defaulted, as strings.
json options_json(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_type_size() == 0)
        j[name] = true;
      else if (r.size() == 1)
        j[name] = r.front();
      else
        j[name] = r;
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

int thread_count() {
  const char* env = std::getenv("LPTURB_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  require(end && *end == '\0' && v >= 1 && v <= 4096, ErrorKind::configuration,
          std::string("LPTURB_THREADS must be a positive integer, got '") + env + "'");
  return int(v);
}

// ---------------------------------------------------------------------------
// Shared helpers


Vec3 parse_vec3(const std::vector<double>& v, const char* what) {
  require(v.size() == 3, ErrorKind::configuration, std::string(what) + " needs three components");
  return {v[0], v[1], v[2]};
}

/// Expands directories into their *.lps files, reads all snapshots and sorts by time.
std::vector<fs::path> snapshot_paths(const std::vector<std::string>& inputs) {
  std::vector<fs::path> paths;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".lps") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      require(fs::exists(p), ErrorKind::io, "input '" + in + "' does not exist");
      paths.push_back(p);
    }
  }
  require(!paths.empty(), ErrorKind::input, "no snapshot files given");
  return paths;
}

struct Window {
  std::string mode = "all";  // all | second-half
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
};

struct LoadedSnapshots {
  std::vector<Snapshot> snaps;
  double t_begin = 0.0, t_end = 0.0;
  std::size_t available = 0;
};

LoadedSnapshots load_window(const std::vector<std::string>& inputs, const Window& w, Manifest& m) {
  const auto paths = snapshot_paths(inputs);
  // Times first, so only the window is kept in memory.
  std::vector<std::pair<double, fs::path>> timed;
  for (const auto& p : paths) {
    const auto bytes = read_bytes(p.string());
    require(bytes.size() >= 32, ErrorKind::io, p.string() + ": truncated snapshot header");
    timed.emplace_back(snapshot_format::get<double>(bytes.data() + 24), p);
  }
  std::stable_sort(timed.begin(), timed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double lo = w.t_min, hi = w.t_max;
  if (w.mode == "second-half") {
    lo = std::max(lo, 0.5 * (timed.front().first + timed.back().first));
  } else {
    require(w.mode == "all", ErrorKind::configuration, "window must be 'all' or 'second-half'");
  }
  LoadedSnapshots out;
  out.available = timed.size();
  for (const auto& [t, p] : timed) {
    if (t < lo || t > hi) continue;
    out.snaps.push_back(read_snapshot(p.string()));
    m.input(p);
  }
  require(!out.snaps.empty(), ErrorKind::input, "averaging window contains no snapshots");
  common_grid(out.snaps);
  out.t_begin = out.snaps.front().t;
  out.t_end = out.snaps.back().t;
  return out;
}

json window_json(const LoadedSnapshots& l, const Window& w) {
  return {{"mode", w.mode}, {"t_begin", l.t_begin}, {"t_end", l.t_end}, {"snapshots", l.snaps.size()},
          {"available", l.available}};
}

fs::path ensure_dir(const std::string& d) {
  const fs::path p(d);
  fs::create_directories(p);
  return p;
}

json rational_json(const Rational& r) { return {{"exact", to_string(r)}, {"value", to_double(r)}}; }

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::string kind = "packets";
  int grid = 64;
  double length = 2 * std::numbers::pi;
  double delta = 3.0;
  int q_lo = 1;
  int q_hi = -1;
  double amplitude = 1.0;
  double alpha = 0.0;
  double slope = -5.0 / 3.0;
  std::vector<int> mode{1, 0, 0};
  std::vector<std::string> fields{"B"};
  std::uint64_t seed = 1;
  double time = 0.0;
  std::string out;
  std::string manifest;
};

int run_generate(const GenerateOptions& o, const CLI::App& sub, int threads) {
  GridSpec g{o.grid, o.length};
  g.validate();
  const int q_hi = o.q_hi < 0 ? g.analysis_top_shell() : o.q_hi;
  require(!o.out.empty(), ErrorKind::configuration, "--out is required");
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  Manifest m;
  m.subcommand = "generate";
  m.dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  m.config = options_json(sub);
  m.seeds["field"] = o.seed;
  m.extra["grid"] = {{"n", g.n}, {"L", g.L}};

  Snapshot snap;
  snap.t = o.time;
  json info = json::object();
  for (std::size_t fi = 0; fi < o.fields.size(); ++fi) {
    const std::string& tag = o.fields[fi];
    // Each additional field uses the next seed so u and B are independent.
    const std::uint64_t seed = o.seed + fi;
    RealVectorField v;
    if (o.kind == "packets") {
      PacketLaw law;
      law.delta = o.delta;
      law.q_lo = o.q_lo;
      law.q_hi = q_hi;
      law.amplitude = o.amplitude;
      law.alpha = o.alpha;
      law.seed = seed;
      auto pf = intermittent_packets(g, law);
      info[tag] = {{"packet_counts", pf.packet_counts}, {"few_shells", pf.few_shells}};
      v = std::move(pf.field);
    } else if (o.kind == "random") {
      v = random_solenoidal(g, o.slope, o.q_lo, q_hi, seed, o.amplitude);
    } else if (o.kind == "sinusoid" || o.kind == "beltrami") {
      require(o.mode.size() == 3, ErrorKind::configuration, "--mode needs three integers");
      v = single_mode(g, {o.mode[0], o.mode[1], o.mode[2]}, o.amplitude,
                      o.kind == "sinusoid" ? ModeKind::sinusoid : ModeKind::beltrami);
    } else {
      fail(ErrorKind::configuration, "unknown --kind '" + o.kind + "' (packets, random, sinusoid, beltrami)");
    }
    snap.fields.emplace_back(tag, std::move(v));
  }
  if (!info.empty()) m.extra["generator"] = info;
  write_snapshot(out.string(), snap);
  m.output(out);
  m.write(o.manifest.empty() ? fs::path(out.string() + ".manifest.json") : fs::path(o.manifest), threads);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string model = "emhd";
  int grid = 64;
  double length = 2 * std::numbers::pi;
  double nu = 0.0, mu = 0.0, d_i = 1.0, v_A = 0.0;
  std::vector<double> b0{0.0, 0.0, 0.0};
  double dt = 1e-3;
  long steps = 100;
  long stride = 10;
  double cfl_limit = 0.5;
  bool force = false;
  int force_q_lo = 1, force_q_hi = 2;
  double force_amplitude = 0.0;
  std::uint64_t seed = 1;
  std::string init;
  double init_slope = -5.0 / 3.0;
  int init_q_lo = 1, init_q_hi = 3;
  double init_amplitude = 1.0;
  std::string out_dir;
};

Model parse_model(const std::string& s) {
  if (s == "emhd") return Model::EMHD;
  if (s == "mhd") return Model::MHD;
  if (s == "hall-mhd") return Model::HALL_MHD;
  fail(ErrorKind::configuration, "unknown --model '" + s + "' (emhd, mhd, hall-mhd)");
}

int run_simulate(const SimulateOptions& o, const CLI::App& sub, int threads) {
  require(!o.out_dir.empty(), ErrorKind::configuration, "--out-dir is required");
  require(o.steps >= 0, ErrorKind::configuration, "--steps must be nonnegative");
  const fs::path dir = ensure_dir(o.out_dir);
  Manifest m;
  m.subcommand = "simulate";
  m.dir = dir;
  m.config = options_json(sub);

  SolverConfig cfg;
  cfg.model = parse_model(o.model);
  cfg.params.nu = o.nu;
  cfg.params.mu = o.mu;
  cfg.params.d_i = o.d_i;
  cfg.params.v_A = o.v_A;
  cfg.params.B0 = parse_vec3(o.b0, "--b0");
  cfg.params.L = o.length;
  cfg.dt = o.dt;
  cfg.t_end = double(o.steps) * o.dt;
  cfg.snapshot_stride = o.stride;
  cfg.cfl_limit = o.cfl_limit;
  cfg.forcing.enabled = o.force;
  cfg.forcing.q_lo = o.force_q_lo;
  cfg.forcing.q_hi = o.force_q_hi;
  cfg.forcing.amplitude = o.force_amplitude;
  cfg.forcing.seed = o.seed;
  require(cfg.steps() == o.steps, ErrorKind::configuration, "step count is not representable as steps * dt");

  SolverState init;
  if (!o.init.empty()) {
    m.input(o.init);
    const Snapshot s = read_snapshot(o.init);
    init.t = s.t;
    init.B = s.get("B");
    require(init.B.grid.n == o.grid && init.B.grid.L == o.length, ErrorKind::configuration,
            "initial snapshot grid does not match --grid/--length");
    if (cfg.has_velocity() && s.has("u")) init.u = s.get("u");
  } else {
    GridSpec g{o.grid, o.length};
    g.validate();
    init.B = random_solenoidal(g, o.init_slope, o.init_q_lo, o.init_q_hi, o.seed + 1, o.init_amplitude);
    if (cfg.has_velocity())
      init.u = random_solenoidal(g, o.init_slope, o.init_q_lo, o.init_q_hi, o.seed + 2, o.init_amplitude);
  }
  m.seeds["forcing"] = o.seed;
  if (o.init.empty()) m.seeds["initial"] = json{{"B", o.seed + 1}, {"u", o.seed + 2}};
  m.extra["grid"] = {{"n", o.grid}, {"L", o.length}};
  m.extra["params"] = {{"model", to_string(cfg.model)}, {"nu", o.nu}, {"mu", o.mu}, {"d_i", o.d_i}, {"v_A", o.v_A},
                       {"B0", o.b0}, {"dt", o.dt}, {"steps", o.steps}};

  long index = 0;
  std::vector<fs::path> written;
  auto sink = [&](const Snapshot& s) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%06ld.lps", index++);
    const fs::path p = dir / name;
    write_snapshot(p.string(), s);
    written.push_back(p);
  };
  const RunResult res = run(cfg, init, sink);

  Table budget;
  budget.meta = {{"table", "energy_budget"},
                 {"units", "per unit volume"},
                 {"model", to_string(cfg.model)},
                 {"dt", o.dt},
                 {"max_divergence_ratio", res.max_divergence_ratio}};
  budget.columns = {"t", "E_u", "E_b", "eps_u", "eps_b", "forcing_input", "residual"};
  for (const auto& r : res.budget)
    budget.rows.push_back({r.t, r.E_u, r.E_b, r.eps_u, r.eps_b, r.forcing_input, r.residual});
  const fs::path bpath = dir / "budget.csv";
  write_table(bpath.string(), budget);
  for (const auto& p : written) m.output(p);
  m.output(bpath);
  m.extra["max_divergence_ratio"] = res.max_divergence_ratio;
  m.write(dir / "manifest.json", threads);
  return 0;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseOptions {
  std::vector<std::string> inputs;
  Window window;
  std::string tag = "B";
  int q_lo = 1, q_hi = -1;
  double nu = 0.0, mu = 0.0, d_i = 1.0;
  std::string flux_form = "triad";
  std::vector<int> under_exclude;  // shells left out of the eps_under minimum
  std::vector<double> p_list{2.0, 2.5, 3.0};
  int ell_max = -1;  // grid cells
  std::string direction = "isotropic";
  std::uint64_t samples = 0;
  std::uint64_t seed = 1;
  std::string out_dir;
};

Direction3 parse_direction(const std::string& s) {
  if (s == "x") return Direction3::axis0;
  if (s == "y") return Direction3::axis1;
  if (s == "z") return Direction3::axis2;
  if (s == "isotropic") return Direction3::isotropic;
  fail(ErrorKind::configuration, "unknown --direction '" + s + "' (x, y, z, isotropic)");
}

int run_diagnose(const DiagnoseOptions& o, const CLI::App& sub, int threads) {
  require(!o.out_dir.empty(), ErrorKind::configuration, "--out-dir is required");
  const fs::path dir = ensure_dir(o.out_dir);
  Manifest m;
  m.subcommand = "diagnose";
  m.dir = dir;
  m.config = options_json(sub);
  const auto data = load_window(o.inputs, o.window, m);
  const GridSpec g = common_grid(data.snaps);
  const int q_hi = o.q_hi < 0 ? g.analysis_top_shell() : o.q_hi;
  check_shell_range(g, o.q_lo, q_hi);
  const json win = window_json(data, o.window);
  m.extra["grid"] = {{"n", g.n}, {"L", g.L}};
  m.extra["window"] = win;

  // Spectrum
  const auto spec = energy_spectrum(data.snaps, o.tag);
  Table st;
  st.meta = {{"table", "energy_spectrum"}, {"tag", o.tag}, {"grid", {{"n", g.n}, {"L", g.L}}},
             {"units", {{"lambda", "2^q/L"}, {"shell_energy", "1/2 <|v_q|^2>"}, {"spectrum", "shell_energy*2/lambda"}}},
             {"window", win}, {"mean_energy", spec.mean_energy}, {"nyquist_energy", spec.nyquist_energy},
             {"total_energy", spec.total_energy}};
  st.columns = {"q", "lambda", "shell_energy", "spectrum"};
  for (const auto& r : spec.rows) st.rows.push_back({double(r.q), r.lambda, r.shell_energy, r.spectrum});
  write_table((dir / "spectrum.csv").string(), st);
  m.output(dir / "spectrum.csv");

  // Shell norms per snapshot
  const auto series = shell_norm_series(data.snaps, o.tag, o.q_lo, q_hi);
  Table nt;
  nt.meta = {{"table", "shell_norms"}, {"tag", o.tag}, {"grid", {{"n", g.n}, {"L", g.L}}},
             {"shells", {o.q_lo, q_hi}}, {"window", win}};
  nt.columns = {"t", "q", "l2", "linf", "l3"};
  for (std::size_t s = 0; s < series.times.size(); ++s)
    for (int q = o.q_lo; q <= q_hi; ++q) {
      const auto& x = series.at(s, q);
      nt.rows.push_back({series.times[s], double(q), x.l2, x.linf, x.l3});
    }
  write_table((dir / "shell_norms.csv").string(), nt);
  m.output(dir / "shell_norms.csv");

  json diss = json::object();
  diss["window"] = win;
  diss["tag"] = o.tag;
  diss["grid"] = {{"n", g.n}, {"L", g.L}};
  diss["nu"] = o.nu;
  diss["mu"] = o.mu;
  diss["d_i"] = o.d_i;
  const auto rates = dissipation_rates(data.snaps, o.nu, o.mu);
  diss["eps_u"] = rates.eps_u;
  diss["eps_b"] = rates.eps_b;

  // Hall flux across each shell, for magnetic fields only.
  if (o.tag == "B" && o.d_i > 0.0) {
    const FluxForm form = o.flux_form == "full" ? FluxForm::full : FluxForm::triad;
    require(o.flux_form == "full" || o.flux_form == "triad", ErrorKind::configuration, "--flux-form must be full or triad");
    const auto ex = extreme_dissipation(data.snaps, o.d_i, o.q_lo, q_hi, form);
    Table ft;
    ft.meta = {{"table", "hall_flux"}, {"form", o.flux_form}, {"d_i", o.d_i}, {"shells", {o.q_lo, q_hi}}, {"window", win},
               {"units", {{"flux", "integral over the box"}, {"density", "spatial mean"}, {"cubic", "d_i lambda_q^2 <|B_q|^3>"}}}};
    ft.columns = {"q", "flux", "density_mean", "density_mean_abs", "density_max_abs", "cubic"};
    for (int q = o.q_lo; q <= q_hi; ++q) {
      double flux = 0.0, dm = 0.0, dma = 0.0, dmax = 0.0;
      for (const auto& s : data.snaps) {
        const auto r = magnetic_flux(s.get("B"), q, o.d_i, form);
        flux += r.flux;
        dm += r.density_mean;
        dma += r.density_mean_abs;
        dmax = std::max(dmax, r.density_max_abs);
      }
      const double inv = 1.0 / double(data.snaps.size());
      ft.rows.push_back({double(q), flux * inv, dm * inv, dma * inv, dmax, ex.cubic[q - o.q_lo]});
    }
    write_table((dir / "flux.csv").string(), ft);
    m.output(dir / "flux.csv");
    double eps_under = std::numeric_limits<double>::infinity();
    int q_under = -1;
    for (int q = o.q_lo; q <= q_hi; ++q) {
      if (std::find(o.under_exclude.begin(), o.under_exclude.end(), q) != o.under_exclude.end()) continue;
      if (ex.mean_abs[q - o.q_lo] < eps_under) {
        eps_under = ex.mean_abs[q - o.q_lo];
        q_under = q;
      }
    }
    require(q_under >= 0, ErrorKind::configuration, "--under-exclude removes every analysis shell");
    diss["eps_bar"] = ex.eps_bar;
    diss["eps_under"] = eps_under;
    diss["q_bar"] = ex.q_bar;
    diss["q_under"] = q_under;
    diss["under_excluded_shells"] = o.under_exclude;
    diss["flux_form"] = o.flux_form;
  }

  // Structure functions at grid-commensurate separations.
  const int ell_max = o.ell_max < 0 ? g.n / 4 : o.ell_max;
  require(ell_max >= 1 && ell_max < g.n, ErrorKind::configuration, "--ell-max must lie in [1, n)");
  std::vector<double> ells;
  for (int c = 1; c <= ell_max; ++c) ells.push_back(c * g.dx());
  StructureSampling sampling;
  sampling.exhaustive = o.samples == 0;
  sampling.samples = o.samples;
  sampling.seed = o.seed;
  sampling.direction = parse_direction(o.direction);
  if (!sampling.exhaustive) m.seeds["structure_sampling"] = o.seed;
  const auto sf = structure_function(data.snaps, o.tag, o.p_list, ells, sampling);
  Table sft;
  sft.meta = {{"table", "structure_function"}, {"tag", o.tag}, {"grid", {{"n", g.n}, {"L", g.L}}},
              {"direction", o.direction}, {"sampling", sampling.exhaustive ? "exhaustive" : "monte-carlo"},
              {"samples", o.samples}, {"window", win}, {"units", {{"ell", "length"}, {"value", "<|v(x+ell)-v(x)|^p>"}}}};
  sft.columns = {"ell", "p", "value"};
  for (const auto& r : sf.rows) sft.rows.push_back({r.ell, r.p, r.value});
  write_table((dir / "structure.csv").string(), sft);
  m.output(dir / "structure.csv");

  write_json((dir / "dissipation.json").string(), diss);
  m.output(dir / "dissipation.json");
  m.write(dir / "manifest.json", threads);
  return 0;
}

// ---------------------------------------------------------------------------
// estimate-delta

struct EstimateOptions {
  std::vector<std::string> inputs;
  Window window;
  std::string tag = "B";
  int q_lo = 1, q_hi = -1;
  double C = 0.0;
  std::string out;
};

json estimate_json(const IntermittencyEstimate& e) {
  json j = {{"method", to_string(e.method)}, {"delta", e.delta}, {"shells", e.shells}};
  if (e.method == EstimateMethod::shell_fit) {
    j["slope"] = e.slope;
    j["slope_stderr"] = e.slope_stderr;
    j["intercept"] = e.intercept;
    j["residual"] = e.residual;
    j["raw_delta"] = e.raw_delta;
    j["clamped"] = e.clamped;
  } else {
    j["C"] = e.C;
    j["C_policy"] = e.C_policy;
    j["saturated_low"] = e.saturated_low;
    j["saturated_high"] = e.saturated_high;
    j["empty_field"] = e.empty_field;
  }
  return j;
}

int run_estimate(const EstimateOptions& o, const CLI::App& sub, int threads) {
  require(!o.out.empty(), ErrorKind::configuration, "--out is required");
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  Manifest m;
  m.subcommand = "estimate-delta";
  m.dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  m.config = options_json(sub);
  const auto data = load_window(o.inputs, o.window, m);
  const GridSpec g = common_grid(data.snaps);
  const int q_hi = o.q_hi < 0 ? g.analysis_top_shell() : o.q_hi;
  const auto series = shell_norm_series(data.snaps, o.tag, o.q_lo, q_hi);

  json j;
  j["tag"] = o.tag;
  j["grid"] = {{"n", g.n}, {"L", g.L}};
  j["window"] = window_json(data, o.window);
  try {
    j["shell_fit"] = estimate_json(estimate_delta_fit(series, o.q_lo, q_hi));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::fit) throw;
    j["shell_fit"] = {{"error", to_string(e.kind())}, {"message", e.what()}};
  }
  j["sup_form"] = estimate_json(estimate_delta_sup(series, o.C, o.q_lo, q_hi));
  const auto bern = bernstein_check(series);
  double min_lower = std::numeric_limits<double>::infinity(), max_upper = 0.0;
  std::size_t violations = 0;
  for (const auto& r : bern.rows) {
    if (r.lower_ratio > 0.0) min_lower = std::min(min_lower, r.lower_ratio);
    max_upper = std::max(max_upper, r.upper_ratio);
    violations += r.holds ? 0 : 1;
  }
  j["bernstein"] = {{"all_hold", bern.all_hold}, {"rows", bern.rows.size()}, {"violations", violations},
                    {"min_lower_ratio", std::isfinite(min_lower) ? json(min_lower) : json(nullptr)},
                    {"max_upper_ratio", max_upper}};
  write_json(out.string(), j);
  m.output(out);
  m.write(fs::path(out.string() + ".manifest.json"), threads);
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
  std::string regime, transition, family = "magnetic", amplitude_model;
  std::string structure_p;
  std::string delta, delta_b, delta_u, delta_plus, delta_minus, delta_perp_plus, delta_perp_minus;
  std::vector<std::pair<std::string, double*>> doubles;
  double eps = -1, eps_b = -1, eps_u = -1, eps_plus = -1, eps_minus = -1, eps_perp_plus = -1, eps_perp_minus = -1,
         eps_perp = -1, nu = -1, mu = -1, d_i = -1, v_A = -1;
  double k = 1.0, length = 2 * std::numbers::pi;
  int q = 1;
  std::string out;
};

ScalingInputs scaling_inputs(const PredictOptions& o, const CLI::App& sub) {
  ScalingInputs in;
  auto rat = [&](const std::string& flag, const std::string& v, std::optional<Rational>& dst) {
    if (sub.count(flag)) dst = parse_rational(v);
  };
  rat("--delta-b", o.delta_b, in.delta_b);
  rat("--delta-u", o.delta_u, in.delta_u);
  rat("--delta-plus", o.delta_plus, in.delta_plus);
  rat("--delta-minus", o.delta_minus, in.delta_minus);
  rat("--delta-perp-plus", o.delta_perp_plus, in.delta_perp_plus);
  rat("--delta-perp-minus", o.delta_perp_minus, in.delta_perp_minus);
  auto dbl = [&](const std::string& flag, double v, std::optional<double>& dst) {
    if (sub.count(flag)) dst = v;
  };
  dbl("--eps-b", o.eps_b, in.eps_b);
  dbl("--eps-u", o.eps_u, in.eps_u);
  dbl("--eps-plus", o.eps_plus, in.eps_plus);
  dbl("--eps-minus", o.eps_minus, in.eps_minus);
  dbl("--eps-perp-plus", o.eps_perp_plus, in.eps_perp_plus);
  dbl("--eps-perp-minus", o.eps_perp_minus, in.eps_perp_minus);
  dbl("--eps-perp", o.eps_perp, in.eps_perp);
  dbl("--nu", o.nu, in.nu);
  dbl("--mu", o.mu, in.mu);
  dbl("--d-i", o.d_i, in.d_i);
  dbl("--v-a", o.v_A, in.v_A);
  return in;
}

StructureFamily parse_family(const std::string& s) {
  if (s == "magnetic") return StructureFamily::MAGNETIC;
  if (s == "velocity" || s == "elsasser") return StructureFamily::VELOCITY_OR_ELSASSER;
  fail(ErrorKind::configuration, "unknown --family '" + s + "' (magnetic, velocity, elsasser)");
}

int run_predict(const PredictOptions& o, const CLI::App& sub, int threads) {
  const int chosen = int(!o.regime.empty()) + int(!o.transition.empty()) + int(!o.structure_p.empty()) +
                     int(!o.amplitude_model.empty());
  require(chosen == 1, ErrorKind::configuration,
          "give exactly one of --regime, --transition, --structure-p, --shell-amplitude");
  const ScalingInputs in = scaling_inputs(o, sub);
  json j;
  if (!o.regime.empty()) {
    const auto p = predict_spectrum(parse_regime(o.regime), in, o.k);
    j = {{"kind", "spectrum"}, {"regime", to_string(p.regime)}, {"exponent", rational_json(p.exponent)},
         {"prefactor", p.prefactor}, {"k", p.k}, {"value", p.value}};
  } else if (!o.transition.empty()) {
    const auto p = predict_transition(parse_transition(o.transition), in);
    j = {{"kind", "transition"}, {"transition", to_string(p.kind)}, {"base", p.base},
         {"exponent", rational_json(p.exponent)}, {"wavenumber", p.value}};
  } else if (!o.structure_p.empty()) {
    require(sub.count("--delta") > 0, ErrorKind::configuration, "--structure-p needs --delta");
    const Rational p = parse_rational(o.structure_p), d = parse_rational(o.delta);
    const auto fam = parse_family(o.family);
    j = {{"kind", "structure"}, {"family", o.family}, {"p", rational_json(p)}, {"delta", rational_json(d)},
         {"exponent", rational_json(structure_exponent(p, d, fam))}};
    if (sub.count("--eps")) {
      const double dd = sub.count("--d-i") ? o.d_i : 0.0;
      j["prefactor"] = structure_prefactor(to_double(p), fam, o.eps, dd);
    }
  } else {
    AmplitudeModel model;
    if (o.amplitude_model == "emhd")
      model = AmplitudeModel::EMHD;
    else if (o.amplitude_model == "hall")
      model = AmplitudeModel::HALL;
    else
      fail(ErrorKind::configuration, "unknown --shell-amplitude '" + o.amplitude_model + "' (emhd, hall)");
    const auto a = predict_shell_amplitude(model, in, o.length, o.q);
    j = {{"kind", "shell-amplitude"}, {"model", o.amplitude_model}, {"q", o.q}, {"L", o.length}, {"b", a.b}};
    if (a.u) j["u"] = *a.u;
  }
  if (o.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    const fs::path out(o.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_json(out.string(), j);
    Manifest m;
    m.subcommand = "predict";
    m.dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    m.config = options_json(sub);
    m.output(out);
    m.write(fs::path(out.string() + ".manifest.json"), threads);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Reading diagnose outputs back

SpectrumTable spectrum_from_table(const Table& t) {
  SpectrumTable s;
  s.tag = t.meta.value("tag", "B");
  s.grid = GridSpec{t.meta.at("grid").at("n").get<int>(), t.meta.at("grid").at("L").get<double>()};
  for (const auto& r : t.rows)
    s.rows.push_back({int(r[t.column("q")]), r[t.column("lambda")], r[t.column("shell_energy")], r[t.column("spectrum")]});
  return s;
}

StructureFunctionTable structure_from_table(const Table& t) {
  StructureFunctionTable s;
  s.tag = t.meta.value("tag", "B");
  s.grid = GridSpec{t.meta.at("grid").at("n").get<int>(), t.meta.at("grid").at("L").get<double>()};
  for (const auto& r : t.rows) s.rows.push_back({r[t.column("ell")], r[t.column("p")], r[t.column("value")]});
  return s;
}

double delta_from_estimate(const json& est, const std::string& method) {
  const std::string key = method == "sup-form" ? "sup_form" : "shell_fit";
  require(method == "sup-form" || method == "shell-fit", ErrorKind::configuration,
          "--delta-method must be shell-fit or sup-form");
  require(est.contains(key) && est.at(key).contains("delta"), ErrorKind::input,
          "estimate has no usable " + key + " result");
  return est.at(key).at("delta").get<double>();
}

// ---------------------------------------------------------------------------
// check-bounds

struct CheckOptions {
  std::string diagnostics;
  std::string estimate;
  std::string delta_method = "shell-fit";
  double delta_b = -1.0;
  double d_i = -1.0;
  int q_lo = 1, q_hi = -1;
  double c_max = 100.0, c_min = 0.01;
  bool structure = true;
  std::string family = "magnetic";
  std::vector<std::string> structure_p{"2", "2.5", "3"};
  double structure_cap = 1e3;
  double ell_min = 0.0, ell_max = std::numeric_limits<double>::infinity();
  std::string out;
};

int run_check(const CheckOptions& o, const CLI::App& sub, int threads) {
  require(!o.diagnostics.empty() && !o.out.empty(), ErrorKind::configuration, "--diagnostics and --out are required");
  const fs::path ddir(o.diagnostics);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  Manifest m;
  m.subcommand = "check-bounds";
  m.dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  m.config = options_json(sub);

  m.input(ddir / "spectrum.csv");
  m.input(ddir / "dissipation.json");
  const auto spec = spectrum_from_table(read_table((ddir / "spectrum.csv").string()));
  const json diss = read_json((ddir / "dissipation.json").string());
  require(diss.contains("eps_bar") && diss.contains("eps_under"), ErrorKind::input,
          "dissipation.json has no extremal rates (diagnose needs tag B and d_i > 0)");
  double delta_b = o.delta_b;
  std::string delta_source = "flag";
  if (delta_b < 0.0) {
    require(!o.estimate.empty(), ErrorKind::configuration, "give --delta-b or --estimate");
    m.input(o.estimate);
    delta_b = delta_from_estimate(read_json(o.estimate), o.delta_method);
    delta_source = o.delta_method;
  }
  const double d_i = o.d_i > 0.0 ? o.d_i : diss.at("d_i").get<double>();
  const double eps_bar = diss.at("eps_bar").get<double>(), eps_under = diss.at("eps_under").get<double>();
  const int q_hi = o.q_hi < 0 ? spec.grid.analysis_top_shell() : o.q_hi;

  json j;
  j["delta_b"] = delta_b;
  j["delta_source"] = delta_source;
  j["d_i"] = d_i;
  j["eps_bar"] = eps_bar;
  j["eps_under"] = eps_under;
  const auto rep = check_spectrum_bounds(spec, eps_bar, eps_under, delta_b, d_i, spec.grid.L, o.q_lo, q_hi, o.c_max, o.c_min);
  json rows = json::array();
  for (std::size_t i = 0; i < rep.shells.size(); ++i)
    rows.push_back({{"q", rep.shells[i]}, {"c_up", rep.c_up[i]},
                    {"lower_ratio", std::isfinite(rep.lower_ratio[i]) ? json(rep.lower_ratio[i]) : json("inf")}});
  j["spectrum"] = {{"shells", rows},
                   {"max_c_up", rep.max_c_up},
                   {"min_lower_ratio", std::isfinite(rep.min_lower_ratio) ? json(rep.min_lower_ratio) : json("inf")},
                   {"c_max", rep.c_max},
                   {"c_min", rep.c_min},
                   {"upper_pass", rep.upper_pass},
                   {"lower_pass", rep.lower_pass},
                   {"pass", rep.pass()}};
  bool pass = rep.pass();

  if (o.structure) {
    m.input(ddir / "structure.csv");
    const auto sf = structure_from_table(read_table((ddir / "structure.csv").string()));
    json items = json::array();
    const auto fam = parse_family(o.family);
    for (const auto& ps : o.structure_p) {
      const Rational p = parse_rational(ps);
      json item = {{"p", to_double(p)}};
      try {
        const auto r = check_structure_bounds(sf, fam, p, eps_bar, d_i, exact(delta_b), o.ell_min, o.ell_max,
                                              o.structure_cap);
        item["exponent"] = to_double(r.exponent);
        item["prefactor"] = r.prefactor;
        item["c_p"] = std::isfinite(r.c_p) ? json(r.c_p) : json("inf");
        item["cap"] = r.cap;
        item["pass"] = r.pass;
        item["ell"] = r.ell;
        item["ratio"] = r.ratio;
        pass = pass && r.pass;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::hypothesis) throw;
        // Outside the bound's hypotheses there is nothing to check.
        item["applicable"] = false;
        item["reason"] = e.what();
      }
      items.push_back(item);
    }
    j["structure"] = items;
  }
  j["pass"] = pass;
  write_json(out.string(), j);
  m.output(out);
  m.write(fs::path(out.string() + ".manifest.json"), threads);
  std::cout << j.dump(2) << "\n";
  return pass ? 0 : exit_bound_failed;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::string diagnostics;
  std::string estimate;
  std::string delta_method = "shell-fit";
  std::string regime = "emhd-sub-ion";
  int fit_q_lo = 1, fit_q_hi = -1;
  double d_i = -1.0;
  std::string out;
};

int run_report(const ReportOptions& o, const CLI::App& sub, int threads) {
  require(!o.diagnostics.empty() && !o.estimate.empty() && !o.out.empty(), ErrorKind::configuration,
          "--diagnostics, --estimate and --out are required");
  const fs::path ddir(o.diagnostics);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  Manifest m;
  m.subcommand = "report";
  m.dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  m.config = options_json(sub);
  m.input(ddir / "spectrum.csv");
  m.input(ddir / "dissipation.json");
  m.input(o.estimate);
  const auto spec = spectrum_from_table(read_table((ddir / "spectrum.csv").string()));
  const json diss = read_json((ddir / "dissipation.json").string());
  const double delta = delta_from_estimate(read_json(o.estimate), o.delta_method);
  const int q_hi = o.fit_q_hi < 0 ? spec.grid.analysis_top_shell() : o.fit_q_hi;
  const auto fit = fit_power_law(spec, o.fit_q_lo, q_hi);

  const SpectrumRegime regime = parse_regime(o.regime);
  require(regime == SpectrumRegime::EMHD_SUB_ION, ErrorKind::unsupported_version,
          "report currently compares the emhd-sub-ion regime only");
  ScalingInputs in;
  in.delta_b = exact(delta);
  in.eps_b = diss.value("eps_b", 0.0) > 0.0 ? diss.at("eps_b").get<double>() : 1.0;
  in.d_i = o.d_i > 0.0 ? o.d_i : diss.value("d_i", 1.0);
  const auto pred = predict_spectrum(regime, in);
  const double predicted = to_double(pred.exponent);
  json j;
  j["regime"] = o.regime;
  j["delta_hat"] = delta;
  j["delta_method"] = o.delta_method;
  j["fit_shells"] = {o.fit_q_lo, q_hi};
  j["measured"] = {{"slope", fit.exponent}, {"stderr", fit.slope_stderr}, {"prefactor", fit.prefactor},
                   {"residual", fit.residual}, {"points", fit.points}};
  j["predicted"] = {{"exponent", predicted}, {"formula", "(delta_b - 10)/3"}, {"prefactor", pred.prefactor}};
  j["difference"] = fit.exponent - predicted;
  j["difference_in_stderr"] = fit.slope_stderr > 0.0 ? json((fit.exponent - predicted) / fit.slope_stderr) : json(nullptr);
  j["note"] = "comparison only; agreement is not asserted";
  write_json(out.string(), j);
  m.output(out);
  m.write(fs::path(out.string() + ".manifest.json"), threads);
  std::cout << o.regime << ": measured slope " << format_double(fit.exponent) << " +- "
            << format_double(fit.slope_stderr) << ", predicted " << format_double(predicted) << " (delta_b = "
            << format_double(delta) << ")\n";
  return 0;
}

void add_window(CLI::App* sub, Window& w) {
  sub->add_option("--window", w.mode, "Averaging window: all | second-half")->capture_default_str();
  sub->add_option("--t-min", w.t_min, "Ignore snapshots before this time");
  sub->add_option("--t-max", w.t_max, "Ignore snapshots after this time");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Littlewood-Paley turbulence diagnostics and pseudo-spectral MHD pipelines"};
  app.set_version_flag("--version", tool_version);
  app.set_config("--config", "", "TOML configuration file; flags override its values");
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Synthesize a field and write a snapshot");
  g->add_option("--kind", gen.kind, "packets | random | sinusoid | beltrami")->capture_default_str();
  g->add_option("--grid", gen.grid, "Points per dimension (power of two >= 16)")->capture_default_str();
  g->add_option("--length", gen.length, "Box length L")->capture_default_str();
  g->add_option("--delta", gen.delta, "Packet intermittency dimension")->capture_default_str();
  g->add_option("--q-lo", gen.q_lo, "Lowest shell")->capture_default_str();
  g->add_option("--q-hi", gen.q_hi, "Highest shell (default log2(n)-1)")->capture_default_str();
  g->add_option("--amplitude", gen.amplitude, "Amplitude")->capture_default_str();
  g->add_option("--alpha", gen.alpha, "Packet shell amplitude exponent")->capture_default_str();
  g->add_option("--slope", gen.slope, "Random field: ||v_q||^2 ~ 2^(q slope)")->capture_default_str();
  g->add_option("--mode", gen.mode, "Single-mode wave vector m1,m2,m3")->delimiter(',')->capture_default_str();
  g->add_option("--fields", gen.fields, "Field tags to write, e.g. u,B")->delimiter(',')->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--time", gen.time, "Snapshot time stamp")->capture_default_str();
  g->add_option("--out", gen.out, "Output snapshot path")->required();
  g->add_option("--manifest", gen.manifest, "Manifest path (default <out>.manifest.json)");

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Integrate EMHD / MHD / Hall-MHD and write snapshots");
  s->add_option("--model", sim.model, "emhd | mhd | hall-mhd")->capture_default_str();
  s->add_option("--grid", sim.grid, "Points per dimension")->capture_default_str();
  s->add_option("--length", sim.length, "Box length L")->capture_default_str();
  s->add_option("--nu", sim.nu, "Viscosity")->capture_default_str();
  s->add_option("--mu", sim.mu, "Resistivity")->capture_default_str();
  s->add_option("--d-i", sim.d_i, "Ion inertial length")->capture_default_str();
  s->add_option("--v-a", sim.v_A, "Alfven speed (recorded)")->capture_default_str();
  s->add_option("--b0", sim.b0, "Mean field bx,by,bz")->delimiter(',')->capture_default_str();
  s->add_option("--dt", sim.dt, "Time step")->capture_default_str();
  s->add_option("--steps", sim.steps, "Number of steps")->capture_default_str();
  s->add_option("--stride", sim.stride, "Steps between snapshots")->capture_default_str();
  s->add_option("--cfl-limit", sim.cfl_limit, "Largest allowed dt * rate")->capture_default_str();
  s->add_flag("--force", sim.force, "Enable band forcing");
  s->add_option("--force-q-lo", sim.force_q_lo, "Lowest forced shell")->capture_default_str();
  s->add_option("--force-q-hi", sim.force_q_hi, "Highest forced shell")->capture_default_str();
  s->add_option("--force-amplitude", sim.force_amplitude, "Forcing amplitude")->capture_default_str();
  s->add_option("--seed", sim.seed, "Seed (forcing; initial data use seed+1, seed+2)")->capture_default_str();
  s->add_option("--init", sim.init, "Initial snapshot (default: random field)");
  s->add_option("--init-slope", sim.init_slope, "Random initial data shell slope")->capture_default_str();
  s->add_option("--init-q-lo", sim.init_q_lo, "Random initial data lowest shell")->capture_default_str();
  s->add_option("--init-q-hi", sim.init_q_hi, "Random initial data highest shell")->capture_default_str();
  s->add_option("--init-amplitude", sim.init_amplitude, "Random initial data amplitude")->capture_default_str();
  s->add_option("--out-dir", sim.out_dir, "Output directory")->required();

  DiagnoseOptions dia;
  auto* d = app.add_subcommand("diagnose", "Spectra, shell norms, Hall flux and structure functions");
  d->add_option("inputs", dia.inputs, "Snapshot files or directories")->required();
  add_window(d, dia.window);
  d->add_option("--tag", dia.tag, "Field: u | B | Z+ | Z-")->capture_default_str();
  d->add_option("--q-lo", dia.q_lo, "Lowest analysis shell")->capture_default_str();
  d->add_option("--q-hi", dia.q_hi, "Highest analysis shell (default log2(n)-1)")->capture_default_str();
  d->add_option("--nu", dia.nu, "Viscosity for eps_u")->capture_default_str();
  d->add_option("--mu", dia.mu, "Resistivity for eps_b")->capture_default_str();
  d->add_option("--d-i", dia.d_i, "Ion inertial length for the Hall flux")->capture_default_str();
  d->add_option("--flux-form", dia.flux_form, "triad | full")->capture_default_str();
  d->add_option("--under-exclude", dia.under_exclude, "Shells left out of the eps_under minimum, e.g. forced shells")
      ->delimiter(',');
  d->add_option("--p", dia.p_list, "Structure function orders")->delimiter(',')->capture_default_str();
  d->add_option("--ell-max", dia.ell_max, "Largest separation in grid cells (default n/4)")->capture_default_str();
  d->add_option("--direction", dia.direction, "x | y | z | isotropic")->capture_default_str();
  d->add_option("--samples", dia.samples, "Monte Carlo samples (0 = exhaustive)")->capture_default_str();
  d->add_option("--seed", dia.seed, "Monte Carlo seed")->capture_default_str();
  d->add_option("--out-dir", dia.out_dir, "Output directory")->required();

  EstimateOptions est;
  auto* e = app.add_subcommand("estimate-delta", "Estimate the intermittency dimension");
  e->add_option("inputs", est.inputs, "Snapshot files or directories")->required();
  add_window(e, est.window);
  e->add_option("--tag", est.tag, "Field: u | B | Z+ | Z-")->capture_default_str();
  e->add_option("--q-lo", est.q_lo, "Lowest shell")->capture_default_str();
  e->add_option("--q-hi", est.q_hi, "Highest shell (default log2(n)-1)")->capture_default_str();
  e->add_option("--C", est.C, "Sup-form constant (<= 0: ratio-normalized)")->capture_default_str();
  e->add_option("--out", est.out, "Output JSON")->required();

  PredictOptions pre;
  auto* p = app.add_subcommand("predict", "Evaluate a scaling law");
  p->add_option("--regime", pre.regime, "Spectrum regime, e.g. emhd-sub-ion");
  p->add_option("--transition", pre.transition, "Transition wavenumber kind, e.g. hall-ion");
  p->add_option("--structure-p", pre.structure_p, "Structure function order (rational)");
  p->add_option("--shell-amplitude", pre.amplitude_model, "emhd | hall");
  p->add_option("--family", pre.family, "magnetic | velocity | elsasser")->capture_default_str();
  p->add_option("--delta", pre.delta, "Intermittency dimension for --structure-p");
  p->add_option("--delta-b", pre.delta_b, "delta_b (rational, e.g. 3 or 7/3)");
  p->add_option("--delta-u", pre.delta_u, "delta_u");
  p->add_option("--delta-plus", pre.delta_plus, "delta_+");
  p->add_option("--delta-minus", pre.delta_minus, "delta_-");
  p->add_option("--delta-perp-plus", pre.delta_perp_plus, "perpendicular delta_+ in [0,2]");
  p->add_option("--delta-perp-minus", pre.delta_perp_minus, "perpendicular delta_- in [0,2]");
  p->add_option("--eps", pre.eps, "Dissipation rate for the structure prefactor");
  p->add_option("--eps-b", pre.eps_b, "eps_b");
  p->add_option("--eps-u", pre.eps_u, "eps_u");
  p->add_option("--eps-plus", pre.eps_plus, "eps_+");
  p->add_option("--eps-minus", pre.eps_minus, "eps_-");
  p->add_option("--eps-perp-plus", pre.eps_perp_plus, "perpendicular eps_+");
  p->add_option("--eps-perp-minus", pre.eps_perp_minus, "perpendicular eps_-");
  p->add_option("--eps-perp", pre.eps_perp, "perpendicular eps for critical balance / alignment");
  p->add_option("--nu", pre.nu, "Viscosity");
  p->add_option("--mu", pre.mu, "Resistivity");
  p->add_option("--d-i", pre.d_i, "Ion inertial length");
  p->add_option("--v-a", pre.v_A, "Alfven speed");
  p->add_option("--k", pre.k, "Wavenumber at which to evaluate the spectrum")->capture_default_str();
  p->add_option("--q", pre.q, "Shell for --shell-amplitude")->capture_default_str();
  p->add_option("--length", pre.length, "Box length for --shell-amplitude")->capture_default_str();
  p->add_option("--out", pre.out, "Output JSON (default stdout)");

  CheckOptions chk;
  auto* c = app.add_subcommand("check-bounds", "Check spectrum and structure-function bounds");
  c->add_option("--diagnostics", chk.diagnostics, "Directory written by diagnose")->required();
  c->add_option("--estimate", chk.estimate, "JSON written by estimate-delta");
  c->add_option("--delta-method", chk.delta_method, "shell-fit | sup-form")->capture_default_str();
  c->add_option("--delta-b", chk.delta_b, "Override delta_b");
  c->add_option("--d-i", chk.d_i, "Override d_i");
  c->add_option("--q-lo", chk.q_lo, "Lowest shell")->capture_default_str();
  c->add_option("--q-hi", chk.q_hi, "Highest shell (default log2(n)-1)")->capture_default_str();
  c->add_option("--c-max", chk.c_max, "Pass threshold for max C_up")->capture_default_str();
  c->add_option("--c-min", chk.c_min, "Pass threshold for min lower ratio")->capture_default_str();
  c->add_flag("!--no-structure", chk.structure, "Skip structure-function bounds");
  c->add_option("--family", chk.family, "magnetic | velocity | elsasser")->capture_default_str();
  c->add_option("--structure-p", chk.structure_p, "Orders in [2,3]")->delimiter(',')->capture_default_str();
  c->add_option("--structure-cap", chk.structure_cap, "Pass threshold for C_p")->capture_default_str();
  c->add_option("--ell-min", chk.ell_min, "Smallest separation")->capture_default_str();
  c->add_option("--ell-max", chk.ell_max, "Largest separation");
  c->add_option("--out", chk.out, "Output JSON")->required();

  ReportOptions rep;
  auto* r = app.add_subcommand("report", "Measured spectral slope next to the predicted exponent");
  r->add_option("--diagnostics", rep.diagnostics, "Directory written by diagnose")->required();
  r->add_option("--estimate", rep.estimate, "JSON written by estimate-delta")->required();
  r->add_option("--delta-method", rep.delta_method, "shell-fit | sup-form")->capture_default_str();
  r->add_option("--regime", rep.regime, "Spectrum regime")->capture_default_str();
  r->add_option("--fit-q-lo", rep.fit_q_lo, "Lowest fitted shell")->capture_default_str();
  r->add_option("--fit-q-hi", rep.fit_q_hi, "Highest fitted shell (default log2(n)-1)")->capture_default_str();
  r->add_option("--d-i", rep.d_i, "Override d_i");
  r->add_option("--out", rep.out, "Output JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << json{{"error", "usage"}, {"message", ex.what()}}.dump() << "\n";
    return 2;
  }

  try {
    const int threads = thread_count();
    if (*g) return run_generate(gen, *g, threads);
    if (*s) return run_simulate(sim, *s, threads);
    if (*d) return run_diagnose(dia, *d, threads);
    if (*e) return run_estimate(est, *e, threads);
    if (*p) return run_predict(pre, *p, threads);
    if (*c) return run_check(chk, *c, threads);
    if (*r) return run_report(rep, *r, threads);
  } catch (const Error& ex) {
    json j{{"error", to_string(ex.kind())}, {"message", ex.what()}};
    if (const auto* fe = dynamic_cast<const FormatError*>(&ex)) j["offset"] = fe->offset();
    if (const auto* se = dynamic_cast<const StepError*>(&ex)) j["step"] = se->step();
    std::cerr << j.dump() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << json{{"error", "internal"}, {"message", ex.what()}}.dump() << "\n";
    return 1;
  }
  return 2;
}
