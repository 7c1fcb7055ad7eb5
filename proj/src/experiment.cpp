#include "nullwave/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "nullwave/errors.hpp"
#include "nullwave/geometry.hpp"

namespace nullwave {

namespace {

using json = nlohmann::json;
namespace pt = boost::property_tree;

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Parsing helpers

double parse_double(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": '" + text + "' is not a number");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw ConfigError(where + ": trailing characters in '" + text + "'");
  return value;
}

std::size_t parse_count(const std::string& text, const std::string& where) {
  const double v = parse_double(text, where);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) {
    throw ConfigError(where + ": expected a nonnegative integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(where + ": expected true/false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string token;
  while (is >> token) out.push_back(parse_double(token, where));
  return out;
}

NullFormTerm parse_term(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  std::string c, j, k, coeff, form, extra;
  if (!(is >> c >> j >> k >> coeff >> form) || (is >> extra)) {
    throw ConfigError(where + ": expected 'component j k coeff form', got '" + text + "'");
  }
  NullFormTerm term;
  term.component = parse_count(c, where);
  term.j = parse_count(j, where);
  term.k = parse_count(k, where);
  term.coeff = parse_double(coeff, where);
  try {
    term.form = NullForm::parse(form);
  } catch (const Error& err) {
    throw ConfigError(where + ": " + err.what());
  }
  return term;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"obstacle", {"kind", "radius", "a", "b", "c"}},
      {"grid",
       {"mode", "r_max", "n", "sponge_cells", "box", "box_sponge", "cfl", "dt", "sponge_strength"}},
      {"data", {"family", "shell", "width", "support", "amplitude", "velocity_ratio", "eps"}},
      {"nullform", {"components"}},
      {"run",
       {"t_end", "stride", "tol", "max_iter", "start", "smallness_threshold", "local_radius",
        "linear_t_end", "fit_t_a", "fit_t_b", "sup_fit_t_a", "sup_fit_t_b", "seed"}},
      {"scan", {"eps"}},
      {"report", {"stride", "deltas"}},
      {"compat", {"order", "tol"}},
      {"geometry", {"samples"}},
      {"output", {"dir", "snapshots"}},
  };
  return keys;
}

// ---------------------------------------------------------------------------
// Output helpers

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << std::scientific << x;
  return os.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << num(columns[c][r]);
    os << "\n";
  }
}

json envelope(const ExperimentConfig& cfg, const std::string& command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = cfg.to_json();
  return j;
}

json fit_json(const DecayFit& fit) {
  return {{"model", fit.model_name()}, {"rate", fit.rate},         {"exponent", fit.exponent},
          {"amplitude", fit.amplitude}, {"t_a", fit.t_a},          {"t_b", fit.t_b},
          {"residual", fit.residual},   {"samples", fit.samples}};
}

json report_json(const IterationReport& r) {
  return {{"residuals", r.residuals},
          {"ratios", r.ratios},
          {"converged", r.converged},
          {"iterations", r.iterations}};
}

void prepare_output(const ExperimentConfig& cfg) { std::filesystem::create_directories(cfg.out_dir); }

}  // namespace

// ---------------------------------------------------------------------------
// Config

Obstacle ExperimentConfig::obstacle() const {
  if (obstacle_kind == "sphere") return Obstacle::sphere(semi_axes[0]);
  return Obstacle::ellipsoid(semi_axes[0], semi_axes[1], semi_axes[2]);
}

RadialGrid ExperimentConfig::radial_grid() const {
  return build_radial_grid(semi_axes[0], r_max, n, sponge_cells);
}

CartesianGrid ExperimentConfig::cartesian_grid() const {
  return build_masked_grid(obstacle(), box, n, box_sponge);
}

StepperOptions ExperimentConfig::stepper_options() const {
  StepperOptions opt;
  opt.cfl = cfl;
  opt.sponge_strength = sponge_strength;
  return opt;
}

PicardOptions ExperimentConfig::picard_options() const {
  PicardOptions opt;
  opt.t_end = t_end;
  opt.dt = dt;
  opt.stride = stride;
  opt.tol = tol;
  opt.max_iter = max_iter;
  opt.start = start == "linear" ? PicardOptions::Start::Linear : PicardOptions::Start::Zero;
  opt.smallness_threshold = smallness_threshold;
  opt.stepper = stepper_options();
  return opt;
}

json ExperimentConfig::to_json() const {
  json terms = json::array();
  for (const auto& t : spec.terms) {
    terms.push_back({{"component", t.component},
                     {"j", t.j},
                     {"k", t.k},
                     {"coeff", t.coeff},
                     {"form", t.form.name()}});
  }
  return {
      {"obstacle", {{"kind", obstacle_kind}, {"semi_axes", semi_axes}}},
      {"grid",
       {{"mode", mode},
        {"r_max", r_max},
        {"n", n},
        {"sponge_cells", sponge_cells},
        {"box", box},
        {"box_sponge", box_sponge},
        {"cfl", cfl},
        {"dt", dt},
        {"sponge_strength", sponge_strength}}},
      {"data",
       {{"family", "bump"},
        {"shell", bump.profile.shell},
        {"width", bump.profile.width},
        {"support", bump.profile.support},
        {"amplitude", bump.profile.amplitude},
        {"velocity_ratio", bump.velocity_ratio},
        {"eps", eps}}},
      {"nullform", {{"components", spec.components}, {"terms", terms}}},
      {"run",
       {{"t_end", t_end},
        {"stride", stride},
        {"tol", tol},
        {"max_iter", max_iter},
        {"start", start},
        {"smallness_threshold", std::isfinite(smallness_threshold) ? json(smallness_threshold)
                                                                   : json("inf")},
        {"local_radius", local_radius},
        {"linear_t_end", linear_t_end},
        {"fit_t_a", fit_t_a},
        {"fit_t_b", fit_t_b},
        {"sup_fit_t_a", sup_fit_t_a},
        {"sup_fit_t_b", sup_fit_t_b},
        {"seed", seed}}},
      {"scan", {{"eps", scan_eps}}},
      {"report", {{"stride", report_stride}, {"deltas", deltas}}},
      {"compat", {{"order", compat_order}, {"tol", compat_tol}}},
      {"geometry", {{"samples", geometry_samples}}},
      {"output", {{"dir", out_dir.string()}, {"snapshots", write_snapshots}}},
  };
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (cfg.obstacle_kind != "sphere" && cfg.obstacle_kind != "ellipsoid") {
    fail("obstacle.kind must be sphere or ellipsoid");
  }
  if (cfg.mode != "radial" && cfg.mode != "cartesian") fail("grid.mode must be radial or cartesian");
  if (cfg.mode == "radial" && cfg.obstacle_kind != "sphere") {
    fail("radial mode needs a sphere obstacle");
  }
  try {
    if (cfg.mode == "radial") {
      cfg.radial_grid();
    } else {
      cfg.cartesian_grid();
    }
    cfg.spec.validate();
  } catch (const Error& err) {
    fail(err.what());
  }
  if (cfg.mode == "radial" && !cfg.spec.preserves_radial_symmetry()) {
    fail("radial mode supports Q0 and Q_jk with j >= 1 only");
  }
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) fail("grid.cfl must lie in (0, 1]");
  if (!(cfg.dt >= 0.0)) fail("grid.dt must be nonnegative");
  if (!(cfg.sponge_strength >= 0.0)) fail("grid.sponge_strength must be nonnegative");
  if (!(cfg.eps >= 0.0)) fail("data.eps must be nonnegative");
  if (!(cfg.bump.profile.width > 0.0 && cfg.bump.profile.support > 0.0)) {
    fail("data.width and data.support must be positive");
  }
  if (!(cfg.t_end > 0.0) || !(cfg.linear_t_end > 0.0)) fail("run times must be positive");
  if (cfg.stride == 0 || cfg.report_stride == 0) fail("strides must be positive");
  if (!(cfg.tol > 0.0)) fail("run.tol must be positive");
  if (cfg.max_iter < 1) fail("run.max_iter must be at least 1");
  if (cfg.start != "zero" && cfg.start != "linear") fail("run.start must be zero or linear");
  if (!(cfg.smallness_threshold > 0.0)) fail("run.smallness_threshold must be positive");
  if (!(cfg.local_radius > 0.0)) fail("run.local_radius must be positive");
  if (!(cfg.fit_t_a < cfg.fit_t_b) || !(cfg.sup_fit_t_a < cfg.sup_fit_t_b)) {
    fail("fit windows need t_a < t_b");
  }
  for (std::size_t i = 0; i < cfg.scan_eps.size(); ++i) {
    if (!(cfg.scan_eps[i] >= 0.0) || (i > 0 && !(cfg.scan_eps[i] > cfg.scan_eps[i - 1]))) {
      fail("scan.eps must be nonnegative and ascending");
    }
  }
  for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
    if (!(cfg.deltas[i] >= 0.0) || (i > 0 && !(cfg.deltas[i] < cfg.deltas[i - 1]))) {
      fail("report.deltas must be nonnegative and descending");
    }
  }
  if (cfg.compat_order < 0 || cfg.compat_order > kMaxCompatibilityOrder) {
    fail("compat.order must lie in 0..4");
  }
  if (cfg.geometry_samples == 0) fail("geometry.samples must be positive");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& err) {
    throw ConfigError(std::string("cannot parse config: ") + err.what());
  }
  ExperimentConfig cfg;
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      const bool term_key = section == "nullform" && key.rfind("term", 0) == 0;
      if (!term_key && !it->second.count(key)) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    if (!v) return std::nullopt;
    return *v;
  };
  auto set_double = [&](const std::string& s, const std::string& k, double& target) {
    if (auto v = get(s, k)) target = parse_double(*v, s + "." + k);
  };
  auto set_count = [&](const std::string& s, const std::string& k, std::size_t& target) {
    if (auto v = get(s, k)) target = parse_count(*v, s + "." + k);
  };

  if (auto v = get("obstacle", "kind")) cfg.obstacle_kind = *v;
  set_double("obstacle", "radius", cfg.semi_axes[0]);
  if (cfg.obstacle_kind == "sphere") {
    cfg.semi_axes = {cfg.semi_axes[0], cfg.semi_axes[0], cfg.semi_axes[0]};
  } else {
    set_double("obstacle", "a", cfg.semi_axes[0]);
    set_double("obstacle", "b", cfg.semi_axes[1]);
    set_double("obstacle", "c", cfg.semi_axes[2]);
  }

  if (auto v = get("grid", "mode")) cfg.mode = *v;
  set_double("grid", "r_max", cfg.r_max);
  set_count("grid", "n", cfg.n);
  set_count("grid", "sponge_cells", cfg.sponge_cells);
  set_double("grid", "box", cfg.box);
  set_count("grid", "box_sponge", cfg.box_sponge);
  set_double("grid", "cfl", cfg.cfl);
  set_double("grid", "dt", cfg.dt);
  set_double("grid", "sponge_strength", cfg.sponge_strength);

  if (auto v = get("data", "family"); v && *v != "bump") {
    throw ConfigError("data.family: only 'bump' is available");
  }
  set_double("data", "shell", cfg.bump.profile.shell);
  set_double("data", "width", cfg.bump.profile.width);
  set_double("data", "support", cfg.bump.profile.support);
  set_double("data", "amplitude", cfg.bump.profile.amplitude);
  set_double("data", "velocity_ratio", cfg.bump.velocity_ratio);
  set_double("data", "eps", cfg.eps);

  if (tree.get_child_optional("nullform")) {
    NullFormSpec spec;
    std::size_t comps = 1;
    set_count("nullform", "components", comps);
    spec.components = comps;
    for (std::size_t i = 0;; ++i) {
      const auto v = get("nullform", "term" + std::to_string(i));
      if (!v) break;
      spec.terms.push_back(parse_term(*v, "nullform.term" + std::to_string(i)));
    }
    for (const auto& [key, value] : tree.get_child("nullform")) {
      if (key.rfind("term", 0) != 0) continue;
      const std::string idx = key.substr(4);
      const bool numeric = !idx.empty() && std::all_of(idx.begin(), idx.end(), [](char ch) {
        return std::isdigit(static_cast<unsigned char>(ch));
      });
      if (!numeric || std::stoul(idx) >= spec.terms.size()) {
        throw ConfigError("nullform terms must be numbered term0, term1, ... without gaps");
      }
    }
    cfg.spec = spec;
  }

  set_double("run", "t_end", cfg.t_end);
  set_count("run", "stride", cfg.stride);
  set_double("run", "tol", cfg.tol);
  if (auto v = get("run", "max_iter")) cfg.max_iter = static_cast<int>(parse_count(*v, "run.max_iter"));
  if (auto v = get("run", "start")) cfg.start = *v;
  if (auto v = get("run", "smallness_threshold")) {
    cfg.smallness_threshold =
        *v == "inf" ? std::numeric_limits<double>::infinity() : parse_double(*v, "run.smallness_threshold");
  }
  set_double("run", "local_radius", cfg.local_radius);
  set_double("run", "linear_t_end", cfg.linear_t_end);
  set_double("run", "fit_t_a", cfg.fit_t_a);
  set_double("run", "fit_t_b", cfg.fit_t_b);
  set_double("run", "sup_fit_t_a", cfg.sup_fit_t_a);
  set_double("run", "sup_fit_t_b", cfg.sup_fit_t_b);
  if (auto v = get("run", "seed")) cfg.seed = parse_count(*v, "run.seed");

  if (auto v = get("scan", "eps")) cfg.scan_eps = parse_list(*v, "scan.eps");
  set_count("report", "stride", cfg.report_stride);
  if (auto v = get("report", "deltas")) cfg.deltas = parse_list(*v, "report.deltas");
  if (auto v = get("compat", "order")) cfg.compat_order = static_cast<int>(parse_count(*v, "compat.order"));
  set_double("compat", "tol", cfg.compat_tol);
  set_count("geometry", "samples", cfg.geometry_samples);
  if (auto v = get("output", "dir")) cfg.out_dir = *v;
  if (auto v = get("output", "snapshots")) cfg.write_snapshots = parse_bool(*v, "output.snapshots");

  validate(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Geometry

GeometryResiduals geometry_residuals(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 100.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto direction = [&] {
    Vec3 w{gauss(rng), gauss(rng), gauss(rng)};
    const double len = std::hypot(w[0], w[1], w[2]);
    return Vec3{w[0] / len, w[1] / len, w[2] / len};
  };

  GeometryResiduals out;
  out.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    const MinkowskiPoint p = make_minkowski(coord(rng), coord(rng), direction());
    const EinsteinPoint q = to_einstein(p);
    const MinkowskiPoint back = from_einstein(q);
    const double scale = std::max(1.0, std::hypot(p.t, p.r()));
    const double err = std::sqrt((back.t - p.t) * (back.t - p.t) +
                                 (back.x[0] - p.x[0]) * (back.x[0] - p.x[0]) +
                                 (back.x[1] - p.x[1]) * (back.x[1] - p.x[1]) +
                                 (back.x[2] - p.x[2]) * (back.x[2] - p.x[2]));
    out.roundtrip_minkowski = std::max(out.roundtrip_minkowski, err / scale);

    const double om_m = conformal_factor(p);
    const double om_e = conformal_factor(q);
    out.conformal = std::max(out.conformal, std::abs(om_m - om_e) / om_m);

    const GammaCoefficients c = gamma_coefficients(q);
    for (int mu = 0; mu < 4; ++mu) {
      for (int nu = 0; nu < 4; ++nu) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kGammaCount; ++k) {
          acc += c.minkowski_in_gamma[mu][k] * c.gamma_in_minkowski[k][nu];
        }
        out.pushforward_identity =
            std::max(out.pushforward_identity, std::abs(acc - (mu == nu ? 1.0 : 0.0)));
      }
    }

    // Diamond sample: T in (-pi, pi), R in [0, pi - |T|), kept off the edge.
    const double T = (2.0 * unit(rng) - 1.0) * (kPi - 2e-3);
    const double R = unit(rng) * (kPi - std::abs(T) - 1e-3);
    const EinsteinPoint e{T, R, direction()};
    const EinsteinPoint e2 = to_einstein(from_einstein(e));
    const double escale = std::max(1.0, std::hypot(T, R));
    double eerr = std::hypot(e2.T - e.T, e2.R - e.R);
    if (R > 1e-6) {
      // omega only matters away from the pole
      eerr = std::max(eerr, R * std::hypot(e2.omega[0] - e.omega[0], e2.omega[1] - e.omega[1],
                                           e2.omega[2] - e.omega[2]));
    }
    out.roundtrip_einstein = std::max(out.roundtrip_einstein, eerr / escale);
  }
  return out;
}

json verify_geometry(const ExperimentConfig& cfg) {
  const GeometryResiduals res = geometry_residuals(cfg.geometry_samples, cfg.seed);
  const Obstacle obstacle = cfg.obstacle();
  std::vector<double> Ts, ratios;
  for (int i = 0; i <= 40; ++i) {
    const double T = 0.5 * kPi + (0.5 * kPi - 0.01) * i / 40.0;
    Ts.push_back(T);
    ratios.push_back(boundary_degeneration_ratio(T, obstacle));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());

  prepare_output(cfg);
  json j = envelope(cfg, "verify-geometry");
  j["residuals"] = {{"samples", res.samples},
                    {"roundtrip_minkowski", res.roundtrip_minkowski},
                    {"roundtrip_einstein", res.roundtrip_einstein},
                    {"conformal_factor", res.conformal},
                    {"pushforward_identity", res.pushforward_identity}};
  j["max_roundtrip_residual"] = std::max(res.roundtrip_minkowski, res.roundtrip_einstein);
  j["identities_pass"] = res.roundtrip_minkowski < 1e-12 && res.roundtrip_einstein < 1e-12 &&
                         res.conformal < 1e-12;
  j["boundary_degeneration"] = {{"T", Ts}, {"ratio", ratios}, {"band", *hi / *lo}};
  write_csv(cfg.out_dir / "boundary_degeneration.csv", {"T", "ratio"}, {Ts, ratios});
  write_json(cfg.out_dir / "geometry.json", j);
  return j;
}

// ---------------------------------------------------------------------------
// Linear

json run_linear(const ExperimentConfig& cfg) {
  const StepperOptions opt = cfg.stepper_options();
  std::vector<double> times, local, total;
  Trajectory traj;
  double dt = cfg.dt;
  if (cfg.mode == "radial") {
    const RadialGrid grid = cfg.radial_grid();
    if (dt == 0.0) dt = max_stable_dt(grid, cfg.cfl);
    traj = solve_linear(grid, cfg.bump.sample(grid), {}, cfg.linear_t_end, dt, cfg.stride, opt);
    for (const auto& s : traj.snapshots) {
      times.push_back(s.t);
      local.push_back(local_energy(grid, s, cfg.local_radius));
      total.push_back(energy(grid, s));
    }
    prepare_output(cfg);
    if (cfg.write_snapshots) {
      const auto& last = traj.snapshots.back();
      write_snapshot(cfg.out_dir / "linear_final.bin", grid, last.t, {{"u", last.u}, {"v", last.v}});
    }
  } else {
    const CartesianGrid grid = cfg.cartesian_grid();
    if (dt == 0.0) dt = max_stable_dt(grid, cfg.cfl);
    traj = solve_linear(grid, cfg.bump.sample(grid), {}, cfg.linear_t_end, dt, cfg.stride, opt);
    for (const auto& s : traj.snapshots) {
      times.push_back(s.t);
      local.push_back(local_energy(grid, s, cfg.local_radius));
      total.push_back(energy(grid, s));
    }
    prepare_output(cfg);
    if (cfg.write_snapshots) {
      const auto& last = traj.snapshots.back();
      write_snapshot(cfg.out_dir / "linear_final.bin", grid, last.t, {{"u", last.u}, {"v", last.v}});
    }
  }
  write_csv(cfg.out_dir / "local_energy.csv", {"t", "local_energy", "energy"}, {times, local, total});
  const DecayFit fit =
      fit_decay(times, local, DecayFit::Model::Exponential, cfg.fit_t_a, cfg.fit_t_b);
  json j = envelope(cfg, "run-linear");
  j["dt"] = dt;
  j["steps"] = step_count(cfg.linear_t_end, dt, cfg.stride);
  j["decay_fit"] = fit_json(fit);
  j["initial_local_energy"] = local.front();
  j["final_local_energy"] = local.back();
  write_json(cfg.out_dir / "linear.json", j);
  return j;
}

// ---------------------------------------------------------------------------
// Nonlinear

json run_nonlinear(const ExperimentConfig& cfg) {
  const PicardOptions opt = cfg.picard_options();
  NonlinearSolution sol;
  IterationReport report;
  double norm = 0.0;
  std::function<void()> snapshot;
  if (cfg.mode == "radial") {
    const RadialGrid grid = cfg.radial_grid();
    const auto data = scaled_bump_data(grid, cfg.bump, cfg.spec.components, cfg.eps);
    norm = data_norm(grid, data);
    std::tie(sol, report) = picard_solve(grid, data, cfg.spec, opt);
    snapshot = [&, grid] {
      NamedFields fields;
      for (std::size_t c = 0; c < sol.components.size(); ++c) {
        const auto& last = sol.components[c].snapshots.back();
        fields.emplace_back("u" + std::to_string(c), last.u);
        fields.emplace_back("v" + std::to_string(c), last.v);
      }
      write_snapshot(cfg.out_dir / "nonlinear_final.bin", grid, sol.sup_times.back(), fields);
    };
  } else {
    const CartesianGrid grid = cfg.cartesian_grid();
    const auto data = scaled_bump_data(grid, cfg.bump, cfg.spec.components, cfg.eps);
    norm = data_norm(grid, data);
    std::tie(sol, report) = picard_solve(grid, data, cfg.spec, opt);
    snapshot = [&, grid] {
      NamedFields fields;
      for (std::size_t c = 0; c < sol.components.size(); ++c) {
        const auto& last = sol.components[c].snapshots.back();
        fields.emplace_back("u" + std::to_string(c), last.u);
        fields.emplace_back("v" + std::to_string(c), last.v);
      }
      write_snapshot(cfg.out_dir / "nonlinear_final.bin", grid, sol.sup_times.back(), fields);
    };
  }
  prepare_output(cfg);
  if (cfg.write_snapshots) snapshot();

  std::vector<double> it, res, ratio;
  for (std::size_t m = 0; m < report.residuals.size(); ++m) {
    it.push_back(static_cast<double>(m));
    res.push_back(report.residuals[m]);
    ratio.push_back(m > 0 && report.residuals[m - 1] > 0.0 ? report.residuals[m] / report.residuals[m - 1]
                                                           : 0.0);
  }
  write_csv(cfg.out_dir / "iterations.csv", {"iteration", "residual", "ratio"}, {it, res, ratio});
  write_csv(cfg.out_dir / "sup_norm.csv", {"t", "sup_norm"}, {sol.sup_times, sol.sup_norm});

  json j = envelope(cfg, "run-nonlinear");
  j["data_norm"] = norm;
  j["iteration_report"] = report_json(report);
  j["sup_decay_fit"] = fit_json(measure_sup_decay(sol, cfg.sup_fit_t_a, cfg.sup_fit_t_b));
  write_json(cfg.out_dir / "nonlinear.json", j);
  return j;
}

json scan_smallness(const ExperimentConfig& cfg) {
  if (cfg.mode != "radial") throw ConfigError("scan-smallness runs on the radial grid only");
  const RadialGrid grid = cfg.radial_grid();
  const ScanResult scan = smallness_scan(grid, cfg.bump, cfg.spec, cfg.scan_eps, cfg.picard_options());

  prepare_output(cfg);
  std::vector<double> eps, conv, iters, ratio, first;
  json rows = json::array();
  for (const auto& r : scan.rows) {
    eps.push_back(r.eps);
    conv.push_back(r.converged ? 1.0 : 0.0);
    iters.push_back(r.iterations);
    ratio.push_back(r.final_ratio);
    first.push_back(r.first_correction);
    rows.push_back({{"eps", r.eps},
                    {"converged", r.converged},
                    {"iterations", r.iterations},
                    {"final_ratio", r.final_ratio},
                    {"first_correction", r.first_correction},
                    {"failure", r.failure}});
  }
  write_csv(cfg.out_dir / "scan.csv",
            {"eps", "converged", "iterations", "final_ratio", "first_correction"},
            {eps, conv, iters, ratio, first});
  json j = envelope(cfg, "scan-smallness");
  j["rows"] = rows;
  j["boundary"] = scan.boundary;
  j["recommended_smallness_threshold"] = 0.5 * scan.boundary;
  j["ratios_monotone"] = scan.ratios_monotone;
  write_json(cfg.out_dir / "scan.json", j);
  return j;
}

json estimate_report(const ExperimentConfig& cfg) {
  if (cfg.mode != "radial") throw ConfigError("estimate-report runs on the radial grid only");
  const RadialGrid grid = cfg.radial_grid();
  PicardOptions opt = cfg.picard_options();
  opt.stride = cfg.report_stride;
  ReportOptions ropt;
  ropt.deltas = cfg.deltas;

  std::vector<NormReport> reports;
  json runs = json::array();
  for (double e : cfg.scan_eps) {
    const auto data = scaled_bump_data(grid, cfg.bump, cfg.spec.components, e);
    const auto [sol, iters] = picard_solve(grid, data, cfg.spec, opt);
    NormReport rep = estimate_ratio_report(grid, sol, e, ropt);
    json ratios = json::array();
    for (const auto& r : rep.ratios) {
      ratios.push_back({{"estimate", r.estimate}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}});
    }
    runs.push_back({{"eps", e},
                    {"iterations", iters.iterations},
                    {"norms", rep.norms},
                    {"ratios", ratios},
                    {"deltas", rep.deltas},
                    {"tip_forcing_by_delta", rep.tip_forcing_by_delta},
                    {"tip_solution_by_delta", rep.tip_solution_by_delta},
                    {"delta_sweep_converged",
                     rep.ratios.empty() || (delta_sweep_converged(rep.tip_forcing_by_delta) &&
                                            delta_sweep_converged(rep.tip_solution_by_delta))}});
    reports.push_back(std::move(rep));
  }

  // Sobolev mapping bound on random bump draws.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> centre(-0.6, 0.6), width(0.25, 0.5);
  const CartesianGrid cgrid =
      build_masked_grid(Obstacle::sphere(cfg.semi_axes[0]), 8.0, 40, 8);
  std::vector<double> mapping;
  for (int draw = 0; draw < 10; ++draw) {
    BumpProfile p;
    p.centre = {centre(rng), centre(rng), centre(rng)};
    p.shell = 2.2;
    p.width = width(rng);
    p.support = 0.8;
    mapping.push_back(sobolev_mapping_ratio(cgrid, sample(cgrid, p)).ratio);
  }

  prepare_output(cfg);
  std::vector<double> c_eps, c_lhs, c_rhs, c_ratio, c_id;
  std::vector<double> d_eps, d_delta, d_f, d_u;
  const std::vector<std::string> names{"local_nullform", "weighted_nullform", "weighted_L8",
                                       "pointwise_decay"};
  for (const auto& rep : reports) {
    for (const auto& r : rep.ratios) {
      c_eps.push_back(rep.eps);
      c_id.push_back(static_cast<double>(std::find(names.begin(), names.end(), r.estimate) - names.begin()));
      c_lhs.push_back(r.lhs);
      c_rhs.push_back(r.rhs);
      c_ratio.push_back(r.ratio);
    }
    for (std::size_t a = 0; a < rep.tip_forcing_by_delta.size(); ++a) {
      d_eps.push_back(rep.eps);
      d_delta.push_back(rep.deltas[a]);
      d_f.push_back(rep.tip_forcing_by_delta[a]);
      d_u.push_back(rep.tip_solution_by_delta[a]);
    }
  }
  write_csv(cfg.out_dir / "ratios.csv", {"eps", "estimate_id", "lhs", "rhs", "ratio"},
            {c_eps, c_id, c_lhs, c_rhs, c_ratio});
  write_csv(cfg.out_dir / "delta_sweep.csv", {"eps", "delta", "tip_forcing_L2", "tip_solution_L8"},
            {d_eps, d_delta, d_f, d_u});

  json j = envelope(cfg, "estimate-report");
  j["estimate_ids"] = names;
  j["runs"] = runs;
  json spreads;
  for (const auto& name : names) spreads[name] = ratio_spread(reports, name);
  j["spread"] = spreads;
  const auto [mlo, mhi] = std::minmax_element(mapping.begin(), mapping.end());
  j["sobolev_mapping"] = {{"ratios", mapping}, {"max", *mhi}, {"min", *mlo}};
  write_json(cfg.out_dir / "report.json", j);
  return j;
}

json check_compat(const ExperimentConfig& cfg) {
  std::vector<double> residuals;
  if (cfg.mode == "radial") {
    const RadialGrid grid = cfg.radial_grid();
    const auto data = scaled_bump_data(grid, cfg.bump, cfg.spec.components, cfg.eps);
    residuals = check_compatibility(grid, data, cfg.spec, cfg.compat_order);
  } else {
    const CartesianGrid grid = cfg.cartesian_grid();
    const auto data = scaled_bump_data(grid, cfg.bump, cfg.spec.components, cfg.eps);
    residuals = check_compatibility(grid, data, cfg.spec, cfg.compat_order);
  }
  prepare_output(cfg);
  const bool pass = std::all_of(residuals.begin(), residuals.end(),
                                [&](double r) { return r <= cfg.compat_tol; });
  json j = envelope(cfg, "check-compat");
  j["order"] = cfg.compat_order;
  j["boundary_residuals"] = residuals;
  j["compatible"] = pass;
  write_json(cfg.out_dir / "compat.json", j);
  return j;
}

}  // namespace nullwave
