// Acceptance checks. `acceptance` runs every criterion, `acceptance N` runs one.
// Each prints a single "criterion N: PASS|FAIL ..." line; the exit status is
// nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nullwave/experiment.hpp"
#include "nullwave/geometry.hpp"
#include "nullwave/null_forms.hpp"
#include "support.hpp"

using namespace nullwave;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / ("nullwave_acceptance_" + name)) {
    fs::remove_all(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

Outcome geometry_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = geometry_residuals(10000, 12345);
  const double secs = seconds_since(t0);
  const double worst = std::max({r.roundtrip_minkowski, r.roundtrip_einstein, r.conformal});
  return {worst < 1e-12 && secs < 1.0,
          fmt("max residual %.2e over %zu samples (roundtrip %.2e / %.2e, conformal %.2e), %.3f s", worst, r.samples,
              r.roundtrip_minkowski, r.roundtrip_einstein, r.conformal, secs)};
}

Outcome intertwining() {
  const auto t0 = std::chrono::steady_clock::now();
  const MinkowskiPoint probes[] = {
      {0.3, {0.2, -0.4, 0.5}}, {2.0, {1.0, 0.3, -0.7}}, {-0.8, {0.6, 0.6, 0.1}}, {5.0, {-3.0, 1.0, 2.0}}};
  const double h[] = {0.1, 0.05, 0.025};
  double lo = 1e300, hi = -1e300;
  for (const auto& f : intertwining_test_functions()) {
    for (const auto& p : probes) {
      double e[3];
      for (int i = 0; i < 3; ++i) e[i] = std::abs(intertwining_residual(f, p, h[i]));
      for (int i = 0; i < 2; ++i) {
        const double order = std::log2(e[i] / e[i + 1]);
        lo = std::min(lo, order);
        hi = std::max(hi, order);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {lo >= 1.7 && hi <= 2.3 && secs < 30.0,
          fmt("observed orders in [%.3f, %.3f] over 3 functions x 4 points, %.3f s", lo, hi, secs)};
}

Outcome null_cancellation() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_q0 = 0.0;
  bool qjk_exact = true;
  for (int s = 0; s < 1000; ++s) {
    const Vec3 w{n(rng), n(rng), n(rng)};
    const double len = std::hypot(w[0], w[1], w[2]);
    const double a = 3.0 * n(rng);
    const Gradient4 du{a, -a * w[0] / len, -a * w[1] / len, -a * w[2] / len};
    worst_q0 = std::max(worst_q0, std::abs(eval_q0(du, du)) / std::max(1.0, a * a));
    const Gradient4 any{n(rng), n(rng), n(rng), n(rng)};
    for (int j = 0; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) qjk_exact = qjk_exact && eval_qjk(j, k, any, any) == 0.0;
  }
  return {worst_q0 <= 1e-13 && qjk_exact,
          fmt("max |Q0(du,du)| = %.2e on 1000 plane waves, Qjk(du,du) %s", worst_q0,
              qjk_exact ? "identically 0" : "nonzero")};
}

double max_gap(const CartesianGrid& c, const Field& got, const std::function<double(const Vec3&)>& want) {
  double m = 0.0;
  for (std::size_t i = 0; i < c.node_count(); ++i)
    if (c.is_fluid(i)) m = std::max(m, std::abs(got[i] - want(c.position(i))));
  return m;
}

Outcome compatibility_recursion() {
  // Polynomial data: the second-order stencils are exact up to cubics, so the
  // numeric traces must match the closed forms to rounding, which the second
  // differences amplify by 1/h^2 (h = 0.05 on both grids here).
  const auto c = build_masked_grid(Obstacle::sphere(1.0), 8.0, 40, 8);
  const InitialData q{sample(c, [](const Vec3& x) { return 1.0 + 0.2 * x[0] + 0.1 * x[1] * x[1] - 0.05 * x[0] * x[2]; }),
                      sample(c, [](const Vec3& x) { return 0.3 + 0.1 * x[1]; })};
  const auto psi = compatibility_functions(c, {q}, NullFormSpec::scalar_q0(), 2);
  const double e_q0 = max_gap(c, psi[2][0], [](const Vec3& x) {
    const double gx = 0.2 - 0.05 * x[2], gy = 0.2 * x[1], gz = -0.05 * x[0], g = 0.3 + 0.1 * x[1];
    return 0.2 + g * g - (gx * gx + gy * gy + gz * gz);
  });

  const auto r = build_radial_grid(1.0, 4.0, 60);
  const InitialData qr{sample(r, [](const Vec3& x) { const double s = testing::radius(x); return 1.0 + 0.5 * s + 0.2 * s * s; }),
                       sample(r, [](const Vec3& x) { return 0.3 - 0.1 * testing::radius(x); })};
  const auto psr = compatibility_functions(r, {qr}, NullFormSpec::scalar_q0(), 2);
  double e_radial = 0.0;
  for (std::size_t i = 1; i < r.n; ++i) {
    const double s = r.r(i), fr = 0.5 + 0.4 * s, g = 0.3 - 0.1 * s;
    e_radial = std::max(e_radial, std::abs(psr[2][0][i] - (0.4 + 2.0 * fr / s + g * g - fr * fr)));
  }

  const InitialData lin{sample(c, [](const Vec3& x) { return x[0] * x[0] * x[1] - 0.5 * x[1] * x[2] + x[2] * x[2]; }),
                        sample(c, [](const Vec3& x) { return 0.1 * x[2] * x[2] * x[0] + 0.2 * x[0] * x[1]; })};
  const auto pl = compatibility_functions(c, {lin}, NullFormSpec{1, {}}, 3);
  const double e_lin2 = max_gap(c, pl[2][0], [](const Vec3& x) { return 2.0 * x[1] + 2.0; });
  const double e_lin3 = max_gap(c, pl[3][0], [](const Vec3& x) { return 0.2 * x[0]; });

  const double worst = std::max({e_q0, e_radial, e_lin2, e_lin3});
  return {worst < 1e-10, fmt("Q0 psi2 gap %.2e (cartesian) %.2e (radial), linear psi2 %.2e psi3 %.2e", e_q0,
                             e_radial, e_lin2, e_lin3)};
}

Outcome linear_solver() {
  const double e1 = testing::manufactured_error(100), e2 = testing::manufactured_error(200),
               e3 = testing::manufactured_error(400);
  const double order = std::log2(e2 / e3);
  const double drift = testing::energy_drift_rate();
  const auto speed = testing::propagation_speed();
  const bool pass = std::abs(order - 2.0) <= 0.2 && std::abs(std::log2(e1 / e2) - 2.0) <= 0.2 && drift < 1e-6 &&
                    speed.beyond_light_cone <= 1e-12 && speed.beyond_stencil_cone <= 1e-12;
  return {pass, fmt("order %.3f (%.3f on the coarser pair), drift %.2e per unit time, |u| past the cone %.2e",
                    order, std::log2(e1 / e2), drift, speed.beyond_light_cone)};
}

Outcome local_energy_decay() {
  ScratchDir dir("linear");
  ExperimentConfig cfg;
  cfg.out_dir = dir.path;
  const auto t0 = std::chrono::steady_clock::now();
  const auto j = run_linear(cfg);
  const double secs = seconds_since(t0);
  const double rate = j["decay_fit"]["rate"], residual = j["decay_fit"]["residual"];
  return {rate > 0.0 && residual < 0.2 && secs < 60.0,
          fmt("rate %.4f, rms log residual %.3f on [%g, %g], %.1f s", rate, residual, cfg.fit_t_a, cfg.fit_t_b, secs)};
}

Outcome nonlinear_contraction() {
  ExperimentConfig cfg;
  const auto grid = cfg.radial_grid();
  const auto opt = cfg.picard_options();
  const auto t0 = std::chrono::steady_clock::now();
  const auto [sol, rep] = picard_solve(grid, scaled_bump_data(grid, cfg.bump, 1, 1e-2), cfg.spec, opt);
  const auto [half, rep_half] = picard_solve(grid, scaled_bump_data(grid, cfg.bump, 1, 5e-3), cfg.spec, opt);
  const double secs = seconds_since(t0);
  double worst = 0.0;
  // the first ratio compares against the linear solve and is the warmup step
  for (std::size_t i = rep.ratios.size() > 1 ? 1 : 0; i < rep.ratios.size(); ++i) worst = std::max(worst, rep.ratios[i]);
  const double factor = rep.residuals.front() / rep_half.residuals.front();
  const bool pass = rep.converged && rep.iterations <= 8 && worst < 0.5 && factor >= 3.5 && factor <= 4.5 && secs < 300.0;
  return {pass, fmt("%d iterations, max ratio %.2e, first-correction factor %.4f under halving, %.1f s",
                    rep.iterations, worst, factor, secs)};
}

Outcome nonlinear_decay() {
  ExperimentConfig cfg;
  const auto grid = cfg.radial_grid();
  const auto [sol, rep] = picard_solve(grid, scaled_bump_data(grid, cfg.bump, 1, 1e-2), cfg.spec, cfg.picard_options());
  const auto fit = measure_sup_decay(sol, 5.0, 40.0);
  return {rep.converged && std::abs(fit.exponent + 1.0) <= 0.15,
          fmt("sup-norm exponent %.4f on [5, 40] (rms log residual %.3f)", fit.exponent, fit.residual)};
}

Outcome estimate_diagnostics() {
  ScratchDir dir("report");
  ExperimentConfig cfg;
  cfg.out_dir = dir.path;
  const auto j = estimate_report(cfg);
  bool finite = true, converged = true;
  for (const auto& run : j["runs"]) {
    for (const auto& r : run["ratios"]) finite = finite && r["ratio"].is_number() && std::isfinite(r["ratio"].get<double>());
    converged = converged && run["delta_sweep_converged"].get<bool>();
  }
  double spread = 0.0;
  for (const auto& [name, s] : j["spread"].items()) {
    if (!s.is_number()) finite = false;
    else spread = std::max(spread, s.get<double>());
  }
  return {finite && converged && spread < 10.0 && j["runs"].size() == 5,
          fmt("%zu eps values, ratios %s, max spread %.3f, delta sweep %s", j["runs"].size(),
              finite ? "finite" : "NOT finite", spread, converged ? "converged" : "NOT converged")};
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream is(e.path(), std::ios::binary);
    out[e.path().filename().string()] = {std::istreambuf_iterator<char>(is), {}};
  }
  return out;
}

Outcome reproducibility() {
  ScratchDir dir("repro");
  ExperimentConfig cfg;
  cfg.out_dir = dir.path;
  using Driver = nlohmann::json (*)(const ExperimentConfig&);
  const std::pair<const char*, Driver> drivers[] = {{"verify-geometry", verify_geometry}, {"run-linear", run_linear},
                                                    {"run-nonlinear", run_nonlinear},     {"scan-smallness", scan_smallness},
                                                    {"estimate-report", estimate_report}, {"check-compat", check_compat}};
  std::size_t files = 0;
  std::string differing;
  for (const auto& [name, run] : drivers) {
    fs::remove_all(dir.path);
    run(cfg);
    const auto first = snapshot_dir(dir.path);
    run(cfg);
    const auto second = snapshot_dir(dir.path);
    files += first.size();
    if (first != second) differing += std::string(differing.empty() ? "" : ", ") + name;
  }
  return {differing.empty(), differing.empty() ? fmt("%zu files from 6 commands identical across two runs", files)
                                               : "outputs differ for " + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::function<Outcome()> criteria[] = {geometry_identities,    intertwining,          null_cancellation,
                                               compatibility_recursion, linear_solver,         local_energy_decay,
                                               nonlinear_contraction,  nonlinear_decay,       estimate_diagnostics,
                                               reproducibility};
  std::vector<int> selected;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 10) {
      std::fprintf(stderr, "usage: acceptance [1-10]\n");
      return 2;
    }
    selected.push_back(n);
  } else {
    for (int n = 1; n <= 10; ++n) selected.push_back(n);
  }
  int failures = 0;
  for (int n : selected) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
