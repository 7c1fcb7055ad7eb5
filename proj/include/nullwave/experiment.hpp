#pragma once

// Experiment configuration and the drivers behind each CLI subcommand.
//
// Config files are INI: sections of key = value lines. Null-form terms are
// listed in [nullform] as term0, term1, ... each holding
// "component j k coeff form", e.g. "0 0 0 1.0 Q0".

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nullwave/nonlinear_iteration.hpp"
#include "nullwave/norms_diagnostics.hpp"
#include "nullwave/obstacle.hpp"

namespace nullwave {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
  // [obstacle]
  std::string obstacle_kind = "sphere";
  Vec3 semi_axes{1.0, 1.0, 1.0};

  // [grid]
  std::string mode = "radial";
  double r_max = 101.0;
  std::size_t n = 2000;
  std::size_t sponge_cells = 0;
  double box = 8.0;  ///< cartesian extent L
  std::size_t box_sponge = 8;
  double cfl = 0.9;
  double dt = 0.0;  ///< 0: cfl-limited
  double sponge_strength = 4.0;

  // [data]
  BumpData bump{};
  double eps = 1e-2;

  // [nullform]
  NullFormSpec spec = NullFormSpec::scalar_q0(1.0);

  // [run]
  double t_end = 40.0;
  std::size_t stride = 10;
  double tol = 1e-8;
  int max_iter = 12;
  std::string start = "zero";
  double smallness_threshold = std::numeric_limits<double>::infinity();
  double local_radius = 4.0;
  double linear_t_end = 60.0;
  double fit_t_a = 10.0;
  double fit_t_b = 60.0;
  double sup_fit_t_a = 5.0;
  double sup_fit_t_b = 40.0;

  // [scan]
  std::vector<double> scan_eps{0.0025, 0.005, 0.01, 0.02, 0.04};

  // [report]
  std::size_t report_stride = 4;
  std::vector<double> deltas{0.8, 0.4, 0.2, 0.1, 0.05, 0.025, 0.0};

  // [compat]
  int compat_order = 4;
  double compat_tol = 1e-12;

  // [geometry]
  std::size_t geometry_samples = 10000;

  // [output]
  std::filesystem::path out_dir = "nullwave_out";
  bool write_snapshots = true;

  std::uint64_t seed = 12345;

  Obstacle obstacle() const;
  RadialGrid radial_grid() const;
  CartesianGrid cartesian_grid() const;
  StepperOptions stepper_options() const;
  PicardOptions picard_options() const;
  nlohmann::json to_json() const;
};

/// Parses and validates an INI file. Throws ConfigError on unknown sections
/// or keys, malformed values and failed validation.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Validation alone (also run by load_config).
void validate(const ExperimentConfig& cfg);

/// Each driver writes its artifacts into cfg.out_dir and returns the JSON
/// summary (also written there). Library errors propagate.
nlohmann::json verify_geometry(const ExperimentConfig& cfg);
nlohmann::json run_linear(const ExperimentConfig& cfg);
nlohmann::json run_nonlinear(const ExperimentConfig& cfg);
nlohmann::json scan_smallness(const ExperimentConfig& cfg);
nlohmann::json estimate_report(const ExperimentConfig& cfg);
nlohmann::json check_compat(const ExperimentConfig& cfg);

/// Geometry identity residuals on `samples` random points; the heart of
/// verify-geometry, exposed for tests.
struct GeometryResiduals {
  double roundtrip_minkowski = 0.0;  ///< max |p - from(to(p))| / max(1, |p|)
  double roundtrip_einstein = 0.0;   ///< max |q - to(from(q))| / max(1, |q|)
  double conformal = 0.0;            ///< max relative gap of the two Omega formulas
  double pushforward_identity = 0.0; ///< max |a b - I|
  std::size_t samples = 0;
};
GeometryResiduals geometry_residuals(std::size_t samples, std::uint64_t seed);

}  // namespace nullwave
