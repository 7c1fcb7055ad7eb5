#pragma once

// Small-data solutions of  box u^i = Q^i(du, du)  outside the obstacle by
// Picard iteration on the forcing:  F_{m+1} = Q(du[F_m]),  where u[F] solves
// the linear Dirichlet problem with the fixed data and forcing F.

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nullwave/null_forms.hpp"
#include "nullwave/wave_solver.hpp"

namespace nullwave {

struct PicardOptions {
  double t_end = 40.0;
  /// Time step; 0 picks max_stable_dt(grid, stepper.cfl).
  double dt = 0.0;
  std::size_t stride = 10;
  double tol = 1e-8;
  int max_iter = 12;
  /// Zero: the first iterate is the linear solution (forcing 0).
  /// Linear: the first forcing is already Q(du_lin, du_lin).
  enum class Start { Zero, Linear };
  Start start = Start::Zero;
  /// Upper bound on ||f||_{H^{2,1}} + ||g||_{H^{1,2}} summed over components.
  double smallness_threshold = std::numeric_limits<double>::infinity();
  StepperOptions stepper;
};

struct IterationReport {
  /// residuals[m] = sum_{|a|<=1} ||D^a (F_{m+1} - F_m)||_{L^2} over the run.
  std::vector<double> residuals;
  /// ratios[m] = residuals[m+1] / residuals[m].
  std::vector<double> ratios;
  bool converged = false;
  int iterations = 0;  ///< linear solves performed
};

struct NonlinearSolution {
  /// One trajectory per component; forcing holds the forcing each was solved with.
  std::vector<Trajectory> components;
  NullFormSpec spec;
  std::vector<InitialData> data;
  /// sup over fluid nodes and components of |u| at each snapshot time.
  std::vector<double> sup_times;
  std::vector<double> sup_norm;
};

/// Throws ParamError when the data norm exceeds the smallness threshold or
/// the spec breaks spherical symmetry on a radial grid, NoConvergence after
/// max_iter solves without reaching tol, and propagates solver errors.
std::pair<NonlinearSolution, IterationReport> picard_solve(const RadialGrid& grid,
                                                           const std::vector<InitialData>& data,
                                                           const NullFormSpec& spec,
                                                           const PicardOptions& options);
std::pair<NonlinearSolution, IterationReport> picard_solve(const CartesianGrid& grid,
                                                           const std::vector<InitialData>& data,
                                                           const NullFormSpec& spec,
                                                           const PicardOptions& options);

/// ||f||_{H^{2,1}} + ||g||_{H^{1,2}}, summed over components.
double data_norm(const RadialGrid& grid, const std::vector<InitialData>& data);
double data_norm(const CartesianGrid& grid, const std::vector<InitialData>& data);

/// The bump family sampled on the grid and rescaled so that data_norm = eps.
/// Every component gets the same profile.
std::vector<InitialData> scaled_bump_data(const RadialGrid& grid, const BumpData& family,
                                          std::size_t components, double eps);
std::vector<InitialData> scaled_bump_data(const CartesianGrid& grid, const BumpData& family,
                                          std::size_t components, double eps);

struct ScanRow {
  double eps = 0.0;
  bool converged = false;
  int iterations = 0;
  double final_ratio = 0.0;      ///< last contraction ratio, 0 when undefined
  double first_correction = 0.0; ///< residuals[0]
  std::string failure;           ///< empty on success
};

struct ScanResult {
  std::vector<ScanRow> rows;
  /// Largest eps such that every run with eps' <= eps converged.
  double boundary = 0.0;
  /// Whether final_ratio is nondecreasing in eps over converged rows.
  bool ratios_monotone = true;
};

/// Runs picard_solve for each eps (ascending, nonnegative) on scaled bump
/// data. Failures are recorded in the table, not thrown.
ScanResult smallness_scan(const RadialGrid& grid, const BumpData& family, const NullFormSpec& spec,
                          const std::vector<double>& eps, const PicardOptions& options);

/// Power fit of sup_x |u(t, .)| over [t_a, t_b]. FitError if the sup-norm vanishes.
DecayFit measure_sup_decay(const NonlinearSolution& sol, double t_a = 5.0, double t_b = 40.0);

/// sup over fluid nodes of |u| for each snapshot.
std::vector<double> sup_norm_series(const RadialGrid& grid, const Trajectory& traj);
std::vector<double> sup_norm_series(const CartesianGrid& grid, const Trajectory& traj);

}  // namespace nullwave
