#pragma once

// Discrete versions of the norms appearing in the estimates, and
// LHS/RHS ratio diagnostics for converged runs.
//
// Radial fields are spherically symmetric, so sums over multi-indices are
// replaced by their exact angular averages. Space-time integrals use the
// trapezoid rule in t over the given sample times and the trapezoid rule
// in r (node 0 on the obstacle carries half weight); sponge nodes are
// excluded.

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nullwave/geometry.hpp"
#include "nullwave/nonlinear_iteration.hpp"

namespace nullwave {

/// ( sum_{|a|<=m} int (1+|x|^2)^{|a|+j} |D^a f|^2 dx )^{1/2}. OrderError for m > 2 or m < 0.
double weighted_sobolev_norm(const RadialGrid& grid, const Field& f, int m, int j);
double weighted_sobolev_norm(const CartesianGrid& grid, const Field& f, int m, int j);

/// Space-time series: series[c][s] is component c at times[s].
using SeriesSet = std::vector<std::vector<Field>>;

/// sum_{|a|<=1} ||D^a F||_{L^2(window x exterior)}; components combine in l^2
/// inside each norm. Time derivatives come from differencing the series.
double spacetime_h1_norm(const RadialGrid& grid, const SeriesSet& series,
                         const std::vector<double>& times);
double spacetime_h1_norm(const CartesianGrid& grid, const SeriesSet& series,
                         const std::vector<double>& times);

/// sum_{|a|<=1} int ||D^a F(t)||_{L^2_x} dt (the L^1 L^2 norm).
double l1l2_h1_norm(const RadialGrid& grid, const SeriesSet& series,
                    const std::vector<double>& times);

/// Snapshot times of a trajectory and the snapshot indices inside [t0, t1].
std::vector<std::size_t> window_indices(const Trajectory& traj, double t0, double t1);

/// Q(du, dv) on the snapshots of u and v inside [t0, t1], with du = (v, grad u).
/// ShapeError when the trajectories do not share stride and length.
SeriesSet nullform_series(const RadialGrid& grid, const std::vector<Trajectory>& u,
                          const std::vector<Trajectory>& v, const NullFormSpec& spec, double t0,
                          double t1, std::vector<double>* times = nullptr);

/// sum_{|a|<=1} ||D^a Q(du, dv)||_{L^2([t0,t1] x exterior)}.
double nullform_spacetime_norm(const RadialGrid& grid, const std::vector<Trajectory>& u,
                               const std::vector<Trajectory>& v, const NullFormSpec& spec,
                               double t0, double t1);

/// One quadrature point on the cylinder: value and Gamma-derivatives of a
/// cylinder function, with its share of the measure (Omega^4 dx dt pulled back).
struct CylinderSample {
  EinsteinPoint q;
  double measure = 0.0;
  double value = 0.0;
  std::array<double, kGammaCount> gamma{};
};

enum class TipScheme { L2, L8 };

/// sum_{|a|<=1} ||(dist^2(P,P0) Gamma)^a f|| in L^2 or L^8, over the samples
/// with dist(P,P0) > delta. DomainError for a sample outside the diamond.
double tip_weighted_norm(std::span<const CylinderSample> samples, TipScheme scheme,
                         double delta = 0.0);

/// Streams samples into the tip-weighted norms for several truncations at once.
class TipNormAccumulator {
 public:
  TipNormAccumulator(TipScheme scheme, std::vector<double> deltas);
  void add(const CylinderSample& s);
  /// One norm per delta, in the order given.
  std::vector<double> values() const;

 private:
  TipScheme scheme_;
  std::vector<double> deltas_;
  // Per delta: compensated sums for the value and the seven weighted derivatives.
  std::vector<std::array<std::pair<double, double>, 1 + kGammaCount>> acc_;
};

/// Unit directions with weights summing to one.
struct DirectionRule {
  std::vector<Vec3> directions;
  std::vector<double> weights;
};
/// The six octahedral directions: exact for polynomials of degree <= 3 on S^2.
DirectionRule octahedral_rule();
/// Gauss-Legendre in cos(theta) times equispaced phi: exact up to degree
/// min(2 n_theta - 1, n_phi - 1).
DirectionRule product_rule(int n_theta, int n_phi);

/// Tip-weighted norms of the cylinder function Omega^{-p} phi~, where phi~ is
/// a radial Minkowski field given at `times` with time derivative `dt_values`.
/// p = 1 for solutions, p = 3 for forcing terms. One norm per delta.
std::vector<double> radial_tip_norms(const RadialGrid& grid, const std::vector<double>& times,
                                     const std::vector<Field>& values,
                                     const std::vector<Field>& dt_values, int conformal_power,
                                     TipScheme scheme, const DirectionRule& rule,
                                     const std::vector<double>& deltas);

/// Three-point differences of a series: centred inside, one-sided at the ends.
std::vector<Field> time_derivative(const std::vector<double>& times, const std::vector<Field>& values);

struct RatioRow {
  std::string estimate;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct NormReport {
  double eps = 0.0;
  std::map<std::string, double> norms;
  std::vector<RatioRow> ratios;
  /// Truncation sweep: deltas and the tip-weighted forcing norm at each.
  std::vector<double> deltas;
  std::vector<double> tip_forcing_by_delta;
  std::vector<double> tip_solution_by_delta;
};

struct ReportOptions {
  double local_t0 = 0.0;
  double local_t1 = 1.0;
  /// the pointwise bound uses snapshots with t >= this.
  double pointwise_t_min = 1.0;
  std::vector<double> deltas{0.8, 0.4, 0.2, 0.1, 0.05, 0.025, 0.0};
  int l8_theta = 5;
  int l8_phi = 10;
};

/// Ratios for the local null-form estimate, the weighted null-form estimate, the weighted L^8
/// estimate and the pointwise t^{-1} bound, on one converged radial run.
/// Returns nullopt-like empty ratios for zero data (0/0).
NormReport estimate_ratio_report(const RadialGrid& grid, const NonlinearSolution& sol, double eps,
                                 const ReportOptions& options = {});

/// max/min of the named ratio over reports with finite positive values.
double ratio_spread(const std::vector<NormReport>& reports, const std::string& estimate);

/// Whether a truncation sweep has settled: successive changes shrink and
/// the last relative change is below `rel_tol`.
bool delta_sweep_converged(const std::vector<double>& values, double rel_tol = 1e-2);

/// Sobolev mapping bound check on the t = 0 slice: the H^2(S^3) norm of
/// f = f~/Omega (six rotation fields, measure Omega^3 dx) against the
/// H^{2,1} norm of f~.
struct SobolevMappingRatio {
  double sphere_norm = 0.0;
  double weighted_norm = 0.0;
  double ratio = 0.0;
};
SobolevMappingRatio sobolev_mapping_ratio(const CartesianGrid& grid, const Field& f_tilde);

}  // namespace nullwave
