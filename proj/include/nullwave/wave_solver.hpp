#pragma once

// Explicit leapfrog for the Dirichlet wave equation  u_tt - Lap u = F
// outside the obstacle, energies, and decay fits.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nullwave/exterior_domain.hpp"

namespace nullwave {

struct WaveState {
  Field u;
  Field v;  ///< d_t u
  double t = 0.0;
};

/// Strided snapshots: snapshots[s] is the state at step s * stride.
struct Trajectory {
  double dt = 0.0;
  std::size_t stride = 1;
  std::vector<WaveState> snapshots;
  /// Forcing at the snapshot times; empty for homogeneous runs.
  std::vector<Field> forcing;

  double time(std::size_t s) const { return snapshots.at(s).t; }
};

struct StepperOptions {
  double cfl = 0.9;
  /// Peak damping rate of the cubic sponge ramp (only used if the grid has a sponge).
  double sponge_strength = 4.0;
  bool parallel = true;
  /// Radial grids only: Dirichlet values of u at r0 and r_max as functions of t.
  /// Unset means zero.
  std::function<double(double)> inner_value;
  std::function<double(double)> outer_value;
};

/// Three-level leapfrog on the radial grid. Internally evolves w = r u.
///
/// After start() the stepper sits at step 0; each advance() moves one step.
/// At step n it holds u^{n-1}, u^n and u^{n+1}, so the centred velocity
/// (u^{n+1} - u^{n-1}) / 2dt is available. At step 0 the velocity is g.
class RadialStepper {
 public:
  /// Throws CflError when dt > cfl * h.
  RadialStepper(const RadialGrid& grid, double dt, StepperOptions options = {});

  /// Forcing fields hold F in u units and may be null (zero forcing).
  void start(const InitialData& data, const Field* forcing0 = nullptr);
  /// Move to step n+1 using the forcing F^{n+1}. NaN screening every 100 steps.
  void advance(const Field* forcing = nullptr);

  std::size_t step() const { return step_; }
  double time() const { return static_cast<double>(step_) * dt_; }
  double dt() const { return dt_; }
  const RadialGrid& grid() const { return grid_; }

  Field u() const;
  Field v() const;
  WaveState state() const { return {u(), v(), time()}; }

  /// Staggered energy of w between steps n and n+1,
  ///   1/2 |(w^{n+1} - w^n)/dt|^2 + 1/2 <D w^{n+1}, D w^n>,
  /// summed with weight h. Exactly conserved by the scheme with a
  /// reflecting outer wall and zero forcing.
  double staggered_energy() const;

 private:
  void set_ends(Field& w, double t) const;
  Field r_weighted(const Field* f) const;

  RadialGrid grid_;
  double dt_;
  StepperOptions opt_;
  Field sigma_;
  Field lag_, now_, lead_;
  std::size_t step_ = 0;
};

/// Same contract on the masked cube. Boundary and obstacle nodes are zero.
class CartesianStepper {
 public:
  /// Throws CflError when dt > cfl * h / sqrt(3).
  CartesianStepper(const CartesianGrid& grid, double dt, StepperOptions options = {});

  void start(const InitialData& data, const Field* forcing0 = nullptr);
  void advance(const Field* forcing = nullptr);

  std::size_t step() const { return step_; }
  double time() const { return static_cast<double>(step_) * dt_; }
  double dt() const { return dt_; }
  const CartesianGrid& grid() const { return grid_; }

  Field u() const { return now_; }
  Field v() const;
  WaveState state() const { return {u(), v(), time()}; }
  double staggered_energy() const;

 private:
  CartesianGrid grid_;
  double dt_;
  StepperOptions opt_;
  Field sigma_;
  Field lag_, now_, lead_;
  std::size_t step_ = 0;
};

/// Largest stable step for the grid: cfl * h (radial) or cfl * h / sqrt(3).
double max_stable_dt(const RadialGrid& grid, double cfl = 0.9);
double max_stable_dt(const CartesianGrid& grid, double cfl = 0.9);

/// Forcing at step n and time t; return nullptr for zero forcing.
using ForcingSource = std::function<const Field*(std::size_t step, double t)>;

/// Number of steps solve_linear takes: the smallest multiple of `stride`
/// with steps * dt >= t_end.
std::size_t step_count(double t_end, double dt, std::size_t stride);

/// Runs to step_count(t_end, dt, stride), recording every stride-th state.
/// The forcing at recorded steps is stored when `forcing` is set.
Trajectory solve_linear(const RadialGrid& grid, const InitialData& data,
                        const ForcingSource& forcing, double t_end, double dt,
                        std::size_t stride = 1, const StepperOptions& options = {});
Trajectory solve_linear(const CartesianGrid& grid, const InitialData& data,
                        const ForcingSource& forcing, double t_end, double dt,
                        std::size_t stride = 1, const StepperOptions& options = {});

/// Sum over fluid nodes of (|v|^2 + |grad u|^2 + |u|^2) times the cell volume
/// (4 pi r^2 h on the radial grid). The local variant keeps |x| < radius.
double energy(const RadialGrid& grid, const WaveState& s);
double energy(const CartesianGrid& grid, const WaveState& s);
double local_energy(const RadialGrid& grid, const WaveState& s, double radius);
double local_energy(const CartesianGrid& grid, const WaveState& s, double radius);

struct DecayFit {
  enum class Model { Exponential, Power };
  Model model = Model::Exponential;
  /// Exponential: value ~ C exp(-rate t). Power: value ~ C (1+t)^exponent.
  double rate = 0.0;
  double exponent = 0.0;
  double amplitude = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  /// RMS of the residual of the log-linear least-squares fit.
  double residual = 0.0;
  std::size_t samples = 0;

  std::string model_name() const { return model == Model::Exponential ? "exponential" : "power"; }
};

/// Least-squares fit of log(value) against t or log(1+t), using the samples
/// with t in [t_a, t_b]. Throws FitError with fewer than 10 samples in the
/// window or a nonpositive value.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   DecayFit::Model model, double t_a, double t_b);
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   DecayFit::Model model);

}  // namespace nullwave
