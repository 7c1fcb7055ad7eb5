#include "nullwave/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "nullwave/errors.hpp"
#include "nullwave/kernels.hpp"

namespace nullwave {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

void check_finite(const Field& f, std::size_t step) {
  for (double x : f) {
    if (!std::isfinite(x)) {
      throw NanError("non-finite value in the wave field at step " + std::to_string(step));
    }
  }
}

double sum_of(std::size_t n, const auto& term, bool parallel) {
  return kernels::chunked_sum(n, term, parallel);
}

}  // namespace

// ---------------------------------------------------------------------------
// Radial

double max_stable_dt(const RadialGrid& grid, double cfl) { return cfl * grid.h; }

double max_stable_dt(const CartesianGrid& grid, double cfl) {
  return cfl * grid.h / std::sqrt(3.0);
}

RadialStepper::RadialStepper(const RadialGrid& grid, double dt, StepperOptions options)
    : grid_(grid), dt_(dt), opt_(std::move(options)) {
  if (!(dt > 0.0) || dt > max_stable_dt(grid_, opt_.cfl) * (1.0 + 1e-12)) {
    throw CflError("radial step dt=" + std::to_string(dt) + " exceeds cfl*h=" +
                   std::to_string(max_stable_dt(grid_, opt_.cfl)));
  }
  const std::size_t nodes = grid_.node_count();
  if (grid_.sponge_cells > 0) {
    sigma_.assign(nodes, 0.0);
    const double r_start = grid_.r(grid_.sponge_start());
    const double width = grid_.r_max - r_start;
    for (std::size_t i = grid_.sponge_start(); i < nodes; ++i) {
      const double x = (grid_.r(i) - r_start) / width;
      sigma_[i] = opt_.sponge_strength * x * x * x;
    }
  }
}

void RadialStepper::set_ends(Field& w, double t) const {
  w.front() = opt_.inner_value ? grid_.r0 * opt_.inner_value(t) : 0.0;
  w.back() = opt_.outer_value ? grid_.r_max * opt_.outer_value(t) : 0.0;
}

Field RadialStepper::r_weighted(const Field* f) const {
  if (!f) return {};
  if (f->size() != grid_.node_count()) throw ShapeError("forcing size does not match the grid");
  Field out(f->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = grid_.r(i) * (*f)[i];
  return out;
}

void RadialStepper::start(const InitialData& data, const Field* forcing0) {
  const std::size_t nodes = grid_.node_count();
  if (data.f.size() != nodes || data.g.size() != nodes) {
    throw ShapeError("initial data size does not match the grid");
  }
  now_.resize(nodes);
  Field rg(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    now_[i] = grid_.r(i) * data.f[i];
    rg[i] = grid_.r(i) * data.g[i];
  }
  const Field rf = r_weighted(forcing0);
  const double inv_h2 = 1.0 / (grid_.h * grid_.h);
  lead_.assign(nodes, 0.0);
  for (std::size_t i = 1; i + 1 < nodes; ++i) {
    const double lap = (now_[i + 1] - 2.0 * now_[i] + now_[i - 1]) * inv_h2;
    const double f = rf.empty() ? 0.0 : rf[i];
    lead_[i] = now_[i] + dt_ * rg[i] + 0.5 * dt_ * dt_ * (lap + f);
  }
  set_ends(lead_, dt_);
  lag_.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) lag_[i] = lead_[i] - 2.0 * dt_ * rg[i];
  step_ = 0;
  check_finite(lead_, step_);
}

void RadialStepper::advance(const Field* forcing) {
  std::swap(lag_, now_);
  std::swap(now_, lead_);
  ++step_;
  const Field rf = r_weighted(forcing);
  const kernels::RadialStep s{lag_.data(),
                              now_.data(),
                              rf.empty() ? nullptr : rf.data(),
                              sigma_.empty() ? nullptr : sigma_.data(),
                              lead_.data(),
                              grid_.node_count(),
                              dt_,
                              grid_.h};
  if (opt_.parallel) {
    kernels::omp::radial_step(s);
  } else {
    kernels::serial::radial_step(s);
  }
  set_ends(lead_, static_cast<double>(step_ + 1) * dt_);
  if (step_ % 100 == 0) check_finite(lead_, step_);
}

Field RadialStepper::u() const {
  Field out(now_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = now_[i] / grid_.r(i);
  return out;
}

Field RadialStepper::v() const {
  Field out(now_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (lead_[i] - lag_[i]) / (2.0 * dt_ * grid_.r(i));
  }
  return out;
}

double RadialStepper::staggered_energy() const {
  const double h = grid_.h;
  const std::size_t nodes = now_.size();
  const double kinetic = sum_of(
      nodes,
      [&](std::size_t i) {
        const double d = (lead_[i] - now_[i]) / dt_;
        return d * d;
      },
      opt_.parallel);
  const double potential = sum_of(
      nodes - 1,
      [&](std::size_t i) { return (lead_[i + 1] - lead_[i]) * (now_[i + 1] - now_[i]) / (h * h); },
      opt_.parallel);
  return 0.5 * h * (kinetic + potential);
}

// ---------------------------------------------------------------------------
// Cartesian

namespace {

Field cartesian_sigma(const CartesianGrid& grid, double strength) {
  const std::size_t n = grid.n;
  const double band = static_cast<double>(grid.sponge_cells);
  auto depth = [&](std::size_t i) {
    // 0 at the inner edge of the band, 1 at the box face.
    const double from_lo = band - static_cast<double>(i);
    const double from_hi = static_cast<double>(i) - static_cast<double>(n - 1) + band;
    return std::max({0.0, from_lo / band, from_hi / band});
  };
  Field sigma(grid.node_count(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = grid.index(i, j, k);
        if (grid.mask[idx] != NodeKind::Sponge) continue;
        const double d = std::max({depth(i), depth(j), depth(k)});
        sigma[idx] = strength * d * d * d;
      }
  return sigma;
}

bool active(NodeKind kind) { return kind == NodeKind::Fluid || kind == NodeKind::Sponge; }

// 7-point Laplacian on active nodes, zero elsewhere; matches the kernel stencil.
Field masked_laplacian(const CartesianGrid& grid, const Field& u) {
  const std::size_t n = grid.n;
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  Field out(u.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = grid.index(i, j, k);
        if (!active(grid.mask[idx])) continue;
        const double xm = i > 0 ? u[idx - n * n] : 0.0;
        const double xp = i + 1 < n ? u[idx + n * n] : 0.0;
        const double ym = j > 0 ? u[idx - n] : 0.0;
        const double yp = j + 1 < n ? u[idx + n] : 0.0;
        const double zm = k > 0 ? u[idx - 1] : 0.0;
        const double zp = k + 1 < n ? u[idx + 1] : 0.0;
        out[idx] = ((xm + xp) + (ym + yp) + (zm + zp) - 6.0 * u[idx]) * inv_h2;
      }
  return out;
}

}  // namespace

CartesianStepper::CartesianStepper(const CartesianGrid& grid, double dt, StepperOptions options)
    : grid_(grid), dt_(dt), opt_(std::move(options)) {
  if (!(dt > 0.0) || dt > max_stable_dt(grid_, opt_.cfl) * (1.0 + 1e-12)) {
    throw CflError("cartesian step dt=" + std::to_string(dt) + " exceeds cfl*h/sqrt(3)=" +
                   std::to_string(max_stable_dt(grid_, opt_.cfl)));
  }
  sigma_ = cartesian_sigma(grid_, opt_.sponge_strength);
}

void CartesianStepper::start(const InitialData& data, const Field* forcing0) {
  const std::size_t nodes = grid_.node_count();
  if (data.f.size() != nodes || data.g.size() != nodes) {
    throw ShapeError("initial data size does not match the grid");
  }
  if (forcing0 && forcing0->size() != nodes) throw ShapeError("forcing size does not match the grid");
  now_ = data.f;
  for (std::size_t idx = 0; idx < nodes; ++idx)
    if (!active(grid_.mask[idx])) now_[idx] = 0.0;
  const Field lap = masked_laplacian(grid_, now_);
  lead_.assign(nodes, 0.0);
  lag_.assign(nodes, 0.0);
  for (std::size_t idx = 0; idx < nodes; ++idx) {
    if (!active(grid_.mask[idx])) continue;
    const double f = forcing0 ? (*forcing0)[idx] : 0.0;
    lead_[idx] = now_[idx] + dt_ * data.g[idx] + 0.5 * dt_ * dt_ * (lap[idx] + f);
    lag_[idx] = lead_[idx] - 2.0 * dt_ * data.g[idx];
  }
  step_ = 0;
  check_finite(lead_, step_);
}

void CartesianStepper::advance(const Field* forcing) {
  if (forcing && forcing->size() != grid_.node_count()) {
    throw ShapeError("forcing size does not match the grid");
  }
  std::swap(lag_, now_);
  std::swap(now_, lead_);
  ++step_;
  const kernels::CartesianStep s{lag_.data(),
                                 now_.data(),
                                 forcing ? forcing->data() : nullptr,
                                 sigma_.data(),
                                 reinterpret_cast<const std::uint8_t*>(grid_.mask.data()),
                                 lead_.data(),
                                 grid_.n,
                                 dt_,
                                 grid_.h};
  if (opt_.parallel) {
    kernels::omp::cartesian_step(s);
  } else {
    kernels::serial::cartesian_step(s);
  }
  if (step_ % 100 == 0) check_finite(lead_, step_);
}

Field CartesianStepper::v() const {
  Field out(now_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (lead_[i] - lag_[i]) / (2.0 * dt_);
  return out;
}

double CartesianStepper::staggered_energy() const {
  const Field lap = masked_laplacian(grid_, now_);
  const double h3 = grid_.h * grid_.h * grid_.h;
  const double value = sum_of(
      now_.size(),
      [&](std::size_t i) {
        const double d = (lead_[i] - now_[i]) / dt_;
        return d * d - lead_[i] * lap[i];
      },
      opt_.parallel);
  return 0.5 * h3 * value;
}

// ---------------------------------------------------------------------------
// Drivers

std::size_t step_count(double t_end, double dt, std::size_t stride) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw ParamError("step_count: need dt > 0 and t_end >= 0");
  if (stride == 0) throw ParamError("snapshot stride must be positive");
  auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  steps = (steps + stride - 1) / stride * stride;
  return steps;
}

namespace {

template <class Stepper, class Grid>
Trajectory run_linear(const Grid& grid, const InitialData& data, const ForcingSource& forcing,
                      double t_end, double dt, std::size_t stride, const StepperOptions& options) {
  const std::size_t steps = step_count(t_end, dt, stride);
  Stepper stepper(grid, dt, options);
  Trajectory traj;
  traj.dt = dt;
  traj.stride = stride;
  auto force_at = [&](std::size_t n) -> const Field* {
    return forcing ? forcing(n, static_cast<double>(n) * dt) : nullptr;
  };
  auto record = [&](const Field* f) {
    traj.snapshots.push_back(stepper.state());
    if (forcing) traj.forcing.push_back(f ? *f : Field(grid.node_count(), 0.0));
  };
  const Field* f0 = force_at(0);
  stepper.start(data, f0);
  record(f0);
  for (std::size_t n = 1; n <= steps; ++n) {
    const Field* f = force_at(n);
    stepper.advance(f);
    if (n % stride == 0) record(f);
  }
  return traj;
}

}  // namespace

Trajectory solve_linear(const RadialGrid& grid, const InitialData& data,
                        const ForcingSource& forcing, double t_end, double dt, std::size_t stride,
                        const StepperOptions& options) {
  return run_linear<RadialStepper>(grid, data, forcing, t_end, dt, stride, options);
}

Trajectory solve_linear(const CartesianGrid& grid, const InitialData& data,
                        const ForcingSource& forcing, double t_end, double dt, std::size_t stride,
                        const StepperOptions& options) {
  return run_linear<CartesianStepper>(grid, data, forcing, t_end, dt, stride, options);
}

// ---------------------------------------------------------------------------
// Energies

namespace {

double radial_energy(const RadialGrid& grid, const WaveState& s, double radius) {
  if (s.u.size() != grid.node_count() || s.v.size() != grid.node_count()) {
    throw ShapeError("state size does not match the grid");
  }
  const Field ur = radial_derivative(grid, s.u);
  return sum_of(
      grid.node_count(),
      [&](std::size_t i) {
        const double r = grid.r(i);
        if (!grid.is_fluid(i) || r >= radius) return 0.0;
        return kFourPi * r * r * grid.h * (s.v[i] * s.v[i] + ur[i] * ur[i] + s.u[i] * s.u[i]);
      },
      false);
}

double cartesian_energy(const CartesianGrid& grid, const WaveState& s, double radius) {
  if (s.u.size() != grid.node_count() || s.v.size() != grid.node_count()) {
    throw ShapeError("state size does not match the grid");
  }
  const auto grad = gradient(grid, s.u);
  const double h3 = grid.h * grid.h * grid.h;
  const double r2max = radius * radius;
  return sum_of(
      grid.node_count(),
      [&](std::size_t i) {
        if (!grid.is_fluid(i)) return 0.0;
        const Vec3 x = grid.position(i);
        if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] >= r2max) return 0.0;
        const Vec3& g = grad[i];
        return h3 * (s.v[i] * s.v[i] + g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + s.u[i] * s.u[i]);
      },
      false);
}

}  // namespace

double energy(const RadialGrid& grid, const WaveState& s) {
  return radial_energy(grid, s, HUGE_VAL);
}

double energy(const CartesianGrid& grid, const WaveState& s) {
  return cartesian_energy(grid, s, HUGE_VAL);
}

double local_energy(const RadialGrid& grid, const WaveState& s, double radius) {
  return radial_energy(grid, s, radius);
}

double local_energy(const CartesianGrid& grid, const WaveState& s, double radius) {
  return cartesian_energy(grid, s, radius);
}

// ---------------------------------------------------------------------------
// Fits

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   DecayFit::Model model, double t_a, double t_b) {
  if (t.size() != value.size()) throw ShapeError("fit_decay: series lengths differ");
  if (!(t_a < t_b)) throw FitError("fit_decay: empty fit window");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_a || t[i] > t_b) continue;
    if (!(value[i] > 0.0)) {
      throw FitError("fit_decay: nonpositive value " + std::to_string(value[i]) + " at t=" +
                     std::to_string(t[i]));
    }
    xs.push_back(model == DecayFit::Model::Exponential ? t[i] : std::log1p(t[i]));
    ys.push_back(std::log(value[i]));
  }
  const std::size_t m = xs.size();
  if (m < 10) throw FitError("fit_decay: need at least 10 samples in the window");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit_decay: degenerate abscissae");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ys[i] - intercept - slope * xs[i];
    ss += e * e;
  }

  DecayFit fit;
  fit.model = model;
  if (model == DecayFit::Model::Exponential) {
    fit.rate = -slope;
  } else {
    fit.exponent = slope;
  }
  fit.amplitude = std::exp(intercept);
  fit.t_a = t_a;
  fit.t_b = t_b;
  fit.residual = std::sqrt(ss / static_cast<double>(m));
  fit.samples = m;
  return fit;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value,
                   DecayFit::Model model) {
  if (t.empty()) throw FitError("fit_decay: empty series");
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  return fit_decay(t, value, model, *lo, *hi);
}

}  // namespace nullwave
