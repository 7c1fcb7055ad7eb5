#pragma once

// Shared numerical experiments for the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nullwave/wave_solver.hpp"

namespace nullwave::testing {

inline double radius(const Vec3& x) { return std::hypot(x[0], x[1], x[2]); }

/// L2 error at t = 5 of the radial solver against u = sin(r - t) / r on
/// [1, 11] with the exact Dirichlet values at both ends.
inline double manufactured_error(std::size_t n, double cfl = 0.5) {
  const RadialGrid g = build_radial_grid(1.0, 11.0, n);
  const InitialData d{sample(g, [](const Vec3& x) { return std::sin(radius(x)) / radius(x); }),
                      sample(g, [](const Vec3& x) { return -std::cos(radius(x)) / radius(x); })};
  StepperOptions opt;
  opt.inner_value = [](double t) { return std::sin(1.0 - t); };
  opt.outer_value = [](double t) { return std::sin(11.0 - t) / 11.0; };
  const double dt = cfl * g.h;
  RadialStepper s(g, dt, opt);
  s.start(d);
  const auto steps = static_cast<std::size_t>(std::llround(5.0 / dt));
  for (std::size_t i = 0; i < steps; ++i) s.advance();
  const Field u = s.u();
  const double t = s.time();
  double e = 0.0;
  for (std::size_t i = 0; i <= g.n; ++i) {
    const double r = g.r(i), diff = u[i] - std::sin(r - t) / r;
    e += diff * diff * 4.0 * std::numbers::pi * r * r * g.h;
  }
  return std::sqrt(e);
}

/// Max over the run of |E(t) - E(0)| / (E(0) t) for the staggered energy of a
/// homogeneous run between the obstacle and a reflecting wall.
inline double energy_drift_rate(std::size_t n = 128, double t_end = 100.0) {
  const RadialGrid g = build_radial_grid(1.0, 21.0, n);
  BumpProfile p;
  p.shell = 8.0;
  p.support = 3.0;
  p.width = 1.0;
  const BumpData data{p, 0.3};
  RadialStepper s(g, 0.9 * g.h);
  s.start(data.sample(g));
  const double e0 = s.staggered_energy();
  double drift = 0.0;
  while (s.time() < t_end) {
    s.advance();
    drift = std::max(drift, std::abs(s.staggered_energy() - e0) / (e0 * s.time()));
  }
  return drift;
}

struct SpeedCheck {
  double beyond_light_cone = 0.0;   ///< max |u| past the physical cone plus five cells
  double beyond_stencil_cone = 0.0; ///< max |u| past the reach of the stencil
};

/// Bump data supported in r < 3.9 run for 1000 steps at cfl 0.9.
inline SpeedCheck propagation_speed() {
  const RadialGrid g = build_radial_grid(1.0, 41.0, 2000);
  const BumpData data{BumpProfile{}, 0.5};
  const double dt = 0.9 * g.h;
  RadialStepper s(g, dt);
  s.start(data.sample(g));
  for (int i = 0; i < 1000; ++i) s.advance();
  const Field u = s.u();
  const double t = s.time(), edge = data.profile.outer_edge();
  SpeedCheck out;
  for (std::size_t i = 0; i <= g.n; ++i) {
    const double r = g.r(i);
    if (r > edge + t + 5.0 * g.h) out.beyond_light_cone = std::max(out.beyond_light_cone, std::abs(u[i]));
    if (r > edge + t * g.h / dt + 2.0 * g.h)
      out.beyond_stencil_cone = std::max(out.beyond_stencil_cone, std::abs(u[i]));
  }
  return out;
}

}  // namespace nullwave::testing
