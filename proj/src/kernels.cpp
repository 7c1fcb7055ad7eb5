#include "nullwave/kernels.hpp"

#include <omp.h>

#include "nullwave/exterior_domain.hpp"

namespace nullwave::kernels {

namespace {

// Shared per-node arithmetic keeps the two variants bit-identical.
inline double damped_update(double lag, double now, double lap, double f, double sigma, double dt) {
  const double s = 0.5 * sigma * dt;
  return (2.0 * now - (1.0 - s) * lag + dt * dt * (lap + f)) / (1.0 + s);
}

inline void radial_node(const RadialStep& s, std::size_t i, double inv_h2) {
  const double lap = (s.now[i + 1] - 2.0 * s.now[i] + s.now[i - 1]) * inv_h2;
  const double f = s.r_forcing ? s.r_forcing[i] : 0.0;
  const double sig = s.sigma ? s.sigma[i] : 0.0;
  s.lead[i] = damped_update(s.lag[i], s.now[i], lap, f, sig, s.dt);
}

inline void cartesian_node(const CartesianStep& s, std::size_t i, std::size_t j, std::size_t k,
                           double inv_h2) {
  const std::size_t n = s.n;
  const std::size_t idx = (i * n + j) * n + k;
  const auto kind = static_cast<NodeKind>(s.mask[idx]);
  if (kind == NodeKind::Boundary || kind == NodeKind::Obstacle) {
    s.lead[idx] = 0.0;
    return;
  }
  const double* u = s.now;
  const double c = u[idx];
  const double xm = i > 0 ? u[idx - n * n] : 0.0;
  const double xp = i + 1 < n ? u[idx + n * n] : 0.0;
  const double ym = j > 0 ? u[idx - n] : 0.0;
  const double yp = j + 1 < n ? u[idx + n] : 0.0;
  const double zm = k > 0 ? u[idx - 1] : 0.0;
  const double zp = k + 1 < n ? u[idx + 1] : 0.0;
  const double lap = ((xm + xp) + (ym + yp) + (zm + zp) - 6.0 * c) * inv_h2;
  const double f = s.forcing ? s.forcing[idx] : 0.0;
  const double sig = s.sigma ? s.sigma[idx] : 0.0;
  s.lead[idx] = damped_update(s.lag[idx], c, lap, f, sig, s.dt);
}

inline double plain(const double* x, std::size_t i) { return x[i]; }

}  // namespace

namespace serial {

void radial_step(const RadialStep& s) {
  const double inv_h2 = 1.0 / (s.h * s.h);
  for (std::size_t i = 1; i + 1 < s.nodes; ++i) radial_node(s, i, inv_h2);
}

void cartesian_step(const CartesianStep& s) {
  const double inv_h2 = 1.0 / (s.h * s.h);
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t j = 0; j < s.n; ++j)
      for (std::size_t k = 0; k < s.n; ++k) cartesian_node(s, i, j, k, inv_h2);
}

double sum(const double* x, std::size_t n) {
  return chunked_sum(n, [x](std::size_t i) { return plain(x, i); }, false);
}

double dot(const double* x, const double* y, std::size_t n) {
  return chunked_sum(n, [x, y](std::size_t i) { return x[i] * y[i]; }, false);
}

}  // namespace serial

namespace omp {

void radial_step(const RadialStep& s) {
  const double inv_h2 = 1.0 / (s.h * s.h);
  const auto last = static_cast<std::int64_t>(s.nodes) - 1;
#pragma omp parallel for schedule(static) if (s.nodes > 2048)
  for (std::int64_t i = 1; i < last; ++i) radial_node(s, static_cast<std::size_t>(i), inv_h2);
}

void cartesian_step(const CartesianStep& s) {
  const double inv_h2 = 1.0 / (s.h * s.h);
  const auto n = static_cast<std::int64_t>(s.n);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < s.n; ++k)
        cartesian_node(s, static_cast<std::size_t>(i), static_cast<std::size_t>(j), k, inv_h2);
}

double sum(const double* x, std::size_t n) {
  return chunked_sum(n, [x](std::size_t i) { return plain(x, i); }, true);
}

double dot(const double* x, const double* y, std::size_t n) {
  return chunked_sum(n, [x, y](std::size_t i) { return x[i] * y[i]; }, true);
}

}  // namespace omp

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace nullwave::kernels
