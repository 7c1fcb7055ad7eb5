#pragma once

// Leapfrog stencil updates and reductions. Every kernel exists twice: a
// plain loop in `serial` and an OpenMP version in `omp`. The two produce
// bit-identical results; reductions go through fixed-size chunks so the
// summation order does not depend on the thread count.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace nullwave::kernels {

inline constexpr std::size_t kChunk = 4096;

/// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

/// Sum of term(i) for i < n. Each chunk of kChunk indices is summed with
/// compensation, then the chunk partials are added in order.
template <class Term>
double chunked_sum(std::size_t n, Term term, bool parallel) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  const auto nc = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(static) if (parallel && chunks > 1)
  for (std::int64_t c = 0; c < nc; ++c) {
    CompensatedSum acc;
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
    for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
    partial[static_cast<std::size_t>(c)] = acc.value();
  }
  CompensatedSum total;
  for (double p : partial) total.add(p);
  return total.value();
}

/// One damped leapfrog step for the radial field w = r u on nodes 1..n-1:
///   (1 + s) lead = 2 now - (1 - s) lag + dt^2 (D2 now + rF),   s = sigma dt / 2.
/// `sigma` may be null (no damping). End nodes are left to the caller.
struct RadialStep {
  const double* lag;
  const double* now;
  const double* r_forcing;  ///< r F at each node, may be null
  const double* sigma;      ///< may be null
  double* lead;
  std::size_t nodes;
  double dt;
  double h;
};

/// One damped leapfrog step on the masked cube. Fluid and sponge nodes get
/// the 7-point update; boundary and obstacle nodes are set to zero.
/// Neighbours outside the box read as zero.
struct CartesianStep {
  const double* lag;
  const double* now;
  const double* forcing;  ///< may be null
  const double* sigma;    ///< may be null
  const std::uint8_t* mask;
  double* lead;
  std::size_t n;
  double dt;
  double h;
};

namespace serial {
void radial_step(const RadialStep& s);
void cartesian_step(const CartesianStep& s);
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace serial

namespace omp {
void radial_step(const RadialStep& s);
void cartesian_step(const CartesianStep& s);
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
}  // namespace omp

/// Number of OpenMP threads kernels will use; set_threads(0) keeps the default.
int max_threads();
void set_threads(int n);

}  // namespace nullwave::kernels
