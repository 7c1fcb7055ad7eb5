#include "nullwave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nullwave/errors.hpp"

namespace nullwave {

namespace {

constexpr double kPi = std::numbers::pi;

// Ambient R^4 tangent vector of d/dY_i (south chart) or d/dZ_i (north chart).
// Both charts share the spatial part; the X_0 component flips sign.
Vec4 chart_basis(const Vec3& y, int i, StereoChart chart) {
  const double y2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
  const double s = 1.0 + y2;
  Vec4 d{};
  d[0] = (chart == StereoChart::South ? -4.0 : 4.0) * y[i] / (s * s);
  for (int m = 0; m < 3; ++m) {
    d[m + 1] = (m == i ? 2.0 / s : 0.0) - 4.0 * y[m] * y[i] / (s * s);
  }
  return d;
}

}  // namespace

double MinkowskiPoint::r() const { return std::hypot(x[0], x[1], x[2]); }

Vec3 MinkowskiPoint::omega() const {
  const double len = r();
  if (len == 0.0) return {0.0, 0.0, 1.0};
  return {x[0] / len, x[1] / len, x[2] / len};
}

Vec4 EinsteinPoint::embedding() const {
  const double s = std::sin(R);
  return {std::cos(R), omega[0] * s, omega[1] * s, omega[2] * s};
}

bool EinsteinPoint::in_diamond() const {
  return T > -kPi && T < kPi && R >= 0.0 && R < kPi && R + std::abs(T) < kPi;
}

EinsteinPoint EinsteinPoint::from_embedding(double T, const Vec4& X) {
  const double len = std::hypot(X[1], X[2], X[3]);
  EinsteinPoint q;
  q.T = T;
  q.R = std::atan2(len, X[0]);
  if (len > 0.0) q.omega = {X[1] / len, X[2] / len, X[3] / len};
  return q;
}

MinkowskiPoint make_minkowski(double t, double r, const Vec3& omega) {
  return {t, {r * omega[0], r * omega[1], r * omega[2]}};
}

EinsteinPoint to_einstein(const MinkowskiPoint& p) {
  const double r = p.r();
  const double a = std::atan(p.t + r);
  const double b = std::atan(p.t - r);
  return {a + b, a - b, p.omega()};
}

MinkowskiPoint from_einstein(const EinsteinPoint& q) {
  // With a = (T+R)/2, b = (T-R)/2 the map (sin T, sin R w)/(cos T + cos R)
  // reads t = (tan a + tan b)/2, r = (tan a - tan b)/2, and
  // cos T + cos R = 2 cos a cos b. The product form avoids the cancellation
  // of cos T + cos R near the tip.
  const double a = 0.5 * (q.T + q.R);
  const double b = 0.5 * (q.T - q.R);
  const double denom = 2.0 * std::cos(a) * std::cos(b);
  if (!(denom > 0.0) || !q.in_diamond()) {
    throw DomainError("from_einstein: point is at or beyond null infinity");
  }
  const double ta = std::tan(a);
  const double tb = std::tan(b);
  return make_minkowski(0.5 * (ta + tb), 0.5 * (ta - tb), q.omega);
}

double conformal_factor(const MinkowskiPoint& p) {
  const double r = p.r();
  const double plus = p.t + r;
  const double minus = p.t - r;
  return 2.0 / (std::sqrt(1.0 + plus * plus) * std::sqrt(1.0 + minus * minus));
}

double conformal_factor(const EinsteinPoint& q) {
  // cos T + cos R, written as a product.
  return 2.0 * std::cos(0.5 * (q.T + q.R)) * std::cos(0.5 * (q.T - q.R));
}

Vec4 conformal_factor_gradient(const MinkowskiPoint& p) {
  const double r = p.r();
  const double plus = p.t + r;
  const double minus = p.t - r;
  const double qp = 1.0 + plus * plus;
  const double qm = 1.0 + minus * minus;
  const double omega = 2.0 / (std::sqrt(qp) * std::sqrt(qm));
  Vec4 g{};
  g[0] = -omega * (plus / qp + minus / qm);
  // d/dr Omega / r = -2 Omega (1 - t^2 + r^2) / (qp qm), smooth at r = 0.
  const double radial = -2.0 * omega * (1.0 - p.t * p.t + r * r) / (qp * qm);
  for (int j = 0; j < 3; ++j) g[j + 1] = radial * p.x[j];
  return g;
}

std::array<std::array<double, 4>, kGammaCount> gamma_fields_minkowski(const MinkowskiPoint& p) {
  const double t = p.t;
  const auto& x = p.x;
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  std::array<std::array<double, 4>, kGammaCount> b{};

  // d/dT = (1 + t^2 + |x|^2)/2 d/dt + t <x, d/dx>
  b[0] = {0.5 * (1.0 + t * t + r2), t * x[0], t * x[1], t * x[2]};

  // X_0 d/dX_k - X_k d/dX_0 = (1 + t^2 - |x|^2)/2 d/dx_k + x_k (t d/dt + <x, d/dx>)
  for (int k = 0; k < 3; ++k) {
    auto& row = b[1 + k];
    row[0] = x[k] * t;
    for (int j = 0; j < 3; ++j) row[j + 1] = x[k] * x[j];
    row[k + 1] += 0.5 * (1.0 + t * t - r2);
  }

  // X_j d/dX_k - X_k d/dX_j = x_j d/dx_k - x_k d/dx_j
  for (int n = 3; n < 6; ++n) {
    const int j = kRotationPairs[n][0] - 1;
    const int k = kRotationPairs[n][1] - 1;
    auto& row = b[1 + n];
    row = {0.0, 0.0, 0.0, 0.0};
    row[k + 1] = x[j];
    row[j + 1] = -x[k];
  }
  return b;
}

GammaCoefficients gamma_coefficients(const EinsteinPoint& q) {
  if (!q.in_diamond()) throw DomainError("gamma_coefficients: point outside the diamond");

  GammaCoefficients out;
  out.chart = q.R <= 0.5 * kPi ? StereoChart::South : StereoChart::North;
  const Vec4 X = q.embedding();
  const double sT = std::sin(q.T);
  const double cT = std::cos(q.T);

  // Stereographic coordinate and its squared length.
  const double scale = out.chart == StereoChart::South ? std::tan(0.5 * q.R)
                                                       : 1.0 / std::tan(0.5 * q.R);
  const Vec3 y{scale * q.omega[0], scale * q.omega[1], scale * q.omega[2]};
  const double y2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
  const double s = 1.0 + y2;

  std::array<Vec4, 3> basis;
  for (int i = 0; i < 3; ++i) basis[i] = chart_basis(y, i, out.chart);
  Vec4 euler{};  // <Y, d/dY> or <Z, d/dZ>
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 4; ++m) euler[m] += y[i] * basis[i][m];

  // Coefficient of d/dT and the ambient tangential vector for each d_mu.
  std::array<double, 4> dT_coef{};
  std::array<Vec4, 4> tangential{};

  if (out.chart == StereoChart::South) {
    dT_coef[0] = 1.0 + (1.0 - y2) / s * cT;
    for (int m = 0; m < 4; ++m) tangential[0][m] = -sT * euler[m];
    for (int j = 0; j < 3; ++j) {
      dT_coef[j + 1] = -2.0 * y[j] / s * sT;
      const double a = 0.5 * (s * cT + 1.0 - y2);
      const double c = (1.0 - cT) * y[j];
      for (int m = 0; m < 4; ++m) tangential[j + 1][m] = a * basis[j][m] + c * euler[m];
    }
  } else {
    dT_coef[0] = 1.0 + (y2 - 1.0) / s * cT;
    for (int m = 0; m < 4; ++m) tangential[0][m] = sT * euler[m];
    for (int j = 0; j < 3; ++j) {
      dT_coef[j + 1] = -2.0 * y[j] / s * sT;
      const double a = 0.5 * (s * cT + y2 - 1.0);
      // d/dY_j = |Z|^2 d/dZ_j - 2 Z_j <Z, d/dZ>: the Euler term enters with a minus sign.
      const double c = -(1.0 + cT) * y[j];
      for (int m = 0; m < 4; ++m) tangential[j + 1][m] = a * basis[j][m] + c * euler[m];
    }
  }

  for (int mu = 0; mu < 4; ++mu) {
    auto& row = out.minkowski_in_gamma[mu];
    row[0] = dT_coef[mu];
    const Vec4& V = tangential[mu];
    for (int n = 0; n < 6; ++n) {
      const int a = kRotationPairs[n][0];
      const int b = kRotationPairs[n][1];
      row[1 + n] = X[a] * V[b] - X[b] * V[a];
    }
  }

  out.gamma_in_minkowski = gamma_fields_minkowski(from_einstein(q));
  return out;
}

std::array<double, kGammaCount> gamma_derivatives(const GammaCoefficients& c, const Vec4& grad) {
  std::array<double, kGammaCount> g{};
  for (std::size_t k = 0; k < kGammaCount; ++k) {
    double acc = 0.0;
    for (int mu = 0; mu < 4; ++mu) acc += c.gamma_in_minkowski[k][mu] * grad[mu];
    g[k] = acc;
  }
  return g;
}

Vec4 minkowski_derivatives(const GammaCoefficients& c, const std::array<double, kGammaCount>& g) {
  Vec4 d{};
  for (int mu = 0; mu < 4; ++mu) {
    double acc = 0.0;
    for (std::size_t k = 0; k < kGammaCount; ++k) acc += c.minkowski_in_gamma[mu][k] * g[k];
    d[mu] = acc;
  }
  return d;
}

TipDistance tip_distance(const EinsteinPoint& q) {
  TipDistance d;
  d.time_gap = kPi - q.T;
  d.sphere_gap = q.R;
  d.value = std::hypot(d.time_gap, d.sphere_gap);
  return d;
}

bool in_image_of_cylinder(const EinsteinPoint& q, double radius) {
  if (!(radius > 0.0)) throw ParamError("in_image_of_cylinder: radius must be positive");
  if (!q.in_diamond()) throw DomainError("in_image_of_cylinder: point outside the diamond");
  const MinkowskiPoint p = from_einstein(q);
  return p.t > 0.0 && p.r() < radius;
}

double minkowski_time_at(double T, double r) {
  if (!(T >= 0.0 && T < kPi)) throw ParamError("minkowski_time_at: T must lie in [0, pi)");
  auto cyl_time = [r](double t) { return std::atan(t + r) + std::atan(t - r); };
  double lo = 0.0;
  double hi = 1.0;
  while (cyl_time(hi) < T) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cyl_time(mid) < T ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double boundary_degeneration_ratio(double T, const Obstacle& obstacle, int n_theta, int n_phi) {
  if (!(T >= 0.0 && T < kPi)) throw ParamError("boundary_degeneration_ratio: T must lie in [0, pi)");
  const double gap = kPi - T;
  double best = 0.0;
  for (const Vec3& xb : obstacle.boundary_samples(n_theta, n_phi)) {
    const double r = std::hypot(xb[0], xb[1], xb[2]);
    const double t = minkowski_time_at(T, r);
    const double R = std::atan(t + r) - std::atan(t - r);
    best = std::max(best, R / (gap * gap));
  }
  return best;
}

std::array<CylinderTestFunction, 3> intertwining_test_functions() {
  return {{
      {"sin(2T)", [](double T, const Vec4&) { return std::sin(2.0 * T); },
       [](double T, const Vec4&) { return -3.0 * std::sin(2.0 * T); }},
      {"exp(T/2) X1", [](double T, const Vec4& X) { return std::exp(0.5 * T) * X[1]; },
       [](double T, const Vec4& X) { return 4.25 * std::exp(0.5 * T) * X[1]; }},
      {"cos(T) X0 X2", [](double T, const Vec4& X) { return std::cos(T) * X[0] * X[2]; },
       [](double T, const Vec4& X) { return 8.0 * std::cos(T) * X[0] * X[2]; }},
  }};
}

double intertwining_residual(const CylinderTestFunction& phi, const MinkowskiPoint& p, double h) {
  auto pulled = [&](double t, const Vec3& x) {
    const MinkowskiPoint m{t, x};
    const EinsteinPoint q = to_einstein(m);
    return conformal_factor(m) * phi.value(q.T, q.embedding());
  };
  const double centre = pulled(p.t, p.x);
  double box = (pulled(p.t + h, p.x) - 2.0 * centre + pulled(p.t - h, p.x)) / (h * h);
  for (int i = 0; i < 3; ++i) {
    Vec3 up = p.x, down = p.x;
    up[i] += h;
    down[i] -= h;
    box -= (pulled(p.t, up) - 2.0 * centre + pulled(p.t, down)) / (h * h);
  }
  const EinsteinPoint q = to_einstein(p);
  const double omega = conformal_factor(p);
  return phi.conformal_wave(q.T, q.embedding()) - box / (omega * omega * omega);
}

}  // namespace nullwave
