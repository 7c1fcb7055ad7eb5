#pragma once

// Penrose compactification of Minkowski space into the Einstein diamond,
// the conformal factor, and pushforwards of the standard vector fields.
//
// Conventions: a point of the cylinder is (T, X) with X = (cos R, w sin R)
// on the unit sphere S^3 in R^4. The seven cylinder fields are ordered
//   Gamma_0 = d/dT,
//   Gamma_1..3 = X_0 d/dX_k - X_k d/dX_0        (k = 1, 2, 3),
//   Gamma_4..6 = X_j d/dX_k - X_k d/dX_j        ((j,k) = (1,2), (1,3), (2,3)).

#include <array>
#include <cstddef>
#include <functional>
#include <string>

#include "nullwave/obstacle.hpp"

namespace nullwave {

using Vec4 = std::array<double, 4>;

inline constexpr std::size_t kGammaCount = 7;

/// Index pairs (a, b) of the rotation field X_a d/dX_b - X_b d/dX_a for
/// Gamma_1..Gamma_6, in the order listed above.
inline constexpr std::array<std::array<int, 2>, 6> kRotationPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

struct MinkowskiPoint {
  double t = 0.0;
  Vec3 x{0.0, 0.0, 0.0};

  double r() const;
  /// x / |x|; the unit vector e_3 at the spatial origin.
  Vec3 omega() const;
};

struct EinsteinPoint {
  double T = 0.0;
  double R = 0.0;  ///< geodesic distance on S^3 from the north pole (1,0,0,0)
  Vec3 omega{0.0, 0.0, 1.0};

  /// (cos R, omega sin R) in R^4.
  Vec4 embedding() const;
  /// R + |T| < pi.
  bool in_diamond() const;

  static EinsteinPoint from_embedding(double T, const Vec4& X);
};

MinkowskiPoint make_minkowski(double t, double r, const Vec3& omega);

/// The Penrose map (t, r, w) -> (T, R, w). Total on R^{1+3}.
EinsteinPoint to_einstein(const MinkowskiPoint& p);

/// Inverse Penrose map (sin T, X_vec) / (cos T + X_0).
/// Throws DomainError when cos T + X_0 <= 0.
MinkowskiPoint from_einstein(const EinsteinPoint& q);

/// Omega = 2 / ((1+(t+r)^2)^{1/2} (1+(t-r)^2)^{1/2}).
double conformal_factor(const MinkowskiPoint& p);
/// Omega = cos T + cos R, evaluated on the cylinder side.
double conformal_factor(const EinsteinPoint& q);

/// (d/dt, d/dx_1, d/dx_2, d/dx_3) of Omega, in closed form.
Vec4 conformal_factor_gradient(const MinkowskiPoint& p);

/// Which stereographic chart was used to evaluate the pushforward formulas.
enum class StereoChart { South, North };

/// Pushforward coefficients at one point of the diamond.
///
/// `minkowski_in_gamma[mu][k]` expresses the Minkowski field d_mu
/// (mu = 0 for d/dt) as sum_k a_{mu k} Gamma_k. The tangential part is split
/// over the six rotations with the minimal-norm choice
/// a_{ab} = X_a V_b - X_b V_a, which is exact because |X| = 1 and X.V = 0.
///
/// `gamma_in_minkowski[k][mu]` expresses Gamma_k as sum_mu b_{k mu} d_mu.
/// The two matrices satisfy a * b = identity (4x4).
struct GammaCoefficients {
  std::array<std::array<double, kGammaCount>, 4> minkowski_in_gamma{};
  std::array<std::array<double, 4>, kGammaCount> gamma_in_minkowski{};
  StereoChart chart = StereoChart::South;
};

/// Throws DomainError outside the open diamond.
GammaCoefficients gamma_coefficients(const EinsteinPoint& q);

/// Gamma_k in Minkowski coordinates at (t, x): the 7x4 matrix b above.
std::array<std::array<double, 4>, kGammaCount> gamma_fields_minkowski(const MinkowskiPoint& p);

/// Apply `gamma_in_minkowski` to a Minkowski gradient.
std::array<double, kGammaCount> gamma_derivatives(const GammaCoefficients& c, const Vec4& grad);
/// Apply `minkowski_in_gamma` to a vector of Gamma-derivatives.
Vec4 minkowski_derivatives(const GammaCoefficients& c, const std::array<double, kGammaCount>& g);

/// Distance from the tip P0 = (pi, north pole).
struct TipDistance {
  double value = 0.0;
  double time_gap = 0.0;    ///< pi - T
  double sphere_gap = 0.0;  ///< dist_{S^3}(X, north pole) = R
};

TipDistance tip_distance(const EinsteinPoint& q);

/// Whether the preimage (t, x) satisfies t > 0 and |x| < radius.
/// Throws DomainError outside the diamond and ParamError for radius <= 0.
bool in_image_of_cylinder(const EinsteinPoint& q, double radius);

/// Minkowski time t >= 0 at which the world line of a point at distance r
/// from the origin reaches the cylinder time T (0 <= T < pi).
double minkowski_time_at(double T, double r);

/// max over boundary points of K* at cylinder time T of dist_{S^3}(X, 1) / (pi - T)^2.
double boundary_degeneration_ratio(double T, const Obstacle& obstacle, int n_theta = 12,
                                   int n_phi = 24);

/// A function on the cylinder together with (box_g + 1) phi in closed form,
/// with box_g = d_T^2 - Laplacian_{S^3}.
struct CylinderTestFunction {
  std::string name;
  std::function<double(double T, const Vec4& X)> value;
  std::function<double(double T, const Vec4& X)> conformal_wave;
};

/// sin(2T), exp(T/2) X_1 and cos(T) X_0 X_2. The last two are spherical
/// harmonics of degree 1 and 2, so their Laplacians are -3 and -8 times themselves.
std::array<CylinderTestFunction, 3> intertwining_test_functions();

/// (box_g + 1) phi - Omega^{-3} box~(Omega phi) at p, where the Minkowski
/// wave operator box~ = d_t^2 - Laplacian is applied to the pullback of
/// Omega phi by centred second differences of step h.
double intertwining_residual(const CylinderTestFunction& phi, const MinkowskiPoint& p, double h);

}  // namespace nullwave
