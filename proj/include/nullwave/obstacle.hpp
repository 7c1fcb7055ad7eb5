#pragma once

#include <array>
#include <string>
#include <vector>

namespace nullwave {

using Vec3 = std::array<double, 3>;

/// A strictly convex obstacle centred at the origin.
class Obstacle {
 public:
  enum class Kind { Sphere, Ellipsoid };

  static Obstacle sphere(double radius);
  static Obstacle ellipsoid(double a, double b, double c);

  Kind kind() const { return kind_; }
  const Vec3& semi_axes() const { return axes_; }
  /// Radius of the sphere case; throws for ellipsoids.
  double radius() const;

  /// Negative inside, zero on the surface, positive outside.
  double level(const Vec3& x) const;
  bool contains(const Vec3& x) const { return level(x) <= 0.0; }
  double bounding_radius() const;

  /// Surface point hit by the ray from the origin along `direction`.
  Vec3 boundary_point(const Vec3& direction) const;
  /// Surface points on a latitude/longitude net (poles included once).
  std::vector<Vec3> boundary_samples(int n_theta, int n_phi) const;

  std::string describe() const;

 private:
  Obstacle(Kind kind, Vec3 axes) : kind_(kind), axes_(axes) {}
  Kind kind_;
  Vec3 axes_;
};

}  // namespace nullwave
