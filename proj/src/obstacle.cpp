#include "nullwave/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nullwave/errors.hpp"

namespace nullwave {

Obstacle Obstacle::sphere(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParamError("sphere obstacle needs a positive radius");
  }
  return Obstacle(Kind::Sphere, {radius, radius, radius});
}

Obstacle Obstacle::ellipsoid(double a, double b, double c) {
  for (double s : {a, b, c}) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ParamError("ellipsoid obstacle needs positive semi-axes");
    }
  }
  return Obstacle(Kind::Ellipsoid, {a, b, c});
}

double Obstacle::radius() const {
  if (kind_ != Kind::Sphere) throw ParamError("radius() is only defined for spheres");
  return axes_[0];
}

double Obstacle::level(const Vec3& x) const {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (x[i] / axes_[i]) * (x[i] / axes_[i]);
  return s - 1.0;
}

double Obstacle::bounding_radius() const {
  return *std::max_element(axes_.begin(), axes_.end());
}

Vec3 Obstacle::boundary_point(const Vec3& direction) const {
  const double len = std::hypot(direction[0], direction[1], direction[2]);
  if (!(len > 0.0)) throw ParamError("boundary_point needs a nonzero direction");
  double q = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = direction[i] / len;
    q += (d / axes_[i]) * (d / axes_[i]);
  }
  const double s = 1.0 / std::sqrt(q);
  return {s * direction[0] / len, s * direction[1] / len, s * direction[2] / len};
}

std::vector<Vec3> Obstacle::boundary_samples(int n_theta, int n_phi) const {
  std::vector<Vec3> out;
  out.push_back(boundary_point({0.0, 0.0, 1.0}));
  out.push_back(boundary_point({0.0, 0.0, -1.0}));
  for (int i = 1; i < n_theta; ++i) {
    const double theta = std::numbers::pi * i / n_theta;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      out.push_back(boundary_point({std::sin(theta) * std::cos(phi),
                                    std::sin(theta) * std::sin(phi), std::cos(theta)}));
    }
  }
  return out;
}

std::string Obstacle::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::Sphere) {
    os << "sphere(" << axes_[0] << ")";
  } else {
    os << "ellipsoid(" << axes_[0] << "," << axes_[1] << "," << axes_[2] << ")";
  }
  return os.str();
}

}  // namespace nullwave
