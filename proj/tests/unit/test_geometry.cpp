#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nullwave/errors.hpp"
#include "nullwave/geometry.hpp"

using namespace nullwave;

namespace {

constexpr double pi = std::numbers::pi;

// phi(T, X) = cos T X0 X2 + 0.3 sin T X1 + X3^2, with its T-derivative and
// R^4 gradient so Gamma-derivatives come out exactly.
struct Jet {
  double value, dT;
  Vec4 grad;
};

Jet test_phi(double T, const Vec4& X) {
  return {std::cos(T) * X[0] * X[2] + 0.3 * std::sin(T) * X[1] + X[3] * X[3],
          -std::sin(T) * X[0] * X[2] + 0.3 * std::cos(T) * X[1],
          {std::cos(T) * X[2], 0.3 * std::sin(T), std::cos(T) * X[0], 2.0 * X[3]}};
}

std::array<double, kGammaCount> exact_gamma(double T, const Vec4& X) {
  const Jet j = test_phi(T, X);
  std::array<double, kGammaCount> g{};
  g[0] = j.dT;
  for (std::size_t k = 0; k < kRotationPairs.size(); ++k) {
    const auto [a, b] = kRotationPairs[k];
    g[k + 1] = X[a] * j.grad[b] - X[b] * j.grad[a];
  }
  return g;
}

double pulled(const MinkowskiPoint& p) {
  const EinsteinPoint q = to_einstein(p);
  return test_phi(q.T, q.embedding()).value;
}

Vec4 minkowski_fd_gradient(const MinkowskiPoint& p, double h) {
  Vec4 out{};
  for (int mu = 0; mu < 4; ++mu) {
    MinkowskiPoint up = p, down = p;
    if (mu == 0) {
      up.t += h;
      down.t -= h;
    } else {
      up.x[mu - 1] += h;
      down.x[mu - 1] -= h;
    }
    out[mu] = (pulled(up) - pulled(down)) / (2.0 * h);
  }
  return out;
}

const MinkowskiPoint kProbes[] = {
    {0.3, {0.2, -0.4, 0.5}}, {2.0, {1.0, 0.3, -0.7}}, {-0.8, {0.6, 0.6, 0.1}}, {5.0, {-3.0, 1.0, 2.0}}};

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("penrose map at reference points") {
    auto q = to_einstein(make_minkowski(0.0, 0.0, {0, 0, 1}));
    CHECK(q.T == doctest::Approx(0.0));
    CHECK(q.R == doctest::Approx(0.0));
    q = to_einstein(make_minkowski(0.0, 1.0, {1, 0, 0}));
    CHECK(q.T == doctest::Approx(0.0));
    CHECK(q.R == doctest::Approx(pi / 2));
    q = to_einstein(make_minkowski(1.0, 0.0, {0, 0, 1}));
    CHECK(q.T == doctest::Approx(pi / 2));
    CHECK(q.R == doctest::Approx(0.0));

    auto p = from_einstein(EinsteinPoint{0.0, 0.0, {0, 0, 1}});
    CHECK(p.t == doctest::Approx(0.0));
    CHECK(p.r() == doctest::Approx(0.0));
    p = from_einstein(EinsteinPoint{pi / 2, 0.0, {0, 0, 1}});
    CHECK(p.t == doctest::Approx(1.0));
    CHECK(p.r() == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("inverse map rejects points past null infinity") {
    CHECK_THROWS_AS(from_einstein(EinsteinPoint{2.0, 2.0, {0, 0, 1}}), DomainError);
  }

  TEST_CASE("conformal factor formulas") {
    CHECK(conformal_factor(make_minkowski(0, 0, {0, 0, 1})) == doctest::Approx(2.0));
    CHECK(conformal_factor(make_minkowski(1, 0, {0, 0, 1})) == doctest::Approx(1.0));
    for (double r : {0.5, 3.0, 40.0}) {
      const auto p = make_minkowski(0.0, r, {0, 1, 0});
      CHECK(conformal_factor(p) == doctest::Approx(2.0 / (1.0 + r * r)).epsilon(1e-14));
      CHECK(conformal_factor(to_einstein(p)) == doctest::Approx(2.0 / (1.0 + r * r)).epsilon(1e-12));
    }
  }

  TEST_CASE("closed-form gradient of Omega matches differences") {
    for (const auto& p : kProbes) {
      const Vec4 g = conformal_factor_gradient(p);
      const double h = 1e-5;
      MinkowskiPoint up = p, down = p;
      up.t += h;
      down.t -= h;
      CHECK(g[0] == doctest::Approx((conformal_factor(up) - conformal_factor(down)) / (2 * h)).epsilon(1e-7));
      up = p;
      down = p;
      up.x[1] += h;
      down.x[1] -= h;
      CHECK(g[2] == doctest::Approx((conformal_factor(up) - conformal_factor(down)) / (2 * h)).epsilon(1e-7));
    }
  }

  TEST_CASE("pushforward at the origin and on the initial slice") {
    auto c = gamma_coefficients(EinsteinPoint{0.0, 0.0, {0, 0, 1}});
    CHECK(c.minkowski_in_gamma[0][0] == doctest::Approx(2.0));
    for (std::size_t k = 1; k < kGammaCount; ++k) CHECK(std::abs(c.minkowski_in_gamma[0][k]) < 1e-15);

    for (double r : {0.5, 2.0, 7.0}) {
      const auto p = make_minkowski(0.0, r, {0.6, 0.0, 0.8});
      c = gamma_coefficients(to_einstein(p));
      CHECK(c.minkowski_in_gamma[0][0] == doctest::Approx(conformal_factor(p)).epsilon(1e-12));
      for (std::size_t k = 1; k < kGammaCount; ++k) CHECK(std::abs(c.minkowski_in_gamma[0][k]) < 1e-12);
    }
  }

  TEST_CASE("a b = identity for the two coefficient matrices") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int s = 0; s < 200; ++s) {
      const double T = u(rng), R = std::abs(u(rng)) * (pi - std::abs(T)) / 3.0;
      Vec3 w{u(rng), u(rng), u(rng)};
      const double n = std::hypot(w[0], w[1], w[2]);
      for (auto& x : w) x /= n;
      const auto c = gamma_coefficients(EinsteinPoint{T, R, w});
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
          double acc = 0.0;
          for (std::size_t k = 0; k < kGammaCount; ++k) acc += c.minkowski_in_gamma[mu][k] * c.gamma_in_minkowski[k][nu];
          CHECK(acc == doctest::Approx(mu == nu ? 1.0 : 0.0).epsilon(1e-11).scale(1.0));
        }
    }
  }

  TEST_CASE("Minkowski derivatives through the Gamma fields converge at second order") {
    for (const auto& p : kProbes) {
      const EinsteinPoint q = to_einstein(p);
      const auto c = gamma_coefficients(q);
      const Vec4 via_gamma = minkowski_derivatives(c, exact_gamma(q.T, q.embedding()));
      double err[2];
      double h = 1e-2;
      for (double& e : err) {
        const Vec4 fd = minkowski_fd_gradient(p, h);
        e = 0.0;
        for (int mu = 0; mu < 4; ++mu) e = std::max(e, std::abs(fd[mu] - via_gamma[mu]));
        h /= 2;
      }
      CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
    }
  }

  TEST_CASE("Gamma fields in Minkowski coordinates") {
    for (const auto& p : kProbes) {
      const EinsteinPoint q = to_einstein(p);
      const auto b = gamma_fields_minkowski(p);
      const Vec4 grad = minkowski_fd_gradient(p, 1e-5);
      const auto exact = exact_gamma(q.T, q.embedding());
      for (std::size_t k = 0; k < kGammaCount; ++k) {
        double acc = 0.0;
        for (int mu = 0; mu < 4; ++mu) acc += b[k][mu] * grad[mu];
        CHECK(acc == doctest::Approx(exact[k]).epsilon(1e-6).scale(1.0));
      }
    }
  }

  TEST_CASE("spatial rotations push forward to themselves") {
    // Gamma_{jk} = x_j d_k - x_k d_j on Minkowski space, exact on polynomials.
    const MinkowskiPoint p{1.3, {0.4, -1.1, 2.0}};
    const auto b = gamma_fields_minkowski(p);
    for (std::size_t k = 4; k < kGammaCount; ++k) {
      const auto [i, j] = kRotationPairs[k - 1];
      for (int mu = 0; mu < 4; ++mu) {
        double expect = 0.0;
        if (mu == j) expect = p.x[i - 1];
        if (mu == i) expect = -p.x[j - 1];
        CHECK(b[k][mu] == doctest::Approx(expect).scale(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("time-like pushforward coefficients shrink like dist^2 near the tip") {
    auto worst = [](double t0, double t1) {
      double c = 0.0;
      for (int i = 0; i <= 50; ++i) {
        const double t = t0 * std::pow(t1 / t0, i / 50.0);
        for (double frac : {0.0, 0.1, 0.25}) {
          const EinsteinPoint q = to_einstein(make_minkowski(t, frac * t, {0.0, 0.6, 0.8}));
          const double d = tip_distance(q).value;
          const auto co = gamma_coefficients(q);
          for (double a : co.minkowski_in_gamma[0]) c = std::max(c, std::abs(a) / (d * d));
        }
      }
      return c;
    };
    const double c_near = worst(10.0, 100.0);
    const double c_far = worst(100.0, 1000.0);
    CHECK(std::isfinite(c_near));
    CHECK(c_far <= 1.05 * c_near);
    CHECK(c_far >= 0.5 * c_near);
  }

  TEST_CASE("tip distance") {
    CHECK(tip_distance(EinsteinPoint{pi, 0.0, {0, 0, 1}}).value == 0.0);
    CHECK(tip_distance(EinsteinPoint{pi - 0.01, 0.0, {0, 0, 1}}).value == doctest::Approx(0.01));
    CHECK(tip_distance(EinsteinPoint{pi, 0.02, {0, 0, 1}}).value == doctest::Approx(0.02));

    const Vec3 x0{0.5, -1.0, 0.3};
    const double r0 = std::hypot(x0[0], x0[1], x0[2]);
    double prev = HUGE_VAL;
    for (double t = r0; t < 200.0; t *= 1.1) {
      const double d = tip_distance(to_einstein(MinkowskiPoint{t, x0})).value;
      CHECK(d < prev);
      prev = d;
    }
  }

  TEST_CASE("image of the cylinder t > 0, |x| < A") {
    const double A = 4.0;
    CHECK(in_image_of_cylinder(to_einstein(make_minkowski(1.0, A / 2, {1, 0, 0})), A));
    CHECK_FALSE(in_image_of_cylinder(to_einstein(make_minkowski(1.0, 2 * A, {1, 0, 0})), A));
    CHECK_FALSE(in_image_of_cylinder(to_einstein(make_minkowski(-1.0, 0.0, {1, 0, 0})), A));
    CHECK_THROWS_AS(in_image_of_cylinder(EinsteinPoint{2.0, 2.0, {0, 0, 1}}, A), DomainError);
    CHECK_THROWS_AS(in_image_of_cylinder(EinsteinPoint{0.0, 0.0, {0, 0, 1}}, 0.0), ParamError);
  }

  TEST_CASE("minkowski_time_at inverts the time coordinate") {
    for (double r : {0.0, 1.0, 5.0})
      for (double T : {0.2, 1.5, 3.0}) {
        const double t = minkowski_time_at(T, r);
        if (t >= 0.0) CHECK(to_einstein(make_minkowski(t, r, {0, 0, 1})).T == doctest::Approx(T));
      }
  }

  TEST_CASE("obstacle image shrinks like (pi - T)^2") {
    for (double r0 : {0.5, 1.0}) {
      const Obstacle ob = Obstacle::sphere(r0);
      double lo = HUGE_VAL, hi = 0.0;
      for (int i = 0; i <= 40; ++i) {
        const double T = pi / 2 + (pi / 2 - 0.01) * i / 40.0;
        const double ratio = boundary_degeneration_ratio(T, ob);
        CHECK(ratio > 0.0);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      CHECK(hi / lo < 10.0);
      // R ~ 2 r0 / t^2 and pi - T ~ 2 / t give the limit r0 / 2.
      CHECK(boundary_degeneration_ratio(pi - 1e-3, ob) == doctest::Approx(r0 / 2).epsilon(1e-3));
    }
    const Obstacle ell = Obstacle::ellipsoid(1.0, 0.7, 0.5);
    CHECK(boundary_degeneration_ratio(pi - 1e-3, ell) == doctest::Approx(0.5).epsilon(1e-2));
  }

  TEST_CASE("intertwining residual converges at second order") {
    for (const auto& f : intertwining_test_functions()) {
      for (const auto& p : kProbes) {
        const double e1 = std::abs(intertwining_residual(f, p, 0.1));
        const double e2 = std::abs(intertwining_residual(f, p, 0.05));
        CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
      }
    }
  }
}
