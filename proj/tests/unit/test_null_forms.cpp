#include <doctest.h>

#include <cmath>
#include <random>

#include "nullwave/errors.hpp"
#include "nullwave/geometry.hpp"
#include "nullwave/null_forms.hpp"

using namespace nullwave;

namespace {

Gradient4 random_gradient(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return {u(rng), u(rng), u(rng), u(rng)};
}

// Minkowski test functions u~(t, x); the cylinder function is u~ / Omega.
using MinkowskiFn = double (*)(const MinkowskiPoint&);

double smooth_a(const MinkowskiPoint& p) { return std::sin(0.3 * p.t + 0.2 * p.x[0]) * std::exp(-0.05 * p.x[1] * p.x[1]); }
double smooth_b(const MinkowskiPoint& p) { return std::cos(0.4 * p.x[2] - 0.1 * p.t) + 0.1 * p.x[0] * p.x[1]; }
double plane_wave(const MinkowskiPoint& p) { return std::sin(p.t - p.x[0]); }

MinkowskiPoint shifted(MinkowskiPoint p, int mu, double h) {
  if (mu == 0) {
    p.t += h;
  } else {
    p.x[mu - 1] += h;
  }
  return p;
}

Gradient4 fd_gradient(MinkowskiFn f, const MinkowskiPoint& p, double h) {
  Gradient4 g{};
  for (int mu = 0; mu < 4; ++mu) g[mu] = (f(shifted(p, mu, h)) - f(shifted(p, mu, -h))) / (2 * h);
  return g;
}

// Jet of u = u~ / Omega on the cylinder: Gamma_k u = sum_mu b_{k mu} d_mu (u~ / Omega).
CylinderJet cylinder_jet(MinkowskiFn f, const MinkowskiPoint& p, const Gradient4& grad_f) {
  const double om = conformal_factor(p);
  const Vec4 dom = conformal_factor_gradient(p);
  const auto b = gamma_fields_minkowski(p);
  CylinderJet jet;
  jet.value = f(p) / om;
  for (std::size_t k = 0; k < kGammaCount; ++k) {
    double acc = 0.0;
    for (int mu = 0; mu < 4; ++mu) acc += b[k][mu] * (grad_f[mu] / om - f(p) * dom[mu] / (om * om));
    jet.gamma[k] = acc;
  }
  return jet;
}

}  // namespace

TEST_SUITE("null_forms") {
  TEST_CASE("Q0 reference values") {
    CHECK(eval_q0({1, 0, 0, 0}, {1, 0, 0, 0}) == 1.0);
    CHECK(eval_q0({1, 1, 0, 0}, {2, 1, 0, 0}) == 1.0);
  }

  TEST_CASE("Q0 vanishes on plane waves") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int s = 0; s < 1000; ++s) {
      Vec3 w{n(rng), n(rng), n(rng)};
      const double len = std::hypot(w[0], w[1], w[2]);
      const double a = 3.0 * n(rng);
      const Gradient4 du{a, -a * w[0] / len, -a * w[1] / len, -a * w[2] / len};
      CHECK(std::abs(eval_q0(du, du)) <= 1e-13 * std::max(1.0, a * a));
    }
  }

  TEST_CASE("Qjk is antisymmetric and vanishes on the diagonal") {
    std::mt19937_64 rng(12);
    for (int s = 0; s < 200; ++s) {
      const Gradient4 du = random_gradient(rng), dv = random_gradient(rng);
      for (int j = 0; j < 4; ++j)
        for (int k = j + 1; k < 4; ++k) {
          CHECK(eval_qjk(j, k, du, du) == 0.0);
          CHECK(eval_qjk(j, k, du, dv) == -eval_qjk(j, k, dv, du));
        }
    }
    CHECK(eval_qjk(0, 1, {1, 0, 0, 0}, {0, 1, 0, 0}) == 1.0);
    CHECK_THROWS_AS(eval_qjk(1, 1, {}, {}), IndexError);
    CHECK_THROWS_AS(eval_qjk(2, 4, {}, {}), IndexError);
  }

  TEST_CASE("names round-trip and bad names are rejected") {
    for (const char* name : {"Q0", "Q01", "Q02", "Q03", "Q12", "Q13", "Q23"}) {
      CHECK(NullForm::parse(name).name() == name);
    }
    CHECK_THROWS_AS(NullForm::parse("Q11"), Error);
    CHECK_THROWS_AS(NullForm::parse("Q4"), Error);
    CHECK(NullForm::parse("Q12").preserves_radial_symmetry());
    CHECK_FALSE(NullForm::parse("Q03").preserves_radial_symmetry());
  }

  TEST_CASE("spec validation") {
    NullFormSpec spec{2, {{0, 0, 2, 1.0, NullForm::q0()}}};
    CHECK_THROWS_AS(spec.validate(), IndexError);
    spec.terms[0].k = 1;
    spec.terms[0].coeff = NAN;
    CHECK_THROWS_AS(spec.validate(), ParamError);
    spec.terms[0].coeff = 1.0;
    CHECK_NOTHROW(spec.validate());
    CHECK_FALSE(spec.is_linear());
    CHECK(NullFormSpec{1, {}}.is_linear());
  }

  TEST_CASE("system evaluation") {
    const std::vector<Gradient4> zero(2, Gradient4{});
    const NullFormSpec two{2,
                           {{0, 0, 1, 1.5, NullForm::q0()},
                            {0, 1, 1, -0.5, NullForm::qjk(1, 2)},
                            {1, 1, 0, 2.0, NullForm::qjk(0, 3)},
                            {1, 0, 0, 0.25, NullForm::q0()}}};
    for (double v : eval_system(two, zero)) CHECK(v == 0.0);

    const auto scalar = NullFormSpec::scalar_q0(1.0);
    std::mt19937_64 rng(13);
    for (int s = 0; s < 50; ++s) {
      const Gradient4 du = random_gradient(rng);
      CHECK(eval_system(scalar, std::vector<Gradient4>{du})[0] == doctest::Approx(eval_q0(du, du)));

      const std::vector<Gradient4> u{random_gradient(rng), random_gradient(rng)};
      const std::vector<Gradient4> v{random_gradient(rng), random_gradient(rng)};
      const auto got = eval_system(two, u, v);
      const double c0 = 1.5 * eval_q0(u[0], v[1]) - 0.5 * eval_qjk(1, 2, u[1], v[1]);
      const double c1 = 2.0 * eval_qjk(0, 3, u[1], v[0]) + 0.25 * eval_q0(u[0], v[0]);
      CHECK(got[0] == doctest::Approx(c0));
      CHECK(got[1] == doctest::Approx(c1));
    }
    CHECK_THROWS_AS(eval_system(two, std::vector<Gradient4>(1)), ShapeError);
  }

  TEST_CASE("transformed form vanishes for zero fields") {
    const std::vector<CylinderJet> zero(1);
    const auto q = to_einstein(make_minkowski(0.5, 1.0, {0, 0, 1}));
    CHECK(eval_transformed_q(q, zero, zero, NullFormSpec::scalar_q0())[0] == 0.0);
  }

  TEST_CASE("transformed form matches a Minkowski-side evaluation") {
    const MinkowskiPoint pts[] = {{0.5, {0.3, -0.2, 1.0}}, {2.0, {-1.0, 0.5, 0.2}}, {-0.4, {2.0, 1.0, -1.0}}};
    const auto specs = {NullFormSpec::scalar_q0(1.0), NullFormSpec{1, {{0, 0, 0, 1.0, NullForm::qjk(0, 2)}}},
                        NullFormSpec{1, {{0, 0, 0, 1.0, NullForm::qjk(1, 3)}}}};
    for (const auto& spec : specs)
      for (const auto& p : pts) {
        const EinsteinPoint q = to_einstein(p);
        // Jets from exact gradients of u~ (tiny step differences stand in for them).
        const Gradient4 ga = fd_gradient(smooth_a, p, 1e-6), gb = fd_gradient(smooth_b, p, 1e-6);
        const std::vector<CylinderJet> u{cylinder_jet(smooth_a, p, ga)}, v{cylinder_jet(smooth_b, p, gb)};
        const double got = eval_transformed_q(q, u, v, spec)[0];
        const double om = conformal_factor(p);
        double err[2];
        double h = 1e-2;
        for (double& e : err) {
          const auto& t = spec.terms[0];
          const double minkowski = t.form(fd_gradient(smooth_a, p, h), fd_gradient(smooth_b, p, h));
          e = std::abs(got - minkowski / (om * om * om));
          h /= 2;
        }
        CHECK(err[1] < 1e-4 * std::max(1.0, std::abs(got)));
        if (err[0] > 1e-9) CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.15));
      }
  }

  TEST_CASE("null cancellation survives the transform") {
    const MinkowskiPoint pts[] = {{0.5, {0.3, -0.2, 1.0}}, {3.0, {-1.0, 0.5, 0.2}}, {10.0, {2.0, 1.0, -1.0}}};
    for (const auto& p : pts) {
      const Gradient4 g{std::cos(p.t - p.x[0]), -std::cos(p.t - p.x[0]), 0.0, 0.0};
      const std::vector<CylinderJet> u{cylinder_jet(plane_wave, p, g)};
      const double q = eval_transformed_q(to_einstein(p), u, u, NullFormSpec::scalar_q0())[0];
      CHECK(std::abs(q) < 1e-10);
    }
  }

  TEST_CASE("transform refuses points at null infinity") {
    const std::vector<CylinderJet> u(1);
    CHECK_THROWS_AS(eval_transformed_q(EinsteinPoint{1.5, std::acos(-std::cos(1.5)) - 1e-12, {0, 0, 1}}, u, u,
                                       NullFormSpec::scalar_q0()),
                    DomainError);
  }
}
