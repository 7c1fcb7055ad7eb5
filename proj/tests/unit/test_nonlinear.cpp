#include <doctest.h>

#include <cmath>

#include "nullwave/errors.hpp"
#include "nullwave/nonlinear_iteration.hpp"

using namespace nullwave;

namespace {

RadialGrid test_grid() { return build_radial_grid(1.0, 61.0, 1200); }

PicardOptions short_run() {
  PicardOptions opt;
  opt.t_end = 20.0;
  opt.stride = 10;
  return opt;
}

}  // namespace

TEST_SUITE("nonlinear") {
  TEST_CASE("scaled data has the requested norm") {
    const auto g = test_grid();
    const auto d = scaled_bump_data(g, BumpData{}, 2, 0.03);
    REQUIRE(d.size() == 2);
    CHECK(data_norm(g, d) == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(d[0].f == d[1].f);
    CHECK_THROWS_AS(scaled_bump_data(g, BumpData{}, 1, -1.0), ParamError);
  }

  TEST_CASE("zero data converges in one solve") {
    const auto g = test_grid();
    const auto [sol, rep] = picard_solve(g, {InitialData::zero(g.node_count())}, NullFormSpec::scalar_q0(), short_run());
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    for (double s : sol.sup_norm) CHECK(s == 0.0);
  }

  TEST_CASE("a linear spec reproduces the linear solver") {
    const auto g = test_grid();
    const auto d = scaled_bump_data(g, BumpData{}, 1, 0.01);
    const auto opt = short_run();
    const auto [sol, rep] = picard_solve(g, d, NullFormSpec{1, {}}, opt);
    CHECK(rep.iterations == 1);
    const auto lin = solve_linear(g, d[0], {}, opt.t_end, max_stable_dt(g, opt.stepper.cfl), opt.stride, opt.stepper);
    CHECK(sol.components[0].snapshots.back().u == lin.snapshots.back().u);
  }

  TEST_CASE("small radial Q0 data contracts") {
    const auto g = test_grid();
    const auto spec = NullFormSpec::scalar_q0();
    auto opt = short_run();
    opt.tol = 1e-12;
    const auto [sol, rep] = picard_solve(g, scaled_bump_data(g, BumpData{}, 1, 0.05), spec, opt);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 8);
    REQUIRE(rep.residuals.size() >= 2);
    for (double r : rep.ratios) CHECK(r < 0.5);
    CHECK(rep.residuals.back() <= opt.tol);
  }

  TEST_CASE("first correction is quadratic in the data size") {
    const auto g = test_grid();
    auto opt = short_run();
    opt.tol = 1e-30;
    opt.max_iter = 2;
    const auto scan = smallness_scan(g, BumpData{}, NullFormSpec::scalar_q0(), {0.01, 0.02}, opt);
    const double first[2] = {scan.rows[1].first_correction, scan.rows[0].first_correction};
    CHECK(first[0] / first[1] == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("zero and linear starts reach the same fixed point") {
    const auto g = test_grid();
    const auto d = scaled_bump_data(g, BumpData{}, 1, 0.02);
    auto opt = short_run();
    opt.tol = 1e-12;
    const auto [a, ra] = picard_solve(g, d, NullFormSpec::scalar_q0(), opt);
    opt.start = PicardOptions::Start::Linear;
    const auto [b, rb] = picard_solve(g, d, NullFormSpec::scalar_q0(), opt);
    const auto& ua = a.components[0].snapshots.back().u;
    const auto& ub = b.components[0].snapshots.back().u;
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < ua.size(); ++i) {
      diff = std::max(diff, std::abs(ua[i] - ub[i]));
      scale = std::max(scale, std::abs(ua[i]));
    }
    CHECK(diff <= 1e-8 * scale);
  }

  TEST_CASE("failure modes") {
    const auto g = test_grid();
    const auto d = scaled_bump_data(g, BumpData{}, 1, 0.01);
    auto opt = short_run();
    opt.smallness_threshold = 0.005;
    CHECK_THROWS_AS(picard_solve(g, d, NullFormSpec::scalar_q0(), opt), ParamError);

    opt = short_run();
    const NullFormSpec q01{1, {{0, 0, 0, 1.0, NullForm::qjk(0, 1)}}};
    CHECK_THROWS_AS(picard_solve(g, d, q01, opt), ParamError);

    opt.tol = 1e-30;
    opt.max_iter = 2;
    try {
      picard_solve(g, d, NullFormSpec::scalar_q0(), opt);
      FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
      CHECK(e.iterations() == 2);
    }

    opt = short_run();
    CHECK_THROWS_AS(picard_solve(g, {d[0], d[0]}, NullFormSpec::scalar_q0(), opt), ShapeError);
  }

  TEST_CASE("smallness scan") {
    const auto g = test_grid();
    auto opt = short_run();
    opt.max_iter = 6;
    const auto scan = smallness_scan(g, BumpData{}, NullFormSpec::scalar_q0(), {0.0, 0.01, 0.02, 0.04}, opt);
    REQUIRE(scan.rows.size() == 4);
    CHECK(scan.rows[0].converged);
    CHECK(scan.rows[0].iterations == 1);
    CHECK(scan.boundary == 0.04);
    for (const auto& r : scan.rows) CHECK(r.failure.empty());
    CHECK_THROWS_AS(smallness_scan(g, BumpData{}, NullFormSpec::scalar_q0(), {0.02, 0.01}, opt), ParamError);
  }

  TEST_CASE("sup-norm decay fit on a synthetic trajectory") {
    NonlinearSolution sol;
    for (int i = 0; i <= 400; ++i) {
      sol.sup_times.push_back(0.1 * i);
      sol.sup_norm.push_back(0.25 / (1.0 + sol.sup_times.back()));
    }
    const auto fit = measure_sup_decay(sol);
    CHECK(fit.exponent == doctest::Approx(-1.0).epsilon(1e-6));
    std::fill(sol.sup_norm.begin(), sol.sup_norm.end(), 0.0);
    CHECK_THROWS_AS(measure_sup_decay(sol), FitError);
  }

  TEST_CASE("two-component system on the cartesian grid") {
    const auto c = build_masked_grid(Obstacle::sphere(1.0), 8.0, 48, 8);
    const NullFormSpec spec{2,
                            {{0, 0, 1, 1.0, NullForm::q0()},
                             {1, 0, 0, 0.5, NullForm::qjk(0, 2)},
                             {1, 1, 1, -1.0, NullForm::qjk(1, 3)}}};
    BumpProfile p;
    p.shell = 1.8;
    p.support = 0.6;
    p.width = 0.3;
    PicardOptions opt;
    opt.t_end = 3.0;
    opt.stride = 5;
    opt.tol = 1e-10;
    const auto d = scaled_bump_data(c, BumpData{p, 0.2}, 2, 0.05);
    const auto [sol, rep] = picard_solve(c, d, spec, opt);
    CHECK(rep.converged);
    CHECK(sol.components.size() == 2);
    opt.stepper.parallel = false;
    const auto [sol2, rep2] = picard_solve(c, d, spec, opt);
    CHECK(rep2.residuals == rep.residuals);
    CHECK(sol2.components[1].snapshots.back().u == sol.components[1].snapshots.back().u);
  }
}
