#include "nullwave/nonlinear_iteration.hpp"

#include <algorithm>
#include <cmath>

#include "nullwave/errors.hpp"
#include "nullwave/norms_diagnostics.hpp"

namespace nullwave {

namespace {

std::vector<Gradient4> spacetime_gradient(const RadialGrid& grid, const Field& u, const Field& v) {
  const Field ur = radial_derivative(grid, u);
  std::vector<Gradient4> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = {v[i], ur[i], 0.0, 0.0};
  return d;
}

std::vector<Gradient4> spacetime_gradient(const CartesianGrid& grid, const Field& u, const Field& v) {
  const auto g = gradient(grid, u);
  std::vector<Gradient4> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = {v[i], g[i][0], g[i][1], g[i][2]};
  return d;
}

bool dirichlet(const RadialGrid&, std::size_t i) { return i == 0; }
bool dirichlet(const CartesianGrid& grid, std::size_t i) { return !grid.is_fluid(i) && grid.mask[i] != NodeKind::Sponge; }

// Q^c(du, du) at every node; zero on Dirichlet nodes, where u vanishes identically.
template <class Grid>
std::vector<Field> forcing_from(const Grid& grid, const NullFormSpec& spec,
                                const std::vector<std::vector<Gradient4>>& d) {
  const std::size_t nodes = grid.node_count();
  std::vector<Field> out(spec.components, Field(nodes, 0.0));
  for (const auto& term : spec.terms) {
    if (term.coeff == 0.0) continue;
    const auto& dj = d[term.j];
    const auto& dk = d[term.k];
    Field& target = out[term.component];
    for (std::size_t i = 0; i < nodes; ++i) {
      if (dirichlet(grid, i)) continue;
      target[i] += term.coeff * term.form(dj[i], dk[i]);
    }
  }
  return out;
}

double sup_fluid(const RadialGrid& grid, const Field& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (grid.is_fluid(i)) m = std::max(m, std::abs(u[i]));
  return m;
}

double sup_fluid(const CartesianGrid& grid, const Field& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (grid.is_fluid(i)) m = std::max(m, std::abs(u[i]));
  return m;
}

template <class Grid>
double data_norm_impl(const Grid& grid, const std::vector<InitialData>& data) {
  double total = 0.0;
  for (const auto& d : data) {
    total += weighted_sobolev_norm(grid, d.f, 2, 1) + weighted_sobolev_norm(grid, d.g, 1, 2);
  }
  return total;
}

// Forcing history: forcing[c][n] at every step n; an empty outer vector is zero forcing.
using History = std::vector<std::vector<Field>>;

struct Sweep {
  NonlinearSolution solution;
  History next;  // Q(du, du) at every step
};

template <class Stepper, class Grid>
Sweep sweep(const Grid& grid, const std::vector<InitialData>& data, const NullFormSpec& spec,
            const History& forcing, double dt, std::size_t steps, std::size_t stride,
            const StepperOptions& options) {
  const std::size_t nc = spec.components;
  std::vector<Stepper> steppers;
  steppers.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) steppers.emplace_back(grid, dt, options);
  auto force = [&](std::size_t c, std::size_t n) -> const Field* {
    return forcing.empty() ? nullptr : &forcing[c][n];
  };

  Sweep out;
  out.solution.spec = spec;
  out.solution.data = data;
  out.solution.components.resize(nc);
  for (auto& traj : out.solution.components) {
    traj.dt = dt;
    traj.stride = stride;
  }
  out.next.assign(nc, {});
  for (auto& h : out.next) h.reserve(steps + 1);

  for (std::size_t c = 0; c < nc; ++c) steppers[c].start(data[c], force(c, 0));
  std::vector<std::vector<Gradient4>> d(nc);
  for (std::size_t n = 0; n <= steps; ++n) {
    std::vector<WaveState> states(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      states[c] = steppers[c].state();
      d[c] = spacetime_gradient(grid, states[c].u, states[c].v);
    }
    auto q = forcing_from(grid, spec, d);
    for (std::size_t c = 0; c < nc; ++c) out.next[c].push_back(std::move(q[c]));

    if (n % stride == 0) {
      double sup = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        sup = std::max(sup, sup_fluid(grid, states[c].u));
        auto& traj = out.solution.components[c];
        const Field* f = force(c, n);
        traj.forcing.push_back(f ? *f : Field(grid.node_count(), 0.0));
        traj.snapshots.push_back(std::move(states[c]));
      }
      out.solution.sup_times.push_back(static_cast<double>(n) * dt);
      out.solution.sup_norm.push_back(sup);
    }
    if (n < steps) {
      for (std::size_t c = 0; c < nc; ++c) steppers[c].advance(force(c, n + 1));
    }
  }
  return out;
}

template <class Grid>
double residual_norm(const Grid& grid, const History& next, const History& prev,
                     const std::vector<double>& times) {
  SeriesSet diff(next.size());
  for (std::size_t c = 0; c < next.size(); ++c) {
    diff[c].resize(next[c].size());
    for (std::size_t n = 0; n < next[c].size(); ++n) {
      Field f = next[c][n];
      if (!prev.empty()) {
        const Field& p = prev[c][n];
        for (std::size_t i = 0; i < f.size(); ++i) f[i] -= p[i];
      }
      diff[c][n] = std::move(f);
    }
  }
  return spacetime_h1_norm(grid, diff, times);
}

template <class Stepper, class Grid>
std::pair<NonlinearSolution, IterationReport> picard_impl(const Grid& grid,
                                                          const std::vector<InitialData>& data,
                                                          const NullFormSpec& spec,
                                                          const PicardOptions& opt) {
  spec.validate();
  if (data.size() != spec.components) throw ShapeError("picard_solve: one InitialData per component");
  if (opt.max_iter < 1) throw ParamError("picard_solve: max_iter must be positive");
  if (!(opt.tol > 0.0)) throw ParamError("picard_solve: tol must be positive");
  const double norm = data_norm_impl(grid, data);
  if (norm > opt.smallness_threshold) {
    throw ParamError("picard_solve: data norm " + std::to_string(norm) +
                     " exceeds the smallness threshold " + std::to_string(opt.smallness_threshold));
  }
  const double dt = opt.dt > 0.0 ? opt.dt : max_stable_dt(grid, opt.stepper.cfl);
  const std::size_t steps = step_count(opt.t_end, dt, opt.stride);
  std::vector<double> times(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) times[n] = static_cast<double>(n) * dt;

  IterationReport report;
  History forcing;
  if (opt.start == PicardOptions::Start::Linear) {
    forcing = sweep<Stepper>(grid, data, spec, {}, dt, steps, opt.stride, opt.stepper).next;
    report.iterations = 1;
  }
  while (true) {
    Sweep s = sweep<Stepper>(grid, data, spec, forcing, dt, steps, opt.stride, opt.stepper);
    ++report.iterations;
    const double r = residual_norm(grid, s.next, forcing, times);
    if (!report.residuals.empty() && report.residuals.back() > 0.0) {
      report.ratios.push_back(r / report.residuals.back());
    }
    report.residuals.push_back(r);
    if (!std::isfinite(r)) {
      throw NoConvergence(report.iterations, "picard_solve: residual is not finite",
                          report.residuals);
    }
    if (r <= opt.tol) {
      report.converged = true;
      return {std::move(s.solution), report};
    }
    if (report.iterations >= opt.max_iter) {
      throw NoConvergence(report.iterations,
                          "picard_solve: no convergence after " + std::to_string(report.iterations) +
                              " solves, last residual " + std::to_string(r),
                          report.residuals);
    }
    forcing = std::move(s.next);
  }
}

template <class Grid>
std::vector<InitialData> scaled_bump_impl(const Grid& grid, const BumpData& family,
                                          std::size_t components, double eps) {
  if (components == 0) throw ParamError("scaled_bump_data: need at least one component");
  if (!(eps >= 0.0)) throw ParamError("scaled_bump_data: eps must be nonnegative");
  const InitialData unit = family.sample(grid);
  const double norm = data_norm_impl(grid, std::vector<InitialData>{unit});
  if (!(norm > 0.0)) throw ParamError("scaled_bump_data: the bump vanishes on the grid");
  const double factor = eps / (static_cast<double>(components) * norm);
  return std::vector<InitialData>(components, unit.scaled(factor));
}

}  // namespace

std::pair<NonlinearSolution, IterationReport> picard_solve(const RadialGrid& grid,
                                                           const std::vector<InitialData>& data,
                                                           const NullFormSpec& spec,
                                                           const PicardOptions& options) {
  if (!spec.preserves_radial_symmetry()) {
    throw ParamError("picard_solve: Q_0k terms are not spherically symmetric; use a cartesian grid");
  }
  return picard_impl<RadialStepper>(grid, data, spec, options);
}

std::pair<NonlinearSolution, IterationReport> picard_solve(const CartesianGrid& grid,
                                                           const std::vector<InitialData>& data,
                                                           const NullFormSpec& spec,
                                                           const PicardOptions& options) {
  return picard_impl<CartesianStepper>(grid, data, spec, options);
}

double data_norm(const RadialGrid& grid, const std::vector<InitialData>& data) {
  return data_norm_impl(grid, data);
}

double data_norm(const CartesianGrid& grid, const std::vector<InitialData>& data) {
  return data_norm_impl(grid, data);
}

std::vector<InitialData> scaled_bump_data(const RadialGrid& grid, const BumpData& family,
                                          std::size_t components, double eps) {
  return scaled_bump_impl(grid, family, components, eps);
}

std::vector<InitialData> scaled_bump_data(const CartesianGrid& grid, const BumpData& family,
                                          std::size_t components, double eps) {
  return scaled_bump_impl(grid, family, components, eps);
}

ScanResult smallness_scan(const RadialGrid& grid, const BumpData& family, const NullFormSpec& spec,
                          const std::vector<double>& eps, const PicardOptions& options) {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] >= 0.0) || (i > 0 && !(eps[i] > eps[i - 1]))) {
      throw ParamError("smallness_scan: eps list must be nonnegative and ascending");
    }
  }
  ScanResult result;
  for (double e : eps) {
    ScanRow row;
    row.eps = e;
    try {
      const auto data = scaled_bump_data(grid, family, spec.components, e);
      const auto [sol, report] = picard_solve(grid, data, spec, options);
      row.converged = report.converged;
      row.iterations = report.iterations;
      row.final_ratio = report.ratios.empty() ? 0.0 : report.ratios.back();
      row.first_correction = report.residuals.front();
    } catch (const NoConvergence& err) {
      row.iterations = err.iterations();
      if (!err.residuals().empty()) row.first_correction = err.residuals().front();
      row.failure = err.what();
    } catch (const Error& err) {
      row.failure = err.what();
    }
    result.rows.push_back(row);
  }
  for (const auto& row : result.rows) {
    if (!row.converged) break;
    result.boundary = row.eps;
  }
  double last = -1.0;
  for (const auto& row : result.rows) {
    if (!row.converged || row.final_ratio <= 0.0) continue;
    if (row.final_ratio < last) result.ratios_monotone = false;
    last = row.final_ratio;
  }
  return result;
}

DecayFit measure_sup_decay(const NonlinearSolution& sol, double t_a, double t_b) {
  return fit_decay(sol.sup_times, sol.sup_norm, DecayFit::Model::Power, t_a, t_b);
}

std::vector<double> sup_norm_series(const RadialGrid& grid, const Trajectory& traj) {
  std::vector<double> out;
  for (const auto& s : traj.snapshots) out.push_back(sup_fluid(grid, s.u));
  return out;
}

std::vector<double> sup_norm_series(const CartesianGrid& grid, const Trajectory& traj) {
  std::vector<double> out;
  for (const auto& s : traj.snapshots) out.push_back(sup_fluid(grid, s.u));
  return out;
}

}  // namespace nullwave
