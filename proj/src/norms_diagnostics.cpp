#include "nullwave/norms_diagnostics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "nullwave/errors.hpp"
#include "nullwave/kernels.hpp"

namespace nullwave {

namespace {

constexpr double kPi = std::numbers::pi;

// Trapezoid weight in r times 4 pi r^2; zero in the sponge.
double radial_weight(const RadialGrid& grid, std::size_t i) {
  if (i >= grid.sponge_start()) return 0.0;
  const double r = grid.r(i);
  const double end = (i == 0 || i == grid.n) ? 0.5 : 1.0;
  return end * 4.0 * kPi * r * r * grid.h;
}

// Trapezoid weights for the sample times.
std::vector<double> time_weights(const std::vector<double>& times) {
  std::vector<double> w(times.size(), 0.0);
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    const double half = 0.5 * (times[s + 1] - times[s]);
    w[s] += half;
    w[s + 1] += half;
  }
  return w;
}

void check_order(int m) {
  if (m < 0 || m > 2) throw OrderError("weighted Sobolev norms support 0 <= m <= 2");
}

void check_series(const SeriesSet& series, const std::vector<double>& times, std::size_t nodes) {
  for (const auto& comp : series) {
    if (comp.size() != times.size()) throw ShapeError("series length does not match the times");
    for (const auto& f : comp)
      if (f.size() != nodes) throw ShapeError("series field does not match the grid");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Weighted Sobolev norms

double weighted_sobolev_norm(const RadialGrid& grid, const Field& f, int m, int j) {
  check_order(m);
  if (f.size() != grid.node_count()) throw ShapeError("field size does not match the grid");
  Field fr, frr;
  if (m >= 1) fr = radial_derivative(grid, f);
  if (m >= 2) frr = radial_second_derivative(grid, f);
  kernels::CompensatedSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = radial_weight(grid, i);
    if (w == 0.0) continue;
    const double r = grid.r(i);
    const double base = 1.0 + r * r;
    double term = std::pow(base, j) * f[i] * f[i];
    if (m >= 1) term += std::pow(base, 1 + j) * fr[i] * fr[i];
    if (m >= 2) {
      // Angular average of sum_{|a|=2} |D^a f|^2 for a radial f:
      // half of (full Hessian norm + sum of squared diagonal entries).
      const double a = frr[i];
      const double b = fr[i] / r;
      const double c = a - b;
      const double full = a * a + 2.0 * b * b;
      const double diag = 3.0 * b * b + 2.0 * b * c + 0.6 * c * c;
      term += std::pow(base, 2 + j) * 0.5 * (full + diag);
    }
    acc.add(w * term);
  }
  return std::sqrt(std::max(acc.value(), 0.0));
}

double weighted_sobolev_norm(const CartesianGrid& grid, const Field& f, int m, int j) {
  check_order(m);
  if (f.size() != grid.node_count()) throw ShapeError("field size does not match the grid");
  std::vector<Vec3> g;
  std::array<std::vector<Vec3>, 3> hess;
  if (m >= 1) g = gradient(grid, f);
  if (m >= 2) {
    for (int a = 0; a < 3; ++a) {
      Field ga(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) ga[i] = g[i][a];
      hess[a] = gradient(grid, ga);
    }
  }
  const double h3 = grid.h * grid.h * grid.h;
  kernels::CompensatedSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!grid.is_fluid(i)) continue;
    const Vec3 x = grid.position(i);
    const double base = 1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    double term = std::pow(base, j) * f[i] * f[i];
    if (m >= 1) term += std::pow(base, 1 + j) * (g[i][0] * g[i][0] + g[i][1] * g[i][1] + g[i][2] * g[i][2]);
    if (m >= 2) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a) {
        s += hess[a][i][a] * hess[a][i][a];
        for (int b = a + 1; b < 3; ++b) {
          const double mixed = 0.5 * (hess[a][i][b] + hess[b][i][a]);
          s += mixed * mixed;
        }
      }
      term += std::pow(base, 2 + j) * s;
    }
    acc.add(h3 * term);
  }
  return std::sqrt(std::max(acc.value(), 0.0));
}

// ---------------------------------------------------------------------------
// Space-time norms

std::vector<Field> time_derivative(const std::vector<double>& times, const std::vector<Field>& values) {
  const std::size_t m = values.size();
  if (times.size() != m) throw ShapeError("time_derivative: series length does not match the times");
  std::vector<Field> out(m);
  if (m < 2) {
    for (std::size_t s = 0; s < m; ++s) out[s].assign(values[s].size(), 0.0);
    return out;
  }
  const std::size_t nodes = values[0].size();
  for (std::size_t s = 0; s < m; ++s) {
    out[s].assign(nodes, 0.0);
    if (m == 2) {
      const double inv = 1.0 / (times[1] - times[0]);
      for (std::size_t i = 0; i < nodes; ++i) out[s][i] = (values[1][i] - values[0][i]) * inv;
      continue;
    }
    // Derivative of the quadratic through three neighbouring samples.
    const std::size_t lo = s == 0 ? 0 : (s == m - 1 ? m - 3 : s - 1);
    const double x = times[s], x0 = times[lo], x1 = times[lo + 1], x2 = times[lo + 2];
    const double w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    for (std::size_t i = 0; i < nodes; ++i) {
      out[s][i] = w0 * values[lo][i] + w1 * values[lo + 1][i] + w2 * values[lo + 2][i];
    }
  }
  return out;
}

double spacetime_h1_norm(const RadialGrid& grid, const SeriesSet& series,
                         const std::vector<double>& times) {
  check_series(series, times, grid.node_count());
  const auto wt = time_weights(times);
  kernels::CompensatedSum n0, nt, nr;
  for (const auto& comp : series) {
    const auto ft = time_derivative(times, comp);
    for (std::size_t s = 0; s < comp.size(); ++s) {
      if (wt[s] == 0.0) continue;
      const Field fr = radial_derivative(grid, comp[s]);
      for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const double w = wt[s] * radial_weight(grid, i);
        if (w == 0.0) continue;
        n0.add(w * comp[s][i] * comp[s][i]);
        nt.add(w * ft[s][i] * ft[s][i]);
        nr.add(w * fr[i] * fr[i]);
      }
    }
  }
  // Each of d_1, d_2, d_3 of a radial function carries a third of |f_r|^2.
  return std::sqrt(n0.value()) + std::sqrt(nt.value()) + std::sqrt(3.0) * std::sqrt(nr.value());
}

double spacetime_h1_norm(const CartesianGrid& grid, const SeriesSet& series,
                         const std::vector<double>& times) {
  check_series(series, times, grid.node_count());
  const auto wt = time_weights(times);
  const double h3 = grid.h * grid.h * grid.h;
  kernels::CompensatedSum n0, nt;
  std::array<kernels::CompensatedSum, 3> nx;
  for (const auto& comp : series) {
    const auto ft = time_derivative(times, comp);
    for (std::size_t s = 0; s < comp.size(); ++s) {
      if (wt[s] == 0.0) continue;
      const auto g = gradient(grid, comp[s]);
      for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (!grid.is_fluid(i)) continue;
        const double w = wt[s] * h3;
        n0.add(w * comp[s][i] * comp[s][i]);
        nt.add(w * ft[s][i] * ft[s][i]);
        for (int a = 0; a < 3; ++a) nx[a].add(w * g[i][a] * g[i][a]);
      }
    }
  }
  double total = std::sqrt(n0.value()) + std::sqrt(nt.value());
  for (const auto& a : nx) total += std::sqrt(a.value());
  return total;
}

double l1l2_h1_norm(const RadialGrid& grid, const SeriesSet& series,
                    const std::vector<double>& times) {
  check_series(series, times, grid.node_count());
  const auto wt = time_weights(times);
  std::vector<double> s0(times.size(), 0.0), st(times.size(), 0.0), sr(times.size(), 0.0);
  for (const auto& comp : series) {
    const auto ft = time_derivative(times, comp);
    for (std::size_t s = 0; s < comp.size(); ++s) {
      const Field fr = radial_derivative(grid, comp[s]);
      kernels::CompensatedSum a0, at, ar;
      for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const double w = radial_weight(grid, i);
        if (w == 0.0) continue;
        a0.add(w * comp[s][i] * comp[s][i]);
        at.add(w * ft[s][i] * ft[s][i]);
        ar.add(w * fr[i] * fr[i]);
      }
      s0[s] += a0.value();
      st[s] += at.value();
      sr[s] += ar.value();
    }
  }
  kernels::CompensatedSum total;
  for (std::size_t s = 0; s < times.size(); ++s) {
    total.add(wt[s] * (std::sqrt(s0[s]) + std::sqrt(st[s]) + std::sqrt(3.0) * std::sqrt(sr[s])));
  }
  return total.value();
}

std::vector<std::size_t> window_indices(const Trajectory& traj, double t0, double t1) {
  std::vector<std::size_t> out;
  const double slack = 1e-9 * std::max(1.0, std::abs(t1));
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const double t = traj.snapshots[s].t;
    if (t >= t0 - slack && t <= t1 + slack) out.push_back(s);
  }
  return out;
}

SeriesSet nullform_series(const RadialGrid& grid, const std::vector<Trajectory>& u,
                          const std::vector<Trajectory>& v, const NullFormSpec& spec, double t0,
                          double t1, std::vector<double>* times) {
  spec.validate();
  if (!spec.preserves_radial_symmetry()) {
    throw ParamError("nullform_series: Q_0k terms are not spherically symmetric");
  }
  if (u.size() != spec.components || v.size() != spec.components) {
    throw ShapeError("nullform_series: one trajectory per component required");
  }
  for (std::size_t c = 0; c < spec.components; ++c) {
    if (u[c].stride != u[0].stride || v[c].stride != u[0].stride ||
        u[c].snapshots.size() != u[0].snapshots.size() ||
        v[c].snapshots.size() != u[0].snapshots.size()) {
      throw ShapeError("nullform_series: trajectories differ in stride or length");
    }
  }
  if (!(t0 < t1)) throw ShapeError("nullform_series: empty window");
  const auto idx = window_indices(u[0], t0, t1);
  if (idx.empty()) throw ShapeError("nullform_series: window holds no snapshots");
  if (times) times->clear();

  const std::size_t nodes = grid.node_count();
  SeriesSet out(spec.components);
  auto grad = [&](const WaveState& s) {
    const Field ur = radial_derivative(grid, s.u);
    std::vector<Gradient4> d(nodes);
    for (std::size_t i = 0; i < nodes; ++i) d[i] = {s.v[i], ur[i], 0.0, 0.0};
    return d;
  };
  for (std::size_t s : idx) {
    std::vector<std::vector<Gradient4>> du, dv;
    for (std::size_t c = 0; c < spec.components; ++c) {
      du.push_back(grad(u[c].snapshots[s]));
      dv.push_back(grad(v[c].snapshots[s]));
    }
    std::vector<Field> q(spec.components, Field(nodes, 0.0));
    for (const auto& term : spec.terms) {
      for (std::size_t i = 1; i < nodes; ++i) {
        q[term.component][i] += term.coeff * term.form(du[term.j][i], dv[term.k][i]);
      }
    }
    for (std::size_t c = 0; c < spec.components; ++c) out[c].push_back(std::move(q[c]));
    if (times) times->push_back(u[0].snapshots[s].t);
  }
  return out;
}

double nullform_spacetime_norm(const RadialGrid& grid, const std::vector<Trajectory>& u,
                               const std::vector<Trajectory>& v, const NullFormSpec& spec,
                               double t0, double t1) {
  std::vector<double> times;
  const auto q = nullform_series(grid, u, v, spec, t0, t1, &times);
  return spacetime_h1_norm(grid, q, times);
}

// ---------------------------------------------------------------------------
// Tip-weighted cylinder norms

TipNormAccumulator::TipNormAccumulator(TipScheme scheme, std::vector<double> deltas)
    : scheme_(scheme), deltas_(std::move(deltas)) {
  if (deltas_.empty()) deltas_.push_back(0.0);
  acc_.assign(deltas_.size(), {});
}

void TipNormAccumulator::add(const CylinderSample& s) {
  if (!s.q.in_diamond()) throw DomainError("tip_weighted_norm: sample outside the diamond");
  const double dist = tip_distance(s.q).value;
  const double d2 = dist * dist;
  std::array<double, 1 + kGammaCount> terms;
  auto power = [this](double x) {
    const double x2 = x * x;
    if (scheme_ == TipScheme::L2) return x2;
    const double x4 = x2 * x2;
    return x4 * x4;
  };
  terms[0] = s.measure * power(s.value);
  for (std::size_t k = 0; k < kGammaCount; ++k) terms[1 + k] = s.measure * power(d2 * s.gamma[k]);
  for (std::size_t a = 0; a < deltas_.size(); ++a) {
    if (!(dist > deltas_[a])) continue;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      // Neumaier step on (sum, carry).
      auto& [sum, carry] = acc_[a][k];
      const double t = sum + terms[k];
      carry += std::abs(sum) >= std::abs(terms[k]) ? (sum - t) + terms[k] : (terms[k] - t) + sum;
      sum = t;
    }
  }
}

std::vector<double> TipNormAccumulator::values() const {
  const double root = scheme_ == TipScheme::L2 ? 0.5 : 0.125;
  std::vector<double> out;
  for (const auto& per_delta : acc_) {
    double total = 0.0;
    for (const auto& [sum, carry] : per_delta) total += std::pow(std::max(sum + carry, 0.0), root);
    out.push_back(total);
  }
  return out;
}

double tip_weighted_norm(std::span<const CylinderSample> samples, TipScheme scheme, double delta) {
  TipNormAccumulator acc(scheme, {delta});
  for (const auto& s : samples) acc.add(s);
  return acc.values().front();
}

DirectionRule octahedral_rule() {
  DirectionRule rule;
  for (int a = 0; a < 3; ++a) {
    for (double sign : {1.0, -1.0}) {
      Vec3 d{0.0, 0.0, 0.0};
      d[a] = sign;
      rule.directions.push_back(d);
      rule.weights.push_back(1.0 / 6.0);
    }
  }
  return rule;
}

namespace {

template <unsigned N>
void gauss_nodes(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& xa = G::abscissa();
  const auto& wa = G::weights();
  for (std::size_t i = 0; i < xa.size(); ++i) {
    x.push_back(xa[i]);
    w.push_back(wa[i]);
    if (xa[i] != 0.0) {
      x.push_back(-xa[i]);
      w.push_back(wa[i]);
    }
  }
}

}  // namespace

DirectionRule product_rule(int n_theta, int n_phi) {
  if (n_phi < 1) throw ParamError("product_rule: n_phi must be positive");
  std::vector<double> x, w;
  switch (n_theta) {
    case 2: gauss_nodes<2>(x, w); break;
    case 3: gauss_nodes<3>(x, w); break;
    case 4: gauss_nodes<4>(x, w); break;
    case 5: gauss_nodes<5>(x, w); break;
    case 6: gauss_nodes<6>(x, w); break;
    case 7: gauss_nodes<7>(x, w); break;
    case 8: gauss_nodes<8>(x, w); break;
    default: throw ParamError("product_rule: n_theta must lie in 2..8");
  }
  DirectionRule rule;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double z = x[a];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int b = 0; b < n_phi; ++b) {
      const double phi = 2.0 * kPi * (b + 0.5) / n_phi;
      rule.directions.push_back({s * std::cos(phi), s * std::sin(phi), z});
      // Legendre weights sum to 2 over [-1, 1].
      rule.weights.push_back(0.5 * w[a] / n_phi);
    }
  }
  return rule;
}

std::vector<double> radial_tip_norms(const RadialGrid& grid, const std::vector<double>& times,
                                     const std::vector<Field>& values,
                                     const std::vector<Field>& dt_values, int conformal_power,
                                     TipScheme scheme, const DirectionRule& rule,
                                     const std::vector<double>& deltas) {
  if (values.size() != times.size() || dt_values.size() != times.size()) {
    throw ShapeError("radial_tip_norms: series length does not match the times");
  }
  const auto wt = time_weights(times);
  const double p = conformal_power;
  TipNormAccumulator acc(scheme, deltas);
  for (std::size_t s = 0; s < times.size(); ++s) {
    if (values[s].size() != grid.node_count() || dt_values[s].size() != grid.node_count()) {
      throw ShapeError("radial_tip_norms: field does not match the grid");
    }
    if (wt[s] == 0.0) continue;
    const Field fr = radial_derivative(grid, values[s]);
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      const double wr = radial_weight(grid, i);
      const double phi = values[s][i];
      const double phi_t = dt_values[s][i];
      if (wr == 0.0 || (phi == 0.0 && phi_t == 0.0 && fr[i] == 0.0)) continue;
      for (std::size_t a = 0; a < rule.directions.size(); ++a) {
        const Vec3& om = rule.directions[a];
        const MinkowskiPoint pt = make_minkowski(times[s], grid.r(i), om);
        const double omega = conformal_factor(pt);
        const Vec4 d_omega = conformal_factor_gradient(pt);
        const auto b = gamma_fields_minkowski(pt);
        const double scale = std::pow(omega, -p);
        const Vec4 d_phi{phi_t, fr[i] * om[0], fr[i] * om[1], fr[i] * om[2]};
        Vec4 d_cyl;
        for (int mu = 0; mu < 4; ++mu) {
          d_cyl[mu] = scale * (d_phi[mu] - p * phi * d_omega[mu] / omega);
        }
        CylinderSample sample;
        sample.q = to_einstein(pt);
        const double o2 = omega * omega;
        sample.measure = o2 * o2 * wr * wt[s] * rule.weights[a];
        sample.value = scale * phi;
        for (std::size_t k = 0; k < kGammaCount; ++k) {
          double g = 0.0;
          for (int mu = 0; mu < 4; ++mu) g += b[k][mu] * d_cyl[mu];
          sample.gamma[k] = g;
        }
        acc.add(sample);
      }
    }
  }
  return acc.values();
}

// ---------------------------------------------------------------------------
// Ratio report

NormReport estimate_ratio_report(const RadialGrid& grid, const NonlinearSolution& sol, double eps,
                                 const ReportOptions& options) {
  NormReport report;
  report.eps = eps;
  report.deltas = options.deltas;
  const std::size_t nc = sol.spec.components;
  if (sol.components.size() != nc || sol.data.size() != nc) {
    throw ShapeError("estimate_ratio_report: solution does not match its spec");
  }

  double h2 = 0.0, h1 = 0.0, h21 = 0.0, h12 = 0.0;
  for (const auto& d : sol.data) {
    h2 += weighted_sobolev_norm(grid, d.f, 2, 0);
    h1 += weighted_sobolev_norm(grid, d.g, 1, 0);
    h21 += weighted_sobolev_norm(grid, d.f, 2, 1);
    h12 += weighted_sobolev_norm(grid, d.g, 1, 2);
  }
  report.norms["data_H2"] = h2;
  report.norms["data_H1"] = h1;
  report.norms["data_H21"] = h21;
  report.norms["data_H12"] = h12;
  if (h2 + h1 == 0.0) return report;  // zero data: every ratio is 0/0

  // Local estimate on [t0, t1].
  const double lhs_local = nullform_spacetime_norm(grid, sol.components, sol.components, sol.spec,
                                                   options.local_t0, options.local_t1);
  std::vector<double> local_times;
  SeriesSet local_forcing(nc);
  const auto local_idx = window_indices(sol.components[0], options.local_t0, options.local_t1);
  for (std::size_t s : local_idx) local_times.push_back(sol.components[0].snapshots[s].t);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t s : local_idx) local_forcing[c].push_back(sol.components[c].forcing.at(s));
  }
  const double forcing_l1l2 = l1l2_h1_norm(grid, local_forcing, local_times);
  const double rhs_local = h2 + h1 + forcing_l1l2;

  // Tip-weighted norms over the whole run.
  const Trajectory& first = sol.components[0];
  std::vector<double> times;
  for (const auto& s : first.snapshots) times.push_back(s.t);
  std::vector<double> q_times;
  const auto q_series =
      nullform_series(grid, sol.components, sol.components, sol.spec, times.front(),
                      times.back() > times.front() ? times.back() : times.front() + 1.0, &q_times);
  const DirectionRule octa = octahedral_rule();
  const DirectionRule dense = product_rule(options.l8_theta, options.l8_phi);
  std::vector<double> tip_forcing(options.deltas.size(), 0.0);
  std::vector<double> tip_q(options.deltas.size(), 0.0);
  std::vector<double> tip_u(options.deltas.size(), 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    const Trajectory& traj = sol.components[c];
    const auto f_t = time_derivative(times, traj.forcing);
    const auto nf = radial_tip_norms(grid, times, traj.forcing, f_t, 3, TipScheme::L2, octa,
                                     options.deltas);
    const auto q_t = time_derivative(q_times, q_series[c]);
    const auto nq = radial_tip_norms(grid, q_times, q_series[c], q_t, 3, TipScheme::L2, octa,
                                     options.deltas);
    std::vector<Field> u, v;
    for (const auto& s : traj.snapshots) {
      u.push_back(s.u);
      v.push_back(s.v);
    }
    const auto nu = radial_tip_norms(grid, times, u, v, 1, TipScheme::L8, dense, options.deltas);
    for (std::size_t a = 0; a < options.deltas.size(); ++a) {
      tip_forcing[a] += nf[a];
      tip_q[a] += nq[a];
      tip_u[a] += nu[a];
    }
  }
  report.tip_forcing_by_delta = tip_forcing;
  report.tip_solution_by_delta = tip_u;
  const double tip_f = tip_forcing.back();
  const double weighted_rhs = h21 + h12 + tip_f;

  double pointwise = 0.0;
  for (std::size_t s = 0; s < sol.sup_times.size(); ++s) {
    if (sol.sup_times[s] >= options.pointwise_t_min) {
      pointwise = std::max(pointwise, sol.sup_times[s] * sol.sup_norm[s]);
    }
  }

  report.norms["local_nullform"] = lhs_local;
  report.norms["local_forcing_L1L2"] = forcing_l1l2;
  report.norms["tip_forcing_L2"] = tip_f;
  report.norms["tip_nullform_L2"] = tip_q.back();
  report.norms["tip_solution_L8"] = tip_u.back();
  report.norms["pointwise_t_sup"] = pointwise;

  auto row = [&](const std::string& name, double lhs, double rhs) {
    report.ratios.push_back({name, lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0});
  };
  row("local_nullform", lhs_local, rhs_local * rhs_local);
  row("weighted_nullform", tip_q.back(), weighted_rhs * weighted_rhs);
  row("weighted_L8", tip_u.back(), weighted_rhs);
  row("pointwise_decay", pointwise, weighted_rhs);
  return report;
}

double ratio_spread(const std::vector<NormReport>& reports, const std::string& estimate) {
  double lo = HUGE_VAL, hi = 0.0;
  for (const auto& rep : reports) {
    for (const auto& row : rep.ratios) {
      if (row.estimate != estimate || !std::isfinite(row.ratio) || !(row.ratio > 0.0)) continue;
      lo = std::min(lo, row.ratio);
      hi = std::max(hi, row.ratio);
    }
  }
  return hi > 0.0 ? hi / lo : HUGE_VAL;
}

bool delta_sweep_converged(const std::vector<double>& values, double rel_tol) {
  if (values.size() < 3) return false;
  for (double v : values)
    if (!std::isfinite(v)) return false;
  double prev_change = HUGE_VAL;
  const double scale = std::abs(values.back());
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double change = std::abs(values[i] - values[i - 1]);
    if (change > prev_change + 1e-12 * scale) return false;
    prev_change = change;
  }
  // an identically zero sweep has settled too
  return prev_change <= rel_tol * scale;
}

// ---------------------------------------------------------------------------
// Sobolev mapping bound

SobolevMappingRatio sobolev_mapping_ratio(const CartesianGrid& grid, const Field& f_tilde) {
  if (f_tilde.size() != grid.node_count()) throw ShapeError("field size does not match the grid");
  const std::size_t nodes = grid.node_count();
  Field f(nodes);
  Field omega(nodes);
  std::vector<std::array<std::array<double, 4>, kGammaCount>> b(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const MinkowskiPoint p{0.0, grid.position(i)};
    omega[i] = conformal_factor(p);
    f[i] = f_tilde[i] / omega[i];
    b[i] = gamma_fields_minkowski(p);
  }
  // Gamma_1..Gamma_6 are tangent to S^3; on t = 0 they have no d/dt part.
  auto apply = [&](const Field& g, std::size_t k) {
    const auto grad = gradient(grid, g);
    Field out(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      out[i] = b[i][k][1] * grad[i][0] + b[i][k][2] * grad[i][1] + b[i][k][3] * grad[i][2];
    }
    return out;
  };
  std::vector<Field> first;
  for (std::size_t k = 1; k < kGammaCount; ++k) first.push_back(apply(f, k));

  const double h3 = grid.h * grid.h * grid.h;
  std::vector<double> dens(nodes, 0.0);
  for (std::size_t i = 0; i < nodes; ++i) {
    double s = f[i] * f[i];
    for (const auto& g : first) s += g[i] * g[i];
    dens[i] = s;
  }
  for (const auto& g : first) {
    for (std::size_t k = 1; k < kGammaCount; ++k) {
      const Field gg = apply(g, k);
      for (std::size_t i = 0; i < nodes; ++i) dens[i] += gg[i] * gg[i];
    }
  }
  kernels::CompensatedSum acc;
  for (std::size_t i = 0; i < nodes; ++i) {
    if (!grid.is_fluid(i)) continue;
    acc.add(h3 * omega[i] * omega[i] * omega[i] * dens[i]);
  }
  SobolevMappingRatio out;
  out.sphere_norm = std::sqrt(acc.value());
  out.weighted_norm = weighted_sobolev_norm(grid, f_tilde, 2, 1);
  out.ratio = out.weighted_norm > 0.0 ? out.sphere_norm / out.weighted_norm : 0.0;
  return out;
}

}  // namespace nullwave
