#pragma once

// Exterior grids, initial data, and the compatibility recursion.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nullwave/null_forms.hpp"
#include "nullwave/obstacle.hpp"

namespace nullwave {

using Field = std::vector<double>;

/// Uniform grid on [r0, r_max] for spherically symmetric problems. Node 0
/// sits on the obstacle surface (Dirichlet); the solver evolves w = r u.
/// The last `sponge_cells` nodes form the absorbing layer (0: reflecting
/// outer wall).
struct RadialGrid {
  double r0 = 1.0;
  double r_max = 2.0;
  std::size_t n = 16;
  double h = 1.0 / 16.0;
  std::size_t sponge_cells = 0;

  std::size_t node_count() const { return n + 1; }
  double r(std::size_t i) const { return r0 + h * static_cast<double>(i); }
  /// First node index of the sponge layer (node_count() without a sponge).
  std::size_t sponge_start() const { return n + 1 - sponge_cells; }
  /// Nodes strictly between the obstacle and the sponge/outer wall.
  bool is_fluid(std::size_t i) const { return i > 0 && i < sponge_start() && i < n; }
};

/// Throws ParamError unless 0 < r0 < r_max, n >= 16, and the sponge (when
/// present) is at least 8 cells and at most half the grid.
RadialGrid build_radial_grid(double r0, double r_max, std::size_t n, std::size_t sponge_cells = 0);

enum class NodeKind : std::uint8_t { Fluid = 0, Boundary = 1, Obstacle = 2, Sponge = 3 };

/// Cell-centred n^3 grid on the box [-L/2, L/2]^3 with a node mask.
struct CartesianGrid {
  double L = 1.0;
  std::size_t n = 0;
  double h = 0.0;
  std::size_t sponge_cells = 0;
  Obstacle obstacle = Obstacle::sphere(1.0);
  std::vector<NodeKind> mask;

  std::size_t node_count() const { return n * n * n; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * n + j) * n + k; }
  double coord(std::size_t i) const { return -0.5 * L + (static_cast<double>(i) + 0.5) * h; }
  Vec3 position(std::size_t idx) const;
  bool is_fluid(std::size_t idx) const { return mask[idx] == NodeKind::Fluid; }
};

/// Marks obstacle nodes, Dirichlet boundary nodes (non-obstacle nodes with
/// an obstacle face neighbour) and the outer sponge band. Throws ParamError
/// when the obstacle does not fit in |x| < L/4 or the sponge is narrower
/// than 8 cells.
CartesianGrid build_masked_grid(const Obstacle& obstacle, double L, std::size_t n,
                                std::size_t sponge_cells = 8);

/// Dirichlet nodes: node 0 for the radial grid, Boundary-marked nodes otherwise.
std::vector<std::size_t> boundary_nodes(const RadialGrid& grid);
std::vector<std::size_t> boundary_nodes(const CartesianGrid& grid);

// Finite-difference operators. Interior stencils are centred; ends of the
// radial grid and faces of the box use second-order one-sided stencils.
Field radial_derivative(const RadialGrid& grid, const Field& f);
Field radial_second_derivative(const RadialGrid& grid, const Field& f);
/// Spatial gradient; on the radial grid the point sits on the x_1 axis, so
/// the gradient is (f_r, 0, 0).
std::vector<Vec3> gradient(const RadialGrid& grid, const Field& f);
std::vector<Vec3> gradient(const CartesianGrid& grid, const Field& f);
Field laplacian(const RadialGrid& grid, const Field& f);
Field laplacian(const CartesianGrid& grid, const Field& f);

using ScalarFunction = std::function<double(const Vec3&)>;

/// Radial samples are taken at (r_i, 0, 0).
Field sample(const RadialGrid& grid, const ScalarFunction& fn);
Field sample(const CartesianGrid& grid, const ScalarFunction& fn);

/// Cauchy data (f, g) = (u(0), d_t u(0)) sampled on grid nodes.
struct InitialData {
  Field f;
  Field g;

  InitialData scaled(double factor) const;
  static InitialData zero(std::size_t nodes) { return {Field(nodes, 0.0), Field(nodes, 0.0)}; }
};

/// Smooth compactly supported profile in |x - centre|:
///   exp(-((s - shell)/width)^2) * exp(1 - 1/(1 - ((s - shell)/support)^2))
/// for |s - shell| < support, zero otherwise. The Gaussian factor keeps the
/// grid-scale spectral content of the data negligible.
struct BumpProfile {
  Vec3 centre{0.0, 0.0, 0.0};
  double shell = 2.5;
  double width = 0.3;
  double support = 1.4;
  double amplitude = 1.0;

  double operator()(const Vec3& x) const;
  double inner_edge() const { return shell - support; }
  double outer_edge() const { return shell + support; }
};

/// Data family: f = bump, g = velocity_ratio * bump.
struct BumpData {
  BumpProfile profile;
  double velocity_ratio = 0.0;

  InitialData sample(const RadialGrid& grid) const;
  InitialData sample(const CartesianGrid& grid) const;
};

/// psi[j][c] is the j-th time-derivative trace of component c, j = 0..order.
using CompatibilityFunctions = std::vector<std::vector<Field>>;

inline constexpr int kMaxCompatibilityOrder = 4;

/// psi_0 = f, psi_1 = g, and psi_{m+2} = Laplacian psi_m + d_t^m Q(du, du)|_{t=0},
/// expanded by the Leibniz rule with d(d_t^i u) = (psi_{i+1}, grad psi_i).
/// Throws OrderError for order > 4 or < 0.
CompatibilityFunctions compatibility_functions(const RadialGrid& grid,
                                               const std::vector<InitialData>& data,
                                               const NullFormSpec& spec, int order);
CompatibilityFunctions compatibility_functions(const CartesianGrid& grid,
                                               const std::vector<InitialData>& data,
                                               const NullFormSpec& spec, int order);

/// max |psi_j| over Dirichlet nodes and components, j = 0..order.
std::vector<double> check_compatibility(const RadialGrid& grid, const std::vector<InitialData>& data,
                                        const NullFormSpec& spec, int order);
std::vector<double> check_compatibility(const CartesianGrid& grid,
                                        const std::vector<InitialData>& data,
                                        const NullFormSpec& spec, int order);

// Binary snapshot files (little-endian):
//   char[8]  magic "NWSNAP01"
//   u32      format version (1)
//   u32      grid kind (0 radial, 1 cartesian)
//   u64[3]   dims (radial: n+1, 1, 1; cartesian: n, n, n)
//   f64      spacing h
//   f64[3]   coordinates of node 0 (radial: r0, 0, 0)
//   f64      time
//   u32      field count
//   u32      mask flag (1: one u8 NodeKind per node follows)
//   u8[N]    mask (cartesian only)
//   per field: u32 name length, name bytes, f64[N] values (node order)
struct SnapshotFile {
  std::uint32_t grid_kind = 0;
  std::array<std::uint64_t, 3> dims{};
  double spacing = 0.0;
  Vec3 origin{};
  double time = 0.0;
  std::vector<NodeKind> mask;
  std::vector<std::pair<std::string, Field>> fields;
};

using NamedFields = std::vector<std::pair<std::string, Field>>;

void write_snapshot(const std::filesystem::path& path, const RadialGrid& grid, double time,
                    const NamedFields& fields);
void write_snapshot(const std::filesystem::path& path, const CartesianGrid& grid, double time,
                    const NamedFields& fields);
/// Throws ParamError on a malformed file.
SnapshotFile read_snapshot(const std::filesystem::path& path);

}  // namespace nullwave
