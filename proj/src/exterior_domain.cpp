#include "nullwave/exterior_domain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nullwave/errors.hpp"

namespace nullwave {

RadialGrid build_radial_grid(double r0, double r_max, std::size_t n, std::size_t sponge_cells) {
  if (!(r0 > 0.0) || !(r_max > r0) || !std::isfinite(r_max)) {
    throw ParamError("build_radial_grid: need 0 < r0 < r_max");
  }
  if (n < 16) throw ParamError("build_radial_grid: need at least 16 cells");
  if (sponge_cells != 0 && (sponge_cells < 8 || 2 * sponge_cells > n)) {
    throw ParamError("build_radial_grid: sponge must span 8..n/2 cells");
  }
  RadialGrid grid;
  grid.r0 = r0;
  grid.r_max = r_max;
  grid.n = n;
  grid.h = (r_max - r0) / static_cast<double>(n);
  grid.sponge_cells = sponge_cells;
  return grid;
}

Vec3 CartesianGrid::position(std::size_t idx) const {
  const std::size_t k = idx % n;
  const std::size_t j = (idx / n) % n;
  const std::size_t i = idx / (n * n);
  return {coord(i), coord(j), coord(k)};
}

CartesianGrid build_masked_grid(const Obstacle& obstacle, double L, std::size_t n,
                                std::size_t sponge_cells) {
  if (!(L > 0.0)) throw ParamError("build_masked_grid: box extent must be positive");
  if (obstacle.bounding_radius() >= 0.25 * L) {
    throw ParamError("build_masked_grid: obstacle does not fit in |x| < L/4");
  }
  if (sponge_cells < 8) throw ParamError("build_masked_grid: sponge band must be >= 8 cells");
  if (n < 2 * sponge_cells + 4) throw ParamError("build_masked_grid: grid too coarse for the sponge");

  CartesianGrid grid;
  grid.L = L;
  grid.n = n;
  grid.h = L / static_cast<double>(n);
  grid.sponge_cells = sponge_cells;
  grid.obstacle = obstacle;
  grid.mask.assign(grid.node_count(), NodeKind::Fluid);

  for (std::size_t idx = 0; idx < grid.node_count(); ++idx) {
    if (obstacle.contains(grid.position(idx))) grid.mask[idx] = NodeKind::Obstacle;
  }
  auto in_band = [&](std::size_t i) { return i < sponge_cells || i >= n - sponge_cells; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = grid.index(i, j, k);
        if (grid.mask[idx] == NodeKind::Obstacle) continue;
        const bool touches =
            (i > 0 && grid.mask[grid.index(i - 1, j, k)] == NodeKind::Obstacle) ||
            (i + 1 < n && grid.mask[grid.index(i + 1, j, k)] == NodeKind::Obstacle) ||
            (j > 0 && grid.mask[grid.index(i, j - 1, k)] == NodeKind::Obstacle) ||
            (j + 1 < n && grid.mask[grid.index(i, j + 1, k)] == NodeKind::Obstacle) ||
            (k > 0 && grid.mask[grid.index(i, j, k - 1)] == NodeKind::Obstacle) ||
            (k + 1 < n && grid.mask[grid.index(i, j, k + 1)] == NodeKind::Obstacle);
        if (touches) {
          grid.mask[idx] = NodeKind::Boundary;
        } else if (in_band(i) || in_band(j) || in_band(k)) {
          grid.mask[idx] = NodeKind::Sponge;
        }
      }
    }
  }
  return grid;
}

std::vector<std::size_t> boundary_nodes(const RadialGrid&) { return {0}; }

std::vector<std::size_t> boundary_nodes(const CartesianGrid& grid) {
  std::vector<std::size_t> out;
  for (std::size_t idx = 0; idx < grid.node_count(); ++idx)
    if (grid.mask[idx] == NodeKind::Boundary) out.push_back(idx);
  return out;
}

namespace {

void check_size(std::size_t expected, const Field& f) {
  if (f.size() != expected) throw ShapeError("field size does not match the grid");
}

// First and second derivative along a strided line of m >= 4 values.
double line_d1(const double* f, std::size_t stride, std::size_t i, std::size_t m, double h) {
  if (i == 0) return (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) / (2.0 * h);
  if (i == m - 1) {
    const double* e = f + (m - 1) * stride;
    return (3.0 * e[0] - 4.0 * e[-static_cast<std::ptrdiff_t>(stride)] +
            e[-2 * static_cast<std::ptrdiff_t>(stride)]) /
           (2.0 * h);
  }
  return (f[(i + 1) * stride] - f[(i - 1) * stride]) / (2.0 * h);
}

double line_d2(const double* f, std::size_t stride, std::size_t i, std::size_t m, double h) {
  if (i == 0) return (2.0 * f[0] - 5.0 * f[stride] + 4.0 * f[2 * stride] - f[3 * stride]) / (h * h);
  if (i == m - 1) {
    const auto s = static_cast<std::ptrdiff_t>(stride);
    const double* e = f + (m - 1) * stride;
    return (2.0 * e[0] - 5.0 * e[-s] + 4.0 * e[-2 * s] - e[-3 * s]) / (h * h);
  }
  return (f[(i + 1) * stride] - 2.0 * f[i * stride] + f[(i - 1) * stride]) / (h * h);
}

}  // namespace

Field radial_derivative(const RadialGrid& grid, const Field& f) {
  check_size(grid.node_count(), f);
  Field out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = line_d1(f.data(), 1, i, f.size(), grid.h);
  return out;
}

Field radial_second_derivative(const RadialGrid& grid, const Field& f) {
  check_size(grid.node_count(), f);
  Field out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = line_d2(f.data(), 1, i, f.size(), grid.h);
  return out;
}

std::vector<Vec3> gradient(const RadialGrid& grid, const Field& f) {
  const Field fr = radial_derivative(grid, f);
  std::vector<Vec3> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = {fr[i], 0.0, 0.0};
  return out;
}

std::vector<Vec3> gradient(const CartesianGrid& grid, const Field& f) {
  check_size(grid.node_count(), f);
  const std::size_t n = grid.n;
  std::vector<Vec3> out(f.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = grid.index(i, j, k);
        out[idx] = {line_d1(f.data() + grid.index(0, j, k), n * n, i, n, grid.h),
                    line_d1(f.data() + grid.index(i, 0, k), n, j, n, grid.h),
                    line_d1(f.data() + grid.index(i, j, 0), 1, k, n, grid.h)};
      }
    }
  }
  return out;
}

Field laplacian(const RadialGrid& grid, const Field& f) {
  const Field fr = radial_derivative(grid, f);
  Field out = radial_second_derivative(grid, f);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] += 2.0 * fr[i] / grid.r(i);
  return out;
}

Field laplacian(const CartesianGrid& grid, const Field& f) {
  check_size(grid.node_count(), f);
  const std::size_t n = grid.n;
  Field out(f.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        out[grid.index(i, j, k)] = line_d2(f.data() + grid.index(0, j, k), n * n, i, n, grid.h) +
                                   line_d2(f.data() + grid.index(i, 0, k), n, j, n, grid.h) +
                                   line_d2(f.data() + grid.index(i, j, 0), 1, k, n, grid.h);
      }
    }
  }
  return out;
}

Field sample(const RadialGrid& grid, const ScalarFunction& fn) {
  Field out(grid.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn({grid.r(i), 0.0, 0.0});
  return out;
}

Field sample(const CartesianGrid& grid, const ScalarFunction& fn) {
  Field out(grid.node_count());
  for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] = fn(grid.position(idx));
  return out;
}

InitialData InitialData::scaled(double factor) const {
  InitialData out = *this;
  for (double& v : out.f) v *= factor;
  for (double& v : out.g) v *= factor;
  return out;
}

double BumpProfile::operator()(const Vec3& x) const {
  const double s =
      std::hypot(x[0] - centre[0], x[1] - centre[1], x[2] - centre[2]) - shell;
  const double q = s / support;
  if (std::abs(q) >= 1.0) return 0.0;
  const double g = s / width;
  return amplitude * std::exp(-g * g + 1.0 - 1.0 / (1.0 - q * q));
}

InitialData BumpData::sample(const RadialGrid& grid) const {
  InitialData d;
  d.f = nullwave::sample(grid, profile);
  d.g = d.f;
  for (double& v : d.g) v *= velocity_ratio;
  return d;
}

InitialData BumpData::sample(const CartesianGrid& grid) const {
  InitialData d;
  d.f = nullwave::sample(grid, profile);
  d.g = d.f;
  for (double& v : d.g) v *= velocity_ratio;
  return d;
}

namespace {

double binomial(int m, int i) {
  double c = 1.0;
  for (int s = 1; s <= i; ++s) c = c * (m - i + s) / s;
  return c;
}

template <class Grid>
CompatibilityFunctions compatibility_impl(const Grid& grid, const std::vector<InitialData>& data,
                                          const NullFormSpec& spec, int order) {
  if (order < 0 || order > kMaxCompatibilityOrder) {
    throw OrderError("compatibility order must lie in 0..4");
  }
  spec.validate();
  if (data.size() != spec.components) throw ShapeError("one InitialData per component required");
  const std::size_t nodes = grid.node_count();
  for (const auto& d : data) {
    check_size(nodes, d.f);
    check_size(nodes, d.g);
  }
  const std::size_t nc = spec.components;

  CompatibilityFunctions psi;
  psi.emplace_back();
  psi.emplace_back();
  for (const auto& d : data) {
    psi[0].push_back(d.f);
    psi[1].push_back(d.g);
  }
  // grads[i][c]: spatial gradient of psi_i for component c.
  std::vector<std::vector<std::vector<Vec3>>> grads;
  auto ensure_grad = [&](int i) {
    while (static_cast<int>(grads.size()) <= i) {
      const int level = static_cast<int>(grads.size());
      grads.emplace_back();
      for (std::size_t c = 0; c < nc; ++c) grads.back().push_back(gradient(grid, psi[level][c]));
    }
  };

  for (int m = 0; m + 2 <= order; ++m) {
    ensure_grad(m);
    std::vector<Field> next;
    for (std::size_t c = 0; c < nc; ++c) next.push_back(laplacian(grid, psi[m][c]));
    if (!spec.is_linear()) {
      for (int i = 0; i <= m; ++i) {
        ensure_grad(i);
        ensure_grad(m - i);
      }
      for (std::size_t node = 0; node < nodes; ++node) {
        // d(d_t^i u^c) = (psi_{i+1}, grad psi_i)
        auto jet = [&](int i, std::size_t c) {
          const Vec3& g = grads[i][c][node];
          return Gradient4{psi[i + 1][c][node], g[0], g[1], g[2]};
        };
        for (const auto& term : spec.terms) {
          double acc = 0.0;
          for (int i = 0; i <= m; ++i) {
            acc += binomial(m, i) * term.form(jet(i, term.j), jet(m - i, term.k));
          }
          next[term.component][node] += term.coeff * acc;
        }
      }
    }
    psi.push_back(std::move(next));
  }
  psi.resize(static_cast<std::size_t>(order) + 1);
  return psi;
}

template <class Grid>
std::vector<double> check_impl(const Grid& grid, const std::vector<InitialData>& data,
                               const NullFormSpec& spec, int order) {
  const auto psi = compatibility_impl(grid, data, spec, order);
  const auto nodes = boundary_nodes(grid);
  std::vector<double> out;
  for (const auto& level : psi) {
    double worst = 0.0;
    for (const auto& field : level)
      for (std::size_t idx : nodes) worst = std::max(worst, std::abs(field[idx]));
    out.push_back(worst);
  }
  return out;
}

void require_radial(const NullFormSpec& spec) {
  if (!spec.preserves_radial_symmetry()) {
    throw ParamError("Q_0k terms do not preserve spherical symmetry; use a cartesian grid");
  }
}

}  // namespace

CompatibilityFunctions compatibility_functions(const RadialGrid& grid,
                                               const std::vector<InitialData>& data,
                                               const NullFormSpec& spec, int order) {
  require_radial(spec);
  return compatibility_impl(grid, data, spec, order);
}

CompatibilityFunctions compatibility_functions(const CartesianGrid& grid,
                                               const std::vector<InitialData>& data,
                                               const NullFormSpec& spec, int order) {
  return compatibility_impl(grid, data, spec, order);
}

std::vector<double> check_compatibility(const RadialGrid& grid, const std::vector<InitialData>& data,
                                        const NullFormSpec& spec, int order) {
  require_radial(spec);
  return check_impl(grid, data, spec, order);
}

std::vector<double> check_compatibility(const CartesianGrid& grid,
                                        const std::vector<InitialData>& data,
                                        const NullFormSpec& spec, int order) {
  return check_impl(grid, data, spec, order);
}

// ---------------------------------------------------------------------------
// Snapshot files

namespace {

constexpr char kMagic[8] = {'N', 'W', 'S', 'N', 'A', 'P', '0', '1'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <class T>
void put(std::ostream& os, T value) {
  value = to_little(value);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ParamError("snapshot file truncated");
  return to_little(value);
}

void write_common(const std::filesystem::path& path, std::uint32_t kind,
                  const std::array<std::uint64_t, 3>& dims, double h, const Vec3& origin,
                  double time, const std::vector<NodeKind>* mask, const NamedFields& fields) {
  const std::uint64_t count = dims[0] * dims[1] * dims[2];
  for (const auto& [name, field] : fields) {
    if (field.size() != count) throw ShapeError("snapshot field '" + name + "' has wrong size");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParamError("cannot open snapshot file " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, kind);
  for (auto d : dims) put<std::uint64_t>(os, d);
  put<double>(os, h);
  for (double o : origin) put<double>(os, o);
  put<double>(os, time);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(fields.size()));
  put<std::uint32_t>(os, mask ? 1u : 0u);
  if (mask) {
    for (NodeKind m : *mask) put<std::uint8_t>(os, static_cast<std::uint8_t>(m));
  }
  for (const auto& [name, field] : fields) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (double v : field) put<double>(os, v);
  }
  if (!os) throw ParamError("failed writing snapshot file " + path.string());
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const RadialGrid& grid, double time,
                    const NamedFields& fields) {
  write_common(path, 0, {grid.node_count(), 1, 1}, grid.h, {grid.r0, 0.0, 0.0}, time, nullptr,
               fields);
}

void write_snapshot(const std::filesystem::path& path, const CartesianGrid& grid, double time,
                    const NamedFields& fields) {
  const double o = grid.coord(0);
  write_common(path, 1, {grid.n, grid.n, grid.n}, grid.h, {o, o, o}, time, &grid.mask, fields);
}

SnapshotFile read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParamError("cannot open snapshot file " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParamError("not a snapshot file: " + path.string());
  }
  if (get<std::uint32_t>(is) != kFormatVersion) throw ParamError("unsupported snapshot version");
  SnapshotFile out;
  out.grid_kind = get<std::uint32_t>(is);
  for (auto& d : out.dims) d = get<std::uint64_t>(is);
  out.spacing = get<double>(is);
  for (double& o : out.origin) o = get<double>(is);
  out.time = get<double>(is);
  const auto field_count = get<std::uint32_t>(is);
  const auto has_mask = get<std::uint32_t>(is);
  const std::uint64_t count = out.dims[0] * out.dims[1] * out.dims[2];
  if (has_mask) {
    out.mask.resize(count);
    for (auto& m : out.mask) {
      const auto raw = get<std::uint8_t>(is);
      if (raw > 3) throw ParamError("snapshot mask holds an unknown node kind");
      m = static_cast<NodeKind>(raw);
    }
  }
  for (std::uint32_t f = 0; f < field_count; ++f) {
    const auto len = get<std::uint32_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    Field values(count);
    for (double& v : values) v = get<double>(is);
    out.fields.emplace_back(std::move(name), std::move(values));
  }
  return out;
}

}  // namespace nullwave
