#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nullwave/geometry.hpp"

namespace nullwave {

/// (d_t v, d_1 v, d_2 v, d_3 v).
using Gradient4 = std::array<double, 4>;

/// Q_0(du, dv) = d_t u d_t v - sum_j d_j u d_j v.
double eval_q0(const Gradient4& du, const Gradient4& dv);

/// Q_jk(du, dv) = d_j u d_k v - d_k u d_j v for 0 <= j < k <= 3.
/// Throws IndexError otherwise.
double eval_qjk(int j, int k, const Gradient4& du, const Gradient4& dv);

/// One of the seven standard null forms.
struct NullForm {
  enum class Kind { Q0, Qjk };
  Kind kind = Kind::Q0;
  int j = 0;  ///< only for Qjk
  int k = 1;

  static NullForm q0() { return {}; }
  static NullForm qjk(int j, int k);

  double operator()(const Gradient4& du, const Gradient4& dv) const;
  /// "Q0", "Q01", ..., "Q23".
  std::string name() const;
  static NullForm parse(const std::string& name);
  /// Q0 and the purely spatial Q_jk preserve spherical symmetry; Q_0k do not.
  bool preserves_radial_symmetry() const { return kind == Kind::Q0 || j >= 1; }

  friend bool operator==(const NullForm&, const NullForm&) = default;
};

/// One term a^i_{j,k} B^i_{j,k}(du^j, du^k) of component i.
struct NullFormTerm {
  std::size_t component = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  double coeff = 0.0;
  NullForm form;
};

/// Q^i = sum over terms of component i of a^i_{j,k} B^i_{j,k}(du^j, du^k).
struct NullFormSpec {
  std::size_t components = 1;
  std::vector<NullFormTerm> terms;

  /// Throws IndexError for out-of-range indices and ParamError for
  /// non-finite coefficients.
  void validate() const;
  bool is_linear() const;
  bool preserves_radial_symmetry() const;

  /// The scalar equation box u = c Q_0(du, du).
  static NullFormSpec scalar_q0(double coeff = 1.0);
};

/// Bilinear evaluation: component i = sum a B(du^j, dv^k).
std::vector<double> eval_system(const NullFormSpec& spec, std::span<const Gradient4> du,
                                std::span<const Gradient4> dv);
/// Quadratic evaluation Q(du, du).
std::vector<double> eval_system(const NullFormSpec& spec, std::span<const Gradient4> du);

/// Cylinder-side value and Gamma-derivatives of one function at a point.
struct CylinderJet {
  double value = 0.0;
  std::array<double, kGammaCount> gamma{};
};

/// Omega^{-3} Q(d(Omega u o P), d(Omega v o P)) evaluated at P^{-1}(q).
/// Minkowski derivatives of Omega u are assembled by the chain rule from the
/// cylinder jets, the pushforward coefficients and the closed-form gradient
/// of Omega. Throws DomainError when Omega = cos T + X_0 < 1e-8.
std::vector<double> eval_transformed_q(const EinsteinPoint& q, std::span<const CylinderJet> u,
                                       std::span<const CylinderJet> v, const NullFormSpec& spec);

inline constexpr double kNullInfinityGuard = 1e-8;

}  // namespace nullwave
