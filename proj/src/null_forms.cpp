#include "nullwave/null_forms.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "nullwave/errors.hpp"

namespace nullwave {

double eval_q0(const Gradient4& du, const Gradient4& dv) {
  return du[0] * dv[0] - du[1] * dv[1] - du[2] * dv[2] - du[3] * dv[3];
}

double eval_qjk(int j, int k, const Gradient4& du, const Gradient4& dv) {
  if (j < 0 || k > 3 || j >= k) {
    throw IndexError("eval_qjk: need 0 <= j < k <= 3, got j=" + std::to_string(j) +
                     ", k=" + std::to_string(k));
  }
  return du[j] * dv[k] - du[k] * dv[j];
}

NullForm NullForm::qjk(int j, int k) {
  if (j < 0 || k > 3 || j >= k) throw IndexError("NullForm::qjk: need 0 <= j < k <= 3");
  return {Kind::Qjk, j, k};
}

double NullForm::operator()(const Gradient4& du, const Gradient4& dv) const {
  return kind == Kind::Q0 ? eval_q0(du, dv) : eval_qjk(j, k, du, dv);
}

std::string NullForm::name() const {
  if (kind == Kind::Q0) return "Q0";
  return "Q" + std::to_string(j) + std::to_string(k);
}

NullForm NullForm::parse(const std::string& name) {
  if (name == "Q0") return q0();
  if (name.size() == 3 && name[0] == 'Q' && std::isdigit(static_cast<unsigned char>(name[1])) &&
      std::isdigit(static_cast<unsigned char>(name[2]))) {
    return qjk(name[1] - '0', name[2] - '0');
  }
  throw ParamError("unknown null form '" + name + "'");
}

void NullFormSpec::validate() const {
  if (components == 0) throw ParamError("null-form spec needs at least one component");
  for (const auto& term : terms) {
    if (term.component >= components || term.j >= components || term.k >= components) {
      throw IndexError("null-form term index out of range");
    }
    if (!std::isfinite(term.coeff)) throw ParamError("null-form coefficient is not finite");
    if (term.form.kind == NullForm::Kind::Qjk &&
        (term.form.j < 0 || term.form.k > 3 || term.form.j >= term.form.k)) {
      throw IndexError("null-form Q_jk indices out of range");
    }
  }
}

bool NullFormSpec::is_linear() const {
  for (const auto& term : terms)
    if (term.coeff != 0.0) return false;
  return true;
}

bool NullFormSpec::preserves_radial_symmetry() const {
  for (const auto& term : terms)
    if (term.coeff != 0.0 && !term.form.preserves_radial_symmetry()) return false;
  return true;
}

NullFormSpec NullFormSpec::scalar_q0(double coeff) {
  NullFormSpec spec;
  spec.components = 1;
  spec.terms.push_back({0, 0, 0, coeff, NullForm::q0()});
  return spec;
}

std::vector<double> eval_system(const NullFormSpec& spec, std::span<const Gradient4> du,
                                std::span<const Gradient4> dv) {
  if (du.size() != spec.components || dv.size() != spec.components) {
    throw ShapeError("eval_system: expected " + std::to_string(spec.components) + " gradients");
  }
  std::vector<double> out(spec.components, 0.0);
  for (const auto& term : spec.terms) {
    out[term.component] += term.coeff * term.form(du[term.j], dv[term.k]);
  }
  return out;
}

std::vector<double> eval_system(const NullFormSpec& spec, std::span<const Gradient4> du) {
  return eval_system(spec, du, du);
}

std::vector<double> eval_transformed_q(const EinsteinPoint& q, std::span<const CylinderJet> u,
                                       std::span<const CylinderJet> v, const NullFormSpec& spec) {
  if (u.size() != spec.components || v.size() != spec.components) {
    throw ShapeError("eval_transformed_q: jet count does not match the spec");
  }
  const double omega = conformal_factor(q);
  if (!q.in_diamond() || omega < kNullInfinityGuard) {
    throw DomainError("eval_transformed_q: point too close to null infinity");
  }
  const MinkowskiPoint p = from_einstein(q);
  const GammaCoefficients coeffs = gamma_coefficients(q);
  const Vec4 d_omega = conformal_factor_gradient(p);

  // d(Omega u) = u dOmega + Omega (a . Gamma u)
  auto lift = [&](std::span<const CylinderJet> jets) {
    std::vector<Gradient4> grads(jets.size());
    for (std::size_t c = 0; c < jets.size(); ++c) {
      const Vec4 d = minkowski_derivatives(coeffs, jets[c].gamma);
      for (int mu = 0; mu < 4; ++mu) grads[c][mu] = jets[c].value * d_omega[mu] + omega * d[mu];
    }
    return grads;
  };
  const auto du = lift(u);
  const auto dv = lift(v);
  std::vector<double> out = eval_system(spec, du, dv);
  const double scale = 1.0 / (omega * omega * omega);
  for (double& value : out) value *= scale;
  return out;
}

}  // namespace nullwave
