#include "holespin/phonon.hpp"

#include "holespin/errors.hpp"
#include "holespin/quadrature.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace holespin {

namespace {

void check_inputs(double field, const T1Params& p) {
  if (!(field > 0.0)) throw ValidationError(fmt::format("field must be > 0 T, got {}", field));
  if (p.strain_anisotropy == 0.0)
    throw ValidationError("singular anisotropy: u_xx - u_yy must be nonzero for the admixture rate");
  if (p.g_hh_perp == 0.0) throw ValidationError("g_hh_perp must be nonzero");
}

}  // namespace

std::string_view to_string(PhononBranch b) {
  switch (b) {
    case PhononBranch::LA:
      return "LA";
    case PhononBranch::TA1:
      return "TA1";
    case PhononBranch::TA2:
      return "TA2";
  }
  return "?";
}

std::string_view to_string(RateMethod m) { return m == RateMethod::closed_form ? "closed" : "quadrature"; }

RateMethod parse_rate_method(std::string_view s) {
  if (s == "closed") return RateMethod::closed_form;
  if (s == "quadrature") return RateMethod::quadrature;
  throw ValidationError(fmt::format("unknown rate method '{}' (expected closed or quadrature)", s));
}

std::array<Vec3, 3> polarization_vectors(const Vec3& direction) {
  const Vec3 n = direction.normalized();
  const double q_perp = std::hypot(n.x(), n.y());
  if (q_perp < 1e-12) return {n, Vec3::UnitX(), Vec3::UnitY()};
  return {n, Vec3(n.y(), -n.x(), 0.0) / q_perp,
          Vec3(n.x() * n.z(), n.y() * n.z(), -q_perp * q_perp) / q_perp};
}

std::array<PhononMode, 3> acoustic_modes(const Vec3& direction, const MaterialParams& m) {
  const auto e = polarization_vectors(direction);
  const Vec3 n = direction.normalized();
  return {PhononMode{PhononBranch::LA, n, e[0], m.s_l}, PhononMode{PhononBranch::TA1, n, e[1], m.s_t},
          PhononMode{PhononBranch::TA2, n, e[2], m.s_t}};
}

double admixture_coupling(double g0, double delta0, double b_prime) {
  if (delta0 == 0.0) throw ValidationError("admixture_coupling: delta0 must be nonzero");
  return 3.0 * g0 * b_prime / (2.0 * delta0);
}

double admixture_coupling_from_g_perp(double g_hh_perp, double strain_anisotropy) {
  if (strain_anisotropy == 0.0) throw ValidationError("singular anisotropy: u_xx - u_yy must be nonzero");
  return g_hh_perp / (2.0 * strain_anisotropy);
}

std::complex<double> spin_flip_me(const Vec3& q, const PhononMode& mode, double field, const MaterialParams& m,
                                  double coupling, const PhysicalConstants& c) {
  const double qn = q.norm();
  if (!(qn > 0.0)) throw ValidationError("spin_flip_me: phonon wave vector must be nonzero");
  const double omega = qn * mode.speed;
  const Vec3& e = mode.polarization;
  const std::complex<double> shape(q.x() * e.y() + q.y() * e.x(), q.x() * e.z() + q.z() * e.x());
  return coupling * c.mu_b_joule() * field * std::sqrt(c.hbar / (2.0 * m.rho * omega)) * shape;
}

std::complex<double> spin_flip_me(const Vec3& q, const PhononMode& mode, double field, const MaterialParams& m,
                                  double g0, double delta0, double b_prime, const PhysicalConstants& c) {
  return spin_flip_me(q, mode, field, m, admixture_coupling(g0, delta0, b_prime), c);
}

RateResult gamma_closed(double field, const T1Params& p) {
  check_inputs(field, p);
  const auto& c = p.constants;
  const auto& m = p.material;
  const double zeeman = std::abs(p.g_hh_perp * c.mu_b_joule() * field);
  const double prefactor = std::pow(zeeman, 5) /
                           (10.0 * std::numbers::pi * m.rho * std::pow(c.hbar, 4) *
                            p.strain_anisotropy * p.strain_anisotropy);
  RateResult r;
  r.field = field;
  r.method = RateMethod::closed_form;
  r.per_branch[0] = prefactor * 2.0 / (3.0 * std::pow(m.s_l, 5));
  r.per_branch[1] = prefactor * 0.5 / std::pow(m.s_t, 5);
  r.per_branch[2] = r.per_branch[1];
  r.gamma = r.per_branch[0] + r.per_branch[1] + r.per_branch[2];
  return r;
}

RateResult gamma_quadrature(double field, const T1Params& p, int n_nodes) {
  check_inputs(field, p);
  if (n_nodes < kMinAngularNodes)
    throw ValidationError(fmt::format("gamma_quadrature: need at least {} nodes, got {}", kMinAngularNodes, n_nodes));
  const auto& c = p.constants;
  const auto& m = p.material;
  const double coupling = admixture_coupling_from_g_perp(p.g_hh_perp, p.strain_anisotropy);
  const double zeeman = std::abs(p.g_hh_perp * c.mu_b_joule() * field);

  const QuadratureRule cos_theta = gauss_legendre(n_nodes, -1.0, 1.0);
  const QuadratureRule phi = gauss_legendre(n_nodes, 0.0, 2.0 * std::numbers::pi);

  RateResult r;
  r.field = field;
  r.method = RateMethod::quadrature;
  for (int i = 0; i < n_nodes; ++i) {
    const double ct = cos_theta.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_nodes; ++j) {
      const Vec3 n(st * std::cos(phi.nodes[j]), st * std::sin(phi.nodes[j]), ct);
      const double w = cos_theta.weights[i] * phi.weights[j];
      const auto modes = acoustic_modes(n, m);
      for (int b = 0; b < 3; ++b) {
        const double q0 = zeeman / (c.hbar * modes[b].speed);
        r.per_branch[b] += w * std::norm(spin_flip_me(q0 * n, modes[b], field, m, coupling, c));
      }
    }
  }
  // Gamma_b = (2 pi / hbar) int d^3q / (2 pi)^3 |M|^2 delta(hbar s q - E)
  //         = q0^2 / (4 pi^2 hbar^2 s) int dOmega |M(q0 n)|^2
  for (int b = 0; b < 3; ++b) {
    const double speed = b == 0 ? m.s_l : m.s_t;
    const double q0 = zeeman / (c.hbar * speed);
    r.per_branch[b] *= q0 * q0 / (4.0 * std::numbers::pi * std::numbers::pi * c.hbar * c.hbar * speed);
  }
  r.gamma = r.per_branch[0] + r.per_branch[1] + r.per_branch[2];
  return r;
}

double t1_theory(double field, double temperature, const T1Params& p, RateMethod method, int n_nodes) {
  if (!(temperature > 0.0)) throw ValidationError(fmt::format("temperature must be > 0 K, got {}", temperature));
  const RateResult rate = method == RateMethod::closed_form ? gamma_closed(field, p) : gamma_quadrature(field, p, n_nodes);
  const double beta = std::abs(p.g_hh_perp * p.constants.mu_b_ev * field) / (p.constants.k_b_ev * temperature);
  // (e^b - 1)/(e^b + 1) = tanh(b/2)
  return std::tanh(0.5 * beta) / rate.gamma;
}

}  // namespace holespin
