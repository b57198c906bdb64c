#pragma once

#include "holespin/params.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string_view>

namespace holespin {

using Vec3 = Eigen::Vector3d;

enum class PhononBranch { LA, TA1, TA2 };
std::string_view to_string(PhononBranch b);

struct PhononMode {
  PhononBranch branch = PhononBranch::LA;
  Vec3 direction = Vec3::UnitZ();     ///< unit q / |q|
  Vec3 polarization = Vec3::UnitZ();  ///< unit e
  double speed = 0.0;                 ///< m/s
};

/// {e_LA, e_TA1, e_TA2} for a unit wave-vector direction:
///   e_LA  = q / q
///   e_TA1 = (q_y, -q_x, 0) / q_perp
///   e_TA2 = (q_x q_z, q_y q_z, -q_perp^2) / (q q_perp)
/// On the z axis (q_perp = 0) the transverse pair is taken as {x, y}.
std::array<Vec3, 3> polarization_vectors(const Vec3& direction);

/// The three acoustic modes propagating along `direction`.
std::array<PhononMode, 3> acoustic_modes(const Vec3& direction, const MaterialParams& m);

/// Dimensionless admixture coupling 3 g0 b' / (2 Delta0) that multiplies
/// mu_B B in the spin-flip matrix element.
double admixture_coupling(double g0, double delta0, double b_prime);

/// Same coupling expressed through the observable g_hh_perp and the strain
/// anisotropy u_xx - u_yy, using g_hh = -3 Delta1 g0 / Delta0 and
/// Delta1 = -b' (u_xx - u_yy): 3 g0 b' / (2 Delta0) = g_hh / (2 (u_xx - u_yy)).
double admixture_coupling_from_g_perp(double g_hh_perp, double strain_anisotropy);

/// Zero-temperature spin-flip matrix element <down|H_BP|up> for emission of a
/// phonon with wave vector q (1/m) in `mode`, long-wavelength limit, spherical
/// approximation b' = d'/sqrt3. Returns J m^{3/2} (per unit crystal volume).
std::complex<double> spin_flip_me(const Vec3& q, const PhononMode& mode, double field, const MaterialParams& m,
                                  double coupling, const PhysicalConstants& c = {});

std::complex<double> spin_flip_me(const Vec3& q, const PhononMode& mode, double field, const MaterialParams& m,
                                  double g0, double delta0, double b_prime, const PhysicalConstants& c = {});

/// Inputs for the high-field spin relaxation rate.
struct T1Params {
  double g_hh_perp = -0.15;
  double strain_anisotropy = 8e-5;  ///< u_xx - u_yy
  MaterialParams material{};
  PhysicalConstants constants{};
};

enum class RateMethod { closed_form, quadrature };
std::string_view to_string(RateMethod m);
RateMethod parse_rate_method(std::string_view s);

struct RateResult {
  double gamma = 0.0;                      ///< 1/s
  std::array<double, 3> per_branch{};      ///< LA, TA1, TA2
  double field = 0.0;                      ///< T
  RateMethod method = RateMethod::closed_form;
};

/// Gamma = |g mu_B B|^5 / (10 pi rho hbar^4 (u_xx - u_yy)^2) (1/s_t^5 + 2/(3 s_l^5)).
/// The TA share is split evenly between the two transverse branches.
RateResult gamma_closed(double field, const T1Params& p);

/// Default order of the product Gauss-Legendre grid over (cos theta, phi).
inline constexpr int kDefaultAngularNodes = 64;
/// Smallest accepted order. The cos theta rule is exact from 3 nodes; the phi
/// rule integrates trigonometric terms only approximately and reaches 1e-10
/// relative accuracy at 16 nodes.
inline constexpr int kMinAngularNodes = 4;

/// Golden-rule rate summed over LA/TA phonons, with the energy delta function
/// resolved per branch at q = |g mu_B B| / (hbar s) and the remaining solid
/// angle integrated on an n_nodes x n_nodes Gauss-Legendre grid.
RateResult gamma_quadrature(double field, const T1Params& p, int n_nodes = kDefaultAngularNodes);

/// T1 = (e^beta - 1) / (Gamma (e^beta + 1)), beta = |g mu_B B| / k_B T. Seconds.
double t1_theory(double field, double temperature, const T1Params& p, RateMethod method = RateMethod::closed_form,
                 int n_nodes = kDefaultAngularNodes);

}  // namespace holespin
