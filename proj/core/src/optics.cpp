#include "holespin/optics.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace holespin {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// Two-spinor x three-orbital state: amp[spin][orbital], spin 0 = up_z,
// orbital 0..2 = X, Y, Z.
using Ket = std::array<std::array<cd, 3>, 2>;

Ket hole_ket(cd down_coeff, int down_sign_y, cd up_coeff, int up_sign_y) {
  // coeff_down |down_z, (X + s iY)/sqrt2> + coeff_up |up_z, (X + s iY)/sqrt2>
  const double r = 1.0 / std::numbers::sqrt2;
  Ket k{};
  k[1] = {down_coeff * r, down_coeff * (double(down_sign_y) * kI) * r, 0.0};
  k[0] = {up_coeff * r, up_coeff * (double(up_sign_y) * kI) * r, 0.0};
  return k;
}

// Electron states along x are S-like; only the spin part matters.
std::array<cd, 2> electron_spin(Spin s) {
  const double r = 1.0 / std::numbers::sqrt2;
  return s == Spin::up ? std::array<cd, 2>{r, r} : std::array<cd, 2>{r, -r};
}

ComplexVec3 matrix_element(const Ket& hole, const std::array<cd, 2>& electron) {
  // <X|x|S> = <Y|y|S> = <Z|z|S> = mu0, all others zero.
  ComplexVec3 p{};
  for (int spin = 0; spin < 2; ++spin)
    for (int axis = 0; axis < 3; ++axis) p[axis] += std::conj(hole[spin][axis]) * electron[spin];
  return p;
}

}  // namespace

StrainCase parse_strain_case(std::string_view label) {
  if (label == "uxx_minus_uyy") return StrainCase::diagonal;
  if (label == "uxy") return StrainCase::shear;
  throw ValidationError(fmt::format("unknown strain case '{}' (expected uxx_minus_uyy or uxy)", label));
}

double DipoleElement::strength() const { return std::norm(vector[0]) + std::norm(vector[1]) + std::norm(vector[2]); }

std::array<DipoleElement, 4> dipole_elements(StrainCase c) {
  const double r = 1.0 / std::numbers::sqrt2;
  // Relative phase of the |up_z, X+iY> component: 1 for diagonal strain, i for shear.
  const cd phase = c == StrainCase::diagonal ? cd{1.0, 0.0} : kI;
  const Ket hole_up = hole_ket(r, -1, phase * r, +1);
  const Ket hole_down = hole_ket(r, -1, -phase * r, +1);

  std::array<DipoleElement, 4> out;
  int k = 0;
  for (Spin h : {Spin::up, Spin::down}) {
    for (Spin e : {Spin::up, Spin::down}) {
      out[k].hole = h;
      out[k].electron = e;
      out[k].vector = matrix_element(h == Spin::up ? hole_up : hole_down, electron_spin(e));
      ++k;
    }
  }
  return out;
}

double intensity(const DipoleElement& d, const std::array<double, 3>& polarization) {
  cd s = 0.0;
  for (int i = 0; i < 3; ++i) s += polarization[i] * d.vector[i];
  return std::norm(s);
}

std::string_view to_string(Polarization p) {
  switch (p) {
    case Polarization::x:
      return "x";
    case Polarization::y:
      return "y";
    case Polarization::plus45:
      return "+45";
    case Polarization::minus45:
      return "-45";
  }
  return "?";
}

TransitionTable transition_table(double e0, double g_e, double g_hh, double field, const PhysicalConstants& c) {
  if (field < 0.0) throw ValidationError("transition_table: field must be >= 0");
  const double de = std::abs(g_e) * c.mu_b_ev * field;
  const double dh = std::abs(g_hh) * c.mu_b_ev * field;
  TransitionTable t{e0, g_e, g_hh, field, de, dh, {}};
  t.transitions[0] = {1, e0 + 0.5 * (de + dh), Polarization::x};
  t.transitions[1] = {2, e0 + 0.5 * (de - dh), Polarization::y};
  t.transitions[2] = {3, e0 - 0.5 * (de - dh), Polarization::y};
  t.transitions[3] = {4, e0 - 0.5 * (de + dh), Polarization::x};
  return t;
}

double energy_to_ghz(double energy_ev, const PhysicalConstants& c) {
  return energy_ev / (2.0 * std::numbers::pi * c.hbar_ev()) * 1e-9;
}

int infer_g_hh_sign(std::string_view outer_polarization, int sign_g_e) {
  if (sign_g_e != 1 && sign_g_e != -1) throw ValidationError("infer_g_hh_sign: sign_g_e must be +1 or -1");
  // Recombining electron i with hole j emits at E0 + (s_i g_e + s_j g_hh) mu_B B / 2.
  // In the diagonal case the x-polarised pairs have s_i = s_j, so they are the
  // outer lines exactly when |g_e + g_hh| > |g_e - g_hh|, i.e. g_e g_hh > 0.
  if (outer_polarization == "x") return sign_g_e;
  if (outer_polarization == "y") return -sign_g_e;
  throw ValidationError(fmt::format("infer_g_hh_sign: outer polarisation must be 'x' or 'y', got '{}'",
                                    outer_polarization));
}

}  // namespace holespin
