#pragma once

#include "holespin/params.hpp"

#include <array>
#include <complex>
#include <string>
#include <string_view>

namespace holespin {

// Selection rules are written in the electron representation, the one used
// for the energy diagrams; the hole representation of hamiltonian.hpp differs
// by time reversal, which does not change the sign of g_hh.

/// Which in-plane strain anisotropy mixes the heavy-hole doublet.
enum class StrainCase {
  diagonal,  ///< u_xx != u_yy, u_xy = 0
  shear,     ///< u_xx = u_yy, u_xy != 0
};

/// Accepts "uxx_minus_uyy" or "uxy".
StrainCase parse_strain_case(std::string_view label);

enum class Spin { up, down };

using ComplexVec3 = std::array<std::complex<double>, 3>;

/// <hole|mu|electron> along x, y, z in units of mu0 = <X|e x|S>.
struct DipoleElement {
  Spin electron;
  Spin hole;
  ComplexVec3 vector{};

  double strength() const;  ///< |p|^2 / mu0^2
};

/// Matrix elements for (hole, electron) = (up, up), (up, down), (down, up),
/// (down, down), evaluated from the B > 0 spin/orbital states.
std::array<DipoleElement, 4> dipole_elements(StrainCase c);

/// |eps . p|^2 for a real polarisation vector.
double intensity(const DipoleElement& d, const std::array<double, 3>& polarization);

enum class Polarization { x, y, plus45, minus45 };
std::string_view to_string(Polarization p);

struct Transition {
  int id = 0;
  double energy = 0.0;  ///< eV
  Polarization polarization = Polarization::x;
};

struct TransitionTable {
  double e0 = 0.0;  ///< eV
  double g_e = 0.0;
  double g_hh = 0.0;
  double field = 0.0;  ///< T
  double electron_splitting = 0.0;  ///< |g_e| mu_B B, eV
  double hole_splitting = 0.0;      ///< |g_hh| mu_B B, eV
  std::array<Transition, 4> transitions{};
};

/// Four A0-A0X lines in Voigt geometry (diagonal strain case). Lines 1 and 4
/// are x-polarised and sit at E0 +- (De + Dh)/2; lines 2 and 3 are
/// y-polarised at E0 +- (De - Dh)/2.
TransitionTable transition_table(double e0, double g_e, double g_hh, double field, const PhysicalConstants& c = {});

/// Photon frequency in GHz for a transition energy in eV.
double energy_to_ghz(double energy_ev, const PhysicalConstants& c = {});

/// Sign of g_hh implied by which polarisation ("x" or "y") is observed on
/// the outermost lines, given the sign of g_e (+1 or -1).
int infer_g_hh_sign(std::string_view outer_polarization, int sign_g_e = -1);

}  // namespace holespin
