#pragma once

#include "holespin/params.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>

namespace holespin {

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;
using Vector4c = Eigen::Matrix<std::complex<double>, 4, 1>;

/// Strain tensor components in the (001) layer. delta_e is the measured band
/// gap shift the strain was inferred from, when there is one.
struct StrainState {
  double u_xx = 0.0;
  double u_yy = 0.0;
  double u_xy = 0.0;
  std::optional<double> delta_e;
};

/// In-plane strain from a band-gap shift, dE = 2 (a_c - a_v)(1 - C12/C11) u_xx.
double strain_from_shift(double delta_e_ev, const MaterialParams& m);

/// E_hh - E_lh = 2 b (1 + 2 C12/C11) u_xx. Positive for compressive strain.
double hh_lh_splitting(double u_xx, const MaterialParams& m);

/// Delta1 = -b' (u_xx - u_yy).
double delta1_from_strain(double u_xx, double u_yy, double b_prime);

/// Parameters of the F = 3/2 ground quadruplet in the hole representation,
/// field along x.
struct HoleLevelStructure {
  double delta0 = 0.0;  ///< hh-lh splitting, eV
  double delta1 = 0.0;  ///< in-plane anisotropy coupling, eV
  double g0 = 1.0;      ///< bare acceptor g-factor
  double field = 0.0;   ///< tesla
};

/// F = 3/2 angular momentum matrices in the basis |+3/2>, |+1/2>, |-1/2>, |-3/2>.
namespace spin32 {
Matrix4c fx();
Matrix4c fy();
Matrix4c fz();
}  // namespace spin32

/// H = -(Delta0/2) Fz^2 + g0 mu_B B Fx + (Delta1/2)(Fx^2 - Fy^2), in eV.
Matrix4c build_hamiltonian(const HoleLevelStructure& h, const PhysicalConstants& c = {});

struct SpinorState {
  Vector4c amplitudes;  ///< over |+3/2>, |+1/2>, |-1/2>, |-3/2>
  double energy = 0.0;  ///< eV

  /// |<+3/2|psi>|^2 + |<-3/2|psi>|^2
  double heavy_weight() const;
};

/// The two heavy-hole-like eigenstates of a quadruplet Hamiltonian.
///
/// `up` is the state whose |+3/2> and |-3/2> amplitudes carry the same sign
/// (energy -9 Delta0/8 + g_hh mu_B B / 2 at small mixing), `down` the one with
/// opposite signs. Both have a real nonnegative |+3/2> amplitude.
struct HeavyHoleDoublet {
  SpinorState up;
  SpinorState down;

  const SpinorState& lower() const { return up.energy <= down.energy ? up : down; }
  const SpinorState& upper() const { return up.energy <= down.energy ? down : up; }
  /// epsilon_up - epsilon_down; equals g_hh_perp mu_B B in the perturbative regime.
  double splitting() const { return up.energy - down.energy; }
};

/// Minimum |+-3/2> weight accepted for a heavy-hole state.
inline constexpr double kHeavyWeightThreshold = 0.6;

/// Diagonalises `hamiltonian` and returns the heavy-hole doublet. Throws
/// RegimeError if either of the two most heavy-like states has a |+-3/2>
/// weight below kHeavyWeightThreshold.
HeavyHoleDoublet heavy_hole_doublet(const Matrix4c& hamiltonian);

/// Convenience overload that also enforces delta0 > 0 and delta0 >= 4 |delta1|.
HeavyHoleDoublet heavy_hole_doublet(const HoleLevelStructure& h, const PhysicalConstants& c = {});

/// g_hh_perp = -3 Delta1 g0 / Delta0.
double g_perp_perturbative(double delta0, double delta1, double g0);

}  // namespace holespin
