#pragma once

#include "holespin/params.hpp"

#include <optional>

namespace holespin {

/// Nuclear-field variance <Omega_N,x^2> split into its two contributions.
struct HyperfineResult {
  double term_mixing_free = 0.0;  ///< (rad/s)^2, from the acceptor f^2 g^2 structure
  double term_strain = 0.0;       ///< (rad/s)^2, from (Delta1/Delta0)^2 f^4
  double sigma_sq_total = 0.0;    ///< (rad/s)^2

  /// Dephasing time of each contribution alone and of the sum; nullopt when
  /// the corresponding variance is zero (no dephasing).
  std::optional<double> t2_star_mixing_free;
  std::optional<double> t2_star_strain;
  std::optional<double> t2_star_total;
};

/// <Omega^2> = v0 I(I+1) (C_As^2 + C_Ga^2) / (9 pi hbar^2)
///             * int dr r^2 [2 f^2 g^2 / 5 + 3 (Delta1/Delta0)^2 f^4 / 4]
/// with only the isotropic M1 hyperfine term and field-independent parts kept.
HyperfineResult omega_sq(const HyperfineParams& h, const PhysicalConstants& c = {});

/// Gaussian decay time sqrt(2) / sqrt(sigma_sq), seconds. Returns nullopt for
/// sigma_sq == 0; throws ValidationError for negative or non-finite input.
std::optional<double> t2_star(double sigma_sq);

}  // namespace holespin
