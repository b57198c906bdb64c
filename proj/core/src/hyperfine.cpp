#include "holespin/hyperfine.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace holespin {

HyperfineResult omega_sq(const HyperfineParams& h, const PhysicalConstants& c) {
  if (!(h.bohr_radius > 0.0)) throw ValidationError(fmt::format("bohr_radius must be > 0, got {}", h.bohr_radius));
  const double c_as = h.c_as * c.joule_per_ev;
  const double c_ga = h.c_ga * c.joule_per_ev;
  const double spin = h.nuclear_spin;
  const double prefactor =
      c.v0() * spin * (spin + 1.0) * (c_as * c_as + c_ga * c_ga) / (9.0 * std::numbers::pi * c.hbar * c.hbar);
  const double inv_volume = 1.0 / (h.bohr_radius * h.bohr_radius * h.bohr_radius);

  HyperfineResult r;
  r.term_mixing_free = prefactor * 0.4 * h.int_f2g2 * inv_volume;
  r.term_strain = prefactor * 0.75 * h.mixing_ratio * h.mixing_ratio * h.int_f4 * inv_volume;
  r.sigma_sq_total = r.term_mixing_free + r.term_strain;
  r.t2_star_mixing_free = t2_star(r.term_mixing_free);
  r.t2_star_strain = t2_star(r.term_strain);
  r.t2_star_total = t2_star(r.sigma_sq_total);
  return r;
}

std::optional<double> t2_star(double sigma_sq) {
  if (!std::isfinite(sigma_sq) || sigma_sq < 0.0)
    throw ValidationError(fmt::format("t2_star: variance must be finite and >= 0, got {}", sigma_sq));
  if (sigma_sq == 0.0) return std::nullopt;
  return std::numbers::sqrt2 / std::sqrt(sigma_sq);
}

}  // namespace holespin
