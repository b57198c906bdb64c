#include "doctest.h"

#include "holespin/errors.hpp"
#include "holespin/hyperfine.hpp"

#include <cmath>
#include <numbers>

using namespace holespin;

namespace {

// Direct evaluation of the two variance terms.
double omega_oracle(double ab, double mix, double f2g2 = 0.5, double f4 = 7.9) {
  const double hbar_ev = 1.054571817e-34 / 1.602176634e-19;
  const double v0 = std::pow(5.653e-10, 3) / 4.0;
  const double pre = v0 * 1.5 * 2.5 * (4.4e-6 * 4.4e-6 + 3e-6 * 3e-6) / (9.0 * std::numbers::pi * hbar_ev * hbar_ev);
  return pre * (0.4 * f2g2 + 0.75 * mix * mix * f4) / (ab * ab * ab);
}

double t2_mixing_free(double ab) {
  HyperfineParams h;
  h.bohr_radius = ab;
  return *omega_sq(h).t2_star_mixing_free;
}

}  // namespace

TEST_CASE("variance matches the direct formula") {
  HyperfineParams h;
  for (double ab : {1e-9, 5e-9}) {
    for (double mix : {0.0, 0.05, 0.2}) {
      h.bohr_radius = ab;
      h.mixing_ratio = mix;
      CHECK(omega_sq(h).sigma_sq_total == doctest::Approx(omega_oracle(ab, mix)).epsilon(1e-12));
    }
  }
}

TEST_CASE("default Bohr radius is the 58 ns calibration") {
  // Bisection on T2*(a_B) = 58 ns; T2* grows monotonically with a_B.
  double lo = 1e-9, hi = 2e-8;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t2_mixing_free(mid) < 58e-9 ? lo : hi) = mid;
  }
  CHECK(HyperfineParams{}.bohr_radius == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));

  const auto r = omega_sq(HyperfineParams{});
  CHECK(*r.t2_star_mixing_free == doctest::Approx(58e-9).epsilon(1e-8));
  CHECK(*r.t2_star_strain == doctest::Approx(213.12e-9).epsilon(1e-4));
  CHECK(*r.t2_star_total < *r.t2_star_mixing_free);
  CHECK(r.term_mixing_free / r.term_strain == doctest::Approx(13.5021).epsilon(1e-5));
}

TEST_CASE("term ratio is independent of a_B") {
  HyperfineParams h;
  for (double ab = 0.5e-9; ab <= 5e-9; ab += 0.25e-9) {
    h.bohr_radius = ab;
    const auto r = omega_sq(h);
    CHECK(*r.t2_star_strain / *r.t2_star_mixing_free == doctest::Approx(3.6745).epsilon(1e-4));
  }
}

TEST_CASE("degenerate inputs") {
  HyperfineParams h;
  h.mixing_ratio = 0.0;
  const auto r = omega_sq(h);
  CHECK(r.term_strain == 0.0);
  CHECK_FALSE(r.t2_star_strain.has_value());
  CHECK(r.t2_star_total.has_value());
  CHECK_FALSE(t2_star(0.0).has_value());
  CHECK(*t2_star(2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(t2_star(-1.0), ValidationError);
  CHECK_THROWS_AS(t2_star(std::nan("")), ValidationError);
}
