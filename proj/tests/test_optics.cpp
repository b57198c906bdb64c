#include "doctest.h"

#include "holespin/errors.hpp"
#include "holespin/optics.hpp"

#include <cmath>
#include <complex>

using namespace holespin;

namespace {

using cd = std::complex<double>;
const double r2 = 1.0 / std::sqrt(2.0);

void check_vector(const ComplexVec3& got, const ComplexVec3& want) {
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(got[i] - want[i]) < 1e-15);
  }
}

}  // namespace

TEST_CASE("dipole elements, diagonal strain") {
  const auto d = dipole_elements(StrainCase::diagonal);
  // (hole, electron) order: (up, up), (up, down), (down, up), (down, down)
  check_vector(d[0].vector, {cd(r2), 0.0, 0.0});
  check_vector(d[1].vector, {0.0, cd(0.0, -r2), 0.0});
  check_vector(d[2].vector, {0.0, cd(0.0, r2), 0.0});
  check_vector(d[3].vector, {cd(-r2), 0.0, 0.0});
  CHECK(d[0].hole == Spin::up);
  CHECK(d[1].electron == Spin::down);
  for (const auto& e : d) CHECK(e.strength() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(intensity(d[0], {1.0, 0.0, 0.0}) == doctest::Approx(0.5));
  CHECK(intensity(d[0], {0.0, 1.0, 0.0}) == 0.0);
  CHECK(intensity(d[1], {0.0, 1.0, 0.0}) == doctest::Approx(0.5));
}

TEST_CASE("dipole elements, shear strain") {
  const auto d = dipole_elements(StrainCase::shear);
  const cd a = 0.5 * cd(1.0, -1.0) * r2;  // (mu0/2)(1 - i)/sqrt2
  const cd b = 0.5 * cd(1.0, 1.0) * r2;
  check_vector(d[0].vector, {a, -a, 0.0});
  check_vector(d[1].vector, {-b, -b, 0.0});
  check_vector(d[2].vector, {b, b, 0.0});
  check_vector(d[3].vector, {-a, a, 0.0});
  const double s = r2;
  CHECK(intensity(d[0], {s, -s, 0.0}) == doctest::Approx(0.5));
  CHECK(intensity(d[0], {s, s, 0.0}) < 1e-30);
  CHECK(intensity(d[1], {s, s, 0.0}) == doctest::Approx(0.5));
}

TEST_CASE("strain case labels") {
  CHECK(parse_strain_case("uxx_minus_uyy") == StrainCase::diagonal);
  CHECK(parse_strain_case("uxy") == StrainCase::shear);
  CHECK_THROWS_AS(parse_strain_case("uzz"), ValidationError);
}

TEST_CASE("transition table") {
  const PhysicalConstants c;
  const auto t = transition_table(1.5195, -0.43, -0.15, 7.0, c);
  const auto& l = t.transitions;
  for (double e0 : {0.0, 1.5195, 1.0 / 3.0}) {
    for (double b : {0.0, 0.3, 4.77, 7.0, 11.1}) {
      const auto u = transition_table(e0, -0.43, -0.15, b, c).transitions;
      CHECK(u[0].energy + u[3].energy == u[1].energy + u[2].energy);
    }
  }
  CHECK(l[0].polarization == Polarization::x);
  CHECK(l[3].polarization == Polarization::x);
  CHECK(l[1].polarization == Polarization::y);
  CHECK(l[2].polarization == Polarization::y);
  CHECK(l[0].energy > l[1].energy);
  CHECK(l[1].energy > l[2].energy);
  CHECK(l[2].energy > l[3].energy);
  CHECK(t.hole_splitting == doctest::Approx(6.0778e-5).epsilon(1e-4));
  CHECK(t.electron_splitting == doctest::Approx(1.7423e-4).epsilon(1e-4));
  CHECK(energy_to_ghz(t.hole_splitting, c) == doctest::Approx(14.696).epsilon(1e-4));
  CHECK(energy_to_ghz(t.electron_splitting, c) == doctest::Approx(42.13).epsilon(1e-3));
  CHECK((l[0].energy - l[1].energy) == doctest::Approx(t.hole_splitting));
  CHECK_THROWS_AS(transition_table(1.5, -0.43, -0.15, -1.0), ValidationError);
}

TEST_CASE("g_hh sign from outer-line polarisation") {
  CHECK(infer_g_hh_sign("x", -1) == -1);
  CHECK(infer_g_hh_sign("y", -1) == 1);
  CHECK(infer_g_hh_sign("x", 1) == 1);
  CHECK_THROWS_AS(infer_g_hh_sign("z", -1), ValidationError);
  CHECK_THROWS_AS(infer_g_hh_sign("x", 0), ValidationError);

  // Brute-force: x-polarised lines pair equal spin labels; the lines with
  // the largest |energy| offset are x-polarised exactly when g_e g_hh > 0.
  for (double ge : {-0.43, 0.43}) {
    for (double gh : {-0.15, 0.15}) {
      const double same = std::abs(ge + gh), opposite = std::abs(ge - gh);
      const bool outer_x = same > opposite;
      CHECK(infer_g_hh_sign(outer_x ? "x" : "y", ge > 0 ? 1 : -1) == (gh > 0 ? 1 : -1));
    }
  }
}
