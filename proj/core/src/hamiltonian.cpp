#include "holespin/hamiltonian.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace holespin {

namespace {

constexpr std::array<double, 4> kProjections = {1.5, 0.5, -0.5, -1.5};

// F+ in the |+3/2>..|-3/2> basis.
Matrix4c raising() {
  Matrix4c fp = Matrix4c::Zero();
  for (int col = 1; col < 4; ++col) {
    const double m = kProjections[col];
    fp(col - 1, col) = std::sqrt(1.5 * 2.5 - m * (m + 1.0));
  }
  return fp;
}

}  // namespace

double strain_from_shift(double delta_e_ev, const MaterialParams& m) {
  const double coefficient = 2.0 * (m.a_c - m.a_v) * (1.0 - m.c_ratio);
  if (coefficient == 0.0)
    throw ValidationError("strain_from_shift: degenerate coefficient (a_c == a_v or C12/C11 == 1)");
  return delta_e_ev / coefficient;
}

double hh_lh_splitting(double u_xx, const MaterialParams& m) {
  return 2.0 * m.b * (1.0 + 2.0 * m.c_ratio) * u_xx;
}

double delta1_from_strain(double u_xx, double u_yy, double b_prime) { return -b_prime * (u_xx - u_yy); }

namespace spin32 {

Matrix4c fx() {
  const Matrix4c fp = raising();
  return 0.5 * (fp + fp.adjoint());
}

Matrix4c fy() {
  const Matrix4c fp = raising();
  return std::complex<double>(0.0, -0.5) * (fp - fp.adjoint());
}

Matrix4c fz() {
  Matrix4c z = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i) z(i, i) = kProjections[i];
  return z;
}

}  // namespace spin32

Matrix4c build_hamiltonian(const HoleLevelStructure& h, const PhysicalConstants& c) {
  const Matrix4c fx = spin32::fx();
  const Matrix4c fy = spin32::fy();
  const Matrix4c fz = spin32::fz();
  Matrix4c hm = -0.5 * h.delta0 * (fz * fz) + (h.g0 * c.mu_b_ev * h.field) * fx +
                0.5 * h.delta1 * (fx * fx - fy * fy);
  // Symmetrise away roundoff so the result is Hermitian bit for bit.
  return 0.5 * (hm + hm.adjoint());
}

double SpinorState::heavy_weight() const { return std::norm(amplitudes(0)) + std::norm(amplitudes(3)); }

HeavyHoleDoublet heavy_hole_doublet(const Matrix4c& hamiltonian) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(hamiltonian);
  if (solver.info() != Eigen::Success) throw NumericalError("heavy_hole_doublet: eigensolver failed");

  std::array<SpinorState, 4> states;
  for (int k = 0; k < 4; ++k) {
    states[k].amplitudes = solver.eigenvectors().col(k);
    states[k].energy = solver.eigenvalues()(k);
  }
  std::array<int, 4> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return states[a].heavy_weight() > states[b].heavy_weight(); });

  std::array<SpinorState, 2> heavy = {states[order[0]], states[order[1]]};
  for (auto& s : heavy) {
    if (s.heavy_weight() < kHeavyWeightThreshold)
      throw RegimeError(fmt::format("heavy_hole_doublet: |+-3/2> weight {:.3f} below {}; heavy/light character "
                                    "is ambiguous",
                                    s.heavy_weight(), kHeavyWeightThreshold));
    // Fix the global phase: |+3/2> amplitude real and nonnegative. If it
    // vanishes, use |-3/2> instead.
    const int ref = std::abs(s.amplitudes(0)) > 1e-300 ? 0 : 3;
    const std::complex<double> phase = s.amplitudes(ref) / std::abs(s.amplitudes(ref));
    s.amplitudes /= phase;
    s.amplitudes /= s.amplitudes.norm();
  }
  std::sort(heavy.begin(), heavy.end(), [](const SpinorState& a, const SpinorState& b) { return a.energy < b.energy; });

  // Parity of the |+3/2>, |-3/2> pair decides which state is "up".
  auto parity = [](const SpinorState& s) { return std::real(s.amplitudes(3) * std::conj(s.amplitudes(0))); };
  HeavyHoleDoublet out{heavy[0], heavy[1]};
  if (parity(heavy[0]) < parity(heavy[1])) std::swap(out.up, out.down);
  return out;
}

HeavyHoleDoublet heavy_hole_doublet(const HoleLevelStructure& h, const PhysicalConstants& c) {
  if (!(h.delta0 > 0.0)) throw RegimeError("heavy_hole_doublet: delta0 must be positive");
  if (h.delta0 < 4.0 * std::abs(h.delta1))
    throw RegimeError(fmt::format("heavy_hole_doublet: delta0 = {} eV < 4 |delta1| = {} eV", h.delta0,
                                  4.0 * std::abs(h.delta1)));
  return heavy_hole_doublet(build_hamiltonian(h, c));
}

double g_perp_perturbative(double delta0, double delta1, double g0) {
  if (delta0 == 0.0) throw ValidationError("g_perp_perturbative: delta0 must be nonzero");
  return -3.0 * delta1 * g0 / delta0;
}

}  // namespace holespin
