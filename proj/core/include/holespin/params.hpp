#pragma once

#include <map>
#include <string>
#include <string_view>

namespace holespin {

/// CODATA 2018 values. Energies in this library are carried in eV; SI
/// conversions happen only inside rate formulas.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;            ///< J s
  double mu_b_ev = 5.7883818060e-5;         ///< eV/T
  double k_b_ev = 8.617333262e-5;           ///< eV/K
  double joule_per_ev = 1.602176634e-19;    ///< J/eV
  double lattice_constant = 5.653e-10;      ///< GaAs, m

  double mu_b_joule() const { return mu_b_ev * joule_per_ev; }
  double hbar_ev() const { return hbar / joule_per_ev; }
  /// Volume per nucleus of one sublattice, a^3/4.
  double v0() const { return lattice_constant * lattice_constant * lattice_constant / 4.0; }
};

/// GaAs deformation potentials, elastic ratio, acoustic phonon data and
/// in-plane g-factors.
struct MaterialParams {
  double a_c = -7.17;       ///< conduction deformation potential, eV
  double a_v = 1.16;        ///< valence deformation potential, eV
  double c_ratio = 0.4526;  ///< C12/C11
  double b = -1.7;          ///< valence shear deformation potential, eV
  double b_prime = -1.7;    ///< acceptor-renormalised b', eV (no value known; defaults to b)
  double rho = 5.32e3;      ///< kg/m^3
  double s_l = 4.73e3;      ///< LA sound speed, m/s
  double s_t = 3.35e3;      ///< TA sound speed, m/s
  double g_hh_perp = -0.15;
  double g_e_perp = -0.43;
};

/// Dipole-dipole hyperfine inputs for the acceptor-bound hole.
///
/// The radial integrals are stored in units of a_B^-3; bohr_radius is a
/// calibration input; the default reproduces a 58 ns mixing-free T2*.
struct HyperfineParams {
  double c_as = 4.4e-6;          ///< eV
  double c_ga = 3.0e-6;          ///< eV
  double nuclear_spin = 1.5;
  double bohr_radius = 5.0903640533e-9;  ///< m
  double int_f2g2 = 0.5;         ///< a_B^3 * int dr r^2 f^2 g^2
  double int_f4 = 7.9;           ///< a_B^3 * int dr r^2 f^4
  double mixing_ratio = 0.05;    ///< Delta1 / Delta0
};

struct ParameterSet {
  PhysicalConstants constants;
  MaterialParams material;
  HyperfineParams hyperfine;
};

/// Flat key -> scalar text mapping as read from a config file.
using ConfigMap = std::map<std::string, std::string, std::less<>>;

/// Parses a flat YAML mapping of lower_snake_case keys to scalars.
/// Throws ValidationError on malformed text or non-scalar values.
ConfigMap parse_config(std::string_view text);
ConfigMap read_config_file(const std::string& path);

/// True when `key` names a field of ParameterSet.
bool is_parameter_key(std::string_view key);

/// Builds a validated ParameterSet from the recognised keys of `config`;
/// missing keys take the GaAs defaults. Keys that are not parameters are
/// ignored here (the CLI consumes them as option defaults).
ParameterSet load_params(const ConfigMap& config);
ParameterSet load_params(std::string_view config_text);

/// Throws ParameterError naming the first offending key.
void validate(const ParameterSet& params);

/// Emits every parameter at round-trip precision, in the format read by
/// parse_config.
std::string serialize_params(const ParameterSet& params);

}  // namespace holespin
