#include "holespin/params.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace holespin {

namespace {

enum class Rule { any, positive, nonzero, open_unit, nonnegative };

struct Field {
  std::string_view key;
  double& (*ref)(ParameterSet&);
  Rule rule;
};

#define HOLESPIN_FIELD(name, group, member, rule) \
  Field { name, [](ParameterSet& p) -> double& { return p.group.member; }, rule }

const std::array kFields = {
    HOLESPIN_FIELD("hbar", constants, hbar, Rule::positive),
    HOLESPIN_FIELD("mu_b", constants, mu_b_ev, Rule::positive),
    HOLESPIN_FIELD("k_b", constants, k_b_ev, Rule::positive),
    HOLESPIN_FIELD("joule_per_ev", constants, joule_per_ev, Rule::positive),
    HOLESPIN_FIELD("lattice_constant", constants, lattice_constant, Rule::positive),
    HOLESPIN_FIELD("a_c", material, a_c, Rule::any),
    HOLESPIN_FIELD("a_v", material, a_v, Rule::any),
    HOLESPIN_FIELD("c_ratio", material, c_ratio, Rule::open_unit),
    HOLESPIN_FIELD("b", material, b, Rule::any),
    HOLESPIN_FIELD("b_prime", material, b_prime, Rule::any),
    HOLESPIN_FIELD("rho", material, rho, Rule::positive),
    HOLESPIN_FIELD("s_l", material, s_l, Rule::positive),
    HOLESPIN_FIELD("s_t", material, s_t, Rule::positive),
    HOLESPIN_FIELD("g_hh_perp", material, g_hh_perp, Rule::any),
    HOLESPIN_FIELD("g_e_perp", material, g_e_perp, Rule::any),
    HOLESPIN_FIELD("c_as", hyperfine, c_as, Rule::positive),
    HOLESPIN_FIELD("c_ga", hyperfine, c_ga, Rule::positive),
    HOLESPIN_FIELD("nuclear_spin", hyperfine, nuclear_spin, Rule::positive),
    HOLESPIN_FIELD("bohr_radius", hyperfine, bohr_radius, Rule::positive),
    HOLESPIN_FIELD("int_f2g2", hyperfine, int_f2g2, Rule::positive),
    HOLESPIN_FIELD("int_f4", hyperfine, int_f4, Rule::positive),
    HOLESPIN_FIELD("mixing_ratio", hyperfine, mixing_ratio, Rule::any),
};

#undef HOLESPIN_FIELD

void check_rule(std::string_view key, double v, Rule rule) {
  if (!std::isfinite(v)) throw ParameterError(std::string(key), "value is not finite");
  switch (rule) {
    case Rule::any:
      break;
    case Rule::positive:
      if (!(v > 0.0)) throw ParameterError(std::string(key), fmt::format("must be > 0, got {}", v));
      break;
    case Rule::nonzero:
      if (v == 0.0) throw ParameterError(std::string(key), "must be nonzero");
      break;
    case Rule::open_unit:
      if (!(v > 0.0 && v < 1.0))
        throw ParameterError(std::string(key), fmt::format("must lie in (0, 1), got {}", v));
      break;
    case Rule::nonnegative:
      if (v < 0.0) throw ParameterError(std::string(key), fmt::format("must be >= 0, got {}", v));
      break;
  }
}

double parse_double(std::string_view key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ParameterError(std::string(key), fmt::format("'{}' is not a number", text));
  return v;
}

}  // namespace

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ValidationError(fmt::format("config parse error: {}", e.what()));
  }
  if (!root || root.IsNull()) return out;
  if (!root.IsMap()) throw ValidationError("config parse error: top level must be a key: value mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!kv.second.IsScalar())
      throw ValidationError(fmt::format("config parse error: value of '{}' must be a scalar", key));
    if (out.contains(key)) throw ValidationError(fmt::format("config parse error: duplicate key '{}'", key));
    out.emplace(key, kv.second.Scalar());
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

bool is_parameter_key(std::string_view key) {
  for (const auto& f : kFields)
    if (f.key == key) return true;
  return false;
}

ParameterSet load_params(const ConfigMap& config) {
  ParameterSet p;
  for (const auto& f : kFields) {
    auto it = config.find(f.key);
    if (it != config.end()) f.ref(p) = parse_double(f.key, it->second);
  }
  validate(p);
  return p;
}

ParameterSet load_params(std::string_view config_text) { return load_params(parse_config(config_text)); }

void validate(const ParameterSet& params) {
  ParameterSet copy = params;
  for (const auto& f : kFields) check_rule(f.key, f.ref(copy), f.rule);
  if (params.hyperfine.nuclear_spin * 2.0 != std::round(params.hyperfine.nuclear_spin * 2.0))
    throw ParameterError("nuclear_spin", "must be a multiple of 1/2");
}

std::string serialize_params(const ParameterSet& params) {
  ParameterSet copy = params;
  std::string out;
  for (const auto& f : kFields) out += fmt::format("{}: {}\n", f.key, f.ref(copy));
  return out;
}

}  // namespace holespin
