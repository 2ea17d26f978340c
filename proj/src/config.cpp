#include "cable/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cable/errors.hpp"

namespace cable {

namespace {

int line_of(const YAML::Node& n) {
  const auto mark = n.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + key + "' has the wrong type", line_of(n));
  }
}

template <typename T>
std::vector<T> sequence(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) throw ConfigError("'" + key + "' must be a list", line_of(n));
  std::vector<T> out;
  for (const auto& item : n) out.push_back(scalar<T>(item, key));
  return out;
}

void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
                const std::string& section) {
  if (!map.IsMap()) throw ConfigError("'" + section + "' must be a mapping", line_of(map));
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + section, line_of(kv.first));
    }
  }
}

void parse_cable(const YAML::Node& n, RunConfig& rc) {
  check_keys(n, {"length_L", "tension_T", "wave_speed_a", "density_rho", "dirac_convention",
                 "supports"},
             "cable");
  if (!n["length_L"]) throw ConfigError("cable.length_L is required", line_of(n));
  rc.length_L = scalar<double>(n["length_L"], "length_L");
  if (n["tension_T"]) rc.tension_T = scalar<double>(n["tension_T"], "tension_T");
  if (n["wave_speed_a"]) rc.wave_speed_a = scalar<double>(n["wave_speed_a"], "wave_speed_a");
  if (rc.tension_T && rc.wave_speed_a) {
    throw ConfigError("give cable.tension_T or cable.wave_speed_a, not both", line_of(n));
  }
  if (!rc.tension_T && !rc.wave_speed_a) {
    throw ConfigError("cable needs tension_T or wave_speed_a", line_of(n));
  }
  if (n["density_rho"]) rc.density_rho = scalar<double>(n["density_rho"], "density_rho");
  if (n["dirac_convention"]) {
    try {
      rc.convention = parse_convention(scalar<std::string>(n["dirac_convention"], "dirac_convention"));
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), line_of(n["dirac_convention"]));
    }
  }
  if (const auto s = n["supports"]) {
    if (!s.IsSequence()) throw ConfigError("'supports' must be a list", line_of(s));
    for (const auto& item : s) {
      check_keys(item, {"position_xk", "stiffness_K", "sigma_k"}, "supports");
      if (!item["position_xk"]) throw ConfigError("support needs position_xk", line_of(item));
      SupportInput in;
      in.position_xk = scalar<double>(item["position_xk"], "position_xk");
      if (item["stiffness_K"]) in.stiffness_K = scalar<double>(item["stiffness_K"], "stiffness_K");
      if (item["sigma_k"]) in.sigma_k = scalar<double>(item["sigma_k"], "sigma_k");
      if (in.stiffness_K.has_value() == in.sigma_k.has_value()) {
        throw ConfigError("support needs exactly one of stiffness_K, sigma_k", line_of(item));
      }
      rc.supports.push_back(in);
    }
  }
}

void parse_document(const YAML::Node& root, RunConfig& rc) {
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping", line_of(root));
  check_keys(root, {"cable", "grid", "initial_data", "solver", "output", "diagnostics", "tension"},
             "configuration");
  if (!root["cable"]) throw ConfigError("'cable' section is required", 1);
  parse_cable(root["cable"], rc);

  if (const auto g = root["grid"]) {
    check_keys(g, {"nx", "nt", "horizon"}, "grid");
    if (g["nx"]) rc.grid.nx = scalar<int>(g["nx"], "nx");
    if (g["nt"]) rc.grid.nt = scalar<int>(g["nt"], "nt");
    if (g["horizon"]) rc.grid.horizon = scalar<double>(g["horizon"], "horizon");
  }
  if (const auto d = root["initial_data"]) {
    check_keys(d, {"phi", "psi", "phi_samples", "psi_samples"}, "initial_data");
    if (d["phi"]) rc.phi = scalar<std::string>(d["phi"], "phi");
    if (d["psi"]) rc.psi = scalar<std::string>(d["psi"], "psi");
    if (d["phi_samples"]) rc.phi_samples = sequence<double>(d["phi_samples"], "phi_samples");
    if (d["psi_samples"]) rc.psi_samples = sequence<double>(d["psi_samples"], "psi_samples");
  }
  if (const auto s = root["solver"]) {
    check_keys(s, {"name", "m", "substeps", "target_cfl"}, "solver");
    if (s["name"]) rc.solver.name = scalar<std::string>(s["name"], "name");
    if (s["m"]) rc.solver.m = scalar<int>(s["m"], "m");
    if (s["substeps"]) rc.solver.substeps = scalar<int>(s["substeps"], "substeps");
    if (s["target_cfl"]) rc.solver.target_cfl = scalar<double>(s["target_cfl"], "target_cfl");
    const auto& nm = rc.solver.name;
    if (nm != "galerkin-exact" && nm != "galerkin-leapfrog" && nm != "fd-coupled") {
      throw ConfigError("unknown solver '" + nm + "'", line_of(s["name"]));
    }
  }
  if (const auto o = root["output"]) {
    check_keys(o, {"slice_times", "probes"}, "output");
    if (o["slice_times"]) rc.slice_times = sequence<double>(o["slice_times"], "slice_times");
    if (o["probes"]) rc.probes = sequence<double>(o["probes"], "probes");
  }
  if (const auto d = root["diagnostics"]) {
    check_keys(d, {"weights", "counts", "series_terms"}, "diagnostics");
    if (const auto w = d["weights"]) {
      check_keys(w, {"pde", "ic", "bc", "cc"}, "weights");
      if (w["pde"]) rc.weights.pde = scalar<double>(w["pde"], "pde");
      if (w["ic"]) rc.weights.ic = scalar<double>(w["ic"], "ic");
      if (w["bc"]) rc.weights.bc = scalar<double>(w["bc"], "bc");
      if (w["cc"]) rc.weights.cc = scalar<double>(w["cc"], "cc");
    }
    if (const auto c = d["counts"]) {
      check_keys(c, {"pde_left", "pde_right", "ic_left", "ic_right", "bc", "cc_continuity",
                     "cc_jump"},
                 "counts");
      auto& k = rc.counts;
      for (auto [name, slot] : {std::pair{"pde_left", &k.pde_left}, {"pde_right", &k.pde_right},
                                {"ic_left", &k.ic_left}, {"ic_right", &k.ic_right},
                                {"bc", &k.bc}, {"cc_continuity", &k.cc_continuity},
                                {"cc_jump", &k.cc_jump}}) {
        if (c[name]) *slot = scalar<int>(c[name], name);
      }
    }
    if (d["series_terms"]) rc.series_terms = scalar<int>(d["series_terms"], "series_terms");
  }
  if (const auto t = root["tension"]) {
    check_keys(t, {"measured", "mode_indices", "bracket"}, "tension");
    if (t["measured"]) rc.measured = scalar<std::string>(t["measured"], "measured");
    if (t["mode_indices"]) rc.mode_indices = sequence<int>(t["mode_indices"], "mode_indices");
    if (t["bracket"]) {
      const auto b = sequence<double>(t["bracket"], "bracket");
      if (b.size() != 2) throw ConfigError("bracket must be [lo, hi]", line_of(t["bracket"]));
      rc.bracket_lo = b[0];
      rc.bracket_hi = b[1];
    }
  }
}

// Semantic checks that need the whole document; errors point at the section.
void validate(const RunConfig& rc, const YAML::Node& root) {
  auto at = [&](const char* section) {
    return root[section] ? line_of(root[section]) : line_of(root);
  };
  try {
    (void)rc.cable();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("cable: ") + e.what(), at("cable"));
  }
  try {
    rc.grid.validate(rc.length_L);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what(), at("grid"));
  }
  try {
    (void)rc.initial_data();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("initial_data: ") + e.what(), at("initial_data"));
  }
  if (rc.solver.m < 1) throw ConfigError("solver.m must be >= 1", at("solver"));
  if (rc.solver.substeps < 0) throw ConfigError("solver.substeps must be >= 0", at("solver"));
  if (rc.series_terms < 1) throw ConfigError("series_terms must be >= 1", at("diagnostics"));
  for (double x : rc.probes) {
    if (!(x >= 0.0 && x <= rc.length_L)) throw ConfigError("probe outside [0, L]", at("output"));
  }
}

void emit_double(YAML::Emitter& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

double RunConfig::tension() const {
  if (tension_T) return *tension_T;
  if (wave_speed_a) return density_rho * *wave_speed_a * *wave_speed_a;
  throw DomainError("no tension or wave speed");
}

CableConfig RunConfig::cable() const {
  const double T = tension();
  std::vector<SupportPlacement> placed;
  for (const auto& s : supports) {
    placed.push_back({s.position_xk, s.stiffness_K ? *s.stiffness_K : *s.sigma_k * T});
  }
  return CableConfig::from_tension(length_L, T, density_rho, std::move(placed), convention);
}

InitialData RunConfig::initial_data() const {
  auto profile = [&](const std::string& entry, const std::vector<double>& samples) {
    return samples.empty() ? catalog_profile(entry, length_L) : tabulated_profile(samples, length_L);
  };
  auto p = profile(phi, phi_samples);
  auto q = profile(psi, psi_samples);
  const std::string label = (phi_samples.empty() ? phi : "tabulated") + " / " +
                            (psi_samples.empty() ? psi : "tabulated");
  return make_initial_data(p.value, q.value, p.slope, length_L, label);
}

std::string RunConfig::canonical_yaml() const {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "cable" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "length_L" << YAML::Value;
  emit_double(out, length_L);
  if (tension_T) {
    out << YAML::Key << "tension_T" << YAML::Value;
    emit_double(out, *tension_T);
  }
  if (wave_speed_a) {
    out << YAML::Key << "wave_speed_a" << YAML::Value;
    emit_double(out, *wave_speed_a);
  }
  out << YAML::Key << "density_rho" << YAML::Value;
  emit_double(out, density_rho);
  out << YAML::Key << "dirac_convention" << YAML::Value << std::string(to_string(convention));
  out << YAML::Key << "supports" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : supports) {
    out << YAML::BeginMap << YAML::Key << "position_xk" << YAML::Value;
    emit_double(out, s.position_xk);
    if (s.stiffness_K) {
      out << YAML::Key << "stiffness_K" << YAML::Value;
      emit_double(out, *s.stiffness_K);
    }
    if (s.sigma_k) {
      out << YAML::Key << "sigma_k" << YAML::Value;
      emit_double(out, *s.sigma_k);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "nx" << YAML::Value << grid.nx;
  out << YAML::Key << "nt" << YAML::Value << grid.nt;
  out << YAML::Key << "horizon" << YAML::Value;
  emit_double(out, grid.horizon);
  out << YAML::EndMap;

  auto doubles = [&](const char* key, const std::vector<double>& v) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) emit_double(out, x);
    out << YAML::EndSeq;
  };
  out << YAML::Key << "initial_data" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "phi" << YAML::Value << phi;
  out << YAML::Key << "psi" << YAML::Value << psi;
  doubles("phi_samples", phi_samples);
  doubles("psi_samples", psi_samples);
  out << YAML::EndMap;

  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << solver.name;
  out << YAML::Key << "m" << YAML::Value << solver.m;
  out << YAML::Key << "substeps" << YAML::Value << solver.substeps;
  out << YAML::Key << "target_cfl" << YAML::Value;
  emit_double(out, solver.target_cfl);
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  doubles("slice_times", slice_times);
  doubles("probes", probes);
  out << YAML::EndMap;

  out << YAML::Key << "diagnostics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "weights" << YAML::Value << YAML::BeginMap;
  for (auto [k, v] : {std::pair{"pde", weights.pde}, {"ic", weights.ic}, {"bc", weights.bc},
                      {"cc", weights.cc}}) {
    out << YAML::Key << k << YAML::Value;
    emit_double(out, v);
  }
  out << YAML::EndMap;
  out << YAML::Key << "counts" << YAML::Value << YAML::BeginMap;
  for (auto [k, v] : {std::pair{"pde_left", counts.pde_left}, {"pde_right", counts.pde_right},
                      {"ic_left", counts.ic_left}, {"ic_right", counts.ic_right},
                      {"bc", counts.bc}, {"cc_continuity", counts.cc_continuity},
                      {"cc_jump", counts.cc_jump}}) {
    out << YAML::Key << k << YAML::Value << v;
  }
  out << YAML::EndMap;
  out << YAML::Key << "series_terms" << YAML::Value << series_terms;
  out << YAML::EndMap;

  out << YAML::Key << "tension" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "measured" << YAML::Value << measured;
  out << YAML::Key << "mode_indices" << YAML::Value << YAML::Flow << mode_indices;
  out << YAML::Key << "bracket" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  emit_double(out, bracket_lo);
  emit_double(out, bracket_hi);
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string RunConfig::digest() const { return sha256_hex(canonical_yaml()); }

RunConfig parse_config(std::string_view text, std::filesystem::path base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("configuration is empty", 1);
  RunConfig rc;
  rc.base_dir = std::move(base_dir);
  parse_document(root, rc);
  validate(rc, root);
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

RunConfig preset(std::string_view name) {
  RunConfig rc;
  rc.length_L = 70.0;
  rc.wave_speed_a = 67.344;
  rc.density_rho = 1.0;
  rc.grid = {1401, 1001, 10.0};
  rc.phi = "sine_mode:2,0.1";
  rc.psi = "zero";
  rc.solver.m = 256;
  rc.slice_times = {0.0, 2.5, 5.0, 7.5, 10.0};
  rc.probes = {17.5, 40.0};
  if (name == "paper-2-4-sigma1") {
    rc.supports = {{17.5, std::nullopt, 1.0}};
  } else if (name == "paper-2-4-sigma0.005") {
    rc.supports = {{17.5, std::nullopt, 0.005}};
  } else if (name == "paper-2-4-unsupported") {
    rc.supports.clear();
  } else if (name == "zero-data") {
    rc.supports = {{17.5, std::nullopt, 1.0}};
    rc.phi = "zero";
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")", 0);
  }
  return rc;
}

std::vector<std::string> preset_names() {
  return {"paper-2-4-sigma1", "paper-2-4-sigma0.005", "paper-2-4-unsupported", "zero-data"};
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw InternalError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace cable
