#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cable/diagnostics.hpp"
#include "cable/model.hpp"

namespace cable {

/// A support as written in a run file: stiffness_K directly, or sigma_k = K / T.
struct SupportInput {
  double position_xk = 0.0;
  std::optional<double> stiffness_K;
  std::optional<double> sigma_k;
};

struct SolverSettings {
  std::string name = "galerkin-exact";  // galerkin-exact | galerkin-leapfrog | fd-coupled
  int m = 256;
  int substeps = 0;  // 0: automatic
  double target_cfl = 0.9;
};

/// Everything one CLI run needs. Keys mirror the library field names:
///
///   cable:   {length_L, tension_T | wave_speed_a, density_rho, dirac_convention,
///             supports: [{position_xk, stiffness_K | sigma_k}]}
///   grid:    {nx, nt, horizon}
///   initial_data: {phi, psi, phi_samples, psi_samples}
///   solver:  {name, m, substeps, target_cfl}
///   output:  {slice_times, probes}
///   diagnostics: {weights: {pde, ic, bc, cc}, counts: {...}, series_terms}
///   tension: {measured, mode_indices, bracket: [lo, hi]}
struct RunConfig {
  double length_L = 0.0;
  std::optional<double> tension_T;
  std::optional<double> wave_speed_a;
  double density_rho = 1.0;
  DiracConvention convention = DiracConvention::DiracConsistent;
  std::vector<SupportInput> supports;

  SamplingGrid grid{1401, 1001, 10.0};

  std::string phi = "zero";
  std::string psi = "zero";
  std::vector<double> phi_samples;  // overrides phi when non-empty
  std::vector<double> psi_samples;

  SolverSettings solver;
  std::vector<double> slice_times;
  std::vector<double> probes;

  LossWeights weights;
  CollocationCounts counts;
  int series_terms = 200;

  std::string measured;  // frequency CSV, relative to the config file
  std::vector<int> mode_indices;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;

  std::filesystem::path base_dir;  // where relative paths resolve; not hashed

  double tension() const;
  CableConfig cable() const;
  InitialData initial_data() const;
  /// Fixed key order, 17-digit numbers: equal configs give equal text.
  std::string canonical_yaml() const;
  /// SHA-256 of canonical_yaml(), lowercase hex.
  std::string digest() const;
};

RunConfig parse_config(std::string_view text, std::filesystem::path base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Built-in runs: paper-2-4-sigma1, paper-2-4-sigma0.005, paper-2-4-unsupported, zero-data.
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

std::string sha256_hex(std::string_view data);

}  // namespace cable
