#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cable {

/// How the point-support term enters the bilinear form: beta_k u(x_k) v(x_k)
/// (DiracConsistent) or L * beta_k u(x_k) v(x_k) (PaperFactorL).
enum class DiracConvention { DiracConsistent, PaperFactorL };

std::string_view to_string(DiracConvention c);
DiracConvention parse_convention(std::string_view text);

struct SupportSpec {
  double position_xk = 0.0;  // m
  double stiffness_K = 0.0;  // N/m
  double beta_k = 0.0;       // K / rho
  double sigma_k = 0.0;      // K / T
};

/// Position and stiffness of a support before the cable parameters are known.
struct SupportPlacement {
  double position = 0.0;
  double stiffness = 0.0;
};

double derive_wave_speed(double tension, double density);
double derive_sigma(double stiffness, double tension);

/// Physical string: span, tension, density and the elastic point supports.
/// Immutable once built; every constructor path validates the invariants.
class CableConfig {
 public:
  static CableConfig from_tension(double length, double tension, double density,
                                  std::vector<SupportPlacement> supports,
                                  DiracConvention convention = DiracConvention::DiracConsistent);

  /// Convenience for reproducing experiments quoted as (a, sigma): T = rho a^2, K = sigma T.
  static CableConfig from_wave_speed(double length, double wave_speed,
                                     std::span<const std::pair<double, double>> position_sigma,
                                     double density = 1.0,
                                     DiracConvention convention = DiracConvention::DiracConsistent);

  double length_L() const { return length_; }
  double tension_T() const { return tension_; }
  double density_rho() const { return density_; }
  double wave_speed_a() const { return wave_speed_; }
  const std::vector<SupportSpec>& supports() const { return supports_; }
  DiracConvention dirac_convention() const { return convention_; }

  /// 1 or L, the factor multiplying beta_k in the point term.
  double point_factor() const;

  std::vector<SupportPlacement> placements() const;
  CableConfig with_tension(double tension) const;
  CableConfig with_convention(DiracConvention convention) const;
  CableConfig without_supports() const;

 private:
  CableConfig() = default;

  double length_ = 0.0;
  double tension_ = 0.0;
  double density_ = 0.0;
  double wave_speed_ = 0.0;
  std::vector<SupportSpec> supports_;
  DiracConvention convention_ = DiracConvention::DiracConsistent;
};

using Profile = std::function<double(double)>;

/// Initial displacement and velocity. phi_x is optional; see displacement_slope().
struct InitialData {
  Profile phi;
  Profile psi;
  std::optional<Profile> phi_x;
  std::string label;
};

/// Builds InitialData and checks phi, psi vanish at both ends within 1e-10.
InitialData make_initial_data(Profile phi, Profile psi, std::optional<Profile> phi_x,
                              double length, std::string label = {});

InitialData zero_initial_data(double length);

/// phi'(x): analytic when provided, else a central difference with the given step.
double displacement_slope(const InitialData& init, double x, double step);

/// A profile (and its analytic slope) from a catalog entry:
///   "zero", "sine_mode:k[,amplitude]", "bump:center,width[,amplitude]".
struct CatalogProfile {
  Profile value;
  Profile slope;
};
CatalogProfile catalog_profile(std::string_view entry, double length);

/// Piecewise-linear profile through samples taken uniformly on [0, L].
CatalogProfile tabulated_profile(std::vector<double> samples, double length);

/// Uniform space-time sampling. horizon is the final time, not the tension.
struct SamplingGrid {
  int nx = 3;
  int nt = 2;
  double horizon = 1.0;

  void validate(double length) const;
  double dx(double length) const { return length / (nx - 1); }
  double dt() const { return horizon / (nt - 1); }
  double x(int i, double length) const;
  double t(int j) const;
};

struct SupportCheck {
  double position = 0.0;
  double phi_value = 0.0;
  bool phi_vanishes = true;
};

struct ValidationReport {
  std::vector<SupportCheck> supports;
  /// phi(x_k) != 0 somewhere: no global C^2 solution, at most piecewise C^2.
  bool piecewise_smooth_only = false;
};

ValidationReport validate_initial_data(const CableConfig& cfg, const InitialData& init);

}  // namespace cable
