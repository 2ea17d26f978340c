#include "cable/model.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <numbers>

#include "cable/errors.hpp"

namespace cable {

namespace {

constexpr double kBoundaryTolerance = 1e-10;

std::vector<double> parse_numbers(std::string_view text, std::string_view entry) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string token(text.substr(pos, comma - pos));
    token.erase(0, token.find_first_not_of(" \t"));
    token.erase(token.find_last_not_of(" \t") + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (token.empty() || used != token.size()) {
      throw DomainError("malformed number '" + token + "' in profile '" + std::string(entry) + "'");
    }
    out.push_back(value);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(DiracConvention c) {
  return c == DiracConvention::DiracConsistent ? "DiracConsistent" : "PaperFactorL";
}

DiracConvention parse_convention(std::string_view text) {
  if (text == "DiracConsistent" || text == "dirac") return DiracConvention::DiracConsistent;
  if (text == "PaperFactorL" || text == "paper-L") return DiracConvention::PaperFactorL;
  throw DomainError("unknown dirac convention '" + std::string(text) + "'");
}

double derive_wave_speed(double tension, double density) {
  if (!(tension > 0.0) || !(density > 0.0)) {
    throw DomainError("wave speed needs positive tension and density");
  }
  return std::sqrt(tension / density);
}

double derive_sigma(double stiffness, double tension) {
  if (!(tension > 0.0)) throw DomainError("sigma needs positive tension");
  if (!(stiffness >= 0.0)) throw DomainError("support stiffness must be nonnegative");
  return stiffness / tension;
}

CableConfig CableConfig::from_tension(double length, double tension, double density,
                                      std::vector<SupportPlacement> supports,
                                      DiracConvention convention) {
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("length must be positive");
  CableConfig cfg;
  cfg.length_ = length;
  cfg.tension_ = tension;
  cfg.density_ = density;
  cfg.wave_speed_ = derive_wave_speed(tension, density);
  cfg.convention_ = convention;

  double previous = 0.0;
  for (const auto& s : supports) {
    if (!(s.position > 0.0 && s.position < length)) {
      throw DomainError("support position " + std::to_string(s.position) + " not inside (0, L)");
    }
    if (!(s.position > previous)) {
      throw DomainError("support positions must be strictly increasing");
    }
    previous = s.position;
    SupportSpec spec;
    spec.position_xk = s.position;
    spec.stiffness_K = s.stiffness;
    spec.sigma_k = derive_sigma(s.stiffness, tension);
    spec.beta_k = s.stiffness / density;
    cfg.supports_.push_back(spec);
  }
  return cfg;
}

CableConfig CableConfig::from_wave_speed(double length, double wave_speed,
                                         std::span<const std::pair<double, double>> position_sigma,
                                         double density, DiracConvention convention) {
  if (!(wave_speed > 0.0)) throw DomainError("wave speed must be positive");
  const double tension = density * wave_speed * wave_speed;
  std::vector<SupportPlacement> placements;
  for (auto [x, sigma] : position_sigma) {
    if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
    placements.push_back({x, sigma * tension});
  }
  return from_tension(length, tension, density, std::move(placements), convention);
}

double CableConfig::point_factor() const {
  return convention_ == DiracConvention::PaperFactorL ? length_ : 1.0;
}

std::vector<SupportPlacement> CableConfig::placements() const {
  std::vector<SupportPlacement> out;
  for (const auto& s : supports_) out.push_back({s.position_xk, s.stiffness_K});
  return out;
}

CableConfig CableConfig::with_tension(double tension) const {
  return from_tension(length_, tension, density_, placements(), convention_);
}

CableConfig CableConfig::with_convention(DiracConvention convention) const {
  CableConfig copy = *this;
  copy.convention_ = convention;
  return copy;
}

CableConfig CableConfig::without_supports() const {
  return from_tension(length_, tension_, density_, {}, convention_);
}

InitialData make_initial_data(Profile phi, Profile psi, std::optional<Profile> phi_x,
                              double length, std::string label) {
  if (!phi || !psi) throw DomainError("initial data needs both phi and psi");
  for (double x : {0.0, length}) {
    if (std::abs(phi(x)) > kBoundaryTolerance || std::abs(psi(x)) > kBoundaryTolerance) {
      throw DomainError("initial data must vanish at the fixed ends (x = " + std::to_string(x) +
                        ")");
    }
  }
  return InitialData{std::move(phi), std::move(psi), std::move(phi_x), std::move(label)};
}

InitialData zero_initial_data(double length) {
  auto zero = [](double) { return 0.0; };
  return make_initial_data(zero, zero, Profile(zero), length, "zero");
}

double displacement_slope(const InitialData& init, double x, double step) {
  if (init.phi_x) return (*init.phi_x)(x);
  return (init.phi(x + step) - init.phi(x - step)) / (2.0 * step);
}

CatalogProfile catalog_profile(std::string_view entry, double length) {
  using std::numbers::pi;
  if (entry == "zero") {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }};
  }
  const auto colon = entry.find(':');
  const auto name = entry.substr(0, colon);
  if (colon == std::string_view::npos) {
    throw DomainError("unknown initial profile '" + std::string(entry) + "'");
  }
  const auto args = parse_numbers(entry.substr(colon + 1), entry);

  if (name == "sine_mode") {
    if (args.empty() || args.size() > 2) throw DomainError("sine_mode expects k[,amplitude]");
    const double k = args[0];
    if (k < 1.0 || std::floor(k) != k) throw DomainError("sine_mode index must be a positive integer");
    const double amp = args.size() == 2 ? args[1] : 1.0;
    const double wn = k * pi / length;
    return {[=](double x) { return amp * std::sin(wn * x); },
            [=](double x) { return amp * wn * std::cos(wn * x); }};
  }
  if (name == "bump") {
    if (args.size() < 2 || args.size() > 3) throw DomainError("bump expects center,width[,amplitude]");
    const double c = args[0];
    const double w = args[1];
    const double amp = args.size() == 3 ? args[2] : 1.0;
    if (!(w > 0.0) || c - w / 2 <= 0.0 || c + w / 2 >= length) {
      throw DomainError("bump must lie strictly inside (0, L)");
    }
    // cos^2 bump: C^1, compact support of width w.
    return {[=](double x) {
              const double s = (x - c) / w;
              if (std::abs(s) >= 0.5) return 0.0;
              const double cs = std::cos(pi * s);
              return amp * cs * cs;
            },
            [=](double x) {
              const double s = (x - c) / w;
              if (std::abs(s) >= 0.5) return 0.0;
              return -amp * (pi / w) * std::sin(2.0 * pi * s);
            }};
  }
  throw DomainError("unknown initial profile '" + std::string(entry) + "'");
}

CatalogProfile tabulated_profile(std::vector<double> samples, double length) {
  if (samples.size() < 2) throw DomainError("tabulated profile needs at least two samples");
  const auto n = samples.size();
  const double h = length / static_cast<double>(n - 1);
  auto table = std::make_shared<const std::vector<double>>(std::move(samples));
  auto cell = [=](double x) {
    const double s = std::clamp(x / h, 0.0, static_cast<double>(n - 1));
    const auto i = std::min(static_cast<std::size_t>(s), n - 2);
    return std::pair{i, s - static_cast<double>(i)};
  };
  return {[=](double x) {
            auto [i, f] = cell(x);
            return (*table)[i] * (1.0 - f) + (*table)[i + 1] * f;
          },
          [=](double x) {
            auto [i, f] = cell(x);
            return ((*table)[i + 1] - (*table)[i]) / h;
          }};
}

void SamplingGrid::validate(double length) const {
  if (nx < 3) throw DomainError("grid needs nx >= 3");
  if (nt < 2) throw DomainError("grid needs nt >= 2");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
  if (!(length > 0.0)) throw DomainError("length must be positive");
}

double SamplingGrid::x(int i, double length) const {
  if (i == nx - 1) return length;
  return length * static_cast<double>(i) / static_cast<double>(nx - 1);
}

double SamplingGrid::t(int j) const {
  if (j == nt - 1) return horizon;
  return horizon * static_cast<double>(j) / static_cast<double>(nt - 1);
}

ValidationReport validate_initial_data(const CableConfig& cfg, const InitialData& init) {
  ValidationReport report;
  for (const auto& s : cfg.supports()) {
    SupportCheck check;
    check.position = s.position_xk;
    check.phi_value = init.phi(s.position_xk);
    check.phi_vanishes = std::abs(check.phi_value) <= kBoundaryTolerance;
    report.piecewise_smooth_only |= !check.phi_vanishes;
    report.supports.push_back(check);
  }
  return report;
}

}  // namespace cable
