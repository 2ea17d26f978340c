#include "cable/tension.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "cable/errors.hpp"
#include "cable/galerkin.hpp"

namespace cable {

using std::numbers::pi;

namespace {

const SupportSpec& single_support(const CableConfig& cfg) {
  if (cfg.supports().size() != 1) {
    throw CapabilityError("characteristic equation needs exactly one support; " +
                          std::to_string(cfg.supports().size()) +
                          " given (use the Galerkin eigen-solve)");
  }
  return cfg.supports().front();
}

double bisect(const CableConfig& cfg, double lo, double hi, double f_lo) {
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = characteristic_value(mid, cfg);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0) == (f_lo < 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimum of |D| on [lo, hi].
double min_abs_D(const CableConfig& cfg, double lo, double hi) {
  constexpr double g = 0.6180339887498949;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = std::abs(characteristic_value(x1, cfg));
  double f2 = std::abs(characteristic_value(x2, cfg));
  while (hi - lo > 1e-13 * hi) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = std::abs(characteristic_value(x1, cfg));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = std::abs(characteristic_value(x2, cfg));
    }
  }
  return f1 < f2 ? x1 : x2;
}

}  // namespace

double characteristic_value(double k, const CableConfig& cfg) {
  const auto& s = single_support(cfg);
  if (!(k > 0.0)) throw DomainError("wavenumber must be positive");
  const double L = cfg.length_L();
  const double l = s.position_xk;
  const double sigma = cfg.point_factor() * s.sigma_k;
  return k * std::sin(k * L) + sigma * std::sin(k * l) * std::sin(k * (L - l));
}

RootScan characteristic_roots(const CableConfig& cfg, int count, double k_max) {
  const auto& s = single_support(cfg);
  if (count < 1) throw DomainError("root count must be >= 1");
  const double L = cfg.length_L();
  const double step = pi / (8.0 * L);
  if (!(k_max > step)) throw DomainError("k_max must exceed the scan step");
  const double scale = 1.0 + cfg.point_factor() * s.sigma_k;

  const auto n = static_cast<std::size_t>(std::floor(k_max / step));
  std::vector<double> k(n), D(n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = (i + 1) * step;
    D[i] = characteristic_value(k[i], cfg);
  }

  RootScan out;
  std::vector<double> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (D[i] == 0.0) {
      roots.push_back(k[i]);
      ++out.sign_changes;
      continue;
    }
    if (i + 1 < n && D[i + 1] != 0.0 && (D[i] < 0) != (D[i + 1] < 0)) {
      roots.push_back(bisect(cfg, k[i], k[i + 1], D[i]));
      ++out.sign_changes;
    }
  }
  // A dip of |D| between same-signed neighbours hides either a double root or
  // two simple roots inside one cell.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (D[i] == 0.0 || D[i - 1] == 0.0 || D[i + 1] == 0.0) continue;
    if ((D[i - 1] < 0) != (D[i] < 0) || (D[i] < 0) != (D[i + 1] < 0)) continue;
    if (!(std::abs(D[i]) < std::abs(D[i - 1]) && std::abs(D[i]) < std::abs(D[i + 1]))) continue;
    const double km = min_abs_D(cfg, k[i - 1], k[i + 1]);
    const double Dm = characteristic_value(km, cfg);
    if (Dm != 0.0 && (Dm < 0) != (D[i] < 0)) {
      roots.push_back(bisect(cfg, k[i - 1], km, D[i - 1]));
      roots.push_back(bisect(cfg, km, k[i + 1], Dm));
      out.sign_changes += 2;
    } else if (std::abs(Dm) <= 1e-9 * scale * km) {
      roots.push_back(km);
      roots.push_back(km);
      ++out.tangential;
    }
  }
  std::sort(roots.begin(), roots.end());

  out.wavenumbers = roots;
  out.spectrum.method = SpectrumMethod::CharacteristicRoot;
  const double a = cfg.wave_speed_a();
  const auto take = std::min<std::size_t>(roots.size(), static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < take; ++i) {
    out.spectrum.frequencies_hz.push_back(a * roots[i] / (2.0 * pi));
  }
  out.spectrum.resolution_hz =
      take ? 1e-12 * out.spectrum.frequencies_hz.back() : 1e-12 * a * k_max / (2.0 * pi);
  out.shortfall = std::max(0, count - static_cast<int>(roots.size()));
  return out;
}

RootScan characteristic_roots(const CableConfig& cfg, int count) {
  return characteristic_roots(cfg, count, (count + 1.5) * pi / cfg.length_L());
}

// ---------------------------------------------------------------------------

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

PeakScan extract_peaks(std::span<const double> trace, double dt, int count) {
  const std::size_t N = trace.size();
  if (N < 256) throw DomainError("peak extraction needs at least 256 samples");
  if (!(dt > 0.0)) throw DomainError("sample spacing must be positive");
  if (count < 1) throw DomainError("peak count must be >= 1");

  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(N));
  std::unique_ptr<fftw_complex, FftwFree> spec(fftw_alloc_complex(N / 2 + 1));
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(N);
  for (std::size_t i = 0; i < N; ++i) {
    // Periodic Hann: an on-bin tone leaks into exactly its two neighbours.
    const double w = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / N));
    in.get()[i] = w * (trace[i] - mean);
  }
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(N), in.get(), spec.get(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  const std::size_t nb = N / 2 + 1;
  std::vector<double> mag(nb);
  for (std::size_t i = 0; i < nb; ++i) mag[i] = std::hypot(spec.get()[i][0], spec.get()[i][1]);
  const double top = *std::max_element(mag.begin(), mag.end());

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < nb; ++i) {
    if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1] && mag[i] > 1e-9 * top) {
      candidates.push_back(i);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
  std::vector<std::size_t> chosen;
  for (std::size_t c : candidates) {
    if (static_cast<int>(chosen.size()) == count) break;
    const bool separated = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t p) {
      return (c > p ? c - p : p - c) >= 3;
    });
    if (separated) chosen.push_back(c);
  }

  PeakScan out;
  out.bin_hz = 1.0 / (static_cast<double>(N) * dt);
  out.spectrum.method = SpectrumMethod::DftPeak;
  out.spectrum.resolution_hz = 0.1 * out.bin_hz;
  for (std::size_t i : chosen) {
    const double al = std::log(mag[i - 1]), be = std::log(mag[i]), ga = std::log(mag[i + 1]);
    const double den = al - 2.0 * be + ga;
    const double p = den != 0.0 ? 0.5 * (al - ga) / den : 0.0;
    out.spectrum.frequencies_hz.push_back((static_cast<double>(i) + p) * out.bin_hz);
  }
  std::sort(out.spectrum.frequencies_hz.begin(), out.spectrum.frequencies_hz.end());
  out.shortfall = count - static_cast<int>(chosen.size());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> model_frequencies(const KnownCable& known, double tension, int count,
                                      int galerkin_m) {
  const auto cfg = CableConfig::from_tension(known.length, tension, known.density,
                                             known.supports, known.convention);
  if (cfg.supports().empty()) {
    std::vector<double> f(count);
    for (int k = 1; k <= count; ++k) f[k - 1] = k * cfg.wave_speed_a() / (2.0 * cfg.length_L());
    return f;
  }
  if (cfg.supports().size() == 1) {
    auto scan = characteristic_roots(cfg, count);
    if (scan.shortfall > 0) {
      throw NonConvergenceError("characteristic scan found " +
                                std::to_string(count - scan.shortfall) + " of " +
                                std::to_string(count) + " roots");
    }
    return std::move(scan.spectrum.frequencies_hz);
  }
  return galerkin_frequencies(cfg, galerkin_m, count).frequencies_hz;
}

TensionEstimate invert_tension(const FrequencySpectrum& measured, const KnownCable& known,
                               std::span<const int> mode_indices,
                               const InversionOptions& options) {
  const auto& f = measured.frequencies_hz;
  if (f.empty()) throw DomainError("at least one measured frequency is required");
  std::vector<int> modes(mode_indices.begin(), mode_indices.end());
  if (modes.empty()) {
    modes.resize(f.size());
    std::iota(modes.begin(), modes.end(), 1);
  }
  if (modes.size() != f.size()) throw DomainError("mode indices and frequencies differ in length");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0) || !std::isfinite(f[i])) throw DomainError("measured frequencies must be positive");
    if (modes[i] < 1) throw DomainError("mode indices are 1-based");
  }
  const int top = *std::max_element(modes.begin(), modes.end());

  // Taut-string guess from the first pair: f_n = n sqrt(T/rho) / (2L).
  const double guess = known.density * std::pow(2.0 * known.length * f[0] / modes[0], 2);
  TensionEstimate est;
  est.bracket_lo = options.tension_lo > 0 ? options.tension_lo : guess / 16.0;
  est.bracket_hi = options.tension_hi > 0 ? options.tension_hi : 4.0 * guess;
  if (!(est.bracket_lo > 0.0 && est.bracket_hi > est.bracket_lo)) {
    throw DomainError("tension bracket must satisfy 0 < T_lo < T_hi");
  }

  auto objective = [&](double T) {
    ++est.iterations;
    const auto model = model_frequencies(known, T, top, options.galerkin_m);
    double J = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double r = f[i] - model[modes[i] - 1];
      J += r * r;
    }
    return J;
  };

  double lo = est.bracket_lo, hi = est.bracket_hi;
  const double J_lo = objective(lo), J_hi = objective(hi);
  constexpr double g = 0.6180339887498949;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  const double J_max = std::max({J_lo, J_hi, f1, f2});
  const double J_min = std::min({J_lo, J_hi, f1, f2});
  if (J_max - J_min <= 1e-15 * std::max(J_max, 1e-300)) {
    throw NonConvergenceError("objective is flat over [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "] N");
  }

  while (hi - lo > 1e-6 * (x1 + x2) * 0.5 && est.iterations < options.max_iterations) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = objective(x2);
    }
  }

  // Successive parabolic steps through the best three points.
  double pa = x1, pb = x2, fa = f1, fb = f2;
  double pc = f1 < f2 ? lo : hi;
  double fc = objective(pc);
  double best = f1 < f2 ? x1 : x2;
  double J_best = std::min(f1, f2);
  while (est.iterations < options.max_iterations) {
    const double num = (pb - pa) * (pb - pa) * (fb - fc) - (pb - pc) * (pb - pc) * (fb - fa);
    const double den = (pb - pa) * (fb - fc) - (pb - pc) * (fb - fa);
    if (den == 0.0) break;
    const double x = pb - 0.5 * num / den;
    if (!(x > std::min({pa, pb, pc}) && x < std::max({pa, pb, pc}))) break;
    const double fx = objective(x);
    const double move = std::abs(x - best);
    if (fx < J_best) {
      best = x;
      J_best = fx;
    }
    // Drop the worst point.
    if (fa >= fb && fa >= fc) {
      pa = x;
      fa = fx;
    } else if (fb >= fa && fb >= fc) {
      pb = x;
      fb = fx;
    } else {
      pc = x;
      fc = fx;
    }
    if (move <= options.rel_tol * best) break;
  }

  const double edge = 1e-4 * (est.bracket_hi - est.bracket_lo);
  if (best - est.bracket_lo <= edge || est.bracket_hi - best <= edge) {
    throw NonConvergenceError("misfit minimum sits on the bracket edge near T = " +
                              std::to_string(best) + " N; widen [" +
                              std::to_string(est.bracket_lo) + ", " +
                              std::to_string(est.bracket_hi) + "]");
  }
  est.tension_hat = best;
  est.residual = std::sqrt(J_best / static_cast<double>(f.size()));
  return est;
}

}  // namespace cable
