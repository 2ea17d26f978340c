// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cable/classical.hpp"
#include "cable/config.hpp"
#include "cable/diagnostics.hpp"
#include "cable/galerkin.hpp"
#include "cable/tension.hpp"

using namespace cable;
using std::numbers::pi;

namespace {

constexpr double kL = 70.0;
constexpr double kA = 67.344;
constexpr double kl = 17.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CableConfig supported(double sigma) {
  std::pair<double, double> s[] = {{kl, sigma}};
  return CableConfig::from_wave_speed(kL, kA, s);
}

InitialData preset_data() { return preset("paper-2-4-sigma1").initial_data(); }

std::shared_ptr<const ModalSystem> modal(const CableConfig& cfg, const InitialData& d, int m) {
  return std::make_shared<const ModalSystem>(build_modal_system(cfg, d, m));
}

double max_jump_residual(const FdResult& r, double c_sigma) {
  double worst = 0.0;
  const auto& jump = r.trace.slope_jump[0];
  const auto& u = r.trace.u_at_support[0];
  // t = 0 is the smooth initial profile, where the residual is sigma phi(l) by construction.
  for (std::size_t j = 1; j < jump.size(); ++j) worst = std::max(worst, std::abs(jump[j] - c_sigma * u[j]));
  return worst;
}

double max_abs_jump(const FdResult& r) {
  double worst = 0.0;
  for (double v : r.trace.slope_jump[0]) worst = std::max(worst, std::abs(v));
  return worst;
}

Outcome unsupported_exactness() {
  const auto f = galerkin_frequencies(CableConfig::from_wave_speed(kL, kA, {}), 256, 10).frequencies_hz;
  double worst = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double exact = k * kA / (2 * kL);
    worst = std::max(worst, std::abs(f[k - 1] - exact) / exact);
  }
  // 0.481028...: the leading six decimals.
  const bool f1_ok = f[0] >= 0.481028 && f[0] < 0.481029;
  return {worst <= 1e-10 && f1_ok, fmt("max rel err %.2e (tol 1e-10), f1 = %.9f Hz", worst, f[0])};
}

Outcome energy_conservation() {
  const auto cfg = supported(1.0);
  const SamplingGrid grid{1401, 1001, 10.0};
  const double gal = energy(propagate_exact(modal(cfg, preset_data(), 256), grid), cfg).drift;

  auto fd_drift = [&](int nx) {
    return energy(solve_fd_coupled(cfg, preset_data(), SamplingGrid{nx, 1001, 10.0}).field, cfg).drift;
  };
  const double fd_coarse = fd_drift(1001);
  const double fd = fd_drift(2001);
  const double ratio = fd_coarse / fd;
  const bool ok = gal <= 1e-8 && fd <= 1e-3 && ratio >= 3.0 && ratio <= 5.0;
  return {ok, fmt("galerkin drift %.2e (tol 1e-8); fd drift %.2e at nx=2001 (tol 1e-3), "
                  "nx 1001->2001 ratio %.2f (want 3..5)",
                  gal, fd, ratio)};
}

Outcome frequency_agreement() {
  double worst = 0.0;
  for (double sigma : {1.0, 0.005}) {
    const auto cfg = supported(sigma);
    const auto roots = characteristic_roots(cfg, 8).spectrum.frequencies_hz;
    const auto gal = galerkin_frequencies(cfg, 512, 8).frequencies_hz;
    for (int k = 0; k < 8; ++k) worst = std::max(worst, std::abs(roots[k] - gal[k]) / gal[k]);
  }
  return {worst <= 1e-3, fmt("max rel diff %.2e over 8 modes, both presets (tol 1e-3)", worst)};
}

Outcome field_agreement() {
  const auto cfg = supported(1.0);
  const auto init = preset_data();
  const SamplingGrid grid{2001, 1001, 10.0};
  const auto gal = propagate_exact(modal(cfg, init, 1024), grid);
  const auto fd = solve_fd_coupled(cfg, init, grid);
  const double fd_rel = max_abs(difference(fd.field, gal)) / max_abs(gal);

  const auto exp = build_series_expansion(cfg, init, fd.trace.times, fd.trace.u_at_support[0], 200);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double x = kL * (i + 0.5) / 10.0;
    for (int j = 0; j < 10; ++j) {
      const double t = grid.horizon * (j + 0.5) / 10.0;
      worst = std::max(worst, std::abs(evaluate_series_solution(exp, x, t) -
                                       evaluate_solution(fd.field, x, t).u));
    }
  }
  const double series_rel = worst / max_abs(fd.field);
  return {fd_rel <= 0.02 && series_rel <= 0.05,
          fmt("fd vs galerkin %.2e (tol 2e-2); series vs fd %.2e (tol 5e-2)", fd_rel, series_rel)};
}

Outcome jump_consistency() {
  const auto cfg = supported(1.0);
  const double cs = cfg.point_factor() * cfg.supports()[0].sigma_k;
  std::vector<double> r;
  for (int nx : {1001, 2001, 4001}) {
    r.push_back(max_jump_residual(solve_fd_coupled(cfg, preset_data(), SamplingGrid{nx, 1001, 10.0}), cs));
  }
  const double q1 = r[0] / r[1], q2 = r[1] / r[2];
  const bool ok = q1 >= 1.5 && q1 <= 2.5 && q2 >= 1.5 && q2 <= 2.5;
  return {ok, fmt("residual %.3e / %.3e / %.3e at nx 1001/2001/4001, ratios %.2f %.2f (want 1.5..2.5)",
                  r[0], r[1], r[2], q1, q2)};
}

Outcome stability_suite() {
  const auto cfg = supported(1.0);
  const auto base = std::make_shared<const ModalSystem>(build_modal_system(cfg, 128));
  const SamplingGrid grid{281, 201, 10.0};
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  auto random_system = [&] {
    auto sys = std::make_shared<ModalSystem>(*base);
    sys->xi.setZero();
    sys->eta.setZero();
    // Mostly low modes, a little high-mode content, random velocities.
    for (int j = 0; j < 128; ++j) {
      const double decay = 1.0 / (1.0 + j * j / 16.0);
      sys->xi[j] = 0.05 * decay * g(rng);
      sys->eta[j] = 0.05 * decay * g(rng) * (u(rng) < 0.5 ? 1.0 : 10.0);
    }
    return std::shared_ptr<const ModalSystem>(sys);
  };

  int violations = 0;
  double tightest = INFINITY;
  for (int pair = 0; pair < 20; ++pair) {
    const auto a = propagate_exact(random_system(), grid);
    const auto b = propagate_exact(random_system(), grid);
    const auto rep = stability_bound_check(a, b, cfg, 1e-6);
    if (!rep.holds) ++violations;
    tightest = std::min(tightest, rep.min_slack);
  }
  return {violations == 0, fmt("%d violations in 20 pairs, min slack %.3e", violations, tightest)};
}

Outcome regularity_surrogate() {
  const auto rc = preset("paper-2-4-sigma1");
  const bool flagged = validate_initial_data(rc.cable(), rc.initial_data()).piecewise_smooth_only;
  const auto on = solve_fd_coupled(rc.cable(), rc.initial_data(), rc.grid);
  const auto off = solve_fd_coupled(supported(0.0), rc.initial_data(), rc.grid);
  const double jump = max_abs_jump(on), baseline = max_abs_jump(off);
  return {flagged && jump > 10.0 * baseline,
          fmt("flagged %s; max |slope jump| %.3e vs sigma=0 baseline %.3e (ratio %.1f, want > 10)",
              flagged ? "yes" : "no", jump, baseline, jump / baseline)};
}

Outcome stiffness_sweep() {
  const int m = 512, count = 8;
  const auto free = galerkin_frequencies(supported(0.0), m, count + 1).frequencies_hz;
  std::vector<double> prev(free.begin(), free.begin() + count);
  bool monotone = true, interlaced = true;
  const double a2 = kA * kA;
  std::vector<double> last;
  for (double beta : {1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8}) {
    const auto f = galerkin_frequencies(supported(beta / a2), m, count).frequencies_hz;
    for (int k = 0; k < count; ++k) {
      if (f[k] < prev[k] * (1 - 1e-12)) monotone = false;
      if (f[k] < free[k] * (1 - 1e-12) || f[k] > free[k + 1] * (1 + 1e-12)) interlaced = false;
    }
    prev = f;
    last = f;
  }
  const double target[] = {0.641371, 1.28274, 1.92411, 1.92411};
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(last[k] - target[k]) / target[k]);
  return {monotone && interlaced && worst <= 0.01,
          fmt("monotone %s, interlaced %s; beta=1e8 lowest four within %.2e of the pinned limit (tol 1e-2)",
              monotone ? "yes" : "no", interlaced ? "yes" : "no", worst)};
}

Outcome loss_sanity() {
  const auto free = CableConfig::from_wave_speed(kL, kA, {});
  const auto init = preset_data();
  const double exact = collocation_loss(StandingWaveEvaluator(kL, kA, 2, 0.1 * std::sqrt(kL / 2.0)),
                                        free, init, 10.0)
                           .total;
  const auto cfg = supported(1.0);
  std::vector<double> totals;
  for (int m : {1024, 2048, 4096}) {
    totals.push_back(collocation_loss(ModalEvaluator(modal(cfg, init, m)), cfg, init, 10.0).total);
  }
  const bool nonincreasing = totals[1] <= totals[0] && totals[2] <= totals[1];
  return {exact <= 1e-12 && nonincreasing,
          fmt("standing wave %.2e (tol 1e-12); galerkin m=1024/2048/4096: %.3e %.3e %.3e", exact,
              totals[0], totals[1], totals[2])};
}

Outcome tension_round_trip() {
  const double T = kA * kA;
  KnownCable bare{kL, 1.0, {}, DiracConvention::DiracConsistent};
  KnownCable one{kL, 1.0, {{kl, T}}, DiracConvention::DiracConsistent};
  double worst = 0.0;
  for (const auto* known : {&bare, &one}) {
    FrequencySpectrum measured;
    measured.frequencies_hz = model_frequencies(*known, T, 4);
    const auto est = invert_tension(measured, *known);
    worst = std::max(worst, std::abs(est.tension_hat - T) / T);
  }
  return {worst <= 1e-3, fmt("T_true = %.2f N, max rel err %.2e (tol 1e-3)", T, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"unsupported-string exactness", unsupported_exactness},
      {"energy conservation", energy_conservation},
      {"cross-method frequency agreement", frequency_agreement},
      {"cross-method field agreement", field_agreement},
      {"jump-condition consistency", jump_consistency},
      {"stability bound suite", stability_suite},
      {"regularity surrogate", regularity_surrogate},
      {"stiffness monotonicity and interlacing", stiffness_sweep},
      {"collocation loss sanity", loss_sanity},
      {"tension inversion round trip", tension_round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failed;
    std::printf("[%s] %2zu %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
