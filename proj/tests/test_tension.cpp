#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "cable/errors.hpp"
#include "cable/galerkin.hpp"
#include "cable/tension.hpp"

using namespace cable;
using std::numbers::pi;

namespace {

constexpr double kL = 70.0;
constexpr double kA = 67.344;
constexpr double kl = 17.5;

CableConfig one_support(double sigma, double at = kl) {
  std::pair<double, double> s[] = {{at, sigma}};
  return CableConfig::from_wave_speed(kL, kA, s);
}

}  // namespace

TEST_CASE("characteristic function values") {
  const auto free = one_support(0.0);
  for (int m = 1; m <= 5; ++m) CHECK(std::abs(characteristic_value(m * pi / kL, free)) <= 1e-13);
  const auto mid = one_support(3.0, kL / 2);
  CHECK(std::abs(characteristic_value(2 * pi / kL, mid)) <= 1e-13);
  CHECK_THROWS_AS(characteristic_value(-1.0, free), DomainError);
  std::pair<double, double> two[] = {{10.0, 1.0}, {20.0, 1.0}};
  CHECK_THROWS_AS(characteristic_value(1.0, CableConfig::from_wave_speed(kL, kA, two)),
                  CapabilityError);
}

TEST_CASE("roots of the unsupported string") {
  const auto scan = characteristic_roots(one_support(0.0), 10);
  REQUIRE(scan.spectrum.frequencies_hz.size() == 10);
  CHECK(scan.shortfall == 0);
  CHECK(scan.spectrum.method == SpectrumMethod::CharacteristicRoot);
  for (int k = 1; k <= 10; ++k) {
    const double f = k * kA / (2 * kL);
    CHECK(std::abs(scan.spectrum.frequencies_hz[k - 1] - f) <= 1e-10 * f);
  }
}

TEST_CASE("scan loses no roots") {
  for (double sigma : {0.005, 1.0, 40.0}) {
    const auto scan = characteristic_roots(one_support(sigma), 30, 40 * pi / kL);
    CHECK(static_cast<int>(scan.wavenumbers.size()) == scan.sign_changes + 2 * scan.tangential);
    for (std::size_t i = 1; i < scan.wavenumbers.size(); ++i) {
      CHECK(scan.wavenumbers[i] >= scan.wavenumbers[i - 1]);
    }
  }
  const auto short_scan = characteristic_roots(one_support(1.0), 10, 3 * pi / kL);
  CHECK(short_scan.shortfall > 0);
}

TEST_CASE("roots agree with the Galerkin eigen-solve") {
  for (double sigma : {0.005, 1.0}) {
    const auto cfg = one_support(sigma);
    const auto roots = characteristic_roots(cfg, 8).spectrum.frequencies_hz;
    const auto gal = galerkin_frequencies(cfg, 512, 8).frequencies_hz;
    for (int k = 0; k < 8; ++k) CHECK(std::abs(roots[k] - gal[k]) <= 1e-3 * gal[k]);
  }
}

TEST_CASE("supported roots sit above the free ones and interlace") {
  const auto free = characteristic_roots(one_support(0.0), 9).spectrum.frequencies_hz;
  for (double sigma : {0.1, 1.0, 10.0}) {
    const auto f = characteristic_roots(one_support(sigma), 8).spectrum.frequencies_hz;
    for (int k = 0; k < 8; ++k) {
      CHECK(f[k] >= free[k] * (1 - 1e-12));
      CHECK(f[k] <= free[k + 1] * (1 + 1e-12));
    }
  }
}

TEST_CASE("stiff support pins the string") {
  // Limit spectrum: the two clamped pieces, k a / (2 l) and k a / (2 (L - l)).
  std::vector<double> limit;
  for (int k = 1; k <= 3; ++k) limit.push_back(k * kA / (2 * kl));
  for (int k = 1; k <= 9; ++k) limit.push_back(k * kA / (2 * (kL - kl)));
  std::sort(limit.begin(), limit.end());

  const double s1 = 1e6 / kL;
  const auto f1 = characteristic_roots(one_support(s1), 6).spectrum.frequencies_hz;
  const auto f2 = characteristic_roots(one_support(2 * s1), 6).spectrum.frequencies_hz;
  for (int k = 0; k < 6; ++k) {
    const double e2 = std::abs(f2[k] - limit[k]);
    CHECK(e2 <= 1e-4 * limit[k]);
    // Error falls like 1/sigma, so Richardson extrapolation should do much better.
    const double rich = std::abs(2 * f2[k] - f1[k] - limit[k]);
    if (e2 > 1e-11 * limit[k]) CHECK(rich <= 0.05 * e2);
  }
  CHECK(limit[0] == doctest::Approx(0.641371).epsilon(1e-6));
  CHECK(kA / (2 * kl) == doctest::Approx(1.92411).epsilon(1e-5));
}

TEST_CASE("peak extraction on synthetic tones") {
  const int N = 4096;
  const double dt = 0.01;
  const double bin = 1.0 / (N * dt);
  std::vector<double> x(N);
  const double f0 = 100 * bin;
  for (int i = 0; i < N; ++i) x[i] = std::cos(2 * pi * f0 * i * dt);
  const auto on = extract_peaks(x, dt, 1);
  CHECK(std::abs(on.spectrum.frequencies_hz[0] - f0) <= 1e-12 * f0);
  CHECK(on.bin_hz == doctest::Approx(bin));
  CHECK(on.spectrum.resolution_hz == doctest::Approx(0.1 * bin));

  for (double frac : {0.13, 0.37, 0.5, 0.81}) {
    const double f = (100 + frac) * bin;
    for (int i = 0; i < N; ++i) x[i] = std::cos(2 * pi * f * i * dt + 0.4);
    const auto p = extract_peaks(x, dt, 1);
    CHECK(std::abs(p.spectrum.frequencies_hz[0] - f) <= 0.1 * bin);
  }

  for (int i = 0; i < N; ++i) x[i] = std::sin(2 * pi * 7.3 * i * dt) + 0.3 * std::sin(2 * pi * 19.1 * i * dt);
  const auto two = extract_peaks(x, dt, 4);
  CHECK(two.spectrum.frequencies_hz.size() == 2);
  CHECK(two.shortfall == 2);
  CHECK(two.spectrum.frequencies_hz[0] == doctest::Approx(7.3).epsilon(1e-3));
  CHECK(two.spectrum.frequencies_hz[1] == doctest::Approx(19.1).epsilon(1e-3));
  CHECK_THROWS_AS(extract_peaks(std::vector<double>(100, 0.0), dt, 1), DomainError);
}

TEST_CASE("lowest peak of a simulated probe matches the fundamental") {
  const auto cfg = one_support(1.0);
  const auto init = make_initial_data([](double x) { return 0.1 * std::sin(pi * x / 35.0); },
                                      [](double) { return 0.0; }, std::nullopt, kL);
  auto sys = std::make_shared<const ModalSystem>(build_modal_system(cfg, init, 256));
  SamplingGrid grid{8, 4096, 40.0};
  const auto field = propagate_exact(sys, grid, std::vector<double>{40.0});
  const auto peaks = extract_peaks(field.probes[0].u, grid.dt(), 4);
  const double f1 = modal_frequencies(*sys, 1).frequencies_hz[0];
  CHECK(std::abs(peaks.spectrum.frequencies_hz.front() - f1) <= peaks.spectrum.resolution_hz);
}

TEST_CASE("tension round trips") {
  const double T = kA * kA;
  KnownCable bare{kL, 1.0, {}, DiracConvention::DiracConsistent};
  FrequencySpectrum m;
  m.frequencies_hz = model_frequencies(bare, T, 4);
  auto est = invert_tension(m, bare);
  CHECK(std::abs(est.tension_hat - T) <= 1e-4 * T);
  CHECK(est.residual <= 1e-8);

  for (auto& f : m.frequencies_hz) f *= std::sqrt(2.0);
  CHECK(invert_tension(m, bare).tension_hat == doctest::Approx(2 * T).epsilon(1e-8));

  KnownCable one{kL, 1.0, {{kl, T}}, DiracConvention::DiracConsistent};  // sigma(T) = 1
  m.frequencies_hz = model_frequencies(one, T, 4);
  est = invert_tension(m, one);
  CHECK(std::abs(est.tension_hat - T) <= 1e-3 * T);
  const auto again = invert_tension(m, one);
  CHECK(again.tension_hat == est.tension_hat);
  CHECK(again.iterations == est.iterations);

  KnownCable two{kL, 1.0, {{15.0, 0.5 * T}, {50.0, 2.0 * T}}, DiracConvention::DiracConsistent};
  InversionOptions opt;
  opt.galerkin_m = 128;
  m.frequencies_hz = model_frequencies(two, T, 3, 128);
  est = invert_tension(m, two, {}, opt);
  CHECK(std::abs(est.tension_hat - T) <= 1e-3 * T);
}

TEST_CASE("sigma follows the tension iterate") {
  // With K fixed, raising T lowers sigma: frequencies grow slower than sqrt(T).
  KnownCable one{kL, 1.0, {{kl, 4535.0}}, DiracConvention::DiracConsistent};
  const auto lo = model_frequencies(one, 4535.0, 1);
  const auto hi = model_frequencies(one, 4 * 4535.0, 1);
  CHECK(hi[0] < 2 * lo[0]);
  CHECK(hi[0] > lo[0]);
}

TEST_CASE("inversion failures") {
  KnownCable bare{kL, 1.0, {}, DiracConvention::DiracConsistent};
  FrequencySpectrum m;
  m.frequencies_hz = model_frequencies(bare, 4535.0, 2);
  InversionOptions opt;
  opt.tension_lo = 10.0;
  opt.tension_hi = 100.0;
  CHECK_THROWS_AS(invert_tension(m, bare, {}, opt), NonConvergenceError);
  CHECK_THROWS_AS(invert_tension(FrequencySpectrum{}, bare), DomainError);
  const int modes[] = {1};
  CHECK_THROWS_AS(invert_tension(m, bare, modes), DomainError);
}
