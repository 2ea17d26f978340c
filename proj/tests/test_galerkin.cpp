#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "cable/errors.hpp"
#include "cable/galerkin.hpp"

using namespace cable;
using std::numbers::pi;

namespace {

constexpr double kL = 70.0;
constexpr double kA = 67.344;

CableConfig supported(std::initializer_list<std::pair<double, double>> sigmas) {
  std::vector<std::pair<double, double>> s(sigmas);
  return CableConfig::from_wave_speed(kL, kA, s);
}

InitialData preset_data() {
  return make_initial_data([](double x) { return 0.1 * std::sin(pi * x / 35.0); },
                           [](double) { return 0.0; },
                           [](double x) { return 0.1 * pi / 35.0 * std::cos(pi * x / 35.0); }, kL);
}

// S written out entry by entry, without the library assembler.
Eigen::MatrixXd reference_S(const CableConfig& cfg, int m) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
  const double a2 = cfg.wave_speed_a() * cfg.wave_speed_a();
  const double L = cfg.length_L();
  for (int i = 1; i <= m; ++i) {
    S(i - 1, i - 1) = a2 * std::pow(i * pi / L, 2);
    for (int j = 1; j <= m; ++j) {
      for (const auto& s : cfg.supports()) {
        const double wi = std::sqrt(2.0 / L) * std::sin(i * pi * s.position_xk / L);
        const double wj = std::sqrt(2.0 / L) * std::sin(j * pi * s.position_xk / L);
        S(i - 1, j - 1) += cfg.point_factor() * s.beta_k * wi * wj;
      }
    }
  }
  return S;
}

}  // namespace

TEST_CASE("sine basis is orthonormal") {
  const int n = 20000;
  const double h = kL / n;
  for (int i = 1; i <= 5; ++i) {
    for (int j = 1; j <= 5; ++j) {
      double s = 0.0;
      for (int q = 1; q < n; ++q) s += basis_value(i, q * h, kL) * basis_value(j, q * h, kL);
      CHECK(s * h == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
    }
  }
  CHECK(basis_slope(3, 10.0, kL) ==
        doctest::Approx(std::sqrt(2.0 / kL) * 3 * pi / kL * std::cos(3 * pi * 10.0 / kL)));
}

TEST_CASE("assembled form matches the entrywise definition") {
  for (auto conv : {DiracConvention::DiracConsistent, DiracConvention::PaperFactorL}) {
    const auto cfg = supported({{17.5, 1.0}, {51.0, 0.3}}).with_convention(conv);
    const auto S = assemble_bilinear_form(cfg, 40);
    CHECK((S - reference_S(cfg, 40)).cwiseAbs().maxCoeff() <= 1e-10 * S.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("unsupported string frequencies are k a / 2L") {
  const auto cfg = CableConfig::from_wave_speed(kL, kA, {});
  const auto f = galerkin_frequencies(cfg, 64, 10);
  CHECK(f.method == SpectrumMethod::EigenGalerkin);
  for (int k = 1; k <= 10; ++k) {
    CHECK(std::abs(f.frequencies_hz[k - 1] - k * kA / (2 * kL)) <= 1e-12 * k * kA / (2 * kL));
  }
  CHECK_THROWS_AS(galerkin_frequencies(cfg, 8, 9), DomainError);
}

TEST_CASE("rank-one secular solver agrees with a dense eigensolve") {
  for (double sigma : {0.005, 1.0, 50.0}) {
    const auto cfg = supported({{17.5, sigma}});
    const int m = 300;
    const auto pairs = solve_modal_eigenproblem(cfg, m);
    CHECK(pairs.kind == EigenSolverKind::RankOneSecular);
    const Eigen::MatrixXd S = reference_S(cfg, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(S);
    const auto& ref = dense.eigenvalues();
    CHECK(((pairs.values - ref).cwiseAbs().array() / ref.array()).maxCoeff() <= 1e-11);
    const Eigen::MatrixXd& Q = pairs.vectors;
    const double orth = (Q.transpose() * Q - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    CHECK(orth <= 1e-12);
    const double resid = (S * Q - Q * pairs.values.asDiagonal()).cwiseAbs().maxCoeff();
    CHECK(resid <= 1e-12 * ref.maxCoeff());
  }
}

TEST_CASE("coercivity and boundedness") {
  const auto cfg = supported({{17.5, 1.0}, {44.0, 3.0}});
  const int m = 64;
  const auto S = assemble_bilinear_form(cfg, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  CHECK(es.eigenvalues().minCoeff() >= coercivity_constant(cfg) - 1e-9);
  CHECK(coercivity_constant(cfg) == doctest::Approx(kA * kA * std::pow(pi / kL, 2)));

  // H1 norm of a coefficient vector: sum (1 + (j pi/L)^2) c_j^2.
  Eigen::VectorXd weight(m);
  for (int j = 1; j <= m; ++j) weight[j - 1] = std::sqrt(1.0 + std::pow(j * pi / kL, 2));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const double C1 = boundedness_constant(cfg);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd u(m), v(m);
    for (int j = 0; j < m; ++j) {
      u[j] = g(rng) / weight[j];
      v[j] = g(rng) / weight[j];
    }
    const double nu = u.cwiseProduct(weight).norm(), nv = v.cwiseProduct(weight).norm();
    CHECK(std::abs(u.dot(S * v)) <= C1 * nu * nv);
  }
}

TEST_CASE("single-support eigenvalues interlace and grow with beta") {
  const int m = 128;
  const auto free_vals = solve_modal_eigenproblem(supported({}), m).values;
  Eigen::VectorXd prev = free_vals;
  for (double sigma : {0.01, 0.3, 1.0, 10.0, 1000.0}) {
    const auto vals = solve_modal_eigenproblem(supported({{17.5, sigma}}), m).values;
    for (int k = 0; k < m; ++k) {
      CHECK(vals[k] >= free_vals[k] * (1 - 1e-12));
      if (k + 1 < m) CHECK(vals[k] <= free_vals[k + 1] * (1 + 1e-12));
      CHECK(vals[k] >= prev[k] * (1 - 1e-12));
    }
    prev = vals;
  }
}

TEST_CASE("frequencies converge at first order in m") {
  // The point load leaves a kink, so modal frequencies converge like 1/m.
  const auto cfg = supported({{17.5, 1.0}});
  const auto f1 = galerkin_frequencies(cfg, 128, 4).frequencies_hz;
  const auto f2 = galerkin_frequencies(cfg, 256, 4).frequencies_hz;
  const auto f3 = galerkin_frequencies(cfg, 512, 4).frequencies_hz;
  for (int k = 0; k < 4; ++k) {
    const double e1 = f1[k] - f2[k], e2 = f2[k] - f3[k];
    if (std::abs(e1) < 1e-12) continue;  // mode with a node at the support
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
  }
  const auto weak = supported({{17.5, 0.005}});
  const auto w1 = galerkin_frequencies(weak, 512, 10).frequencies_hz;
  const auto w2 = galerkin_frequencies(weak, 1024, 10).frequencies_hz;
  for (int k = 0; k < 10; ++k) CHECK(std::abs(w1[k] - w2[k]) <= 1e-6 * w2[k]);
}

TEST_CASE("exact propagation conserves the modal energy") {
  auto sys = std::make_shared<const ModalSystem>(
      build_modal_system(supported({{17.5, 1.0}, {50.0, 2.0}}), preset_data(), 128));
  SamplingGrid grid{141, 101, 10.0};
  const auto field = propagate_exact(sys, grid);
  REQUIRE(field.modal);
  const auto m = sys->m;
  double E0 = -1, worst = 0;
  for (int j = 0; j < grid.nt; ++j) {
    Eigen::Map<const Eigen::VectorXd> d(field.modal->d.data() + j * m, m);
    Eigen::Map<const Eigen::VectorXd> v(field.modal->d_dot.data() + j * m, m);
    const double E = v.squaredNorm() + d.dot(sys->stiffness_S * d);
    if (E0 < 0) E0 = E;
    worst = std::max(worst, std::abs(E - E0) / E0);
  }
  CHECK(worst <= 1e-10);
  for (int j = 0; j < grid.nt; ++j) {
    CHECK(field.u(j, 0) == 0.0);
    CHECK(field.u(j, grid.nx - 1) == 0.0);
  }
}

TEST_CASE("unsupported sine mode propagates as a standing wave") {
  auto sys = std::make_shared<const ModalSystem>(
      build_modal_system(supported({}), preset_data(), 32));
  SamplingGrid grid{71, 51, 5.0};
  const auto field = propagate_exact(sys, grid, std::vector<double>{13.0});
  const double w = 2 * pi * kA / kL;
  double worst = 0;
  for (int j = 0; j < grid.nt; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i, kL), t = grid.t(j);
      worst = std::max(worst, std::abs(field.u(j, i) - 0.1 * std::sin(pi * x / 35.0) * std::cos(w * t)));
    }
    CHECK(field.probes[0].u[j] ==
          doctest::Approx(0.1 * std::sin(pi * 13.0 / 35.0) * std::cos(w * grid.t(j))).scale(1.0).epsilon(1e-10));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("leapfrog is second order and respects its stability limit") {
  auto sys = std::make_shared<const ModalSystem>(
      build_modal_system(supported({{17.5, 1.0}}), preset_data(), 32));
  SamplingGrid grid{71, 21, 2.0};
  CHECK_THROWS_AS(propagate_leapfrog(sys, grid, {}, 1), StabilityError);
  const int s = leapfrog_substeps(*sys, grid);
  CHECK(grid.dt() / s < 0.9 * leapfrog_stability_limit(*sys) * (1 + 1e-12));
  const auto exact = propagate_exact(sys, grid);
  const double e1 = max_abs(difference(propagate_leapfrog(sys, grid, {}, 8 * s), exact));
  const double e2 = max_abs(difference(propagate_leapfrog(sys, grid, {}, 16 * s), exact));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("serial and parallel paths give identical fields") {
  auto sys = std::make_shared<const ModalSystem>(
      build_modal_system(supported({{17.5, 1.0}}), preset_data(), 64));
  SamplingGrid grid{141, 41, 4.0};
  const auto a = propagate_exact(sys, grid, {}, Execution::Serial);
  const auto b = propagate_exact(sys, grid, {}, Execution::Parallel);
  CHECK(a.values_u == b.values_u);
  CHECK(a.values_ut == b.values_ut);
  const int s = leapfrog_substeps(*sys, grid);
  const auto c = propagate_leapfrog(sys, grid, {}, s, Execution::Serial);
  const auto d = propagate_leapfrog(sys, grid, {}, s, Execution::Parallel);
  CHECK(c.values_u == d.values_u);
}

TEST_CASE("zero data gives a zero field") {
  auto sys = std::make_shared<const ModalSystem>(build_modal_system(supported({{17.5, 1.0}}), 64));
  const auto field = propagate_exact(sys, SamplingGrid{71, 21, 2.0});
  CHECK(max_abs(field) <= 1e-12);
}

TEST_CASE("field evaluation") {
  auto sys = std::make_shared<const ModalSystem>(
      build_modal_system(supported({{17.5, 1.0}}), preset_data(), 32));
  SamplingGrid grid{71, 21, 2.0};
  const auto field = propagate_exact(sys, grid);
  CHECK(evaluate_solution(field, grid.x(12, kL), grid.t(7)).u == field.u(7, 12));
  const auto mid = evaluate_solution(field, 0.5 * (grid.x(12, kL) + grid.x(13, kL)), grid.t(7));
  CHECK(mid.u == doctest::Approx(0.5 * (field.u(7, 12) + field.u(7, 13))));
  CHECK_THROWS_AS(evaluate_solution(field, 71.0, 0.0), DomainError);
  CHECK_THROWS_AS(evaluate_solution(field, 1.0, 2.5), DomainError);
  CHECK_THROWS_AS(difference(field, propagate_exact(sys, SamplingGrid{71, 11, 2.0})), DomainError);
}
