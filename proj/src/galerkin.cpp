#include "cable/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "cable/errors.hpp"
#include "cable/quadrature.hpp"

namespace cable {

using std::numbers::pi;

double basis_value(int j, double x, double length) {
  return std::sqrt(2.0 / length) * std::sin(j * pi * x / length);
}

double basis_slope(int j, double x, double length) {
  const double k = j * pi / length;
  return std::sqrt(2.0 / length) * k * std::cos(k * x);
}

Eigenpairs dense_eigensolve(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success) throw InternalError("symmetric eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors(), EigenSolverKind::Dense};
}

namespace {

// One root of 1 + rho * sum z_j^2 / (d_j - lambda) on (d[i], d[i+1]) (or
// (d[n-1], d[n-1] + rho) for the last). Returned as lambda = d[origin] + tau so
// that differences d_j - lambda keep full relative accuracy.
struct SecularRoot {
  std::size_t origin;
  double tau;
};

SecularRoot secular_root(const std::vector<double>& d, const std::vector<double>& z2, double rho,
                         std::size_t i) {
  const std::size_t n = d.size();
  const bool last = i + 1 == n;
  const double gap = last ? rho : d[i + 1] - d[i];

  auto f = [&](std::size_t origin, double tau) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += z2[j] / ((d[j] - d[origin]) - tau);
    return 1.0 + rho * s;
  };
  auto fprime = [&](std::size_t origin, double tau) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double delta = (d[j] - d[origin]) - tau;
      s += z2[j] / (delta * delta);
    }
    return rho * s;
  };

  std::size_t origin = i;
  double lo = 0.0;
  double hi = last ? gap : 0.5 * gap;
  if (!last && f(i, 0.5 * gap) < 0.0) {
    origin = i + 1;
    lo = -0.5 * gap;
    hi = 0.0;
  }
  // f increases in tau; safeguarded Newton inside the bracket.
  double tau = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double value = f(origin, tau);
    if (value == 0.0) break;
    if (value < 0.0) lo = tau; else hi = tau;
    const double width = hi - lo;
    if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
      break;
    }
    double next = tau - value / fprime(origin, tau);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == tau) break;
    tau = next;
  }
  return {origin, tau};
}

}  // namespace

Eigenpairs rank_one_eigensolve(const Eigen::VectorXd& diag, double rho, const Eigen::VectorXd& z) {
  const auto m = static_cast<std::size_t>(diag.size());
  if (static_cast<std::size_t>(z.size()) != m) throw DomainError("rank_one_eigensolve: size mismatch");
  if (!(rho >= 0.0)) throw DomainError("rank_one_eigensolve needs rho >= 0");
  for (std::size_t j = 1; j < m; ++j) {
    if (!(diag[j] > diag[j - 1])) throw DomainError("rank_one_eigensolve needs increasing diag");
  }

  Eigenpairs out;
  out.kind = EigenSolverKind::RankOneSecular;
  out.values = diag;
  out.vectors = Eigen::MatrixXd::Identity(m, m);
  const double znorm = z.norm();
  if (m == 0 || rho == 0.0 || znorm == 0.0) return out;

  // Normalized problem diag + rho_hat u u^T with |u| = 1.
  const double rho_hat = rho * znorm * znorm;
  const double tol = 8.0 * std::numeric_limits<double>::epsilon() *
                     std::max(std::abs(diag[m - 1]), rho_hat);
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < m; ++j) {
    if (rho_hat * std::abs(z[j] / znorm) > tol) active.push_back(j);
  }
  const std::size_t n = active.size();
  if (n == 0) return out;

  std::vector<double> d(n), u(n), u2(n);
  for (std::size_t k = 0; k < n; ++k) {
    d[k] = diag[active[k]];
    u[k] = z[active[k]] / znorm;
    u2[k] = u[k] * u[k];
  }

  std::vector<SecularRoot> roots(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    roots[k] = secular_root(d, u2, rho_hat, static_cast<std::size_t>(k));
  }
  // lambda_r - d_i computed without cancellation.
  auto shift = [&](std::size_t r, std::size_t i) {
    return (d[roots[r].origin] - d[i]) + roots[r].tau;
  };

  // Gu-Eisenstat: recompute u so the computed roots are exact eigenvalues of a
  // nearby problem, which keeps the eigenvectors orthogonal.
  std::vector<double> uhat(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double prod = shift(n - 1, i) / rho_hat;
    for (std::size_t r = 0; r < i; ++r) prod *= shift(r, i) / (d[r] - d[i]);
    for (std::size_t r = i; r + 1 < n; ++r) prod *= shift(r, i) / (d[r + 1] - d[i]);
    uhat[i] = std::copysign(std::sqrt(std::abs(prod)), u[i]);
  }

  Eigen::MatrixXd vectors = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd values(m);
  std::vector<bool> is_active(m, false);
  for (auto j : active) is_active[j] = true;

  std::size_t col = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!is_active[j]) {
      values[col] = diag[j];
      vectors(j, col) = 1.0;
      ++col;
    }
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(n); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const std::size_t c = col + r;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = uhat[i] / (-shift(r, i));
      vectors(active[i], c) = v;
      norm2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < n; ++i) vectors(active[i], c) *= inv;
    values[c] = d[roots[r].origin] + roots[r].tau;
  }

  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
  out.values.resize(m);
  out.vectors.resize(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    out.values[k] = values[order[k]];
    out.vectors.col(k) = vectors.col(order[k]);
  }
  return out;
}

Eigen::MatrixXd assemble_bilinear_form(const CableConfig& cfg, int m) {
  if (m <= 0) throw DomainError("truncation order m must be positive");
  const double L = cfg.length_L();
  const double a2 = cfg.wave_speed_a() * cfg.wave_speed_a();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i <= m; ++i) S(i - 1, i - 1) = a2 * std::pow(i * pi / L, 2);
  const double c = cfg.point_factor();
  for (const auto& s : cfg.supports()) {
    Eigen::VectorXd w(m);
    for (int i = 1; i <= m; ++i) w[i - 1] = basis_value(i, s.position_xk, L);
    S.noalias() += (c * s.beta_k) * w * w.transpose();
  }
  return S;
}

Eigenpairs solve_modal_eigenproblem(const CableConfig& cfg, int m) {
  if (m <= 0) throw DomainError("truncation order m must be positive");
  if (cfg.supports().size() == 1) {
    const double L = cfg.length_L();
    const double a2 = cfg.wave_speed_a() * cfg.wave_speed_a();
    const auto& s = cfg.supports().front();
    Eigen::VectorXd diag(m), w(m);
    for (int i = 1; i <= m; ++i) {
      diag[i - 1] = a2 * std::pow(i * pi / L, 2);
      w[i - 1] = basis_value(i, s.position_xk, L);
    }
    return rank_one_eigensolve(diag, cfg.point_factor() * s.beta_k, w);
  }
  if (cfg.supports().empty()) {
    // Already diagonal.
    Eigenpairs out;
    out.values.resize(m);
    const double a2 = cfg.wave_speed_a() * cfg.wave_speed_a();
    for (int i = 1; i <= m; ++i) out.values[i - 1] = a2 * std::pow(i * pi / cfg.length_L(), 2);
    out.vectors = Eigen::MatrixXd::Identity(m, m);
    return out;
  }
  return dense_eigensolve(assemble_bilinear_form(cfg, m));
}

Projection project_initial_data(const InitialData& init, int m, double length, Execution exec) {
  if (m <= 0) throw DomainError("truncation order m must be positive");
  const auto rule = quad::simpson_rule(0.0, length, std::max(512, 32 * m));
  const std::size_t n = rule.nodes.size();
  std::vector<double> theta(n), wphi(n), wpsi(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = pi * rule.nodes[i] / length;
    wphi[i] = rule.weights[i] * init.phi(rule.nodes[i]);
    wpsi[i] = rule.weights[i] * init.psi(rule.nodes[i]);
  }
  const double scale = std::sqrt(2.0 / length);
  std::vector<double> xi(m), eta(m);
  sine_projection(wphi, theta, scale, xi, exec);
  sine_projection(wpsi, theta, scale, eta, exec);
  Projection p;
  p.xi = Eigen::Map<Eigen::VectorXd>(xi.data(), m);
  p.eta = Eigen::Map<Eigen::VectorXd>(eta.data(), m);
  return p;
}

ModalSystem build_modal_system(const CableConfig& cfg, int m) {
  ModalSystem sys;
  sys.m = m;
  sys.length = cfg.length_L();
  sys.wave_speed = cfg.wave_speed_a();
  for (const auto& s : cfg.supports()) {
    sys.support_positions.push_back(s.position_xk);
    sys.point_weights.push_back(cfg.point_factor() * s.beta_k);
  }
  sys.stiffness_S = assemble_bilinear_form(cfg, m);
  auto eig = solve_modal_eigenproblem(cfg, m);
  if (eig.values.size() > 0 && !(eig.values[0] > 0.0)) {
    throw InternalError("nonpositive eigenvalue of a coercive bilinear form");
  }
  sys.eigenvalues = std::move(eig.values);
  sys.eigenvectors = std::move(eig.vectors);
  sys.solver = eig.kind;
  sys.xi = Eigen::VectorXd::Zero(m);
  sys.eta = Eigen::VectorXd::Zero(m);
  return sys;
}

ModalSystem build_modal_system(const CableConfig& cfg, const InitialData& init, int m) {
  ModalSystem sys = build_modal_system(cfg, m);
  auto p = project_initial_data(init, m, cfg.length_L());
  sys.xi = std::move(p.xi);
  sys.eta = std::move(p.eta);
  return sys;
}

ModalState modal_state(const ModalSystem& sys, double t) {
  const Eigen::VectorXd q0 = sys.eigenvectors.transpose() * sys.xi;
  const Eigen::VectorXd p0 = sys.eigenvectors.transpose() * sys.eta;
  Eigen::VectorXd q(sys.m), qd(sys.m);
  for (int r = 0; r < sys.m; ++r) {
    const double w = std::sqrt(sys.eigenvalues[r]);
    const double c = std::cos(w * t), s = std::sin(w * t);
    q[r] = q0[r] * c + p0[r] * s / w;
    qd[r] = -q0[r] * w * s + p0[r] * c;
  }
  return {sys.eigenvectors * q, sys.eigenvectors * qd};
}

namespace {

std::vector<double> basis_matrix(int m, double length, const std::vector<double>& xs) {
  std::vector<double> W(xs.size() * m);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int j = 1; j <= m; ++j) W[i * m + (j - 1)] = basis_value(j, xs[i], length);
  }
  return W;
}

void fill_from_coefficients(WaveField& field, const ModalSystem& sys,
                            std::span<const double> probes, Execution exec) {
  const auto& g = field.grid;
  const auto m = static_cast<std::size_t>(sys.m);
  std::vector<double> xs(g.nx);
  for (int i = 0; i < g.nx; ++i) xs[i] = g.x(i, sys.length);
  const auto W = basis_matrix(sys.m, sys.length, xs);
  const auto& traj = *field.modal;
  modal_synthesis(traj.d, W, g.nt, m, g.nx, field.values_u, exec);
  modal_synthesis(traj.d_dot, W, g.nt, m, g.nx, field.values_ut, exec);
  // sin(j pi) is not exactly zero in floating point.
  for (int j = 0; j < g.nt; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * g.nx;
    field.values_u[row] = field.values_u[row + g.nx - 1] = 0.0;
    field.values_ut[row] = field.values_ut[row + g.nx - 1] = 0.0;
  }

  if (!probes.empty()) {
    std::vector<double> px(probes.begin(), probes.end());
    for (double x : px) {
      if (!(x >= 0.0 && x <= sys.length)) throw DomainError("probe outside [0, L]");
    }
    const auto P = basis_matrix(sys.m, sys.length, px);
    std::vector<double> pu(static_cast<std::size_t>(g.nt) * px.size());
    std::vector<double> put(pu.size());
    modal_synthesis(traj.d, P, g.nt, m, px.size(), pu, exec);
    modal_synthesis(traj.d_dot, P, g.nt, m, px.size(), put, exec);
    for (std::size_t k = 0; k < px.size(); ++k) {
      ProbeSeries ps;
      ps.x = px[k];
      for (int j = 0; j < g.nt; ++j) {
        ps.u.push_back(pu[j * px.size() + k]);
        ps.ut.push_back(put[j * px.size() + k]);
      }
      field.probes.push_back(std::move(ps));
    }
  }
}

}  // namespace

WaveField propagate_exact(std::shared_ptr<const ModalSystem> sys, const SamplingGrid& grid,
                          std::span<const double> probes, Execution exec) {
  if (!sys) throw DomainError("propagate_exact needs a modal system");
  WaveField field = make_empty_field(grid, sys->length, MethodTag::GalerkinExact);
  const int m = sys->m;
  for (int r = 0; r < m; ++r) {
    if (!(sys->eigenvalues[r] > 0.0)) {
      throw InternalError("nonpositive eigenvalue: coercivity violated");
    }
  }
  const Eigen::VectorXd q0 = sys->eigenvectors.transpose() * sys->xi;
  const Eigen::VectorXd p0 = sys->eigenvectors.transpose() * sys->eta;
  const Eigen::VectorXd omega = sys->eigenvalues.array().sqrt();

  // Eigencoordinates for all output times, then one product back to d.
  Eigen::MatrixXd Q(m, grid.nt), Qd(m, grid.nt);
  for (int j = 0; j < grid.nt; ++j) {
    const double t = grid.t(j);
    for (int r = 0; r < m; ++r) {
      const double w = omega[r];
      const double c = std::cos(w * t), s = std::sin(w * t);
      Q(r, j) = q0[r] * c + p0[r] * s / w;
      Qd(r, j) = -q0[r] * w * s + p0[r] * c;
    }
  }
  // Column-major m x nt == row-major nt x m.
  const Eigen::MatrixXd D = sys->eigenvectors * Q;
  const Eigen::MatrixXd Dd = sys->eigenvectors * Qd;
  ModalTrajectory traj;
  traj.system = sys;
  traj.d.assign(D.data(), D.data() + D.size());
  traj.d_dot.assign(Dd.data(), Dd.data() + Dd.size());
  field.modal = std::move(traj);
  fill_from_coefficients(field, *sys, probes, exec);
  return field;
}

double leapfrog_stability_limit(const ModalSystem& sys) {
  return 2.0 / std::sqrt(sys.eigenvalues[sys.m - 1]);
}

int leapfrog_substeps(const ModalSystem& sys, const SamplingGrid& grid, double safety) {
  const double limit = safety * leapfrog_stability_limit(sys);
  return std::max(1, static_cast<int>(std::ceil(grid.dt() / limit)));
}

WaveField propagate_leapfrog(std::shared_ptr<const ModalSystem> sys, const SamplingGrid& grid,
                             std::span<const double> probes, int substeps, Execution exec) {
  if (!sys) throw DomainError("propagate_leapfrog needs a modal system");
  if (substeps < 1) throw DomainError("substeps must be >= 1");
  WaveField field = make_empty_field(grid, sys->length, MethodTag::GalerkinLeapfrog);
  const double dt = grid.dt() / substeps;
  const double limit = leapfrog_stability_limit(*sys);
  if (!(dt < limit)) {
    throw StabilityError("leapfrog step " + std::to_string(dt) +
                         " violates the stability bound dt < 2/sqrt(lambda_max) = " +
                         std::to_string(limit));
  }
  const auto m = static_cast<std::size_t>(sys->m);
  // Row-major copy of S for the kernel (S is symmetric, so this is S itself).
  std::vector<double> S(sys->stiffness_S.data(), sys->stiffness_S.data() + m * m);
  std::vector<double> d(sys->xi.data(), sys->xi.data() + m);
  std::vector<double> v(sys->eta.data(), sys->eta.data() + m);
  std::vector<double> acc(m);
  dense_matvec(S, m, d, acc, exec);
  for (auto& x : acc) x = -x;

  ModalTrajectory traj;
  traj.system = sys;
  traj.d.resize(m * grid.nt);
  traj.d_dot.resize(m * grid.nt);
  std::copy(d.begin(), d.end(), traj.d.begin());
  std::copy(v.begin(), v.end(), traj.d_dot.begin());
  for (int j = 1; j < grid.nt; ++j) {
    for (int s = 0; s < substeps; ++s) leapfrog_step(S, m, dt, d, v, acc, exec);
    std::copy(d.begin(), d.end(), traj.d.begin() + j * m);
    std::copy(v.begin(), v.end(), traj.d_dot.begin() + j * m);
  }
  field.modal = std::move(traj);
  fill_from_coefficients(field, *sys, probes, exec);
  return field;
}

FrequencySpectrum modal_frequencies(const ModalSystem& sys, int count) {
  if (count < 0 || count > sys.m) throw DomainError("requested more frequencies than modes");
  FrequencySpectrum out;
  out.method = SpectrumMethod::EigenGalerkin;
  for (int r = 0; r < count; ++r) {
    out.frequencies_hz.push_back(std::sqrt(sys.eigenvalues[r]) / (2.0 * pi));
  }
  // Frequency equivalent of the eigensolver tolerance.
  if (count > 0) out.resolution_hz = 1e-12 * out.frequencies_hz.back();
  return out;
}

FrequencySpectrum galerkin_frequencies(const CableConfig& cfg, int m, int count) {
  if (count > m) throw DomainError("requested more frequencies than modes");
  auto eig = solve_modal_eigenproblem(cfg, m);
  ModalSystem sys;
  sys.m = m;
  sys.eigenvalues = std::move(eig.values);
  return modal_frequencies(sys, count);
}

double boundedness_constant(const CableConfig& cfg) {
  const double a2 = cfg.wave_speed_a() * cfg.wave_speed_a();
  double beta = 0.0;
  for (const auto& s : cfg.supports()) beta += s.beta_k;
  return a2 + cfg.point_factor() * beta * cfg.length_L() / 4.0;
}

double coercivity_constant(const CableConfig& cfg) {
  const double a = cfg.wave_speed_a();
  return a * a * std::pow(pi / cfg.length_L(), 2);
}

}  // namespace cable
