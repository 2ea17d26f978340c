#include "cable/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cable/errors.hpp"
#include "cable/quadrature.hpp"

namespace cable {

using std::numbers::pi;

double one_sided_slope_jump(std::span<const double> u, std::size_t i, double dx) {
  if (i < 2 || i + 2 >= u.size()) throw DomainError("slope jump stencil leaves the grid");
  const double left = (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * dx);
  const double right = (-3.0 * u[i] + 4.0 * u[i + 1] - u[i + 2]) / (2.0 * dx);
  return -left + right;
}

FdResult solve_fd_coupled(const CableConfig& cfg, const InitialData& init,
                          const SamplingGrid& grid, const FdOptions& options) {
  const double L = cfg.length_L();
  grid.validate(L);
  const int nx = grid.nx;
  const double dx = grid.dx(L);
  const double a = cfg.wave_speed_a();
  const double c = cfg.point_factor();

  FdResult out;
  double sigma_max = 0.0;
  for (const auto& s : cfg.supports()) {
    const auto node = static_cast<std::size_t>(std::llround(s.position_xk / dx));
    const double snap = std::abs(static_cast<double>(node) * dx - s.position_xk);
    if (snap > 0.5 * dx * (1.0 + 1e-12)) throw InternalError("support snap distance exceeds dx/2");
    if (node < 2 || node + 3 > static_cast<std::size_t>(nx)) {
      throw DomainError("support too close to an end for nx = " + std::to_string(nx));
    }
    if (!out.support_nodes.empty() && node <= out.support_nodes.back()) {
      throw DomainError("two supports snap to the same grid node; refine nx");
    }
    out.support_nodes.push_back(node);
    out.snap_distance.push_back(snap);
    sigma_max = std::max(sigma_max, c * s.sigma_k);
  }

  // Gershgorin bound of the discrete operator; reduces to the CFL condition when
  // there are no springs.
  const double lambda_max = a * a * (4.0 / (dx * dx) + sigma_max / dx);
  const double dt_out = grid.dt();
  int substeps = options.substeps;
  if (substeps <= 0) {
    if (!(options.target_cfl > 0.0 && options.target_cfl <= 1.0)) {
      throw DomainError("target CFL must lie in (0, 1]");
    }
    substeps = std::max(1, static_cast<int>(std::ceil(dt_out * std::sqrt(lambda_max) /
                                                      (2.0 * options.target_cfl))));
  }
  const double dt = dt_out / substeps;
  const double cfl = a * dt / dx;
  if (cfl > 1.0 || dt * std::sqrt(lambda_max) >= 2.0) {
    throw StabilityError("explicit step violates the CFL limit (a dt/dx = " + std::to_string(cfl) +
                         ")");
  }
  out.substeps = substeps;
  out.step = dt;
  out.cfl = cfl;

  const double r2 = cfl * cfl;
  std::vector<double> spring;
  for (const auto& s : cfg.supports()) spring.push_back(dt * dt * a * a * c * s.sigma_k / dx);

  std::vector<double> u0(nx), v0(nx);
  for (int i = 0; i < nx; ++i) {
    const double x = grid.x(i, L);
    u0[i] = init.phi(x);
    v0[i] = init.psi(x);
  }
  u0.front() = u0.back() = 0.0;
  v0.front() = v0.back() = 0.0;

  // Taylor start with the full discrete operator (springs included).
  std::vector<double> prev = u0, cur(nx), next(nx);
  for (int i = 1; i + 1 < nx; ++i) {
    cur[i] = u0[i] + dt * v0[i] + 0.5 * r2 * (u0[i + 1] - 2.0 * u0[i] + u0[i - 1]);
  }
  for (std::size_t k = 0; k < spring.size(); ++k) {
    cur[out.support_nodes[k]] -= 0.5 * spring[k] * u0[out.support_nodes[k]];
  }
  cur.front() = cur.back() = 0.0;

  out.field = make_empty_field(grid, L, MethodTag::FdCoupled);
  auto& field = out.field;
  std::copy(u0.begin(), u0.end(), field.values_u.begin());
  std::copy(v0.begin(), v0.end(), field.values_ut.begin());

  long step = 1;  // cur holds u at step `step`
  for (int j = 1; j < grid.nt; ++j) {
    const long target = static_cast<long>(j) * substeps;
    while (step < target) {
      wave_step(prev, cur, next, r2, out.support_nodes, spring, options.execution);
      std::swap(prev, cur);
      std::swap(cur, next);
      ++step;
    }
    wave_step(prev, cur, next, r2, out.support_nodes, spring, options.execution);
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    for (int i = 0; i < nx; ++i) {
      field.values_u[row + i] = cur[i];
      field.values_ut[row + i] = (next[i] - prev[i]) / (2.0 * dt);
    }
  }

  auto& trace = out.trace;
  for (int j = 0; j < grid.nt; ++j) trace.times.push_back(grid.t(j));
  for (std::size_t k = 0; k < out.support_nodes.size(); ++k) {
    const auto node = out.support_nodes[k];
    trace.support_positions.push_back(static_cast<double>(node) * dx);
    std::vector<double> h(grid.nt), jump(grid.nt);
    for (int j = 0; j < grid.nt; ++j) {
      h[j] = field.u(j, static_cast<int>(node));
      jump[j] = one_sided_slope_jump(field.row_u(j), node, dx);
    }
    trace.u_at_support.push_back(std::move(h));
    trace.slope_jump.push_back(std::move(jump));
  }
  return out;
}

namespace {

struct SegmentGeometry {
  double start;
  double span;
  double weight_at(double x, double L, double l) const {
    return start == 0.0 ? x / l : (L - x) / (L - l);
  }
};

const SupportSpec& single_support(const CableConfig& cfg) {
  if (cfg.supports().size() != 1) {
    throw CapabilityError("the two-segment series needs exactly one support");
  }
  return cfg.supports().front();
}

SegmentGeometry geometry(const CableConfig& cfg, Segment segment) {
  const double l = single_support(cfg).position_xk;
  return segment == Segment::Left ? SegmentGeometry{0.0, l}
                                  : SegmentGeometry{l, cfg.length_L() - l};
}

// Duhamel factor: solution of v'' + omega^2 v = -c_k h'' is G_k * int h'' sin(omega(t - tau)).
double duhamel_gain(Segment segment, int k, double a, double span) {
  const double kp = k * pi;
  if (segment == Segment::Left) return (2.0 / (kp * a)) * span * (k % 2 == 0 ? 1.0 : -1.0) / kp;
  return -(2.0 / (kp * a)) * span / kp;
}

}  // namespace

SegmentCoefficients fourier_coefficients(const CableConfig& cfg, const InitialData& init,
                                         double h0, double hp0, Segment segment, int n_terms,
                                         Execution exec) {
  if (n_terms < 1) throw DomainError("n_terms must be >= 1");
  const double L = cfg.length_L();
  const double l = single_support(cfg).position_xk;
  const double a = cfg.wave_speed_a();
  const auto geo = geometry(cfg, segment);
  // 64 panels per wavelength of the highest mode.
  const auto rule = quad::simpson_rule(geo.start, geo.start + geo.span, std::max(512, 32 * n_terms));
  const std::size_t n = rule.nodes.size();
  std::vector<double> theta(n), wphi(n), wpsi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    const double wt = geo.weight_at(x, L, l);
    theta[i] = pi * (x - geo.start) / geo.span;
    wphi[i] = rule.weights[i] * (init.phi(x) - wt * h0);
    wpsi[i] = rule.weights[i] * (init.psi(x) - wt * hp0);
  }
  SegmentCoefficients out;
  out.A.resize(n_terms);
  out.B.resize(n_terms);
  sine_projection(wphi, theta, 2.0 / geo.span, out.A, exec);
  sine_projection(wpsi, theta, 1.0, out.B, exec);
  for (int k = 1; k <= n_terms; ++k) out.B[k - 1] *= 2.0 / (k * pi * a);
  return out;
}

SeriesExpansion build_series_expansion(const CableConfig& cfg, const InitialData& init,
                                       std::span<const double> times, std::span<const double> h,
                                       int n_terms, Execution exec) {
  const auto& support = single_support(cfg);
  if (times.size() != h.size()) throw DomainError("times and h differ in length");
  if (times.size() < 5) throw DomainError("series expansion needs at least 5 h samples");
  if (n_terms < 1) throw DomainError("n_terms must be >= 1");
  const std::size_t nt = times.size();
  const double dt = times[1] - times[0];
  if (times[0] != 0.0 || !(dt > 0.0)) throw DomainError("h samples must start at t = 0");
  for (std::size_t j = 0; j < nt; ++j) {
    if (std::abs(times[j] - dt * static_cast<double>(j)) > 1e-9 * (1.0 + times.back())) {
      throw DomainError("h samples must be uniformly spaced");
    }
  }

  SeriesExpansion exp;
  exp.length = cfg.length_L();
  exp.support_l = support.position_xk;
  exp.wave_speed = cfg.wave_speed_a();
  exp.sigma = cfg.point_factor() * support.sigma_k;
  exp.n_terms = n_terms;
  exp.times.assign(times.begin(), times.end());
  exp.h.assign(h.begin(), h.end());

  auto& hdd = exp.h_ddot;
  hdd.resize(nt);
  const double inv = 1.0 / (dt * dt);
  for (std::size_t j = 1; j + 1 < nt; ++j) hdd[j] = (h[j + 1] - 2.0 * h[j] + h[j - 1]) * inv;
  hdd[0] = (2.0 * h[0] - 5.0 * h[1] + 4.0 * h[2] - h[3]) * inv;
  hdd[nt - 1] = (2.0 * h[nt - 1] - 5.0 * h[nt - 2] + 4.0 * h[nt - 3] - h[nt - 4]) * inv;

  auto& hd = exp.h_dot;
  hd.resize(nt);
  for (std::size_t j = 1; j + 1 < nt; ++j) hd[j] = (h[j + 1] - h[j - 1]) / (2.0 * dt);
  hd[0] = (h[1] - h[0]) / dt - 0.5 * dt * hdd[0];
  hd[nt - 1] = (3.0 * h[nt - 1] - 4.0 * h[nt - 2] + h[nt - 3]) / (2.0 * dt);

  exp.left = fourier_coefficients(cfg, init, h[0], hd[0], Segment::Left, n_terms, exec);
  exp.right = fourier_coefficients(cfg, init, h[0], hd[0], Segment::Right, n_terms, exec);

  for (Segment seg : {Segment::Left, Segment::Right}) {
    const auto geo = geometry(cfg, seg);
    std::vector<double> omega(n_terms);
    for (int k = 1; k <= n_terms; ++k) omega[k - 1] = k * pi * exp.wave_speed / geo.span;
    auto& C = seg == Segment::Left ? exp.cos_left : exp.cos_right;
    auto& S = seg == Segment::Left ? exp.sin_left : exp.sin_right;
    C.resize(nt * n_terms);
    S.resize(nt * n_terms);
    duhamel_accumulate(hdd, dt, omega, C, S, exec);
  }
  return exp;
}

SeriesDerivatives evaluate_series_branch(const SeriesExpansion& exp, Segment segment, double x,
                                         double t) {
  const double L = exp.length;
  const double l = exp.support_l;
  const bool left = segment == Segment::Left;
  const double start = left ? 0.0 : l;
  const double span = left ? l : L - l;
  const double tol = 1e-12 * L;
  if (x < start - tol || x > start + span + tol) throw DomainError("x outside the segment");
  if (exp.times.empty() || t < 0.0 || t > exp.times.back() * (1.0 + 1e-12)) {
    throw DomainError("t beyond the sampled h(t)");
  }

  // Time interpolation weights on the h grid.
  const double dt = exp.dt();
  const std::size_t nt = exp.times.size();
  double s = t / dt;
  const double r = std::round(s);
  if (std::abs(s - r) <= 1e-9) s = r;
  const auto j0 = std::min(static_cast<std::size_t>(s), nt - 2);
  const double f = std::clamp(s - static_cast<double>(j0), 0.0, 1.0);
  auto lerp = [&](const std::vector<double>& v, std::size_t stride, std::size_t off) {
    const double a0 = v[j0 * stride + off];
    if (f == 0.0) return a0;
    const double a1 = v[(j0 + 1) * stride + off];
    if (f == 1.0) return a1;
    return a0 * (1.0 - f) + a1 * f;
  };

  const double h = lerp(exp.h, 1, 0);
  const double hd = lerp(exp.h_dot, 1, 0);
  const double hdd = lerp(exp.h_ddot, 1, 0);
  const double wt = left ? x / l : (L - x) / (L - l);
  const double wt_x = left ? 1.0 / l : -1.0 / (L - l);
  const auto& coef = left ? exp.left : exp.right;
  const auto& C = left ? exp.cos_left : exp.cos_right;
  const auto& S = left ? exp.sin_left : exp.sin_right;
  const auto K = static_cast<std::size_t>(exp.n_terms);
  const double y = x - start;

  SeriesDerivatives out;
  out.u = wt * h;
  out.ut = wt * hd;
  out.utt = wt * hdd;
  out.ux = wt_x * h;
  out.uxx = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double kappa = static_cast<double>(k) * pi / span;
    const double w = kappa * exp.wave_speed;
    const double G = duhamel_gain(segment, static_cast<int>(k), exp.wave_speed, span);
    const double ct = std::cos(w * t), st = std::sin(w * t);
    const double Ck = lerp(C, K, k - 1), Sk = lerp(S, K, k - 1);
    const double A = coef.A[k - 1], B = coef.B[k - 1];
    const double T = A * ct + B * st + G * (st * Ck - ct * Sk);
    const double Td = -A * w * st + B * w * ct + G * w * (ct * Ck + st * Sk);
    const double Tdd = -w * w * T + G * w * hdd;
    const double sy = std::sin(kappa * y), cy = std::cos(kappa * y);
    out.u += T * sy;
    out.ut += Td * sy;
    out.utt += Tdd * sy;
    out.ux += T * kappa * cy;
    out.uxx -= T * kappa * kappa * sy;
  }
  return out;
}

double evaluate_series_solution(const SeriesExpansion& exp, double x, double t) {
  if (x < 0.0 || x > exp.length) throw DomainError("x outside [0, L]");
  const auto seg = x <= exp.support_l ? Segment::Left : Segment::Right;
  return evaluate_series_branch(exp, seg, x, t).u;
}

double h_consistency_residual(const SeriesExpansion& exp, const CableConfig& cfg,
                              const InitialData& /*init*/, double t) {
  const auto& support = single_support(cfg);
  if (support.position_xk != exp.support_l || cfg.length_L() != exp.length) {
    throw DomainError("expansion was built for a different configuration");
  }
  if (exp.times.size() < 5) throw DomainError("h_consistency_residual needs >= 5 h samples");
  const double l = exp.support_l;
  const auto left = evaluate_series_branch(exp, Segment::Left, l, t);
  const auto right = evaluate_series_branch(exp, Segment::Right, l, t);
  return -left.ux + right.ux - exp.sigma * left.u;
}

double initial_compatibility_residual(const CableConfig& cfg, const InitialData& init, double h0,
                                      int n_terms) {
  const double l = single_support(cfg).position_xk;
  const double span = cfg.length_L() - l;
  const auto left = fourier_coefficients(cfg, init, h0, 0.0, Segment::Left, n_terms);
  const auto right = fourier_coefficients(cfg, init, h0, 0.0, Segment::Right, n_terms);
  std::vector<double> terms;
  terms.reserve(2 * n_terms + 2);
  for (int k = 1; k <= n_terms; ++k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    terms.push_back(-left.A[k - 1] * sign * k * pi / l);
    terms.push_back(right.A[k - 1] * k * pi / span);
  }
  terms.push_back(-h0 / l);
  terms.push_back(-h0 / span);
  return quad::pairwise_sum(terms);
}

TruncationSweep initial_compatibility_sweep(const CableConfig& cfg, const InitialData& init,
                                            double h0, std::span<const int> n_terms) {
  TruncationSweep sweep;
  for (int n : n_terms) {
    sweep.n_terms.push_back(n);
    sweep.residual.push_back(initial_compatibility_residual(cfg, init, h0, n));
  }
  for (std::size_t i = 1; i < sweep.residual.size(); ++i) {
    sweep.cauchy_difference.push_back(std::abs(sweep.residual[i] - sweep.residual[i - 1]));
  }
  return sweep;
}

CompatibilityFlags compatibility_flags(const CableConfig& cfg, const InitialData& init, double h0,
                                       double hp0) {
  const double L = cfg.length_L();
  const double l = single_support(cfg).position_xk;
  constexpr double kValueTol = 1e-10;
  constexpr double kCurvatureTol = 1e-6;
  const double step = 1e-3 * std::min(l, L - l);

  // The linear lifts drop out of second derivatives, so phi_s'' = phi''.
  auto curvature_inward = [&](double x, double dir) {
    const double p0 = init.phi(x), p1 = init.phi(x + dir * step), p2 = init.phi(x + 2 * dir * step),
                 p3 = init.phi(x + 3 * dir * step);
    return (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) / (step * step);
  };
  auto small = [](double v, double tol) { return std::abs(v) <= tol; };

  CompatibilityFlags f;
  f.left_ends_vanish = small(init.phi(0.0), kValueTol) && small(init.phi(l) - h0, kValueTol);
  f.right_ends_vanish = small(init.phi(L), kValueTol) && small(init.phi(l) - h0, kValueTol);
  f.left_curvature_vanish =
      small(curvature_inward(0.0, 1.0), kCurvatureTol) && small(curvature_inward(l, -1.0), kCurvatureTol);
  f.right_curvature_vanish =
      small(curvature_inward(L, -1.0), kCurvatureTol) && small(curvature_inward(l, 1.0), kCurvatureTol);
  f.left_velocity_vanish = small(init.psi(0.0), kValueTol) && small(init.psi(l) - hp0, kValueTol);
  f.right_velocity_vanish = small(init.psi(L), kValueTol) && small(init.psi(l) - hp0, kValueTol);
  return f;
}

}  // namespace cable
