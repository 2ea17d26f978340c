#include "cable/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cable/errors.hpp"
#include "cable/quadrature.hpp"

namespace cable {

using std::numbers::pi;

namespace {

double drift_of(const std::vector<double>& E) {
  if (E.empty()) return 0.0;
  double worst = 0.0;
  for (double e : E) worst = std::max(worst, std::abs(e - E.front()));
  if (E.front() == 0.0) return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return worst / E.front();
}

// Fourth-order first derivative on samples s[0..n-1], one-sided at both ends.
void slope_on_segment(std::span<const double> s, double dx, std::vector<double>& d) {
  const std::size_t n = s.size();
  d.assign(n, 0.0);
  if (n < 5) {
    for (std::size_t i = 0; i < n; ++i) {
      if (n == 1) break;
      if (i == 0) d[i] = (s[1] - s[0]) / dx;
      else if (i == n - 1) d[i] = (s[n - 1] - s[n - 2]) / dx;
      else d[i] = (s[i + 1] - s[i - 1]) / (2 * dx);
    }
    return;
  }
  const double h12 = 12.0 * dx;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    d[i] = (s[i - 2] - 8.0 * s[i - 1] + 8.0 * s[i + 1] - s[i + 2]) / h12;
  }
  d[0] = (-25.0 * s[0] + 48.0 * s[1] - 36.0 * s[2] + 16.0 * s[3] - 3.0 * s[4]) / h12;
  d[1] = (-3.0 * s[0] - 10.0 * s[1] + 18.0 * s[2] - 6.0 * s[3] + s[4]) / h12;
  d[n - 1] = (25.0 * s[n - 1] - 48.0 * s[n - 2] + 36.0 * s[n - 3] - 16.0 * s[n - 4] +
              3.0 * s[n - 5]) / h12;
  d[n - 2] = (3.0 * s[n - 1] + 10.0 * s[n - 2] - 18.0 * s[n - 3] + 6.0 * s[n - 4] - s[n - 5]) /
             h12;
}

std::vector<std::size_t> nodes_for(const CableConfig& cfg, int nx) {
  const double dx = cfg.length_L() / (nx - 1);
  std::vector<std::size_t> nodes;
  for (const auto& s : cfg.supports()) {
    const auto node = static_cast<std::size_t>(std::llround(s.position_xk / dx));
    nodes.push_back(std::clamp<std::size_t>(node, 1, static_cast<std::size_t>(nx - 2)));
  }
  return nodes;
}

}  // namespace

EnergyReport energy_on_grid(const WaveField& field, const CableConfig& cfg) {
  const auto& g = field.grid;
  const double dx = g.dx(field.length);
  const double a2 = cfg.wave_speed_a() * cfg.wave_speed_a();
  const double c = cfg.point_factor();
  const auto nodes = nodes_for(cfg, g.nx);

  std::vector<std::size_t> cuts{0};
  for (auto n : nodes) cuts.push_back(n);
  cuts.push_back(static_cast<std::size_t>(g.nx - 1));

  EnergyReport rep;
  rep.times.resize(g.nt);
  rep.E.resize(g.nt);
  rep.E0.resize(g.nt);
  std::vector<double> slope, sq;
  for (int j = 0; j < g.nt; ++j) {
    const auto u = field.row_u(j);
    const auto ut = field.row_ut(j);
    sq.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) sq[i] = ut[i] * ut[i];
    double e = quad::trapezoid(sq, dx);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const auto seg = u.subspan(cuts[s], cuts[s + 1] - cuts[s] + 1);
      slope_on_segment(seg, dx, slope);
      for (auto& v : slope) v *= v;
      e += a2 * quad::trapezoid(slope, dx);
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      e += c * a2 * cfg.supports()[k].sigma_k * u[nodes[k]] * u[nodes[k]];
    }
    for (std::size_t i = 0; i < u.size(); ++i) sq[i] = u[i] * u[i];
    rep.times[j] = g.t(j);
    rep.E[j] = e;
    rep.E0[j] = quad::trapezoid(sq, dx);
  }
  rep.drift = drift_of(rep.E);
  return rep;
}

EnergyReport energy(const WaveField& field, const CableConfig& cfg) {
  if (!field.modal || !field.modal->system) return energy_on_grid(field, cfg);
  const auto& sys = *field.modal->system;
  const auto m = static_cast<Eigen::Index>(sys.m);
  const auto& g = field.grid;
  EnergyReport rep;
  rep.times.resize(g.nt);
  rep.E.resize(g.nt);
  rep.E0.resize(g.nt);
  for (int j = 0; j < g.nt; ++j) {
    Eigen::Map<const Eigen::VectorXd> d(field.modal->d.data() + j * m, m);
    Eigen::Map<const Eigen::VectorXd> v(field.modal->d_dot.data() + j * m, m);
    rep.times[j] = g.t(j);
    // |d'|^2 + d^T S d: kinetic, elastic and point-spring terms in one form.
    rep.E[j] = v.squaredNorm() + d.dot(sys.stiffness_S * d);
    rep.E0[j] = d.squaredNorm();
  }
  rep.drift = drift_of(rep.E);
  return rep;
}

BoundReport stability_bound_check(const WaveField& field1, const WaveField& field2,
                                  const CableConfig& cfg, double tol) {
  const WaveField w = difference(field1, field2);
  const auto rep = energy(w, cfg);
  BoundReport out;
  out.times = rep.times;
  out.E0_initial = rep.E0.front();
  out.E_initial = rep.E.front();
  out.min_slack = std::numeric_limits<double>::infinity();
  out.max_slack = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rep.times.size(); ++j) {
    const double et = std::exp(rep.times[j]);
    const double rhs = et * out.E0_initial + (et - 1.0) * out.E_initial;
    const double lhs = rep.E0[j];
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs);
    out.min_slack = std::min(out.min_slack, rhs - lhs);
    out.max_slack = std::max(out.max_slack, rhs - lhs);
    if (lhs > rhs * (1.0 + tol)) out.holds = false;
  }
  return out;
}

double SolutionEvaluator::wave_residual(double x, double t, double a2, Side side) const {
  const auto p = at(x, t, side);
  return p.utt - a2 * p.uxx;
}

// ---------------------------------------------------------------------------

ModalEvaluator::ModalEvaluator(std::shared_ptr<const ModalSystem> sys, bool fejer,
                               double offset_cells)
    : sys_(std::move(sys)) {
  if (!sys_) throw DomainError("ModalEvaluator needs a modal system");
  const int m = sys_->m;
  filter_.resize(m);
  for (int j = 1; j <= m; ++j) filter_[j - 1] = fejer ? 1.0 - j / (m + 1.0) : 1.0;
  omega_ = sys_->eigenvalues.array().sqrt();
  q0_ = sys_->eigenvectors.transpose() * sys_->xi;
  p0_ = sys_->eigenvectors.transpose() * sys_->eta;
  offset_ = offset_cells * sys_->length / m;
  for (double xk : sys_->support_positions) {
    Eigen::VectorXd w(m);
    for (int j = 1; j <= m; ++j) w[j - 1] = basis_value(j, xk, sys_->length);
    support_rows_.push_back(sys_->eigenvectors.transpose() * w);
  }
  acc0_ = -(sys_->stiffness_S * sys_->xi);
}

const ModalEvaluator::Row& ModalEvaluator::row(double x) const {
  std::lock_guard lock(mutex_);
  if (auto it = rows_.find(x); it != rows_.end()) return it->second;
  const int m = sys_->m;
  const double L = sys_->length;
  Eigen::VectorXd v(m), s(m), c(m);
  for (int j = 1; j <= m; ++j) {
    const double k = j * pi / L;
    const double f = filter_[j - 1];
    v[j - 1] = f * basis_value(j, x, L);
    s[j - 1] = f * basis_slope(j, x, L);
    c[j - 1] = -k * k * v[j - 1];
  }
  Row r;
  r.value = sys_->eigenvectors.transpose() * v;
  r.slope = sys_->eigenvectors.transpose() * s;
  r.curvature = sys_->eigenvectors.transpose() * c;
  return rows_.emplace(x, std::move(r)).first->second;
}

void ModalEvaluator::eigen_state(double t, Eigen::VectorXd& q, Eigen::VectorXd& qd) const {
  const auto m = omega_.size();
  q.resize(m);
  qd.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double w = omega_[r];
    const double c = std::cos(w * t), s = std::sin(w * t);
    q[r] = q0_[r] * c + p0_[r] * s / w;
    qd[r] = -q0_[r] * w * s + p0_[r] * c;
  }
}

PointDerivatives ModalEvaluator::smooth_at(double x, double t) const {
  const int m = sys_->m;
  const double L = sys_->length;
  PointDerivatives p;
  if (t == 0.0) {
    // d(0) = xi, d'(0) = eta, d''(0) = -S xi: no eigen-projection needed.
    for (int j = 1; j <= m; ++j) {
      const double k = j * pi / L;
      const double f = filter_[j - 1];
      const double w = f * basis_value(j, x, L);
      const double ws = f * basis_slope(j, x, L);
      p.u += sys_->xi[j - 1] * w;
      p.ut += sys_->eta[j - 1] * w;
      p.utt += acc0_[j - 1] * w;
      p.ux += sys_->xi[j - 1] * ws;
      p.uxx -= k * k * sys_->xi[j - 1] * w;
    }
    return p;
  }
  Eigen::VectorXd q, qd;
  eigen_state(t, q, qd);
  const Row& r = row(x);
  p.u = r.value.dot(q);
  p.ut = r.value.dot(qd);
  p.utt = -r.value.dot(sys_->eigenvalues.cwiseProduct(q));
  p.ux = r.slope.dot(q);
  p.uxx = r.curvature.dot(q);
  return p;
}

PointDerivatives ModalEvaluator::at(double x, double t, Side side) const {
  PointDerivatives p = smooth_at(x, t);
  for (double xk : sys_->support_positions) {
    if (std::abs(x - xk) <= 1e-12 * sys_->length) {
      const double xs = side == Side::Left ? x - offset_ : x + offset_;
      const auto q = smooth_at(xs, t);
      p.ux = q.ux;
      p.uxx = q.uxx;
      break;
    }
  }
  return p;
}

double ModalEvaluator::wave_residual(double x, double t, double /*a2*/, Side /*side*/) const {
  // Summing d_j'' + a^2 (j pi/L)^2 d_j = -(point terms)_j against the filtered
  // basis gives -sum_k c beta_k u(x_k, t) K(x, x_k) with the filtered kernel K.
  if (sys_->support_positions.empty()) return 0.0;
  Eigen::VectorXd q, qd;
  eigen_state(t, q, qd);
  const int m = sys_->m;
  const double L = sys_->length;
  double r = 0.0;
  for (std::size_t k = 0; k < sys_->support_positions.size(); ++k) {
    const double xk = sys_->support_positions[k];
    const double uk = t == 0.0 ? [&] {
      double s = 0.0;
      for (int j = 1; j <= m; ++j) s += sys_->xi[j - 1] * basis_value(j, xk, L);
      return s;
    }()
                               : support_rows_[k].dot(q);
    double kernel = 0.0;
    for (int j = 1; j <= m; ++j) {
      kernel += filter_[j - 1] * basis_value(j, x, L) * basis_value(j, xk, L);
    }
    r -= sys_->point_weights[k] * uk * kernel;
  }
  return r;
}

// ---------------------------------------------------------------------------

PointDerivatives SeriesEvaluator::at(double x, double t, Side side) const {
  Segment seg;
  if (x < exp_.support_l) seg = Segment::Left;
  else if (x > exp_.support_l) seg = Segment::Right;
  else seg = side == Side::Left ? Segment::Left : Segment::Right;
  const auto s = evaluate_series_branch(exp_, seg, x, t);
  return {s.u, s.ut, s.ux, s.utt, s.uxx};
}

StandingWaveEvaluator::StandingWaveEvaluator(double length, double wave_speed, int k,
                                             double amplitude)
    : length_(length), wave_speed_(wave_speed), amplitude_(amplitude), k_(k) {
  if (k < 1) throw DomainError("mode index must be >= 1");
}

PointDerivatives StandingWaveEvaluator::at(double x, double t, Side) const {
  const double kappa = k_ * pi / length_;
  const double w = kappa * wave_speed_;
  const double norm = amplitude_ * std::sqrt(2.0 / length_);
  const double sx = std::sin(kappa * x), cx = std::cos(kappa * x);
  const double ct = std::cos(w * t), st = std::sin(w * t);
  PointDerivatives p;
  p.u = norm * sx * ct;
  p.ut = -norm * w * sx * st;
  p.utt = -norm * w * w * sx * ct;
  p.ux = norm * kappa * cx * ct;
  p.uxx = -norm * kappa * kappa * sx * ct;
  return p;
}

// ---------------------------------------------------------------------------

GridFieldEvaluator::GridFieldEvaluator(std::shared_ptr<const WaveField> field,
                                       std::vector<double> supports, unsigned capabilities)
    : field_(std::move(field)), caps_(capabilities) {
  if (!field_) throw DomainError("GridFieldEvaluator needs a field");
  const double dx = field_->grid.dx(field_->length);
  for (double xk : supports) {
    support_nodes_.push_back(static_cast<std::size_t>(std::llround(xk / dx)));
  }
}

PointDerivatives GridFieldEvaluator::at(double x, double t, Side side) const {
  const auto& f = *field_;
  const auto& g = f.grid;
  const int nx = g.nx, nt = g.nt;
  const double dx = g.dx(f.length), dt = g.dt();
  if (!(x >= 0.0 && x <= f.length) || !(t >= 0.0 && t <= g.horizon)) {
    throw DomainError("query point outside the sampled domain");
  }
  auto snap = [](double s) {
    const double r = std::round(s);
    return std::abs(s - r) <= 1e-9 ? r : s;
  };
  const double sx = snap(x / dx), st = snap(t / dt);
  const int i0 = std::min(static_cast<int>(sx), nx - 2);
  const int j0 = std::min(static_cast<int>(st), nt - 2);
  const double fx = std::clamp(sx - i0, 0.0, 1.0);
  const double ft = std::clamp(st - j0, 0.0, 1.0);

  auto is_support = [&](int i) {
    return std::find(support_nodes_.begin(), support_nodes_.end(), static_cast<std::size_t>(i)) !=
           support_nodes_.end();
  };
  // Direction (+1 forward, -1 backward) for one-sided stencils at node i, or 0.
  auto one_sided = [&](int i, Side s) {
    if (i == 0) return 1;
    if (i == nx - 1) return -1;
    if (is_support(i)) return s == Side::Left ? -1 : 1;
    return 0;
  };
  auto ux_node = [&](int j, int i, Side s) {
    const int dir = one_sided(i, s);
    if (dir == 0) return (f.u(j, i + 1) - f.u(j, i - 1)) / (2 * dx);
    return dir * (-3.0 * f.u(j, i) + 4.0 * f.u(j, i + dir) - f.u(j, i + 2 * dir)) / (2 * dx);
  };
  auto uxx_node = [&](int j, int i, Side s) {
    const int dir = one_sided(i, s);
    if (dir == 0) return (f.u(j, i + 1) - 2.0 * f.u(j, i) + f.u(j, i - 1)) / (dx * dx);
    return (2.0 * f.u(j, i) - 5.0 * f.u(j, i + dir) + 4.0 * f.u(j, i + 2 * dir) -
            f.u(j, i + 3 * dir)) / (dx * dx);
  };
  auto utt_node = [&](int j, int i) {
    if (j == 0) return (-3.0 * f.ut(0, i) + 4.0 * f.ut(1, i) - f.ut(2, i)) / (2 * dt);
    if (j == nt - 1) return (3.0 * f.ut(j, i) - 4.0 * f.ut(j - 1, i) + f.ut(j - 2, i)) / (2 * dt);
    return (f.ut(j + 1, i) - f.ut(j - 1, i)) / (2 * dt);
  };

  // Corner sides: a support corner is seen from inside the cell, unless the
  // query sits exactly on it.
  const Side left_corner = fx == 0.0 ? side : Side::Right;
  const Side right_corner = fx == 1.0 ? side : Side::Left;
  auto blend = [&](auto at) {
    const double a = at(j0, i0, left_corner) * (1 - fx) + at(j0, i0 + 1, right_corner) * fx;
    const double b = at(j0 + 1, i0, left_corner) * (1 - fx) + at(j0 + 1, i0 + 1, right_corner) * fx;
    return a * (1 - ft) + b * ft;
  };
  PointDerivatives p;
  p.u = blend([&](int j, int i, Side) { return f.u(j, i); });
  p.ut = blend([&](int j, int i, Side) { return f.ut(j, i); });
  p.ux = blend(ux_node);
  p.uxx = blend(uxx_node);
  p.utt = blend([&](int j, int i, Side) { return utt_node(j, i); });
  return p;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kGolden = 0.6180339887498949;

void require(const SolutionEvaluator& e, unsigned needed, const char* term) {
  const unsigned missing = needed & ~e.capabilities();
  if (missing == 0) return;
  std::string names;
  const std::pair<unsigned, const char*> table[] = {{kValue, "u"},
                                                    {kVelocity, "u_t"},
                                                    {kSlope, "u_x"},
                                                    {kAcceleration, "u_tt"},
                                                    {kCurvature, "u_xx"}};
  for (auto [bit, name] : table) {
    if (missing & bit) names += std::string(names.empty() ? "" : ", ") + name;
  }
  throw CapabilityError(std::string("candidate cannot provide ") + names + " needed for the " +
                        term + " term");
}

double mean(std::vector<double>& terms) {
  if (terms.empty()) return 0.0;
  return quad::pairwise_sum(terms) / static_cast<double>(terms.size());
}

struct SegmentSpan {
  double start, end;
  int pde_points, ic_points;
};

std::vector<SegmentSpan> segments(const CableConfig& cfg, const CollocationCounts& n) {
  const double L = cfg.length_L();
  std::vector<double> cuts{0.0};
  for (const auto& s : cfg.supports()) cuts.push_back(s.position_xk);
  cuts.push_back(L);
  std::vector<SegmentSpan> out;
  if (cuts.size() == 2) {
    out.push_back({0.0, L, n.pde_left + n.pde_right, n.ic_left + n.ic_right});
    return out;
  }
  // First segment takes the left counts; the rest share the right counts by length.
  out.push_back({cuts[0], cuts[1], n.pde_left, n.ic_left});
  const double rest = L - cuts[1];
  for (std::size_t s = 1; s + 1 < cuts.size(); ++s) {
    const double share = (cuts[s + 1] - cuts[s]) / rest;
    out.push_back({cuts[s], cuts[s + 1],
                   std::max(1, static_cast<int>(std::lround(share * n.pde_right))),
                   std::max(1, static_cast<int>(std::lround(share * n.ic_right)))});
  }
  return out;
}

double uniform_time(int i, int n, double horizon) {
  return n == 1 ? 0.0 : horizon * static_cast<double>(i) / (n - 1);
}

}  // namespace

LossReport collocation_loss(const SolutionEvaluator& candidate, const CableConfig& cfg,
                            const InitialData& init, double horizon, const LossWeights& weights,
                            const CollocationCounts& counts) {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  if (weights.pde < 0 || weights.ic < 0 || weights.bc < 0 || weights.cc < 0) {
    throw DomainError("loss weights must be nonnegative");
  }
  require(candidate, kAcceleration | kCurvature, "PDE");
  require(candidate, kValue | kVelocity, "initial-condition");
  require(candidate, kValue, "boundary");
  if (!cfg.supports().empty()) require(candidate, kValue | kSlope, "constraint");

  const double a2 = cfg.wave_speed_a() * cfg.wave_speed_a();
  const double L = cfg.length_L();
  LossReport rep;
  rep.weights = weights;

  std::vector<double> terms;
  for (const auto& seg : segments(cfg, counts)) {
    terms.clear();
    for (int i = 0; i < seg.pde_points; ++i) {
      const double x = seg.start + (seg.end - seg.start) * (i + 0.5) / seg.pde_points;
      const double t = horizon * std::fmod((i + 0.5) * kGolden, 1.0);
      const double r = candidate.wave_residual(x, t, a2, Side::Left);
      terms.push_back(r * r);
    }
    rep.mse_pde += mean(terms);

    terms.clear();
    for (int i = 0; i < seg.ic_points; ++i) {
      const double x = seg.start + (seg.end - seg.start) * (i + 0.5) / seg.ic_points;
      const auto p = candidate.at(x, 0.0, Side::Left);
      const double du = p.u - init.phi(x);
      const double dv = p.ut - init.psi(x);
      terms.push_back(du * du + dv * dv);
    }
    rep.mse_ic += mean(terms);
  }

  terms.clear();
  for (int i = 0; i < counts.bc; ++i) {
    const double t = uniform_time(i, counts.bc, horizon);
    const double u0 = candidate.at(0.0, t, Side::Right).u;
    const double uL = candidate.at(L, t, Side::Left).u;
    terms.push_back(u0 * u0 + uL * uL);
  }
  rep.mse_bc = mean(terms);

  for (const auto& s : cfg.supports()) {
    const double sigma = cfg.point_factor() * s.sigma_k;
    terms.clear();
    for (int i = 0; i < counts.cc_continuity; ++i) {
      const double t = uniform_time(i, counts.cc_continuity, horizon);
      const double gap = candidate.at(s.position_xk, t, Side::Left).u -
                         candidate.at(s.position_xk, t, Side::Right).u;
      terms.push_back(gap * gap);
    }
    rep.mse_cc += mean(terms);
    terms.clear();
    for (int i = 0; i < counts.cc_jump; ++i) {
      const double t = uniform_time(i, counts.cc_jump, horizon);
      const auto left = candidate.at(s.position_xk, t, Side::Left);
      const auto right = candidate.at(s.position_xk, t, Side::Right);
      const double r = -left.ux + right.ux - sigma * left.u;
      terms.push_back(r * r);
    }
    rep.mse_cc += mean(terms);
  }

  rep.total = weights.pde * rep.mse_pde + weights.ic * rep.mse_ic + weights.bc * rep.mse_bc +
              weights.cc * rep.mse_cc;
  return rep;
}

}  // namespace cable
