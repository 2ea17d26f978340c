#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "cable/classical.hpp"
#include "cable/galerkin.hpp"
#include "cable/model.hpp"
#include "cable/wave_field.hpp"

namespace cable {

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> E;   // int (u_t^2 + a^2 u_x^2) + sum_k c a^2 sigma_k u(x_k)^2
  std::vector<double> E0;  // int u^2
  double drift = 0.0;      // max_t |E(t) - E(0)| / E(0), 0 when E(0) = 0
};

/// Exact modal evaluation when the field carries a Galerkin trajectory,
/// grid quadrature otherwise.
EnergyReport energy(const WaveField& field, const CableConfig& cfg);

/// Trapezoid quadrature per segment with fourth-order differences for u_x,
/// one-sided at the ends and on both sides of every support node.
EnergyReport energy_on_grid(const WaveField& field, const CableConfig& cfg);

struct BoundReport {
  std::vector<double> times;
  std::vector<double> lhs;  // E0_w(t)
  std::vector<double> rhs;  // e^t E0_w(0) + (e^t - 1) E_w(0)
  double E0_initial = 0.0;
  double E_initial = 0.0;
  double min_slack = 0.0;  // min_t (rhs - lhs)
  double max_slack = 0.0;
  bool holds = true;  // lhs <= rhs (1 + tol) everywhere
};

/// Continuous-dependence bound for w = field1 - field2.
BoundReport stability_bound_check(const WaveField& field1, const WaveField& field2,
                                  const CableConfig& cfg, double tol = 1e-6);

enum Capability : unsigned {
  kValue = 1u << 0,
  kVelocity = 1u << 1,
  kSlope = 1u << 2,
  kAcceleration = 1u << 3,
  kCurvature = 1u << 4,
  kAllCapabilities = kValue | kVelocity | kSlope | kAcceleration | kCurvature,
};

/// Which side of a support a one-sided quantity is taken from.
enum class Side { Left, Right };

struct PointDerivatives {
  double u = 0.0;
  double ut = 0.0;
  double ux = 0.0;
  double utt = 0.0;
  double uxx = 0.0;
};

/// A candidate solution the collocation loss can query.
class SolutionEvaluator {
 public:
  virtual ~SolutionEvaluator() = default;
  virtual unsigned capabilities() const = 0;
  /// Values at (x, t); at a support, derivatives are one-sided from `side`.
  virtual PointDerivatives at(double x, double t, Side side) const = 0;
  /// u_tt - a^2 u_xx. The default uses at(); modal candidates override it
  /// with an algebraically identical but cheaper form.
  virtual double wave_residual(double x, double t, double a2, Side side) const;
};

/// Truncated Galerkin field. With fejer set, the modal sum is Cesaro-averaged
/// (weights 1 - j/(m+1)), which removes the Gibbs oscillation of the
/// point-load residual. One-sided slopes at a support are read offset_cells * L/m
/// away from it, outside the band where the truncated series smooths the kink.
class ModalEvaluator final : public SolutionEvaluator {
 public:
  explicit ModalEvaluator(std::shared_ptr<const ModalSystem> sys, bool fejer = true,
                          double offset_cells = 1.0);
  unsigned capabilities() const override { return kAllCapabilities; }
  PointDerivatives at(double x, double t, Side side) const override;
  double wave_residual(double x, double t, double a2, Side side) const override;

 private:
  struct Row {
    Eigen::VectorXd value, slope, curvature;  // projected onto eigencoordinates
  };
  const Row& row(double x) const;
  PointDerivatives smooth_at(double x, double t) const;
  void eigen_state(double t, Eigen::VectorXd& q, Eigen::VectorXd& qd) const;

  std::shared_ptr<const ModalSystem> sys_;
  Eigen::VectorXd filter_;
  Eigen::VectorXd omega_, q0_, p0_;
  double offset_;
  std::vector<Eigen::VectorXd> support_rows_;  // unfiltered values at supports
  Eigen::VectorXd acc0_;                       // -S xi
  mutable std::mutex mutex_;
  mutable std::unordered_map<double, Row> rows_;
};

/// Two-segment series with analytic derivatives; h-driven terms use the
/// interpolated samples.
class SeriesEvaluator final : public SolutionEvaluator {
 public:
  explicit SeriesEvaluator(SeriesExpansion exp) : exp_(std::move(exp)) {}
  unsigned capabilities() const override { return kAllCapabilities; }
  PointDerivatives at(double x, double t, Side side) const override;

 private:
  SeriesExpansion exp_;
};

/// amplitude * w_k(x) cos(k pi a t / L) with analytic derivatives.
class StandingWaveEvaluator final : public SolutionEvaluator {
 public:
  StandingWaveEvaluator(double length, double wave_speed, int k, double amplitude);
  unsigned capabilities() const override { return kAllCapabilities; }
  PointDerivatives at(double x, double t, Side side) const override;

 private:
  double length_, wave_speed_, amplitude_;
  int k_;
};

/// Sampled field; derivatives by finite differences on the grid, one-sided
/// next to supports so the kink stays out of the stencils.
class GridFieldEvaluator final : public SolutionEvaluator {
 public:
  GridFieldEvaluator(std::shared_ptr<const WaveField> field, std::vector<double> supports,
                     unsigned capabilities = kAllCapabilities);
  unsigned capabilities() const override { return caps_; }
  PointDerivatives at(double x, double t, Side side) const override;

 private:
  std::shared_ptr<const WaveField> field_;
  std::vector<std::size_t> support_nodes_;
  unsigned caps_;
};

struct LossWeights {
  double pde = 1.0;
  double ic = 1.0;
  double bc = 1.0;
  double cc = 1.0;
};

struct CollocationCounts {
  int pde_left = 200;
  int pde_right = 600;
  int ic_left = 200;
  int ic_right = 600;
  int bc = 100;
  int cc_continuity = 200;
  int cc_jump = 600;
};

struct LossReport {
  double mse_pde = 0.0;
  double mse_ic = 0.0;
  double mse_bc = 0.0;
  double mse_cc = 0.0;
  LossWeights weights;
  double total = 0.0;
};

/// Weighted collocation loss over [0, horizon]. PDE points lie on a rank-1
/// lattice per segment (x uniform cell centres, t by the golden ratio); IC
/// points are cell centres; BC and CC times are uniform. Without supports the
/// whole span is one segment with pde_left + pde_right points.
LossReport collocation_loss(const SolutionEvaluator& candidate, const CableConfig& cfg,
                            const InitialData& init, double horizon,
                            const LossWeights& weights = {},
                            const CollocationCounts& counts = {});

}  // namespace cable
