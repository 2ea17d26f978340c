#pragma once

#include <span>
#include <vector>

#include "cable/kernels.hpp"
#include "cable/model.hpp"
#include "cable/wave_field.hpp"

namespace cable {

/// Support trajectories recorded by the finite-difference solver.
struct InterfaceTrace {
  std::vector<double> times;
  std::vector<double> support_positions;         // snapped node positions
  std::vector<std::vector<double>> u_at_support;  // [support][time]
  std::vector<std::vector<double>> slope_jump;    // -u_x(x_k-) + u_x(x_k+)
};

struct FdOptions {
  double target_cfl = 0.9;
  int substeps = 0;  // per output interval; 0 picks the smallest stable count
  Execution execution = Execution::Serial;
};

struct FdResult {
  WaveField field;
  InterfaceTrace trace;
  std::vector<std::size_t> support_nodes;
  std::vector<double> snap_distance;
  int substeps = 1;
  double step = 0.0;
  double cfl = 0.0;
};

/// Explicit central scheme with a lumped point spring on the node nearest to
/// each support; Taylor start from phi and psi. Output is sampled on grid.
FdResult solve_fd_coupled(const CableConfig& cfg, const InitialData& init,
                          const SamplingGrid& grid, const FdOptions& options = {});

/// Second-order one-sided slope jump at node i of a sampled profile.
double one_sided_slope_jump(std::span<const double> u, std::size_t i, double dx);

enum class Segment { Left, Right };

struct SegmentCoefficients {
  std::vector<double> A;
  std::vector<double> B;
};

/// Sine coefficients of the shifted initial data on one segment:
///   left  (0, l):  phi - (x/l) h0,          psi - (x/l) hp0
///   right (l, L):  phi - ((L-x)/(L-l)) h0,  psi - ((L-x)/(L-l)) hp0
/// A_k = (2/len) int phi_s sin(k pi y/len), B_k = 2/(k pi a) int psi_s sin(k pi y/len).
/// Requires exactly one support.
SegmentCoefficients fourier_coefficients(const CableConfig& cfg, const InitialData& init,
                                         double h0, double hp0, Segment segment, int n_terms,
                                         Execution exec = Execution::Parallel);

/// Two-segment series solution built around a sampled support displacement h(t).
struct SeriesExpansion {
  double length = 0.0;
  double support_l = 0.0;
  double wave_speed = 0.0;
  double sigma = 0.0;
  int n_terms = 0;
  SegmentCoefficients left;
  SegmentCoefficients right;
  std::vector<double> times;  // uniform, starting at 0
  std::vector<double> h;
  std::vector<double> h_dot;
  std::vector<double> h_ddot;
  // Running integrals of h'' cos(omega tau), h'' sin(omega tau); times x n_terms.
  std::vector<double> cos_left, sin_left, cos_right, sin_right;

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// h'' by central differences, one-sided second order at the ends. h'(0) is
/// taken as (h_1 - h_0)/dt - (dt/2) h''_0, the value for which the trapezoid
/// Duhamel sum reproduces the piecewise-linear h exactly.
SeriesExpansion build_series_expansion(const CableConfig& cfg, const InitialData& init,
                                       std::span<const double> times, std::span<const double> h,
                                       int n_terms, Execution exec = Execution::Parallel);

struct SeriesDerivatives {
  double u = 0.0;
  double ut = 0.0;
  double utt = 0.0;
  double ux = 0.0;
  double uxx = 0.0;
};

/// Evaluates one branch (segment formula) at (x, t), x inside the closed segment.
SeriesDerivatives evaluate_series_branch(const SeriesExpansion& exp, Segment segment, double x,
                                         double t);

/// u(x, t): left formula for x <= l, right formula otherwise.
double evaluate_series_solution(const SeriesExpansion& exp, double x, double t);

/// -u_x(l-) + u_x(l+) - sigma h(t) with the truncated series.
double h_consistency_residual(const SeriesExpansion& exp, const CableConfig& cfg,
                              const InitialData& init, double t);

/// Truncated left side of the t = 0 compatibility relation:
///   -sum A^L_k (-1)^k k pi/l + sum A^R_k k pi/(L-l) - h0/l - h0/(L-l).
double initial_compatibility_residual(const CableConfig& cfg, const InitialData& init, double h0,
                                      int n_terms);

struct TruncationSweep {
  std::vector<int> n_terms;
  std::vector<double> residual;
  std::vector<double> cauchy_difference;  // |r(n_{i+1}) - r(n_i)|
};

TruncationSweep initial_compatibility_sweep(const CableConfig& cfg, const InitialData& init,
                                            double h0, std::span<const int> n_terms);

/// Smoothness and corner conditions the series derivation assumes on the
/// shifted data. Reported, never enforced.
struct CompatibilityFlags {
  bool left_ends_vanish = false;       // phi_1(0) = phi_1(l) = 0
  bool left_curvature_vanish = false;  // phi_1''(0) = phi_1''(l) = 0
  bool left_velocity_vanish = false;   // psi_1(0) = psi_1(l) = 0
  bool right_ends_vanish = false;
  bool right_curvature_vanish = false;
  bool right_velocity_vanish = false;
  bool all() const {
    return left_ends_vanish && left_curvature_vanish && left_velocity_vanish &&
           right_ends_vanish && right_curvature_vanish && right_velocity_vanish;
  }
};

CompatibilityFlags compatibility_flags(const CableConfig& cfg, const InitialData& init, double h0,
                                       double hp0);

}  // namespace cable
