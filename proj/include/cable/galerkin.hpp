#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "cable/kernels.hpp"
#include "cable/model.hpp"
#include "cable/spectrum.hpp"
#include "cable/wave_field.hpp"

namespace cable {

/// w_j(x) = sqrt(2/L) sin(j pi x / L), j >= 1, orthonormal in L2(0, L).
double basis_value(int j, double x, double length);
double basis_slope(int j, double x, double length);

enum class EigenSolverKind { Dense, RankOneSecular };

struct Eigenpairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
  EigenSolverKind kind = EigenSolverKind::Dense;
};

/// Symmetric dense eigensolver.
Eigenpairs dense_eigensolve(const Eigen::MatrixXd& S);

/// Eigenpairs of diag(diag) + rho z z^T for strictly increasing diag and rho >= 0,
/// via the secular equation with Gu-Eisenstat vector reconstruction. Components
/// with negligible z are deflated.
Eigenpairs rank_one_eigensolve(const Eigen::VectorXd& diag, double rho, const Eigen::VectorXd& z);

/// Galerkin system for a configuration: S_ij = a^2 (i pi/L)^2 delta_ij
/// + sum_k c beta_k w_i(x_k) w_j(x_k), with c from the Dirac convention.
struct ModalSystem {
  int m = 0;
  double length = 0.0;
  double wave_speed = 0.0;
  std::vector<double> support_positions;
  std::vector<double> point_weights;  // c * beta_k
  Eigen::MatrixXd stiffness_S;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  EigenSolverKind solver = EigenSolverKind::Dense;
  Eigen::VectorXd xi;
  Eigen::VectorXd eta;
};

Eigen::MatrixXd assemble_bilinear_form(const CableConfig& cfg, int m);

/// Rank-one secular solve for a single support, dense otherwise.
Eigenpairs solve_modal_eigenproblem(const CableConfig& cfg, int m);

struct Projection {
  Eigen::VectorXd xi;
  Eigen::VectorXd eta;
};

/// Sine coefficients of phi and psi by composite Simpson with max(512, 32m) panels.
Projection project_initial_data(const InitialData& init, int m, double length,
                                Execution exec = Execution::Parallel);

ModalSystem build_modal_system(const CableConfig& cfg, const InitialData& init, int m);
ModalSystem build_modal_system(const CableConfig& cfg, int m);  // zero data

struct ModalState {
  Eigen::VectorXd d;
  Eigen::VectorXd d_dot;
};

/// Closed-form state in eigencoordinates at time t.
ModalState modal_state(const ModalSystem& sys, double t);

WaveField propagate_exact(std::shared_ptr<const ModalSystem> sys, const SamplingGrid& grid,
                          std::span<const double> probes = {},
                          Execution exec = Execution::Parallel);

/// 2 / sqrt(lambda_max): the explicit stepping limit.
double leapfrog_stability_limit(const ModalSystem& sys);

/// Smallest number of substeps per output interval keeping dt below
/// safety * leapfrog_stability_limit.
int leapfrog_substeps(const ModalSystem& sys, const SamplingGrid& grid, double safety = 0.9);

WaveField propagate_leapfrog(std::shared_ptr<const ModalSystem> sys, const SamplingGrid& grid,
                             std::span<const double> probes = {}, int substeps = 1,
                             Execution exec = Execution::Serial);

FrequencySpectrum modal_frequencies(const ModalSystem& sys, int count);
FrequencySpectrum galerkin_frequencies(const CableConfig& cfg, int m, int count);

/// C1 with |u^T S v| <= C1 |u|_H1 |v|_H1: a^2 + c * sum_k beta_k * L / 4.
double boundedness_constant(const CableConfig& cfg);

/// a^2 (pi/L)^2, the lower bound of the spectrum.
double coercivity_constant(const CableConfig& cfg);

}  // namespace cable
