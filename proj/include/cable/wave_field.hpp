#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cable/model.hpp"

namespace cable {

struct ModalSystem;

enum class MethodTag : std::uint32_t {
  GalerkinExact = 0,
  GalerkinLeapfrog = 1,
  FdCoupled = 2,
  SeriesClassical = 3,
};

std::string_view to_string(MethodTag tag);
MethodTag parse_method_tag(std::uint32_t raw);

/// Modal coefficients d(t_j), d'(t_j) behind a Galerkin field. Lets diagnostics
/// evaluate norms exactly instead of by grid quadrature.
struct ModalTrajectory {
  std::shared_ptr<const ModalSystem> system;
  std::vector<double> d;      // nt x m
  std::vector<double> d_dot;  // nt x m
};

struct ProbeSeries {
  double x = 0.0;
  std::vector<double> u;
  std::vector<double> ut;
};

/// Solution sampled on a uniform space-time grid; u and ut are nt x nx row-major
/// (row j is time t_j).
struct WaveField {
  SamplingGrid grid;
  double length = 0.0;
  MethodTag method_tag = MethodTag::GalerkinExact;
  std::vector<double> values_u;
  std::vector<double> values_ut;
  std::vector<ProbeSeries> probes;
  std::optional<ModalTrajectory> modal;

  double u(int j, int i) const { return values_u[static_cast<std::size_t>(j) * grid.nx + i]; }
  double ut(int j, int i) const { return values_ut[static_cast<std::size_t>(j) * grid.nx + i]; }
  std::span<const double> row_u(int j) const {
    return {values_u.data() + static_cast<std::size_t>(j) * grid.nx,
            static_cast<std::size_t>(grid.nx)};
  }
  std::span<const double> row_ut(int j) const {
    return {values_ut.data() + static_cast<std::size_t>(j) * grid.nx,
            static_cast<std::size_t>(grid.nx)};
  }
};

WaveField make_empty_field(const SamplingGrid& grid, double length, MethodTag tag);

struct PointValue {
  double u = 0.0;
  double ut = 0.0;
};

/// Bilinear interpolation in (x, t); exact at nodes.
PointValue evaluate_solution(const WaveField& field, double x, double t);

/// field1 - field2 on identical grids. Keeps the modal trajectory when both
/// fields come from the same Galerkin operator.
WaveField difference(const WaveField& a, const WaveField& b);

/// Largest |u| over the whole field.
double max_abs(const WaveField& field);

}  // namespace cable
