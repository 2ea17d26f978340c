#pragma once

#include <cstddef>
#include <span>

// Hot loops shared by the solvers. Every kernel has a serial reference path and
// an OpenMP path; both perform the same floating-point operations per output
// element in the same order, so their results are bitwise identical.

namespace cable {

enum class Execution { Serial, Parallel };

/// out[r*nx + i] = sum_j coeff[r*m + j] * basis[i*m + j]   (row-major blocks)
void modal_synthesis(std::span<const double> coeff, std::span<const double> basis,
                     std::size_t rows, std::size_t m, std::size_t nx, std::span<double> out,
                     Execution exec);

/// One explicit central step of u_tt = a^2 u_xx with fixed ends and lumped point
/// springs: next = 2cur - prev + r2*(D2 cur) - spring_k * cur at nodes[k].
void wave_step(std::span<const double> prev, std::span<const double> cur, std::span<double> next,
               double r2, std::span<const std::size_t> nodes, std::span<const double> spring,
               Execution exec);

/// y = S x for a dense row-major m x m matrix.
void dense_matvec(std::span<const double> S, std::size_t m, std::span<const double> x,
                  std::span<double> y, Execution exec);

/// Velocity-Verlet step of d'' = -S d. acc must hold -S d on entry and is
/// updated to the new acceleration on exit.
void leapfrog_step(std::span<const double> S, std::size_t m, double dt, std::span<double> d,
                   std::span<double> v, std::span<double> acc, Execution exec);

/// coeff[j] = scale * sum_i weighted[i] * sin((j+1) * theta[i]).
void sine_projection(std::span<const double> weighted, std::span<const double> theta,
                     double scale, std::span<double> coeff, Execution exec);

/// Running trapezoid integrals on a uniform grid:
///   cos_int[n*K + k] = int_0^{t_n} f cos(omega_k tau),  sin_int likewise.
void duhamel_accumulate(std::span<const double> forcing, double dt,
                        std::span<const double> omega, std::span<double> cos_int,
                        std::span<double> sin_int, Execution exec);

}  // namespace cable
