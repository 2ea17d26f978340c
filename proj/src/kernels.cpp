#include "cable/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "cable/errors.hpp"

namespace cable {

namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace

void modal_synthesis(std::span<const double> coeff, std::span<const double> basis,
                     std::size_t rows, std::size_t m, std::size_t nx, std::span<double> out,
                     Execution exec) {
  require(coeff.size() >= rows * m && basis.size() >= nx * m && out.size() >= rows * nx,
          "modal_synthesis: buffer too small");
  const auto n_rows = static_cast<std::ptrdiff_t>(rows);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
      const double* c = coeff.data() + r * m;
      double* o = out.data() + r * nx;
      for (std::size_t i = 0; i < nx; ++i) o[i] = dot(c, basis.data() + i * m, m);
    }
  } else {
    for (std::ptrdiff_t r = 0; r < n_rows; ++r) {
      const double* c = coeff.data() + r * m;
      double* o = out.data() + r * nx;
      for (std::size_t i = 0; i < nx; ++i) o[i] = dot(c, basis.data() + i * m, m);
    }
  }
}

void wave_step(std::span<const double> prev, std::span<const double> cur, std::span<double> next,
               double r2, std::span<const std::size_t> nodes, std::span<const double> spring,
               Execution exec) {
  const std::size_t n = cur.size();
  require(n >= 3 && prev.size() == n && next.size() == n, "wave_step: size mismatch");
  require(nodes.size() == spring.size(), "wave_step: spring list mismatch");
  const auto last = static_cast<std::ptrdiff_t>(n - 1);
  const double* p = prev.data();
  const double* c = cur.data();
  double* x = next.data();
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 1; i < last; ++i) {
      x[i] = 2.0 * c[i] - p[i] + r2 * (c[i + 1] - 2.0 * c[i] + c[i - 1]);
    }
  } else {
    for (std::ptrdiff_t i = 1; i < last; ++i) {
      x[i] = 2.0 * c[i] - p[i] + r2 * (c[i + 1] - 2.0 * c[i] + c[i - 1]);
    }
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) x[nodes[k]] -= spring[k] * c[nodes[k]];
  x[0] = 0.0;
  x[n - 1] = 0.0;
}

void dense_matvec(std::span<const double> S, std::size_t m, std::span<const double> x,
                  std::span<double> y, Execution exec) {
  require(S.size() >= m * m && x.size() >= m && y.size() >= m, "dense_matvec: size mismatch");
  const auto rows = static_cast<std::ptrdiff_t>(m);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) y[i] = dot(S.data() + i * m, x.data(), m);
  } else {
    for (std::ptrdiff_t i = 0; i < rows; ++i) y[i] = dot(S.data() + i * m, x.data(), m);
  }
}

void leapfrog_step(std::span<const double> S, std::size_t m, double dt, std::span<double> d,
                   std::span<double> v, std::span<double> acc, Execution exec) {
  const double half = 0.5 * dt;
  for (std::size_t j = 0; j < m; ++j) {
    v[j] += half * acc[j];
    d[j] += dt * v[j];
  }
  dense_matvec(S, m, d, acc, exec);
  for (std::size_t j = 0; j < m; ++j) {
    acc[j] = -acc[j];
    v[j] += half * acc[j];
  }
}

void sine_projection(std::span<const double> weighted, std::span<const double> theta,
                     double scale, std::span<double> coeff, Execution exec) {
  require(weighted.size() == theta.size(), "sine_projection: size mismatch");
  // Modes go in fixed blocks; inside a block sin(k theta) comes from the
  // three-term recurrence, re-anchored with std::sin at each block start so the
  // rounding error stays near block^2 eps. Each coefficient still sums over i in
  // order, and the block layout does not depend on the thread count.
  constexpr std::size_t kBlock = 64;
  const std::size_t n = weighted.size();
  const std::size_t count = coeff.size();
  const auto blocks = static_cast<std::ptrdiff_t>((count + kBlock - 1) / kBlock);
  auto one = [&](std::ptrdiff_t b) {
    const std::size_t j0 = static_cast<std::size_t>(b) * kBlock;
    const std::size_t len = std::min(kBlock, count - j0);
    double acc[kBlock] = {};
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weighted[i];
      if (w == 0.0) continue;
      const double th = theta[i];
      const double c2 = 2.0 * std::cos(th);
      double prev = std::sin(static_cast<double>(j0) * th);
      double cur = std::sin(static_cast<double>(j0 + 1) * th);
      acc[0] += w * cur;
      for (std::size_t q = 1; q < len; ++q) {
        const double next = c2 * cur - prev;
        prev = cur;
        cur = next;
        acc[q] += w * cur;
      }
    }
    for (std::size_t q = 0; q < len; ++q) coeff[j0 + q] = scale * acc[q];
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) one(b);
  } else {
    for (std::ptrdiff_t b = 0; b < blocks; ++b) one(b);
  }
}

void duhamel_accumulate(std::span<const double> forcing, double dt,
                        std::span<const double> omega, std::span<double> cos_int,
                        std::span<double> sin_int, Execution exec) {
  const std::size_t nt = forcing.size();
  const std::size_t K = omega.size();
  require(cos_int.size() >= nt * K && sin_int.size() >= nt * K, "duhamel_accumulate: buffer");
  const auto modes = static_cast<std::ptrdiff_t>(K);
  auto one = [&](std::ptrdiff_t k) {
    const double w = omega[k];
    double c = 0.0, s = 0.0;
    double fc_prev = 0.0, fs_prev = 0.0;
    for (std::size_t n = 0; n < nt; ++n) {
      const double tau = dt * static_cast<double>(n);
      const double fc = forcing[n] * std::cos(w * tau);
      const double fs = forcing[n] * std::sin(w * tau);
      if (n > 0) {
        c += 0.5 * dt * (fc_prev + fc);
        s += 0.5 * dt * (fs_prev + fs);
      }
      cos_int[n * K + k] = c;
      sin_int[n * K + k] = s;
      fc_prev = fc;
      fs_prev = fs;
    }
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < modes; ++k) one(k);
  } else {
    for (std::ptrdiff_t k = 0; k < modes; ++k) one(k);
  }
}

}  // namespace cable
