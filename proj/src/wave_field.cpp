#include "cable/wave_field.hpp"

#include <algorithm>
#include <cmath>

#include "cable/errors.hpp"
#include "cable/galerkin.hpp"
#include "cable/spectrum.hpp"

namespace cable {

std::string_view to_string(MethodTag tag) {
  switch (tag) {
    case MethodTag::GalerkinExact: return "GalerkinExact";
    case MethodTag::GalerkinLeapfrog: return "GalerkinLeapfrog";
    case MethodTag::FdCoupled: return "FdCoupled";
    case MethodTag::SeriesClassical: return "SeriesClassical";
  }
  return "unknown";
}

MethodTag parse_method_tag(std::uint32_t raw) {
  if (raw > 3) throw DomainError("unknown method tag " + std::to_string(raw));
  return static_cast<MethodTag>(raw);
}

std::string_view to_string(SpectrumMethod m) {
  switch (m) {
    case SpectrumMethod::EigenGalerkin: return "EigenGalerkin";
    case SpectrumMethod::CharacteristicRoot: return "CharacteristicRoot";
    case SpectrumMethod::DftPeak: return "DftPeak";
  }
  return "unknown";
}

WaveField make_empty_field(const SamplingGrid& grid, double length, MethodTag tag) {
  grid.validate(length);
  WaveField f;
  f.grid = grid;
  f.length = length;
  f.method_tag = tag;
  const auto n = static_cast<std::size_t>(grid.nx) * grid.nt;
  f.values_u.assign(n, 0.0);
  f.values_ut.assign(n, 0.0);
  return f;
}

PointValue evaluate_solution(const WaveField& field, double x, double t) {
  const auto& g = field.grid;
  if (!(x >= 0.0 && x <= field.length) || !(t >= 0.0 && t <= g.horizon)) {
    throw DomainError("query point outside the sampled domain");
  }
  auto snap = [](double s) {
    const double r = std::round(s);
    return std::abs(s - r) <= 1e-9 ? r : s;
  };
  const double sx = snap(x / g.dx(field.length));
  const double st = snap(t / g.dt());
  const int i = std::min(static_cast<int>(sx), g.nx - 2);
  const int j = std::min(static_cast<int>(st), g.nt - 2);
  const double fx = std::clamp(sx - i, 0.0, 1.0);
  const double ft = std::clamp(st - j, 0.0, 1.0);
  auto blend = [&](auto at) {
    const double a = at(j, i) * (1 - fx) + at(j, i + 1) * fx;
    const double b = at(j + 1, i) * (1 - fx) + at(j + 1, i + 1) * fx;
    // Keep node values bit-exact.
    if (ft == 0.0) return fx == 0.0 ? at(j, i) : a;
    if (ft == 1.0) return fx == 0.0 ? at(j + 1, i) : b;
    return a * (1 - ft) + b * ft;
  };
  PointValue out;
  out.u = blend([&](int jj, int ii) { return field.u(jj, ii); });
  out.ut = blend([&](int jj, int ii) { return field.ut(jj, ii); });
  return out;
}

namespace {

bool same_operator(const ModalTrajectory& a, const ModalTrajectory& b) {
  if (a.system == b.system) return true;
  if (!a.system || !b.system) return false;
  return a.system->m == b.system->m && a.system->stiffness_S == b.system->stiffness_S &&
         a.system->eigenvectors == b.system->eigenvectors;
}

}  // namespace

WaveField difference(const WaveField& a, const WaveField& b) {
  if (a.grid.nx != b.grid.nx || a.grid.nt != b.grid.nt || a.grid.horizon != b.grid.horizon ||
      a.length != b.length) {
    throw DomainError("fields live on different grids");
  }
  WaveField out = a;
  for (std::size_t i = 0; i < out.values_u.size(); ++i) {
    out.values_u[i] -= b.values_u[i];
    out.values_ut[i] -= b.values_ut[i];
  }
  out.probes.clear();
  out.modal.reset();
  if (a.modal && b.modal && same_operator(*a.modal, *b.modal)) {
    ModalTrajectory traj = *a.modal;
    for (std::size_t i = 0; i < traj.d.size(); ++i) {
      traj.d[i] -= b.modal->d[i];
      traj.d_dot[i] -= b.modal->d_dot[i];
    }
    out.modal = std::move(traj);
  }
  return out;
}

double max_abs(const WaveField& field) {
  double m = 0.0;
  for (double v : field.values_u) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace cable
