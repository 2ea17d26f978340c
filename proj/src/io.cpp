#include "cable/io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>

#include "cable/errors.hpp"

namespace cable::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const std::filesystem::path& path, const char* mode = "w") {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return f;
}

void put(std::FILE* f, double v) { std::fprintf(f, "%.17g", v); }

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void write_le(std::FILE* f, T v) {
  v = to_little(v);
  if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("short write");
}

template <typename T>
T read_le(std::FILE* f) {
  T v{};
  if (std::fread(&v, sizeof(T), 1, f) != 1) throw DomainError("truncated field file");
  return to_little(v);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(const std::filesystem::path& path, const WaveField& field) {
  auto f = open_for_write(path);
  std::fputs("t,x,u,u_t\n", f.get());
  for (int j = 0; j < field.grid.nt; ++j) {
    const double t = field.grid.t(j);
    for (int i = 0; i < field.grid.nx; ++i) {
      put(f.get(), t);
      std::fputc(',', f.get());
      put(f.get(), field.grid.x(i, field.length));
      std::fputc(',', f.get());
      put(f.get(), field.u(j, i));
      std::fputc(',', f.get());
      put(f.get(), field.ut(j, i));
      std::fputc('\n', f.get());
    }
  }
}

void write_field_binary(const std::filesystem::path& path, const WaveField& field) {
  auto f = open_for_write(path, "wb");
  std::fwrite("CWV1", 1, 4, f.get());
  write_le<std::uint32_t>(f.get(), static_cast<std::uint32_t>(field.method_tag));
  write_le<std::uint32_t>(f.get(), 0);
  write_le<std::uint64_t>(f.get(), static_cast<std::uint64_t>(field.grid.nx));
  write_le<std::uint64_t>(f.get(), static_cast<std::uint64_t>(field.grid.nt));
  write_le<double>(f.get(), field.length);
  write_le<double>(f.get(), field.grid.horizon);
  for (double v : field.values_u) write_le<double>(f.get(), v);
  for (double v : field.values_ut) write_le<double>(f.get(), v);
}

WaveField read_field_binary(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DomainError("cannot open " + path.string());
  char magic[4];
  if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, "CWV1", 4) != 0) {
    throw DomainError(path.string() + " is not a CWV1 field file");
  }
  const auto tag = parse_method_tag(read_le<std::uint32_t>(f.get()));
  (void)read_le<std::uint32_t>(f.get());
  const auto nx = read_le<std::uint64_t>(f.get());
  const auto nt = read_le<std::uint64_t>(f.get());
  const double length = read_le<double>(f.get());
  const double horizon = read_le<double>(f.get());
  if (nx < 3 || nt < 2 || nx > (1u << 30) || nt > (1u << 30)) {
    throw DomainError("implausible field dimensions in " + path.string());
  }
  SamplingGrid grid{static_cast<int>(nx), static_cast<int>(nt), horizon};
  WaveField field = make_empty_field(grid, length, tag);
  for (double& v : field.values_u) v = read_le<double>(f.get());
  for (double& v : field.values_ut) v = read_le<double>(f.get());
  return field;
}

void write_profiles_csv(const std::filesystem::path& path, const WaveField& field,
                        const std::vector<double>& times) {
  auto f = open_for_write(path);
  std::fputs("t,x,u\n", f.get());
  const double dt = field.grid.dt();
  for (double t : times) {
    const long j = std::lround(std::clamp(t, 0.0, field.grid.horizon) / dt);
    for (int i = 0; i < field.grid.nx; ++i) {
      put(f.get(), field.grid.t(static_cast<int>(j)));
      std::fputc(',', f.get());
      put(f.get(), field.grid.x(i, field.length));
      std::fputc(',', f.get());
      put(f.get(), field.u(static_cast<int>(j), i));
      std::fputc('\n', f.get());
    }
  }
}

void write_probes_csv(const std::filesystem::path& path, const WaveField& field) {
  auto f = open_for_write(path);
  std::fputs("t,x,u,u_t\n", f.get());
  for (const auto& p : field.probes) {
    for (std::size_t j = 0; j < p.u.size(); ++j) {
      put(f.get(), field.grid.t(static_cast<int>(j)));
      std::fputc(',', f.get());
      put(f.get(), p.x);
      std::fputc(',', f.get());
      put(f.get(), p.u[j]);
      std::fputc(',', f.get());
      put(f.get(), p.ut[j]);
      std::fputc('\n', f.get());
    }
  }
}

void write_trace_csv(const std::filesystem::path& path, const InterfaceTrace& trace) {
  auto f = open_for_write(path);
  std::fputs("t", f.get());
  for (std::size_t k = 0; k < trace.support_positions.size(); ++k) {
    std::fprintf(f.get(), ",u_at_support_%zu,slope_jump_%zu", k, k);
  }
  std::fputc('\n', f.get());
  for (std::size_t j = 0; j < trace.times.size(); ++j) {
    put(f.get(), trace.times[j]);
    for (std::size_t k = 0; k < trace.support_positions.size(); ++k) {
      std::fputc(',', f.get());
      put(f.get(), trace.u_at_support[k][j]);
      std::fputc(',', f.get());
      put(f.get(), trace.slope_jump[k][j]);
    }
    std::fputc('\n', f.get());
  }
}

void write_energy_csv(const std::filesystem::path& path, const EnergyReport& report) {
  auto f = open_for_write(path);
  std::fputs("t,E,E0\n", f.get());
  for (std::size_t j = 0; j < report.times.size(); ++j) {
    put(f.get(), report.times[j]);
    std::fputc(',', f.get());
    put(f.get(), report.E[j]);
    std::fputc(',', f.get());
    put(f.get(), report.E0[j]);
    std::fputc('\n', f.get());
  }
}

void write_series_coefficients_csv(const std::filesystem::path& path, const SeriesExpansion& exp) {
  auto f = open_for_write(path);
  std::fputs("k,A_left,B_left,A_right,B_right\n", f.get());
  for (int k = 0; k < exp.n_terms; ++k) {
    std::fprintf(f.get(), "%d", k + 1);
    for (double v : {exp.left.A[k], exp.left.B[k], exp.right.A[k], exp.right.B[k]}) {
      std::fputc(',', f.get());
      put(f.get(), v);
    }
    std::fputc('\n', f.get());
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
  auto f = open_for_write(path);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c) std::fputc(',', f.get());
      put(f.get(), matrix(r, c));
    }
    std::fputc('\n', f.get());
  }
}

void write_spectrum_csv(const std::filesystem::path& path, const FrequencySpectrum& spectrum) {
  auto f = open_for_write(path);
  std::fputs("mode,frequency_hz\n", f.get());
  for (std::size_t i = 0; i < spectrum.frequencies_hz.size(); ++i) {
    std::fprintf(f.get(), "%zu,", i + 1);
    put(f.get(), spectrum.frequencies_hz[i]);
    std::fputc('\n', f.get());
  }
}

FrequencySpectrum read_frequency_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string(), 0);
  FrequencySpectrum s;
  s.method = SpectrumMethod::DftPeak;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r,");
    const std::string field = line.substr(first, last - first + 1);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || errno == ERANGE || !(v > 0.0)) {
      throw ConfigError(path.string() + ": expected a positive frequency, got '" + field + "'",
                        lineno);
    }
    s.frequencies_hz.push_back(v);
  }
  if (s.frequencies_hz.empty()) throw ConfigError(path.string() + ": no frequencies", lineno);
  return s;
}

Json to_json(const EnergyReport& r) {
  return Json{{"times", r.times}, {"E", r.E}, {"E0", r.E0}, {"drift", r.drift}};
}

Json to_json(const LossReport& r) {
  return Json{{"mse_pde", r.mse_pde},
              {"mse_ic", r.mse_ic},
              {"mse_bc", r.mse_bc},
              {"mse_cc", r.mse_cc},
              {"weights",
               {{"pde", r.weights.pde}, {"ic", r.weights.ic}, {"bc", r.weights.bc},
                {"cc", r.weights.cc}}},
              {"total", r.total}};
}

Json to_json(const BoundReport& r) {
  return Json{{"times", r.times},         {"lhs", r.lhs},
              {"rhs", r.rhs},             {"E0_initial", r.E0_initial},
              {"E_initial", r.E_initial}, {"min_slack", r.min_slack},
              {"max_slack", r.max_slack}, {"holds", r.holds}};
}

Json to_json(const FrequencySpectrum& s) {
  return Json{{"frequencies_hz", s.frequencies_hz},
              {"method", std::string(to_string(s.method))},
              {"resolution_hz", s.resolution_hz}};
}

Json to_json(const TensionEstimate& e) {
  return Json{{"tension_hat", e.tension_hat},
              {"residual", e.residual},
              {"iterations", e.iterations},
              {"bracket", {e.bracket_lo, e.bracket_hi}}};
}

Json to_json(const CompatibilityFlags& f) {
  return Json{{"left_ends_vanish", f.left_ends_vanish},
              {"left_curvature_vanish", f.left_curvature_vanish},
              {"left_velocity_vanish", f.left_velocity_vanish},
              {"right_ends_vanish", f.right_ends_vanish},
              {"right_curvature_vanish", f.right_curvature_vanish},
              {"right_velocity_vanish", f.right_velocity_vanish},
              {"all", f.all()}};
}

Json to_json(const ValidationReport& r) {
  Json supports = Json::array();
  for (const auto& s : r.supports) {
    supports.push_back(
        {{"position", s.position}, {"phi_value", s.phi_value}, {"phi_vanishes", s.phi_vanishes}});
  }
  return Json{{"supports", supports}, {"piecewise_smooth_only", r.piecewise_smooth_only}};
}

Json to_json(const TruncationSweep& s) {
  return Json{{"n_terms", s.n_terms},
              {"residual", s.residual},
              {"cauchy_difference", s.cauchy_difference}};
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  auto f = open_for_write(path);
  const std::string text = doc.dump(2) + "\n";
  std::fwrite(text.data(), 1, text.size(), f.get());
}

}  // namespace cable::io
