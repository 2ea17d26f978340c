#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cable/classical.hpp"
#include "cable/diagnostics.hpp"
#include "cable/spectrum.hpp"
#include "cable/tension.hpp"
#include "cable/wave_field.hpp"

namespace cable::io {

using Json = nlohmann::ordered_json;

/// %.17g: enough digits that strtod gives back the same double.
std::string format_double(double v);

void write_field_csv(const std::filesystem::path& path, const WaveField& field);

/// Binary field block, little-endian:
///   "CWV1" | u32 method tag | u32 reserved (0) | u64 nx | u64 nt | f64 length | f64 horizon
///   | f64 u[nt*nx] | f64 ut[nt*nx]
void write_field_binary(const std::filesystem::path& path, const WaveField& field);
WaveField read_field_binary(const std::filesystem::path& path);

/// Rows of u(x, t_j) at the grid times nearest to each requested time: t, x, u.
void write_profiles_csv(const std::filesystem::path& path, const WaveField& field,
                        const std::vector<double>& times);

void write_probes_csv(const std::filesystem::path& path, const WaveField& field);
void write_trace_csv(const std::filesystem::path& path, const InterfaceTrace& trace);
void write_energy_csv(const std::filesystem::path& path, const EnergyReport& report);
void write_series_coefficients_csv(const std::filesystem::path& path, const SeriesExpansion& exp);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);
void write_spectrum_csv(const std::filesystem::path& path, const FrequencySpectrum& spectrum);

/// One frequency (Hz) per line; blank lines and '#' comments are skipped.
/// Malformed lines raise ConfigError with the line number.
FrequencySpectrum read_frequency_csv(const std::filesystem::path& path);

Json to_json(const EnergyReport& r);
Json to_json(const LossReport& r);
Json to_json(const BoundReport& r);
Json to_json(const FrequencySpectrum& s);
Json to_json(const TensionEstimate& e);
Json to_json(const CompatibilityFlags& f);
Json to_json(const ValidationReport& r);
Json to_json(const TruncationSweep& s);

void write_json(const std::filesystem::path& path, const Json& doc);

}  // namespace cable::io
