#pragma once

#include <span>
#include <vector>

#include "cable/model.hpp"
#include "cable/spectrum.hpp"

namespace cable {

/// D(k) = k sin(kL) + c sigma sin(kl) sin(k(L - l)) for a single support,
/// from the ansatz A sin(kx) on (0, l), B sin(k(L - x)) on (l, L) with
/// continuity and the slope jump at l. Zeros give f = a k / (2 pi).
double characteristic_value(double k, const CableConfig& cfg);

struct RootScan {
  FrequencySpectrum spectrum;        // CharacteristicRoot, at most `count` entries
  std::vector<double> wavenumbers;   // all roots found below k_max, ascending
  int sign_changes = 0;              // brackets found by the scan
  int tangential = 0;                // double roots found by the curvature check
  int shortfall = 0;                 // count - found, when positive
};

/// Scans D on a grid of step pi/(8L) up to k_max, bisects each bracket to
/// 1e-12 k and adds touching (double) roots found at local minima of |D|.
RootScan characteristic_roots(const CableConfig& cfg, int count, double k_max);

/// Convenience: enough scan range for `count` roots (they interlace with the
/// unsupported string's, so the n-th lies below (n + 1) pi / L).
RootScan characteristic_roots(const CableConfig& cfg, int count);

struct PeakScan {
  FrequencySpectrum spectrum;  // DftPeak, ascending
  double bin_hz = 0.0;
  int shortfall = 0;
};

/// Hann-windowed magnitude spectrum of a mean-removed record; the `count`
/// largest local maxima at least 3 bins apart are refined by a parabola
/// through the log magnitudes. resolution_hz is a tenth of a bin.
PeakScan extract_peaks(std::span<const double> trace, double dt, int count);

/// What the inversion assumes known: geometry, density and support stiffnesses.
struct KnownCable {
  double length = 0.0;
  double density = 1.0;
  std::vector<SupportPlacement> supports;
  DiracConvention convention = DiracConvention::DiracConsistent;
};

/// Model frequencies (Hz) of modes 1..count at tension T. sigma_k = K_k / T
/// is re-derived for each T. Characteristic roots for up to one support,
/// Galerkin with `galerkin_m` modes beyond.
std::vector<double> model_frequencies(const KnownCable& known, double tension, int count,
                                      int galerkin_m = 256);

struct InversionOptions {
  double tension_lo = 0.0;  // 0: T0 / 16 from the first measured mode
  double tension_hi = 0.0;  // 0: 4 T0
  double rel_tol = 1e-10;
  int max_iterations = 200;
  int galerkin_m = 256;
};

struct TensionEstimate {
  double tension_hat = 0.0;  // N
  double residual = 0.0;     // rms frequency misfit, Hz
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Least-squares fit of T to measured frequencies: golden section on the
/// bracket, then successive parabolic steps. mode_indices are 1-based and
/// pair with measured.frequencies_hz; empty means 1, 2, ...
TensionEstimate invert_tension(const FrequencySpectrum& measured, const KnownCable& known,
                               std::span<const int> mode_indices = {},
                               const InversionOptions& options = {});

}  // namespace cable
