#pragma once

#include <string_view>
#include <vector>

namespace cable {

enum class SpectrumMethod { EigenGalerkin, CharacteristicRoot, DftPeak };

std::string_view to_string(SpectrumMethod m);

/// Ordered modal frequencies (Hz) with the method that produced them.
struct FrequencySpectrum {
  std::vector<double> frequencies_hz;
  SpectrumMethod method = SpectrumMethod::EigenGalerkin;
  double resolution_hz = 0.0;
};

}  // namespace cable
