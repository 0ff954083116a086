#pragma once

#include <string>
#include <utility>
#include <vector>

#include "simi/enhancer.hpp"

namespace simi {

/// Coefficients of the weighted objective, default ratio 200:300:1:200:1000.
struct LossWeights {
  double local_color = 200.0;
  double global_chroma = 300.0;
  double brightness = 1.0;
  double smooth_l1 = 200.0;
  double smooth_l2 = 1000.0;

  bool operator==(const LossWeights&) const = default;
};

enum class ChromaMode {
  FactorMean,   // spatial mean of the output colour-factor map
  ChannelMean,  // spatial mean of the raw output channel
};

struct LossOptions {
  double exposure = 0.6;        // target per-channel level E of the brightness term
  double factor_offset = 1e-4;  // added to the channel sum of the factor maps
  ChromaMode chroma = ChromaMode::FactorMean;

  bool operator==(const LossOptions&) const = default;
};

struct LossReport {
  double local_color = 0;
  double global_chroma = 0;
  double brightness = 0;
  double smooth_l1 = 0;
  double smooth_l2 = 0;
  double total = 0;

  /// One JSON-lines record: {"step","lc","g","lu","s1","s2","total"}.
  std::string to_json_line(std::uint64_t step) const;
};

template <typename T>
struct LossTerms {
  nn::Var<T> local_color;
  nn::Var<T> global_chroma;
  nn::Var<T> brightness;
  nn::Var<T> smooth_l1;
  nn::Var<T> smooth_l2;
  nn::Var<T> total;

  /// Term values with the total recomputed in double from them.
  LossReport report(const LossWeights& weights) const;
};

/// F^c = I^c / (sum_c I^c + offset), per pixel.
template <typename T>
nn::Var<T> color_factors(const nn::Var<T>& image, double offset = 1e-4);

/// Sum over channels of the mean absolute factor-map difference.
template <typename T>
nn::Var<T> loss_local_color(const nn::Var<T>& input, const nn::Var<T>& output,
                            const LossOptions& options = {});

/// sum_c (phi^c - 1/3)^2, averaged over the batch.
template <typename T>
nn::Var<T> loss_global_chroma(const nn::Var<T>& output, const LossOptions& options = {});

/// Mean over pixels of (B - sum_c I^c_out)^2 with
/// B = 3 E (1 - sum_c rms(F^c_in - 1/3)) per image.
template <typename T>
nn::Var<T> loss_brightness(const nn::Var<T>& input, const nn::Var<T>& output,
                           const LossOptions& options = {});

/// Stage-averaged (1/N) sum_c ||grad L||^2 for the l1 and l2 maps.
/// Throws EmptyTrace without curves.
template <typename T>
std::pair<nn::Var<T>, nn::Var<T>> loss_smoothness(const std::vector<CurvePair<T>>& curves);

/// Weighted objective over a trace: output = I_D, curves of all stages.
template <typename T>
LossTerms<T> loss_total(const nn::Var<T>& input, const EnhancementTrace<T>& trace,
                        const LossWeights& weights, const LossOptions& options = {});

}  // namespace simi
