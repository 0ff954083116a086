#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "simi/attention.hpp"
#include "simi/decompose.hpp"
#include "simi/ops.hpp"
#include "simi/param_store.hpp"

namespace simi {

struct EnhancerConfig {
  int stages = 7;           // curve blocks / recursive updates
  int smoothing_units = 2;  // conv3x3 + SiLU units over the decomposition
  int feature_channels = 16;
  DecompositionMode decomposition = DecompositionMode::bitplane();
  // false: the decomposition is replaced by a learned 1x1 lift of the RGB
  // input to the same 24 channels (the "without self-information" variant).
  bool self_information = true;
  // Lower bound of L2. With the update guard at 1e-6 the smallest reachable
  // denominator is epsilon_floor * s(epsilon_floor - 1.1); 0.05 keeps it above
  // the guard for every image in [0,1].
  double epsilon_floor = 0.05;
  std::uint64_t seed = 0;
  int attention_reduction = 4;
  int attention_kernel = 7;

  void validate() const;
  AttentionShape attention() const {
    return {kStackChannels + 3, attention_reduction, attention_kernel};
  }
  bool operator==(const EnhancerConfig&) const = default;
};

/// Per-stage cue maps: l1 in (0,1) steers the target level, l2 in
/// [epsilon_floor, 1) modulates the step size.
template <typename T>
struct CurvePair {
  nn::Var<T> l1;
  nn::Var<T> l2;
};

template <typename T>
struct EnhancementTrace {
  std::vector<nn::Var<T>> images;       // I_0 (input) ... I_D (output)
  std::vector<CurvePair<T>> curves;     // one pair per stage
  const nn::Var<T>& output() const { return images.back(); }
};

template <typename T>
struct ForwardHooks {
  // Replaces the curves predicted at `stage` (0-based) before they are
  // applied to `previous`.
  std::function<CurvePair<T>(int stage, const nn::Var<T>& previous, const CurvePair<T>& predicted)>
      override_curves;
};

std::vector<nn::ParamSpec> enhancer_param_specs(const EnhancerConfig& config);

/// Deterministic initialisation of every parameter the config needs.
template <typename T>
nn::ParamStore<T> init_params(const EnhancerConfig& config, std::uint64_t seed);

/// `units` rounds of same-padded conv3x3 + SiLU; identity for zero units.
template <typename T>
nn::Var<T> smoothing_stack(const nn::Var<T>& planes, const nn::BoundParams<T>& params, int units);

template <typename T>
struct DeaOutput {
  nn::Var<T> features;
  CurvePair<T> curves;
};

/// Residual trunk conv3x3 -> SiLU -> conv3x3 (added to the input features)
/// followed by two conv3x3 heads producing the 3-channel cue maps.
template <typename T>
DeaOutput<T> dea_block(const nn::Var<T>& features, const nn::BoundParams<T>& params, int stage,
                       double epsilon_floor);

/// I = clamp(I' + I' (L1 - I') L1 / (s(L2 - I' - 0.1) L2), 0, 1) with
/// s(x) = 1 / (1 + exp(-10 x)). Throws DivisionRangeViolation when the
/// denominator drops below 1e-6.
template <typename T>
nn::Var<T> recursive_update(const nn::Var<T>& previous, const CurvePair<T>& curves);

/// Full network on unit-range images (N,3,H,W).
template <typename T>
EnhancementTrace<T> forward(const nn::Var<T>& input, const nn::BoundParams<T>& params,
                            const EnhancerConfig& config, const ForwardHooks<T>* hooks = nullptr);

/// Inference without gradient bookkeeping; returns I_D.
template <typename T>
Tensor<T> enhance(const Tensor<T>& input, const nn::ParamStore<T>& store, const EnhancerConfig& config);

}  // namespace simi
