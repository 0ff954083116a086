#pragma once

#include <string>
#include <vector>

#include "simi/ops.hpp"
#include "simi/param_store.hpp"

namespace simi {

/// CBAM-style gating: a shared two-layer MLP over global average- and
/// max-pooled descriptors gives per-channel gates, then a k x k conv over
/// the channel-wise mean and max maps gives per-pixel gates.
struct AttentionShape {
  int channels = 27;
  int reduction = 4;
  int kernel = 7;

  /// Width of the MLP bottleneck, channels / reduction rounded down (>= 1).
  int hidden() const { return channels / reduction > 0 ? channels / reduction : 1; }
  void validate() const;
};

template <typename T>
struct AttentionParams {
  nn::Var<T> mlp1_weight;     // (hidden, C, 1, 1)
  nn::Var<T> mlp1_bias;       // (1, hidden, 1, 1)
  nn::Var<T> mlp2_weight;     // (C, hidden, 1, 1)
  nn::Var<T> mlp2_bias;       // (1, C, 1, 1)
  nn::Var<T> spatial_weight;  // (1, 2, k, k), no bias
};

/// Parameter layout under `prefix` (the model uses "attn").
std::vector<nn::ParamSpec> attention_param_specs(const std::string& prefix, const AttentionShape& shape);

template <typename T>
AttentionParams<T> bind_attention(const nn::BoundParams<T>& params, const std::string& prefix);

/// Per-channel gates, shaped (N,C,1,1), each in (0,1).
template <typename T>
nn::Var<T> channel_gate(const nn::Var<T>& x, const AttentionParams<T>& p);

/// Per-pixel gates, shaped (N,1,H,W), each in (0,1).
template <typename T>
nn::Var<T> spatial_gate(const nn::Var<T>& x, const AttentionParams<T>& p);

template <typename T>
nn::Var<T> channel_attention(const nn::Var<T>& x, const AttentionParams<T>& p);

template <typename T>
nn::Var<T> spatial_attention(const nn::Var<T>& x, const AttentionParams<T>& p);

/// channel_attention followed by spatial_attention.
template <typename T>
nn::Var<T> cbam(const nn::Var<T>& x, const AttentionParams<T>& p);

}  // namespace simi
