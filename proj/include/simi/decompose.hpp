#pragma once

#include <span>
#include <string>
#include <vector>

#include "simi/image_io.hpp"
#include "simi/tensor.hpp"

namespace simi {

/// Maps emitted per colour channel by every decomposition mode. Keeping it
/// fixed makes the network input (3 * 8 channels) independent of the mode.
inline constexpr int kPlanesPerChannel = 8;
inline constexpr int kStackChannels = 3 * kPlanesPerChannel;

struct DecompositionMode {
  enum class Kind { BitPlane, LogThreshold, QuantThreshold };

  Kind kind = Kind::BitPlane;
  // Level counts t_j of the quantiser variant; ignored by the other kinds.
  std::vector<int> levels = default_quant_levels();

  static std::vector<int> default_quant_levels() { return {2, 3, 4, 5, 9, 17, 33, 65}; }

  static DecompositionMode bitplane() { return {Kind::BitPlane, default_quant_levels()}; }
  static DecompositionMode log_threshold() { return {Kind::LogThreshold, default_quant_levels()}; }
  static DecompositionMode quant_threshold(std::vector<int> levels = default_quant_levels()) {
    return {Kind::QuantThreshold, std::move(levels)};
  }

  /// "bitplane", "log" or "quant".
  std::string name() const;
  static DecompositionMode parse(const std::string& name);
  /// Throws InvalidLevelCount for a quantiser list that is not eight
  /// entries of at least 2.
  void validate() const;

  bool operator==(const DecompositionMode&) const = default;
};

// Stacks are shaped (N, 24, H, W); map k of colour channel c sits at
// channel index c * 8 + k.

/// Map k holds bit k (k = 0 is the LSB) of the channel intensity.
template <typename T = float>
Tensor<T> bitplane_decompose(const RawImage& image);

/// Map i is 1 where intensity >= 2^i.
template <typename T = float>
Tensor<T> log_threshold_decompose(const RawImage& image);

/// Map j is floor(I (t_j - 1) / 255) / (t_j - 1), i.e. the uniformly
/// quantised intensity rescaled to [0,1].
template <typename T = float>
Tensor<T> quant_threshold_decompose(const RawImage& image, std::span<const int> levels);

/// Inverse of bitplane_decompose. Throws NonBinaryValue on entries other
/// than 0 and 1.
template <typename T>
RawImage bitplane_reconstruct(const Tensor<T>& stack);

/// Batched decomposition of unit-range images (N,3,H,W); intensities are
/// recovered with the same rounding as from_unit_tensor.
template <typename T>
Tensor<T> decompose(const Tensor<T>& unit_images, const DecompositionMode& mode);

/// Quantiser level index floor(I (t-1) / 255) for a real-valued intensity.
int quant_level(double intensity, int levels);

}  // namespace simi
