#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "simi/tensor.hpp"

namespace simi {

/// 8-bit image, row-major with interleaved channels.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;

  RawImage() = default;
  RawImage(int w, int h, int c = 3, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const RawImage&) const = default;
};

/// Reads PNG (8-bit gray/RGB, alpha dropped, palettes expanded) or binary
/// PPM (P6, maxval 255). The result always has three channels.
RawImage load_image(const std::filesystem::path& path);

/// Writes PNG, or P6 PPM when the extension is `.ppm`. PNG accepts 1 or 3
/// channels; PPM requires 3.
void save_image(const std::filesystem::path& path, const RawImage& image);

/// Intensity / 255, shaped (1,3,H,W).
template <typename T>
Tensor<T> to_unit_tensor(const RawImage& image);

/// round-half-up(clamp(v, 0, 1) * 255). Requires shape (1,3,H,W).
template <typename T>
RawImage from_unit_tensor(const Tensor<T>& tensor);

/// 8-bit level of a unit-range value, using the same rounding as
/// from_unit_tensor.
template <typename T>
std::uint8_t to_intensity(T v);

/// Single-channel image from plane `c` of sample `n` (values in [0,1]).
template <typename T>
RawImage plane_to_gray(const Tensor<T>& tensor, int n, int c);

}  // namespace simi
