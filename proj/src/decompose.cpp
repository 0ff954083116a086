#include "simi/decompose.hpp"

#include <cmath>

namespace simi {
namespace {

template <typename T>
T plane_value(const DecompositionMode& mode, int intensity, int k) {
  switch (mode.kind) {
    case DecompositionMode::Kind::BitPlane:
      return static_cast<T>((intensity >> k) & 1);
    case DecompositionMode::Kind::LogThreshold:
      return intensity >= (1 << k) ? T(1) : T(0);
    case DecompositionMode::Kind::QuantThreshold: {
      const int t = mode.levels[k];
      return static_cast<T>(quant_level(intensity, t)) / static_cast<T>(t - 1);
    }
  }
  return T(0);
}

// Shared kernel: `intensity(n, c, y, x)` yields the 8-bit level.
template <typename T, typename Intensity>
Tensor<T> build_stack(int batch, int height, int width, const DecompositionMode& mode,
                      Intensity&& intensity) {
  mode.validate();
  Tensor<T> out(Shape{batch, kStackChannels, height, width});
  for (int n = 0; n < batch; ++n)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const int v = intensity(n, c, y, x);
          for (int k = 0; k < kPlanesPerChannel; ++k) {
            out.at(n, c * kPlanesPerChannel + k, y, x) = plane_value<T>(mode, v, k);
          }
        }
  return out;
}

template <typename T>
Tensor<T> decompose_raw(const RawImage& image, const DecompositionMode& mode) {
  if (image.channels != 3) {
    throw Error(Errc::ChannelCountMismatch,
                "decomposition needs 3 channels, got " + std::to_string(image.channels));
  }
  return build_stack<T>(1, image.height, image.width, mode,
                        [&](int, int c, int y, int x) { return static_cast<int>(image.at(x, y, c)); });
}

}  // namespace

std::string DecompositionMode::name() const {
  switch (kind) {
    case Kind::BitPlane: return "bitplane";
    case Kind::LogThreshold: return "log";
    case Kind::QuantThreshold: return "quant";
  }
  return "bitplane";
}

DecompositionMode DecompositionMode::parse(const std::string& name) {
  if (name == "bitplane") return bitplane();
  if (name == "log") return log_threshold();
  if (name == "quant") return quant_threshold();
  throw Error(Errc::InvalidConfig, "unknown decomposition mode '" + name + "'");
}

void DecompositionMode::validate() const {
  if (kind != Kind::QuantThreshold) return;
  if (levels.size() != static_cast<std::size_t>(kPlanesPerChannel)) {
    throw Error(Errc::InvalidLevelCount, "quantiser needs exactly " +
                                             std::to_string(kPlanesPerChannel) + " level counts, got " +
                                             std::to_string(levels.size()));
  }
  for (const int t : levels) {
    if (t < 2) throw Error(Errc::InvalidLevelCount, "level count " + std::to_string(t) + " < 2");
  }
}

int quant_level(double intensity, int levels) {
  if (levels < 2) throw Error(Errc::InvalidLevelCount, "level count " + std::to_string(levels) + " < 2");
  // The product is exact for integer intensities; the small tolerance keeps
  // re-quantising an already quantised (non-integer) intensity a fixed point.
  const double scaled = intensity * (levels - 1) / 255.0;
  return static_cast<int>(std::floor(scaled + 1e-9));
}

template <typename T>
Tensor<T> bitplane_decompose(const RawImage& image) {
  return decompose_raw<T>(image, DecompositionMode::bitplane());
}

template <typename T>
Tensor<T> log_threshold_decompose(const RawImage& image) {
  return decompose_raw<T>(image, DecompositionMode::log_threshold());
}

template <typename T>
Tensor<T> quant_threshold_decompose(const RawImage& image, std::span<const int> levels) {
  return decompose_raw<T>(image, DecompositionMode::quant_threshold({levels.begin(), levels.end()}));
}

template <typename T>
RawImage bitplane_reconstruct(const Tensor<T>& stack) {
  const Shape s = stack.shape();
  if (s.n != 1 || s.c != kStackChannels) {
    throw Error(Errc::ChannelCountMismatch, "expected (1,24,H,W) stack, got " + s.str());
  }
  RawImage image(s.w, s.h, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < s.h; ++y)
      for (int x = 0; x < s.w; ++x) {
        int v = 0;
        for (int k = 0; k < kPlanesPerChannel; ++k) {
          const T bit = stack.at(0, c * kPlanesPerChannel + k, y, x);
          if (bit != T(0) && bit != T(1)) {
            throw Error(Errc::NonBinaryValue, "plane value " + std::to_string(static_cast<double>(bit)));
          }
          if (bit == T(1)) v |= 1 << k;
        }
        image.at(x, y, c) = static_cast<std::uint8_t>(v);
      }
  return image;
}

template <typename T>
Tensor<T> decompose(const Tensor<T>& unit_images, const DecompositionMode& mode) {
  const Shape s = unit_images.shape();
  if (s.c != 3) {
    throw Error(Errc::ChannelCountMismatch, "decomposition needs 3 channels, got " + s.str());
  }
  return build_stack<T>(s.n, s.h, s.w, mode, [&](int n, int c, int y, int x) {
    return static_cast<int>(to_intensity(unit_images.at(n, c, y, x)));
  });
}

template Tensor<float> bitplane_decompose(const RawImage&);
template Tensor<double> bitplane_decompose(const RawImage&);
template Tensor<float> log_threshold_decompose(const RawImage&);
template Tensor<double> log_threshold_decompose(const RawImage&);
template Tensor<float> quant_threshold_decompose(const RawImage&, std::span<const int>);
template Tensor<double> quant_threshold_decompose(const RawImage&, std::span<const int>);
template RawImage bitplane_reconstruct(const Tensor<float>&);
template RawImage bitplane_reconstruct(const Tensor<double>&);
template Tensor<float> decompose(const Tensor<float>&, const DecompositionMode&);
template Tensor<double> decompose(const Tensor<double>&, const DecompositionMode&);

}  // namespace simi
