#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "simi/image_io.hpp"

namespace simi {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(255^2 / MSE) over all channels; identical images give kPsnrCap.
double psnr(const RawImage& a, const RawImage& b);

/// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5, K1 = 0.01,
/// K2 = 0.03, L = 255), computed per channel and averaged. Both sides must
/// be at least 11 pixels.
double ssim(const RawImage& a, const RawImage& b);

struct ImageScore {
  std::string name;
  double psnr = 0;
  double ssim = 0;
};

struct MetricReport {
  std::vector<ImageScore> images;
  double mean_psnr = 0;
  double mean_ssim = 0;

  void add(ImageScore score);
  nlohmann::json to_json() const;
};

}  // namespace simi
