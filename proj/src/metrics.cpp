#include "simi/metrics.hpp"

#include <array>
#include <cmath>

namespace simi {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

void require_same_dims(const RawImage& a, const RawImage& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw Error(Errc::DimensionMismatch, "images differ in size: " + std::to_string(a.width) + "x" +
                                             std::to_string(a.height) + " vs " + std::to_string(b.width) +
                                             "x" + std::to_string(b.height));
  }
}

std::array<double, kWindow> gaussian_kernel() {
  std::array<double, kWindow> k{};
  double total = 0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    k[i] = std::exp(-d * d / (2 * kSigma * kSigma));
    total += k[i];
  }
  for (double& v : k) v /= total;
  return k;
}

// Separable valid-mode Gaussian filter of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int width, int height) {
  static const auto kernel = gaussian_kernel();
  const int out_w = width - kWindow + 1;
  const int out_h = height - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(out_w) * height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < out_w; ++x) {
      double acc = 0;
      for (int i = 0; i < kWindow; ++i) acc += kernel[i] * plane[static_cast<std::size_t>(y) * width + x + i];
      rows[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      double acc = 0;
      for (int i = 0; i < kWindow; ++i) acc += kernel[i] * rows[static_cast<std::size_t>(y + i) * out_w + x];
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  return out;
}

double ssim_channel(const RawImage& a, const RawImage& b, int c) {
  const std::size_t n = static_cast<std::size_t>(a.width) * a.height;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a.data[i * a.channels + c];
    y[i] = b.data[i * b.channels + c];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, a.width, a.height);
  const auto my = filter_valid(y, a.width, a.height);
  const auto mxx = filter_valid(xx, a.width, a.height);
  const auto myy = filter_valid(yy, a.width, a.height);
  const auto mxy = filter_valid(xy, a.width, a.height);

  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  double total = 0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double var_x = mxx[i] - mx[i] * mx[i];
    const double var_y = myy[i] - my[i] * my[i];
    const double cov = mxy[i] - mx[i] * my[i];
    const double num = (2 * mx[i] * my[i] + c1) * (2 * cov + c2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (var_x + var_y + c2);
    total += num / den;
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace

double psnr(const RawImage& a, const RawImage& b) {
  require_same_dims(a, b);
  if (a.data.empty()) throw Error(Errc::DimensionMismatch, "empty images");
  double sse = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    sse += d * d;
  }
  if (sse == 0) return kPsnrCap;
  const double mse = sse / static_cast<double>(a.data.size());
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const RawImage& a, const RawImage& b) {
  require_same_dims(a, b);
  if (a.width < kWindow || a.height < kWindow) {
    throw Error(Errc::ImageTooSmall, "SSIM needs at least 11x11 pixels");
  }
  double total = 0;
  for (int c = 0; c < a.channels; ++c) total += ssim_channel(a, b, c);
  return total / a.channels;
}

void MetricReport::add(ImageScore score) {
  images.push_back(std::move(score));
  double p = 0;
  double s = 0;
  for (const auto& im : images) {
    p += im.psnr;
    s += im.ssim;
  }
  mean_psnr = p / static_cast<double>(images.size());
  mean_ssim = s / static_cast<double>(images.size());
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& im : images) list.push_back({{"name", im.name}, {"psnr", im.psnr}, {"ssim", im.ssim}});
  return {{"images", list}, {"mean_psnr", mean_psnr}, {"mean_ssim", mean_ssim}, {"count", images.size()}};
}

}  // namespace simi
