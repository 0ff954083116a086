#include "simi/losses.hpp"

#include <cstdio>

namespace simi {
namespace {

using nn::Var;

template <typename T>
T pixels_per_batch(const Shape& s) {
  return static_cast<T>(s.n) * static_cast<T>(s.h) * static_cast<T>(s.w);
}

}  // namespace

std::string LossReport::to_json_line(std::uint64_t step) const {
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "{\"step\":%llu,\"lc\":%.17g,\"g\":%.17g,\"lu\":%.17g,\"s1\":%.17g,\"s2\":%.17g,"
                "\"total\":%.17g}",
                static_cast<unsigned long long>(step), local_color, global_chroma, brightness,
                smooth_l1, smooth_l2, total);
  return buf;
}

template <typename T>
LossReport LossTerms<T>::report(const LossWeights& w) const {
  LossReport r;
  r.local_color = static_cast<double>(local_color.value().item());
  r.global_chroma = static_cast<double>(global_chroma.value().item());
  r.brightness = static_cast<double>(brightness.value().item());
  r.smooth_l1 = static_cast<double>(smooth_l1.value().item());
  r.smooth_l2 = static_cast<double>(smooth_l2.value().item());
  r.total = w.local_color * r.local_color + w.global_chroma * r.global_chroma +
            w.brightness * r.brightness + w.smooth_l1 * r.smooth_l1 + w.smooth_l2 * r.smooth_l2;
  return r;
}

template <typename T>
Var<T> color_factors(const Var<T>& image, double offset) {
  if (image.shape().c != 3) {
    throw Error(Errc::ChannelCountMismatch, "colour factors need 3 channels, got " + image.shape().str());
  }
  auto denominator = nn::add_scalar(nn::channel_sum(image), static_cast<T>(offset));
  return nn::div(image, denominator, static_cast<T>(offset * 0.5));
}

template <typename T>
Var<T> loss_local_color(const Var<T>& input, const Var<T>& output, const LossOptions& options) {
  require_same_shape(input.shape(), output.shape(), "loss_local_color");
  auto diff = nn::sub(color_factors(input, options.factor_offset), color_factors(output, options.factor_offset));
  return nn::scale(nn::sum(nn::abs(diff)), T(1) / pixels_per_batch<T>(output.shape()));
}

template <typename T>
Var<T> loss_global_chroma(const Var<T>& output, const LossOptions& options) {
  if (output.shape().c != 3) {
    throw Error(Errc::ChannelCountMismatch, "chroma loss needs 3 channels, got " + output.shape().str());
  }
  Var<T> source = options.chroma == ChromaMode::FactorMean ? color_factors(output, options.factor_offset) : output;
  auto deviation = nn::add_scalar(nn::spatial_mean(source), T(-1) / T(3));
  return nn::scale(nn::sum(nn::square(deviation)), T(1) / static_cast<T>(output.shape().n));
}

template <typename T>
Var<T> loss_brightness(const Var<T>& input, const Var<T>& output, const LossOptions& options) {
  require_same_shape(input.shape(), output.shape(), "loss_brightness");
  auto factors = color_factors(input, options.factor_offset);
  auto rms = nn::sqrt(nn::spatial_mean(nn::square(nn::add_scalar(factors, T(-1) / T(3)))));
  const T target = static_cast<T>(3.0 * options.exposure);
  auto expected = nn::add_scalar(nn::scale(nn::channel_sum(rms), -target), target);  // (N,1,1,1)
  return nn::mean(nn::square(nn::sub(expected, nn::channel_sum(output))));
}

template <typename T>
std::pair<Var<T>, Var<T>> loss_smoothness(const std::vector<CurvePair<T>>& curves) {
  if (curves.empty()) throw Error(Errc::EmptyTrace, "smoothness loss needs at least one curve pair");
  auto energy = [](const Var<T>& map) {
    auto g = nn::spatial_gradient(map);
    auto total = nn::add(nn::sum(nn::square(g.dx)), nn::sum(nn::square(g.dy)));
    return nn::scale(total, T(1) / pixels_per_batch<T>(map.shape()));
  };
  Var<T> s1 = energy(curves.front().l1);
  Var<T> s2 = energy(curves.front().l2);
  for (std::size_t i = 1; i < curves.size(); ++i) {
    s1 = nn::add(s1, energy(curves[i].l1));
    s2 = nn::add(s2, energy(curves[i].l2));
  }
  const T inv = T(1) / static_cast<T>(curves.size());
  return {nn::scale(s1, inv), nn::scale(s2, inv)};
}

template <typename T>
LossTerms<T> loss_total(const Var<T>& input, const EnhancementTrace<T>& trace, const LossWeights& weights,
                        const LossOptions& options) {
  if (trace.images.empty()) throw Error(Errc::EmptyTrace, "trace holds no images");
  const Var<T>& output = trace.output();
  LossTerms<T> t;
  t.local_color = loss_local_color(input, output, options);
  t.global_chroma = loss_global_chroma(output, options);
  t.brightness = loss_brightness(input, output, options);
  std::tie(t.smooth_l1, t.smooth_l2) = loss_smoothness(trace.curves);
  auto weighted = [](const Var<T>& term, double w) { return nn::scale(term, static_cast<T>(w)); };
  t.total = nn::add(nn::add(nn::add(weighted(t.local_color, weights.local_color),
                                    weighted(t.global_chroma, weights.global_chroma)),
                            nn::add(weighted(t.brightness, weights.brightness),
                                    weighted(t.smooth_l1, weights.smooth_l1))),
                    weighted(t.smooth_l2, weights.smooth_l2));
  return t;
}

#define SIMI_INSTANTIATE_LOSSES(T)                                                               \
  template struct LossTerms<T>;                                                                  \
  template Var<T> color_factors(const Var<T>&, double);                                          \
  template Var<T> loss_local_color(const Var<T>&, const Var<T>&, const LossOptions&);            \
  template Var<T> loss_global_chroma(const Var<T>&, const LossOptions&);                         \
  template Var<T> loss_brightness(const Var<T>&, const Var<T>&, const LossOptions&);             \
  template std::pair<Var<T>, Var<T>> loss_smoothness(const std::vector<CurvePair<T>>&);          \
  template LossTerms<T> loss_total(const Var<T>&, const EnhancementTrace<T>&, const LossWeights&, \
                                   const LossOptions&);

SIMI_INSTANTIATE_LOSSES(float)
SIMI_INSTANTIATE_LOSSES(double)

}  // namespace simi
