#include "simi/attention.hpp"

namespace simi {

void AttentionShape::validate() const {
  if (channels <= 0 || reduction <= 0) {
    throw Error(Errc::InvalidConfig, "attention needs positive channels and reduction");
  }
  if (kernel <= 0 || kernel % 2 == 0) {
    throw Error(Errc::InvalidConfig, "spatial attention kernel must be odd, got " + std::to_string(kernel));
  }
}

std::vector<nn::ParamSpec> attention_param_specs(const std::string& prefix, const AttentionShape& shape) {
  shape.validate();
  using Init = nn::ParamSpec::Init;
  const int c = shape.channels;
  const int h = shape.hidden();
  return {
      {prefix + ".mlp1.weight", Shape{h, c, 1, 1}, Init::KaimingUniform},
      {prefix + ".mlp1.bias", Shape{1, h, 1, 1}, Init::Zero},
      {prefix + ".mlp2.weight", Shape{c, h, 1, 1}, Init::KaimingUniform},
      {prefix + ".mlp2.bias", Shape{1, c, 1, 1}, Init::Zero},
      {prefix + ".spatial.weight", Shape{1, 2, shape.kernel, shape.kernel}, Init::KaimingUniform},
  };
}

template <typename T>
AttentionParams<T> bind_attention(const nn::BoundParams<T>& params, const std::string& prefix) {
  return AttentionParams<T>{params[prefix + ".mlp1.weight"], params[prefix + ".mlp1.bias"],
                            params[prefix + ".mlp2.weight"], params[prefix + ".mlp2.bias"],
                            params[prefix + ".spatial.weight"]};
}

template <typename T>
nn::Var<T> channel_gate(const nn::Var<T>& x, const AttentionParams<T>& p) {
  auto mlp = [&](const nn::Var<T>& descriptor) {
    auto hidden = nn::relu(nn::conv2d(descriptor, p.mlp1_weight, p.mlp1_bias, 1, 0));
    return nn::conv2d(hidden, p.mlp2_weight, p.mlp2_bias, 1, 0);
  };
  return nn::logistic(nn::add(mlp(nn::spatial_mean(x)), mlp(nn::spatial_max(x))));
}

template <typename T>
nn::Var<T> spatial_gate(const nn::Var<T>& x, const AttentionParams<T>& p) {
  const int k = p.spatial_weight.shape().h;
  auto pooled = nn::concat_channels<T>({nn::channel_mean(x), nn::channel_max(x)});
  return nn::logistic(nn::conv2d(pooled, p.spatial_weight, nn::Var<T>{}, 1, k / 2));
}

template <typename T>
nn::Var<T> channel_attention(const nn::Var<T>& x, const AttentionParams<T>& p) {
  return nn::mul(x, channel_gate(x, p));
}

template <typename T>
nn::Var<T> spatial_attention(const nn::Var<T>& x, const AttentionParams<T>& p) {
  return nn::mul(x, spatial_gate(x, p));
}

template <typename T>
nn::Var<T> cbam(const nn::Var<T>& x, const AttentionParams<T>& p) {
  return spatial_attention(channel_attention(x, p), p);
}

#define SIMI_INSTANTIATE_ATTENTION(T)                                                      \
  template AttentionParams<T> bind_attention(const nn::BoundParams<T>&, const std::string&); \
  template nn::Var<T> channel_gate(const nn::Var<T>&, const AttentionParams<T>&);            \
  template nn::Var<T> spatial_gate(const nn::Var<T>&, const AttentionParams<T>&);            \
  template nn::Var<T> channel_attention(const nn::Var<T>&, const AttentionParams<T>&);       \
  template nn::Var<T> spatial_attention(const nn::Var<T>&, const AttentionParams<T>&);       \
  template nn::Var<T> cbam(const nn::Var<T>&, const AttentionParams<T>&);

SIMI_INSTANTIATE_ATTENTION(float)
SIMI_INSTANTIATE_ATTENTION(double)

}  // namespace simi
