#include "simi/enhancer.hpp"

namespace simi {
namespace {

using nn::Var;

constexpr double kUpdateDenominatorFloor = 1e-6;

std::string unit_name(const std::string& prefix, int index, const char* part) {
  return prefix + "." + std::to_string(index) + "." + part;
}

void add_conv(std::vector<nn::ParamSpec>& specs, const std::string& name, int c_out, int c_in, int k) {
  specs.push_back({name + ".weight", Shape{c_out, c_in, k, k}, nn::ParamSpec::Init::KaimingUniform});
  specs.push_back({name + ".bias", Shape{1, c_out, 1, 1}, nn::ParamSpec::Init::Zero});
}

template <typename T>
Var<T> conv(const Var<T>& x, const nn::BoundParams<T>& params, const std::string& name, int padding) {
  return nn::conv2d(x, params[name + ".weight"], params[name + ".bias"], 1, padding);
}

}  // namespace

void EnhancerConfig::validate() const {
  if (stages < 1) throw Error(Errc::InvalidConfig, "stages must be >= 1");
  if (smoothing_units < 0) throw Error(Errc::InvalidConfig, "smoothing_units must be >= 0");
  if (feature_channels < 1) throw Error(Errc::InvalidConfig, "feature_channels must be >= 1");
  if (!(epsilon_floor > 0.0 && epsilon_floor < 1.0)) {
    throw Error(Errc::InvalidConfig, "epsilon_floor must lie in (0,1)");
  }
  decomposition.validate();
  attention().validate();
}

std::vector<nn::ParamSpec> enhancer_param_specs(const EnhancerConfig& config) {
  config.validate();
  std::vector<nn::ParamSpec> specs;
  if (!config.self_information) add_conv(specs, "lift", kStackChannels, 3, 1);
  for (int i = 0; i < config.smoothing_units; ++i) {
    add_conv(specs, "smooth." + std::to_string(i), kStackChannels, kStackChannels, 3);
  }
  const auto attn = attention_param_specs("attn", config.attention());
  specs.insert(specs.end(), attn.begin(), attn.end());
  const int f = config.feature_channels;
  add_conv(specs, "stem", f, kStackChannels + 3, 3);
  for (int i = 0; i < config.stages; ++i) {
    add_conv(specs, unit_name("dea", i, "conv1"), f, f, 3);
    add_conv(specs, unit_name("dea", i, "conv2"), f, f, 3);
    add_conv(specs, unit_name("dea", i, "head1"), 3, f, 3);
    add_conv(specs, unit_name("dea", i, "head2"), 3, f, 3);
  }
  return specs;
}

template <typename T>
nn::ParamStore<T> init_params(const EnhancerConfig& config, std::uint64_t seed) {
  const auto specs = enhancer_param_specs(config);
  return nn::init_params<T>(specs, seed);
}

template <typename T>
Var<T> smoothing_stack(const Var<T>& planes, const nn::BoundParams<T>& params, int units) {
  if (units < 0) throw Error(Errc::InvalidConfig, "smoothing units must be >= 0");
  Var<T> x = planes;
  for (int i = 0; i < units; ++i) x = nn::silu(conv(x, params, "smooth." + std::to_string(i), 1));
  return x;
}

template <typename T>
DeaOutput<T> dea_block(const Var<T>& features, const nn::BoundParams<T>& params, int stage,
                       double epsilon_floor) {
  const std::string prefix = "dea." + std::to_string(stage);
  auto trunk = conv(nn::silu(conv(features, params, prefix + ".conv1", 1)), params, prefix + ".conv2", 1);
  Var<T> out = nn::add(features, trunk);
  const T eps = static_cast<T>(epsilon_floor);
  CurvePair<T> curves;
  curves.l1 = nn::logistic(conv(out, params, prefix + ".head1", 1));
  curves.l2 = nn::add_scalar(nn::scale(nn::logistic(conv(out, params, prefix + ".head2", 1)), T(1) - eps), eps);
  return {out, curves};
}

template <typename T>
Var<T> recursive_update(const Var<T>& previous, const CurvePair<T>& curves) {
  require_same_shape(previous.shape(), curves.l1.shape(), "recursive_update L1");
  require_same_shape(previous.shape(), curves.l2.shape(), "recursive_update L2");
  auto gate = nn::sharp_sigmoid(nn::add_scalar(nn::sub(curves.l2, previous), T(-0.1)));
  auto modulation = nn::div(curves.l1, nn::mul(gate, curves.l2), static_cast<T>(kUpdateDenominatorFloor));
  auto step = nn::mul(nn::mul(previous, nn::sub(curves.l1, previous)), modulation);
  return nn::clamp(nn::add(previous, step), T(0), T(1));
}

template <typename T>
EnhancementTrace<T> forward(const Var<T>& input, const nn::BoundParams<T>& params,
                            const EnhancerConfig& config, const ForwardHooks<T>* hooks) {
  config.validate();
  if (input.shape().c != 3) {
    throw Error(Errc::ChannelCountMismatch, "enhancer input must have 3 channels, got " + input.shape().str());
  }
  Var<T> planes = config.self_information
                      ? nn::constant(decompose(input.value(), config.decomposition))
                      : conv(input, params, "lift", 0);
  Var<T> features = smoothing_stack(planes, params, config.smoothing_units);
  features = nn::concat_channels<T>({features, input});
  features = cbam(features, bind_attention(params, "attn"));
  features = nn::silu(conv(features, params, "stem", 1));

  EnhancementTrace<T> trace;
  trace.images.push_back(input);
  for (int stage = 0; stage < config.stages; ++stage) {
    DeaOutput<T> block = dea_block(features, params, stage, config.epsilon_floor);
    features = block.features;
    CurvePair<T> curves = block.curves;
    if (hooks && hooks->override_curves) curves = hooks->override_curves(stage, trace.images.back(), curves);
    trace.images.push_back(recursive_update(trace.images.back(), curves));
    trace.curves.push_back(curves);
  }
  return trace;
}

template <typename T>
Tensor<T> enhance(const Tensor<T>& input, const nn::ParamStore<T>& store, const EnhancerConfig& config) {
  const nn::BoundParams<T> params(store, false);
  return forward(nn::constant(input), params, config).output().value();
}

#define SIMI_INSTANTIATE_ENHANCER(T)                                                               \
  template nn::ParamStore<T> init_params(const EnhancerConfig&, std::uint64_t);                    \
  template Var<T> smoothing_stack(const Var<T>&, const nn::BoundParams<T>&, int);                  \
  template DeaOutput<T> dea_block(const Var<T>&, const nn::BoundParams<T>&, int, double);          \
  template Var<T> recursive_update(const Var<T>&, const CurvePair<T>&);                            \
  template EnhancementTrace<T> forward(const Var<T>&, const nn::BoundParams<T>&, const EnhancerConfig&, \
                                       const ForwardHooks<T>*);                                    \
  template Tensor<T> enhance(const Tensor<T>&, const nn::ParamStore<T>&, const EnhancerConfig&);

SIMI_INSTANTIATE_ENHANCER(float)
SIMI_INSTANTIATE_ENHANCER(double)

}  // namespace simi
