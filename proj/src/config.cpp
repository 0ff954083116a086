#include "simi/config.hpp"

#include <fstream>
#include <set>

#include "simi/checkpoint.hpp"

namespace simi {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error(Errc::InvalidConfig, std::string("unknown key '") + key + "' in " + where);
  }
}

template <typename V>
void read(const json& j, const char* key, V& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<V>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("bad value for '") + key + "': " + e.what());
  }
}

json to_json(const LossWeights& w) {
  return {{"local_color", w.local_color}, {"global_chroma", w.global_chroma}, {"brightness", w.brightness},
          {"smooth_l1", w.smooth_l1}, {"smooth_l2", w.smooth_l2}};
}

LossWeights weights_from_json(const json& j) {
  reject_unknown(j, {"local_color", "global_chroma", "brightness", "smooth_l1", "smooth_l2"}, "loss_weights");
  LossWeights w;
  read(j, "local_color", w.local_color);
  read(j, "global_chroma", w.global_chroma);
  read(j, "brightness", w.brightness);
  read(j, "smooth_l1", w.smooth_l1);
  read(j, "smooth_l2", w.smooth_l2);
  return w;
}

json to_json(const LossOptions& o) {
  return {{"exposure", o.exposure},
          {"factor_offset", o.factor_offset},
          {"chroma", o.chroma == ChromaMode::FactorMean ? "factor_mean" : "channel_mean"}};
}

LossOptions loss_options_from_json(const json& j) {
  reject_unknown(j, {"exposure", "factor_offset", "chroma"}, "loss");
  LossOptions o;
  read(j, "exposure", o.exposure);
  read(j, "factor_offset", o.factor_offset);
  std::string chroma = "factor_mean";
  read(j, "chroma", chroma);
  if (chroma == "factor_mean") {
    o.chroma = ChromaMode::FactorMean;
  } else if (chroma == "channel_mean") {
    o.chroma = ChromaMode::ChannelMean;
  } else {
    throw Error(Errc::InvalidConfig, "chroma must be factor_mean or channel_mean");
  }
  return o;
}

}  // namespace

json to_json(const EnhancerConfig& c) {
  return {{"stages", c.stages},
          {"smoothing_units", c.smoothing_units},
          {"feature_channels", c.feature_channels},
          {"decomposition", c.decomposition.name()},
          {"quant_levels", c.decomposition.levels},
          {"self_information", c.self_information},
          {"epsilon_floor", c.epsilon_floor},
          {"seed", c.seed},
          {"attention_reduction", c.attention_reduction},
          {"attention_kernel", c.attention_kernel}};
}

EnhancerConfig enhancer_config_from_json(const json& j) {
  reject_unknown(j,
                 {"stages", "smoothing_units", "feature_channels", "decomposition", "quant_levels",
                  "self_information", "epsilon_floor", "seed", "attention_reduction", "attention_kernel"},
                 "enhancer");
  EnhancerConfig c;
  read(j, "stages", c.stages);
  read(j, "smoothing_units", c.smoothing_units);
  read(j, "feature_channels", c.feature_channels);
  std::string mode = c.decomposition.name();
  read(j, "decomposition", mode);
  c.decomposition = DecompositionMode::parse(mode);
  read(j, "quant_levels", c.decomposition.levels);
  read(j, "self_information", c.self_information);
  read(j, "epsilon_floor", c.epsilon_floor);
  read(j, "seed", c.seed);
  read(j, "attention_reduction", c.attention_reduction);
  read(j, "attention_kernel", c.attention_kernel);
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (!(lr > 0) || !(weight_decay >= 0) || !(eps > 0)) {
    throw Error(Errc::InvalidConfig, "lr and eps must be positive, weight_decay non-negative");
  }
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw Error(Errc::InvalidConfig, "betas must lie in [0,1)");
  }
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
  if (checkpoint_every < 1) throw Error(Errc::InvalidConfig, "checkpoint_every must be >= 1");
  if (crop_size < 1) throw Error(Errc::InvalidConfig, "crop_size must be >= 1");
  for (const double w : {weights.local_color, weights.global_chroma, weights.brightness, weights.smooth_l1,
                         weights.smooth_l2}) {
    if (!(w >= 0)) throw Error(Errc::InvalidConfig, "loss weights must be non-negative");
  }
  enhancer.validate();
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"batch_size", c.batch_size},
          {"max_iterations", c.max_iterations},
          {"checkpoint_every", c.checkpoint_every},
          {"seed", c.seed},
          {"crop_size", c.crop_size},
          {"loss_weights", to_json(c.weights)},
          {"loss", to_json(c.loss)},
          {"enhancer", to_json(c.enhancer)}};
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown(j,
                 {"lr", "weight_decay", "beta1", "beta2", "eps", "batch_size", "max_iterations",
                  "checkpoint_every", "seed", "crop_size", "loss_weights", "loss", "enhancer"},
                 "train config");
  TrainConfig c;
  read(j, "lr", c.lr);
  read(j, "weight_decay", c.weight_decay);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "eps", c.eps);
  read(j, "batch_size", c.batch_size);
  read(j, "max_iterations", c.max_iterations);
  read(j, "checkpoint_every", c.checkpoint_every);
  read(j, "seed", c.seed);
  read(j, "crop_size", c.crop_size);
  if (j.contains("loss_weights")) c.weights = weights_from_json(j.at("loss_weights"));
  if (j.contains("loss")) c.loss = loss_options_from_json(j.at("loss"));
  if (j.contains("enhancer")) c.enhancer = enhancer_config_from_json(j.at("enhancer"));
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, "cannot parse " + path.string() + ": " + e.what());
  }
  return train_config_from_json(j);
}

std::string canonical_json(const EnhancerConfig& config) { return to_json(config).dump(); }

std::uint64_t config_digest(const EnhancerConfig& config) { return fnv1a64(canonical_json(config)); }

}  // namespace simi
