#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "simi/enhancer.hpp"
#include "simi/losses.hpp"
#include "simi/param_store.hpp"

namespace simi {

struct TrainConfig {
  double lr = 1e-5;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 8;
  std::uint64_t max_iterations = 10000;
  std::uint64_t checkpoint_every = 200;
  std::uint64_t seed = 0;  // data order and crops
  int crop_size = 256;
  LossWeights weights;
  LossOptions loss;
  EnhancerConfig enhancer;

  void validate() const;
  nn::AdamWConfig adamw() const { return {lr, beta1, beta2, eps, weight_decay}; }
};

nlohmann::json to_json(const EnhancerConfig& config);
nlohmann::json to_json(const TrainConfig& config);

/// Missing keys keep their defaults; unknown keys raise InvalidConfig.
EnhancerConfig enhancer_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);

TrainConfig load_train_config(const std::filesystem::path& path);

/// Canonical serialisation stored in checkpoints.
std::string canonical_json(const EnhancerConfig& config);
/// FNV-1a of canonical_json(); identifies the architecture a checkpoint
/// belongs to.
std::uint64_t config_digest(const EnhancerConfig& config);

}  // namespace simi
