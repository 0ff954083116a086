#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "simi/autograd.hpp"

namespace simi::nn {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;  // empty until gradients are collected
  Tensor<T> m;     // AdamW first moment
  Tensor<T> v;     // AdamW second moment
};

/// Named parameters in insertion order plus optimizer state. The order is
/// part of the checkpoint layout.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& add(std::string name, Tensor<T> value);

  Parameter<T>* find(std::string_view name);
  const Parameter<T>* find(std::string_view name) const;
  Parameter<T>& at(std::string_view name);
  const Parameter<T>& at(std::string_view name) const;

  std::vector<Parameter<T>>& params() { return params_; }
  const std::vector<Parameter<T>>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  /// Total number of scalar parameters.
  std::size_t count() const;

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t step) { step_ = step; }

  void clear_grads();

  /// Values, optimizer moments and step compared bitwise.
  bool operator==(const ParamStore& other) const;

 private:
  std::vector<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t step_ = 0;
};

struct AdamWConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

/// One decoupled-weight-decay Adam update:
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
/// Throws MissingGradient if any parameter has no collected gradient.
template <typename T>
void adamw_step(ParamStore<T>& store, const AdamWConfig& config);

struct ParamSpec {
  enum class Init { KaimingUniform, Zero };
  std::string name;
  Shape shape;
  Init init = Init::KaimingUniform;
};

/// Kaiming-uniform weights, U(-sqrt(6 / fan_in), sqrt(6 / fan_in)) with
/// fan_in = c * h * w of the weight shape; zero for Init::Zero. Parameters
/// are drawn in ParamSpec order from a single stream seeded by `seed`.
template <typename T>
ParamStore<T> init_params(std::span<const ParamSpec> specs, std::uint64_t seed);

/// Graph leaves for every parameter of a store, for one forward/backward.
template <typename T>
class BoundParams {
 public:
  explicit BoundParams(const ParamStore<T>& store, bool requires_grad = true);
  /// Binds existing graph values, e.g. perturbed copies in gradient checks.
  BoundParams(std::vector<std::string> names, std::vector<Var<T>> vars);

  const Var<T>& operator[](std::string_view name) const;
  bool contains(std::string_view name) const;

  /// Copies leaf gradients into `store` (zeros for unreached parameters).
  void collect_grads(ParamStore<T>& store) const;

 private:
  std::vector<std::string> names_;
  std::vector<Var<T>> vars_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace simi::nn
