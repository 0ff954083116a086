#include "simi/param_store.hpp"

#include <cmath>
#include <cstring>
#include <random>

namespace simi::nn {
namespace {

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape() && a.size() == b.size() &&
         (a.size() == 0 || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

}  // namespace

template <typename T>
Parameter<T>& ParamStore<T>::add(std::string name, Tensor<T> value) {
  if (index_.count(name)) throw Error(Errc::InvalidConfig, "duplicate parameter '" + name + "'");
  index_.emplace(name, params_.size());
  Parameter<T> p;
  p.m = Tensor<T>(value.shape());
  p.v = Tensor<T>(value.shape());
  p.value = std::move(value);
  p.name = std::move(name);
  params_.push_back(std::move(p));
  return params_.back();
}

template <typename T>
Parameter<T>* ParamStore<T>::find(std::string_view name) {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename T>
const Parameter<T>* ParamStore<T>::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename T>
Parameter<T>& ParamStore<T>::at(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw Error(Errc::InvalidConfig, "no parameter named '" + std::string(name) + "'");
}

template <typename T>
const Parameter<T>& ParamStore<T>::at(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw Error(Errc::InvalidConfig, "no parameter named '" + std::string(name) + "'");
}

template <typename T>
std::size_t ParamStore<T>::count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

template <typename T>
void ParamStore<T>::clear_grads() {
  for (auto& p : params_) p.grad = Tensor<T>();
}

template <typename T>
bool ParamStore<T>::operator==(const ParamStore& other) const {
  if (step_ != other.step_ || params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || !bitwise_equal(a.value, b.value) || !bitwise_equal(a.m, b.m) ||
        !bitwise_equal(a.v, b.v)) {
      return false;
    }
  }
  return true;
}

template <typename T>
void adamw_step(ParamStore<T>& store, const AdamWConfig& config) {
  for (const auto& p : store.params()) {
    if (p.grad.shape() != p.value.shape() || p.grad.size() != p.value.size()) {
      throw Error(Errc::MissingGradient, "parameter '" + p.name + "' has no gradient");
    }
  }
  const std::uint64_t t = store.step() + 1;
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  for (auto& p : store.params()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const T g = p.grad[i];
      p.m[i] = b1 * p.m[i] + (T(1) - b1) * g;
      p.v[i] = b2 * p.v[i] + (T(1) - b2) * g * g;
      const double m_hat = static_cast<double>(p.m[i]) / correction1;
      const double v_hat = static_cast<double>(p.v[i]) / correction2;
      const double theta = static_cast<double>(p.value[i]);
      const double updated = theta - config.lr * m_hat / (std::sqrt(v_hat) + config.eps) -
                             config.lr * config.weight_decay * theta;
      p.value[i] = static_cast<T>(updated);
    }
  }
  store.set_step(t);
}

template <typename T>
ParamStore<T> init_params(std::span<const ParamSpec> specs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamStore<T> store;
  for (const auto& spec : specs) {
    Tensor<T> value(spec.shape);
    if (spec.init == ParamSpec::Init::KaimingUniform) {
      const int fan_in = spec.shape.c * spec.shape.h * spec.shape.w;
      const double bound = std::sqrt(6.0 / fan_in);
      for (T& v : value.values()) {
        // 53 random bits -> [0,1), mapped to [-bound, bound).
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = static_cast<T>((2.0 * u - 1.0) * bound);
      }
    }
    store.add(spec.name, std::move(value));
  }
  return store;
}

template <typename T>
BoundParams<T>::BoundParams(const ParamStore<T>& store, bool requires_grad) {
  for (const auto& p : store.params()) {
    index_.emplace(p.name, vars_.size());
    names_.push_back(p.name);
    vars_.push_back(Var<T>::leaf(p.value, requires_grad));
  }
}

template <typename T>
BoundParams<T>::BoundParams(std::vector<std::string> names, std::vector<Var<T>> vars)
    : names_(std::move(names)), vars_(std::move(vars)) {
  if (names_.size() != vars_.size()) throw Error(Errc::ShapeMismatch, "names and values differ in count");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw Error(Errc::InvalidConfig, "duplicate parameter '" + names_[i] + "'");
    }
  }
}

template <typename T>
const Var<T>& BoundParams<T>::operator[](std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error(Errc::InvalidConfig, "unbound parameter '" + std::string(name) + "'");
  return vars_[it->second];
}

template <typename T>
bool BoundParams<T>::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

template <typename T>
void BoundParams<T>::collect_grads(ParamStore<T>& store) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    Parameter<T>& p = store.at(names_[i]);
    const Tensor<T>& g = vars_[i].grad();
    p.grad = g.empty() ? Tensor<T>(p.value.shape()) : g;
  }
}

template class ParamStore<float>;
template class ParamStore<double>;
template class BoundParams<float>;
template class BoundParams<double>;
template void adamw_step(ParamStore<float>&, const AdamWConfig&);
template void adamw_step(ParamStore<double>&, const AdamWConfig&);
template ParamStore<float> init_params(std::span<const ParamSpec>, std::uint64_t);
template ParamStore<double> init_params(std::span<const ParamSpec>, std::uint64_t);

}  // namespace simi::nn
