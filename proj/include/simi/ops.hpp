#pragma once

#include <vector>

#include "simi/autograd.hpp"

// Differentiable tensor operations. Binary elementwise ops broadcast NCHW
// dimensions of extent 1; gradients are reduced back onto the input shape.
namespace simi::nn {

template <typename T>
Var<T> constant(Tensor<T> value) {
  return Var<T>::leaf(std::move(value), false);
}

/// Cross-correlation with zero padding. `bias` may be an invalid Var (no
/// bias). Weight shape is (C_out, C_in, k, k); bias holds C_out elements.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int padding);

template <typename T> Var<T> silu(const Var<T>& x);
template <typename T> Var<T> relu(const Var<T>& x);
/// 1 / (1 + exp(-x)).
template <typename T> Var<T> logistic(const Var<T>& x);
/// 1 / (1 + exp(-10 x)), the exposure gate of the recursive update.
template <typename T> Var<T> sharp_sigmoid(const Var<T>& x);
template <typename T> Var<T> abs(const Var<T>& x);
template <typename T> Var<T> square(const Var<T>& x);
template <typename T> Var<T> sqrt(const Var<T>& x);
/// Clamp to [lo, hi]; the gradient passes only where lo < x < hi.
template <typename T> Var<T> clamp(const Var<T>& x, T lo, T hi);
template <typename T> Var<T> add_scalar(const Var<T>& x, T s);
template <typename T> Var<T> scale(const Var<T>& x, T s);

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
/// a / b. Throws DivisionRangeViolation if any |b| < `floor`.
template <typename T> Var<T> div(const Var<T>& a, const Var<T>& b, T floor = T(0));

/// Reductions to a (1,1,1,1) scalar.
template <typename T> Var<T> sum(const Var<T>& x);
template <typename T> Var<T> mean(const Var<T>& x);

/// (N,C,H,W) -> (N,C,1,1).
template <typename T> Var<T> spatial_mean(const Var<T>& x);
template <typename T> Var<T> spatial_max(const Var<T>& x);
/// (N,C,H,W) -> (N,1,H,W).
template <typename T> Var<T> channel_sum(const Var<T>& x);
template <typename T> Var<T> channel_mean(const Var<T>& x);
template <typename T> Var<T> channel_max(const Var<T>& x);

template <typename T> Var<T> concat_channels(const std::vector<Var<T>>& parts);

template <typename T>
struct SpatialGradient {
  Var<T> dx;  // x[.., w+1] - x[.., w], zero in the last column
  Var<T> dy;  // x[.., h+1, .] - x[.., h, .], zero in the last row
};

template <typename T> SpatialGradient<T> spatial_gradient(const Var<T>& x);

template <typename T> Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <typename T> Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <typename T> Var<T> operator*(const Var<T>& a, const Var<T>& b) { return mul(a, b); }

}  // namespace simi::nn
