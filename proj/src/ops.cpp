#include "simi/ops.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace simi::nn {
namespace {

void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a, int lda,
          const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
              m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a, int lda,
          const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
              m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

struct ConvGeometry {
  int c_in, h, w, k, stride, pad, h_out, w_out;
  int rows() const { return c_in * k * k; }
  int cols() const { return h_out * w_out; }
  bool direct() const { return k == 1 && stride == 1 && pad == 0; }
};

// Output columns [lo, hi) whose input column ow * stride - pad + kw is inside the image.
std::pair<int, int> valid_columns(const ConvGeometry& g, int kw) {
  const int shift = kw - g.pad;
  int lo = shift >= 0 ? 0 : (-shift + g.stride - 1) / g.stride;
  int hi = g.w - shift <= 0 ? 0 : (g.w - shift + g.stride - 1) / g.stride;
  hi = std::min(hi, g.w_out);
  lo = std::min(lo, hi);
  return {lo, hi};
}

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  for (int ci = 0; ci < g.c_in; ++ci) {
    for (int kh = 0; kh < g.k; ++kh) {
      for (int kw = 0; kw < g.k; ++kw) {
        T* row = col + static_cast<std::size_t>((ci * g.k + kh) * g.k + kw) * g.cols();
        const auto [lo, hi] = valid_columns(g, kw);
        const int shift = kw - g.pad;
        for (int oh = 0; oh < g.h_out; ++oh) {
          const int ih = oh * g.stride - g.pad + kh;
          T* dst = row + static_cast<std::size_t>(oh) * g.w_out;
          if (ih < 0 || ih >= g.h) {
            std::fill(dst, dst + g.w_out, T(0));
            continue;
          }
          const T* src = x + (static_cast<std::size_t>(ci) * g.h + ih) * g.w;
          std::fill(dst, dst + lo, T(0));
          if (g.stride == 1) {
            std::copy(src + lo + shift, src + hi + shift, dst + lo);
          } else {
            for (int ow = lo; ow < hi; ++ow) dst[ow] = src[ow * g.stride + shift];
          }
          std::fill(dst + hi, dst + g.w_out, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvGeometry& g, T* dx) {
  for (int ci = 0; ci < g.c_in; ++ci) {
    for (int kh = 0; kh < g.k; ++kh) {
      for (int kw = 0; kw < g.k; ++kw) {
        const T* row = col + static_cast<std::size_t>((ci * g.k + kh) * g.k + kw) * g.cols();
        const auto [lo, hi] = valid_columns(g, kw);
        const int shift = kw - g.pad;
        for (int oh = 0; oh < g.h_out; ++oh) {
          const int ih = oh * g.stride - g.pad + kh;
          if (ih < 0 || ih >= g.h) continue;
          const T* src = row + static_cast<std::size_t>(oh) * g.w_out;
          T* dst = dx + (static_cast<std::size_t>(ci) * g.h + ih) * g.w;
          if (g.stride == 1) {
            for (int ow = lo; ow < hi; ++ow) dst[ow + shift] += src[ow];
          } else {
            for (int ow = lo; ow < hi; ++ow) dst[ow * g.stride + shift] += src[ow];
          }
        }
      }
    }
  }
}

// Shape produced by broadcasting a against b; each dimension must match or be 1.
Shape broadcast_shape(const Shape& a, const Shape& b, const char* what) {
  auto dim = [&](int x, int y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    throw Error(Errc::ShapeMismatch,
                std::string(what) + ": cannot broadcast " + a.str() + " with " + b.str());
  };
  return Shape{dim(a.n, b.n), dim(a.c, b.c), dim(a.h, b.h), dim(a.w, b.w)};
}

struct Strides {
  std::size_t n, c, h, w;
};

Strides broadcast_strides(const Shape& s) {
  const std::size_t sw = 1;
  const std::size_t sh = static_cast<std::size_t>(s.w);
  const std::size_t sc = sh * s.h;
  const std::size_t sn = sc * s.c;
  return Strides{s.n == 1 ? 0 : sn, s.c == 1 ? 0 : sc, s.h == 1 ? 0 : sh, s.w == 1 ? 0 : sw};
}

// Visits every output element with the matching input offsets.
template <typename F>
void for_each_broadcast(const Shape& out, const Shape& a, const Shape& b, F&& f) {
  if (a == out && b == out) {
    const std::size_t total = out.numel();
    for (std::size_t i = 0; i < total; ++i) f(i, i, i);
    return;
  }
  const Strides sa = broadcast_strides(a);
  const Strides sb = broadcast_strides(b);
  std::size_t o = 0;
  for (int n = 0; n < out.n; ++n)
    for (int c = 0; c < out.c; ++c)
      for (int h = 0; h < out.h; ++h) {
        const std::size_t ia = n * sa.n + c * sa.c + h * sa.h;
        const std::size_t ib = n * sb.n + c * sb.c + h * sb.h;
        for (int w = 0; w < out.w; ++w, ++o) f(o, ia + w * sa.w, ib + w * sb.w);
      }
}

// Elementwise unary op with derivative expressed through input and output values.
template <typename T, typename Fwd, typename Deriv>
Var<T> unary(const Var<T>& x, Fwd fwd, Deriv deriv) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return make_result<T>(std::move(out), {x}, [deriv](Node<T>& self) {
    Node<T>& in = *self.parents[0];
    if (!in.requires_grad) return;
    Tensor<T>& g = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * deriv(in.value[i], self.value[i]);
    }
  });
}

template <typename T, typename Fwd, typename DA, typename DB>
Var<T> binary(const Var<T>& a, const Var<T>& b, const char* what, Fwd fwd, DA da, DB db) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape(), what);
  Tensor<T> out(out_shape);
  const T* av = a.value().data();
  const T* bv = b.value().data();
  T* ov = out.data();
  for_each_broadcast(out_shape, a.shape(), b.shape(),
                     [&](std::size_t o, std::size_t ia, std::size_t ib) { ov[o] = fwd(av[ia], bv[ib]); });
  return make_result<T>(std::move(out), {a, b}, [da, db](Node<T>& self) {
    Node<T>& na = *self.parents[0];
    Node<T>& nb = *self.parents[1];
    T* gad = na.requires_grad ? na.grad_buffer().data() : nullptr;
    T* gbd = nb.requires_grad ? nb.grad_buffer().data() : nullptr;
    const T* av = na.value.data();
    const T* bv = nb.value.data();
    const T* go = self.grad.data();
    for_each_broadcast(self.value.shape(), na.value.shape(), nb.value.shape(),
                       [&](std::size_t o, std::size_t ia, std::size_t ib) {
                         if (gad) gad[ia] += go[o] * da(av[ia], bv[ib]);
                         if (gbd) gbd[ib] += go[o] * db(av[ia], bv[ib]);
                       });
  });
}

template <typename T>
T logistic_value(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int padding) {
  if (stride <= 0) {
    throw Error(Errc::NonPositiveStride, "conv2d stride must be positive, got " + std::to_string(stride));
  }
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  if (ws.h != ws.w) throw Error(Errc::ShapeMismatch, "conv2d kernel must be square: " + ws.str());
  if (ws.c != xs.c) {
    throw Error(Errc::ShapeMismatch, "conv2d input channels " + std::to_string(xs.c) +
                                         " vs weight " + ws.str());
  }
  if (padding < 0) throw Error(Errc::ShapeMismatch, "conv2d padding must be non-negative");
  const bool has_bias = bias.valid();
  if (has_bias && bias.value().size() != static_cast<std::size_t>(ws.n)) {
    throw Error(Errc::ShapeMismatch, "conv2d bias " + bias.shape().str() + " for " +
                                         std::to_string(ws.n) + " output channels");
  }
  const int k = ws.h;
  if (xs.h + 2 * padding < k || xs.w + 2 * padding < k) {
    throw Error(Errc::ShapeMismatch, "conv2d kernel larger than padded input " + xs.str());
  }
  const ConvGeometry g{xs.c, xs.h, xs.w, k, stride, padding,
                       (xs.h + 2 * padding - k) / stride + 1, (xs.w + 2 * padding - k) / stride + 1};
  const int c_out = ws.n;
  Tensor<T> out(Shape{xs.n, c_out, g.h_out, g.w_out});

  std::vector<T> col(g.direct() ? 0 : static_cast<std::size_t>(g.rows()) * g.cols());
  const std::size_t in_stride = static_cast<std::size_t>(xs.c) * xs.h * xs.w;
  const std::size_t out_stride = static_cast<std::size_t>(c_out) * g.cols();
  for (int n = 0; n < xs.n; ++n) {
    const T* xn = x.value().data() + n * in_stride;
    const T* cols = xn;
    if (!g.direct()) {
      im2col(xn, g, col.data());
      cols = col.data();
    }
    T* on = out.data() + n * out_stride;
    gemm(false, false, c_out, g.cols(), g.rows(), T(1), weight.value().data(), g.rows(), cols,
         g.cols(), T(0), on, g.cols());
    if (has_bias) {
      for (int co = 0; co < c_out; ++co) {
        const T b = bias.value()[co];
        T* row = on + static_cast<std::size_t>(co) * g.cols();
        for (int p = 0; p < g.cols(); ++p) row[p] += b;
      }
    }
  }

  std::vector<Var<T>> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_result<T>(std::move(out), std::move(inputs), [g, c_out, has_bias](Node<T>& self) {
    Node<T>& xn = *self.parents[0];
    Node<T>& wn = *self.parents[1];
    const int batch = xn.value.shape().n;
    const std::size_t in_stride = static_cast<std::size_t>(g.c_in) * g.h * g.w;
    const std::size_t out_stride = static_cast<std::size_t>(c_out) * g.cols();
    std::vector<T> col(g.direct() ? 0 : static_cast<std::size_t>(g.rows()) * g.cols());
    for (int n = 0; n < batch; ++n) {
      const T* gy = self.grad.data() + n * out_stride;
      if (wn.requires_grad) {
        const T* cols = xn.value.data() + n * in_stride;
        if (!g.direct()) {
          im2col(cols, g, col.data());
          cols = col.data();
        }
        gemm(false, true, c_out, g.rows(), g.cols(), T(1), gy, g.cols(), cols, g.cols(), T(1),
             wn.grad_buffer().data(), g.rows());
      }
      if (xn.requires_grad) {
        T* gx = xn.grad_buffer().data() + n * in_stride;
        if (g.direct()) {
          gemm(true, false, g.rows(), g.cols(), c_out, T(1), wn.value.data(), g.rows(), gy, g.cols(),
               T(1), gx, g.cols());
        } else {
          gemm(true, false, g.rows(), g.cols(), c_out, T(1), wn.value.data(), g.rows(), gy, g.cols(),
               T(0), col.data(), g.cols());
          col2im_add(col.data(), g, gx);
        }
      }
      if (has_bias && self.parents[2]->requires_grad) {
        Tensor<T>& gb = self.parents[2]->grad_buffer();
        for (int co = 0; co < c_out; ++co) {
          const T* row = gy + static_cast<std::size_t>(co) * g.cols();
          T acc = 0;
          for (int p = 0; p < g.cols(); ++p) acc += row[p];
          gb[co] += acc;
        }
      }
    }
  });
}

template <typename T>
Var<T> silu(const Var<T>& x) {
  return unary(
      x, [](T v) { return v * logistic_value(v); },
      [](T v, T) {
        const T s = logistic_value(v);
        return s * (T(1) + v * (T(1) - s));
      });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return unary(
      x, [](T v) { return v > 0 ? v : T(0); }, [](T v, T) { return v > 0 ? T(1) : T(0); });
}

template <typename T>
Var<T> logistic(const Var<T>& x) {
  return unary(
      x, [](T v) { return logistic_value(v); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> sharp_sigmoid(const Var<T>& x) {
  return unary(
      x, [](T v) { return logistic_value(T(10) * v); },
      [](T, T y) { return T(10) * y * (T(1) - y); });
}

template <typename T>
Var<T> abs(const Var<T>& x) {
  return unary(
      x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > 0 ? T(1) : (v < 0 ? T(-1) : T(0)); });
}

template <typename T>
Var<T> square(const Var<T>& x) {
  return unary(
      x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Var<T> sqrt(const Var<T>& x) {
  return unary(
      x, [](T v) { return std::sqrt(v); }, [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Var<T> clamp(const Var<T>& x, T lo, T hi) {
  return unary(
      x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
      [lo, hi](T v, T) { return (v > lo && v < hi) ? T(1) : T(0); });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, T s) {
  return unary(
      x, [s](T v) { return v + s; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> scale(const Var<T>& x, T s) {
  return unary(
      x, [s](T v) { return v * s; }, [s](T, T) { return s; });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  return binary(
      a, b, "add", [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
      [](T, T) { return T(1); });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return binary(
      a, b, "sub", [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
      [](T, T) { return T(-1); });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  return binary(
      a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y) { return y; },
      [](T x, T) { return x; });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b, T floor) {
  for (const T v : b.value().values()) {
    if (!(std::abs(v) >= floor)) {
      throw Error(Errc::DivisionRangeViolation,
                  "denominator " + std::to_string(static_cast<double>(v)) + " below floor " +
                      std::to_string(static_cast<double>(floor)));
    }
  }
  return binary(
      a, b, "div", [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
      [](T x, T y) { return -x / (y * y); });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T acc = 0;
  for (const T v : x.value().values()) acc += v;
  return make_result<T>(Tensor<T>(Shape{}, acc), {x}, [](Node<T>& self) {
    Node<T>& in = *self.parents[0];
    if (!in.requires_grad) return;
    const T g = self.grad[0];
    for (T& v : in.grad_buffer().values()) v += g;
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  const T count = static_cast<T>(x.value().size());
  return scale(sum(x), T(1) / count);
}

template <typename T>
Var<T> spatial_mean(const Var<T>& x) {
  const Shape s = x.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  Tensor<T> out(Shape{s.n, s.c, 1, 1});
  for (std::size_t p = 0; p < out.size(); ++p) {
    const T* src = x.value().data() + p * plane;
    T acc = 0;
    for (std::size_t i = 0; i < plane; ++i) acc += src[i];
    out[p] = acc / static_cast<T>(plane);
  }
  return make_result<T>(std::move(out), {x}, [plane](Node<T>& self) {
    Node<T>& in = *self.parents[0];
    if (!in.requires_grad) return;
    T* g = in.grad_buffer().data();
    for (std::size_t p = 0; p < self.grad.size(); ++p) {
      const T share = self.grad[p] / static_cast<T>(plane);
      for (std::size_t i = 0; i < plane; ++i) g[p * plane + i] += share;
    }
  });
}

template <typename T>
Var<T> spatial_max(const Var<T>& x) {
  const Shape s = x.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  Tensor<T> out(Shape{s.n, s.c, 1, 1});
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    const T* src = x.value().data() + p * plane;
    const std::size_t best = static_cast<std::size_t>(std::max_element(src, src + plane) - src);
    argmax[p] = p * plane + best;
    out[p] = src[best];
  }
  return make_result<T>(std::move(out), {x}, [argmax = std::move(argmax)](Node<T>& self) {
    Node<T>& in = *self.parents[0];
    if (!in.requires_grad) return;
    T* g = in.grad_buffer().data();
    for (std::size_t p = 0; p < argmax.size(); ++p) g[argmax[p]] += self.grad[p];
  });
}

template <typename T>
Var<T> channel_sum(const Var<T>& x) {
  const Shape s = x.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  Tensor<T> out(Shape{s.n, 1, s.h, s.w});
  for (int n = 0; n < s.n; ++n) {
    T* dst = out.data() + n * plane;
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.value().data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
    }
  }
  return make_result<T>(std::move(out), {x}, [s, plane](Node<T>& self) {
    Node<T>& in = *self.parents[0];
    if (!in.requires_grad) return;
    T* g = in.grad_buffer().data();
    for (int n = 0; n < s.n; ++n) {
      const T* go = self.grad.data() + n * plane;
      for (int c = 0; c < s.c; ++c) {
        T* dst = g + (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] += go[i];
      }
    }
  });
}

template <typename T>
Var<T> channel_mean(const Var<T>& x) {
  return scale(channel_sum(x), T(1) / static_cast<T>(x.shape().c));
}

template <typename T>
Var<T> channel_max(const Var<T>& x) {
  const Shape s = x.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  Tensor<T> out(Shape{s.n, 1, s.h, s.w});
  std::vector<std::size_t> argmax(out.size());
  for (int n = 0; n < s.n; ++n) {
    for (std::size_t i = 0; i < plane; ++i) {
      std::size_t best = static_cast<std::size_t>(n) * s.c * plane + i;
      for (int c = 1; c < s.c; ++c) {
        const std::size_t idx = (static_cast<std::size_t>(n) * s.c + c) * plane + i;
        if (x.value()[idx] > x.value()[best]) best = idx;
      }
      argmax[n * plane + i] = best;
      out[n * plane + i] = x.value()[best];
    }
  }
  return make_result<T>(std::move(out), {x}, [argmax = std::move(argmax)](Node<T>& self) {
    Node<T>& in = *self.parents[0];
    if (!in.requires_grad) return;
    T* g = in.grad_buffer().data();
    for (std::size_t p = 0; p < argmax.size(); ++p) g[argmax[p]] += self.grad[p];
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw Error(Errc::ShapeMismatch, "concat_channels of nothing");
  const Shape first = parts.front().shape();
  int channels = 0;
  for (const auto& p : parts) {
    const Shape s = p.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w) {
      throw Error(Errc::ShapeMismatch, "concat_channels: " + first.str() + " vs " + s.str());
    }
    channels += s.c;
  }
  const std::size_t plane = static_cast<std::size_t>(first.h) * first.w;
  Tensor<T> out(Shape{first.n, channels, first.h, first.w});
  for (int n = 0; n < first.n; ++n) {
    T* dst = out.data() + static_cast<std::size_t>(n) * channels * plane;
    for (const auto& p : parts) {
      const std::size_t len = static_cast<std::size_t>(p.shape().c) * plane;
      const T* src = p.value().data() + n * len;
      dst = std::copy(src, src + len, dst);
    }
  }
  return make_result<T>(std::move(out), parts, [channels, plane](Node<T>& self) {
    const int batch = self.value.shape().n;
    for (int n = 0; n < batch; ++n) {
      const T* src = self.grad.data() + static_cast<std::size_t>(n) * channels * plane;
      for (auto& parent : self.parents) {
        const std::size_t len = static_cast<std::size_t>(parent->value.shape().c) * plane;
        if (parent->requires_grad) {
          T* dst = parent->grad_buffer().data() + n * len;
          for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
        }
        src += len;
      }
    }
  });
}

template <typename T>
SpatialGradient<T> spatial_gradient(const Var<T>& x) {
  const Shape s = x.shape();
  const std::size_t planes = static_cast<std::size_t>(s.n) * s.c;
  Tensor<T> dx(s);
  Tensor<T> dy(s);
  const T* v = x.value().data();
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t base = p * s.h * s.w;
    for (int h = 0; h < s.h; ++h) {
      for (int w = 0; w < s.w; ++w) {
        const std::size_t i = base + static_cast<std::size_t>(h) * s.w + w;
        if (w + 1 < s.w) dx[i] = v[i + 1] - v[i];
        if (h + 1 < s.h) dy[i] = v[i + s.w] - v[i];
      }
    }
  }
  // Both directions share one adjoint: each is a linear stencil over x.
  auto adjoint = [s, planes](bool horizontal) {
    return [s, planes, horizontal](Node<T>& self) {
      Node<T>& in = *self.parents[0];
      if (!in.requires_grad) return;
      T* g = in.grad_buffer().data();
      const T* go = self.grad.data();
      const std::size_t step = horizontal ? 1 : static_cast<std::size_t>(s.w);
      for (std::size_t p = 0; p < planes; ++p) {
        const std::size_t base = p * s.h * s.w;
        for (int h = 0; h < s.h; ++h) {
          for (int w = 0; w < s.w; ++w) {
            const bool interior = horizontal ? (w + 1 < s.w) : (h + 1 < s.h);
            if (!interior) continue;
            const std::size_t i = base + static_cast<std::size_t>(h) * s.w + w;
            g[i + step] += go[i];
            g[i] -= go[i];
          }
        }
      }
    };
  };
  return SpatialGradient<T>{make_result<T>(std::move(dx), {x}, adjoint(true)),
                            make_result<T>(std::move(dy), {x}, adjoint(false))};
}

#define SIMI_INSTANTIATE_OPS(T)                                                           \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int);           \
  template Var<T> silu(const Var<T>&);                                                     \
  template Var<T> relu(const Var<T>&);                                                     \
  template Var<T> logistic(const Var<T>&);                                                 \
  template Var<T> sharp_sigmoid(const Var<T>&);                                            \
  template Var<T> abs(const Var<T>&);                                                      \
  template Var<T> square(const Var<T>&);                                                   \
  template Var<T> sqrt(const Var<T>&);                                                     \
  template Var<T> clamp(const Var<T>&, T, T);                                              \
  template Var<T> add_scalar(const Var<T>&, T);                                            \
  template Var<T> scale(const Var<T>&, T);                                                 \
  template Var<T> add(const Var<T>&, const Var<T>&);                                       \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                       \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                       \
  template Var<T> div(const Var<T>&, const Var<T>&, T);                                    \
  template Var<T> sum(const Var<T>&);                                                      \
  template Var<T> mean(const Var<T>&);                                                     \
  template Var<T> spatial_mean(const Var<T>&);                                             \
  template Var<T> spatial_max(const Var<T>&);                                              \
  template Var<T> channel_sum(const Var<T>&);                                              \
  template Var<T> channel_mean(const Var<T>&);                                             \
  template Var<T> channel_max(const Var<T>&);                                              \
  template Var<T> concat_channels(const std::vector<Var<T>>&);                             \
  template SpatialGradient<T> spatial_gradient(const Var<T>&);

SIMI_INSTANTIATE_OPS(float)
SIMI_INSTANTIATE_OPS(double)

#undef SIMI_INSTANTIATE_OPS

}  // namespace simi::nn
