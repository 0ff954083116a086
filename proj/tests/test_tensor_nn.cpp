#include <cmath>
#include <vector>

#include "doctest.h"
#include "simi/gradcheck.hpp"
#include "simi/ops.hpp"
#include "simi/param_store.hpp"
#include "test_util.hpp"

using namespace simi;
using nn::Var;

namespace {

// Direct six-loop convolution used as the reference for the GEMM path.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>* b, int stride,
                          int pad) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();
  const int ho = (xs.h + 2 * pad - ws.h) / stride + 1;
  const int wo = (xs.w + 2 * pad - ws.w) / stride + 1;
  Tensor<double> out(Shape{xs.n, ws.n, ho, wo});
  for (int n = 0; n < xs.n; ++n)
    for (int co = 0; co < ws.n; ++co)
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow) {
          double acc = b ? (*b)[co] : 0.0;
          for (int ci = 0; ci < xs.c; ++ci)
            for (int kh = 0; kh < ws.h; ++kh)
              for (int kw = 0; kw < ws.w; ++kw) {
                const int ih = oh * stride - pad + kh;
                const int iw = ow * stride - pad + kw;
                if (ih < 0 || iw < 0 || ih >= xs.h || iw >= xs.w) continue;
                acc += x.at(n, ci, ih, iw) * w.at(co, ci, kh, kw);
              }
          out.at(n, co, oh, ow) = acc;
        }
  return out;
}

Var<double> leaf(const Tensor<double>& t) { return Var<double>::leaf(t, true); }

Tensor<double> scalar_tensor(double v) { return Tensor<double>(Shape{1, 1, 1, 1}, v); }

}  // namespace

TEST_CASE("conv2d matches the direct reference") {
  struct Case {
    int k, stride, pad, h, w;
  };
  for (const Case c : {Case{3, 1, 1, 7, 5}, Case{3, 2, 0, 9, 8}, Case{1, 1, 0, 4, 6}, Case{7, 1, 3, 8, 8},
                       Case{3, 3, 2, 10, 7}}) {
    CAPTURE(c.k);
    CAPTURE(c.stride);
    CAPTURE(c.pad);
    const auto x = testutil::random_tensor(Shape{2, 3, c.h, c.w}, 1);
    const auto w = testutil::random_tensor(Shape{4, 3, c.k, c.k}, 2);
    const auto b = testutil::random_tensor(Shape{1, 4, 1, 1}, 3);
    const auto got = nn::conv2d(nn::constant(x), nn::constant(w), nn::constant(b), c.stride, c.pad).value();
    const auto want = naive_conv(x, w, &b, c.stride, c.pad);
    REQUIRE(got.shape() == want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
  }
}

TEST_CASE("conv2d without bias and error paths") {
  const auto x = testutil::random_tensor(Shape{1, 2, 5, 5}, 4);
  const auto w = testutil::random_tensor(Shape{3, 2, 3, 3}, 5);
  const auto got = nn::conv2d(nn::constant(x), nn::constant(w), Var<double>{}, 1, 0).value();
  const auto want = naive_conv(x, w, nullptr, 1, 0);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));

  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::IoError;
  };
  CHECK(code_of([&] { nn::conv2d(nn::constant(x), nn::constant(w), Var<double>{}, 0, 1); }) ==
        Errc::NonPositiveStride);
  CHECK(code_of([&] { nn::conv2d(nn::constant(x), nn::constant(w), Var<double>{}, -2, 1); }) ==
        Errc::NonPositiveStride);
  const auto wrong_c = testutil::random_tensor(Shape{3, 4, 3, 3}, 6);
  CHECK(code_of([&] { nn::conv2d(nn::constant(x), nn::constant(wrong_c), Var<double>{}, 1, 1); }) ==
        Errc::ShapeMismatch);
  const auto huge = testutil::random_tensor(Shape{1, 2, 9, 9}, 7);
  CHECK(code_of([&] { nn::conv2d(nn::constant(x), nn::constant(huge), Var<double>{}, 1, 0); }) ==
        Errc::ShapeMismatch);
}

TEST_CASE("activation values") {
  const Tensor<double> one = scalar_tensor(1.0);
  CHECK(nn::silu(nn::constant(one)).value().item() == doctest::Approx(0.731059).epsilon(1e-6));
  CHECK(nn::logistic(nn::constant(scalar_tensor(-1.0))).value().item() == doctest::Approx(0.268941).epsilon(1e-6));
  CHECK(nn::sharp_sigmoid(nn::constant(scalar_tensor(0.1))).value().item() ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(nn::silu(nn::constant(scalar_tensor(0.0))).value().item() == 0.0);
  // Large negative arguments stay finite.
  CHECK(nn::logistic(nn::constant(scalar_tensor(-800.0))).value().item() >= 0.0);
  CHECK(std::isfinite(nn::silu(nn::constant(scalar_tensor(-800.0))).value().item()));
}

TEST_CASE("backward requires a scalar") {
  const auto x = leaf(testutil::random_tensor(Shape{1, 1, 2, 2}, 8));
  CHECK_THROWS_AS(nn::backward(nn::square(x)), Error);
  try {
    nn::backward(nn::square(x));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonScalarLoss);
  }
}

TEST_CASE("fan-out accumulates and shared nodes are visited once") {
  // f = x*x + x, df/dx = 2x + 1
  const auto x = leaf(scalar_tensor(3.0));
  nn::backward(nn::add(nn::mul(x, x), x));
  CHECK(x.grad().item() == doctest::Approx(7.0));

  // a = 2x feeds both operands: f = a + a, df/dx = 4 (tree expansion would give the same,
  // but a double visit of `a` would give 8).
  const auto y = leaf(scalar_tensor(1.5));
  const auto a = nn::scale(y, 2.0);
  nn::backward(nn::add(a, a));
  CHECK(y.grad().item() == doctest::Approx(4.0));

  // Diamond: b = y^2, c = b*b + b; dc/dy = (2b + 1) 2y
  const auto z = leaf(scalar_tensor(0.5));
  const auto b = nn::square(z);
  nn::backward(nn::add(nn::mul(b, b), b));
  CHECK(z.grad().item() == doctest::Approx((2 * 0.25 + 1) * 2 * 0.5));
}

TEST_CASE("broadcasting binary ops reduce gradients onto size-1 dims") {
  const auto a = leaf(testutil::random_tensor(Shape{2, 3, 4, 5}, 9));
  const auto b = leaf(testutil::random_tensor(Shape{2, 3, 1, 1}, 10));
  const auto c = nn::add(a, b);
  CHECK(c.shape() == a.shape());
  CHECK(c.value().at(1, 2, 3, 4) == doctest::Approx(a.value().at(1, 2, 3, 4) + b.value().at(1, 2, 0, 0)));
  nn::backward(nn::sum(c));
  for (double g : b.grad().values()) CHECK(g == doctest::Approx(20.0));
  for (double g : a.grad().values()) CHECK(g == doctest::Approx(1.0));

  const auto bad = nn::constant(testutil::random_tensor(Shape{2, 2, 4, 5}, 11));
  CHECK_THROWS_AS(nn::add(a, bad), Error);
}

TEST_CASE("division floor") {
  const auto a = nn::constant(scalar_tensor(1.0));
  CHECK(nn::div(a, nn::constant(scalar_tensor(4.0)), 1e-6).value().item() == 0.25);
  CHECK(nn::div(a, nn::constant(scalar_tensor(-4.0)), 1e-6).value().item() == -0.25);
  try {
    nn::div(a, nn::constant(scalar_tensor(1e-7)), 1e-6);
    FAIL("expected DivisionRangeViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DivisionRangeViolation);
  }
}

TEST_CASE("clamp passes gradient only strictly inside the bounds") {
  Tensor<double> v(Shape{1, 1, 1, 4});
  v[0] = -0.5;
  v[1] = 0.25;
  v[2] = 1.5;
  v[3] = 0.75;
  const auto x = leaf(v);
  const auto y = nn::clamp(x, 0.0, 1.0);
  CHECK(y.value()[0] == 0.0);
  CHECK(y.value()[2] == 1.0);
  nn::backward(nn::sum(y));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 1.0);
  CHECK(x.grad()[2] == 0.0);
  CHECK(x.grad()[3] == 1.0);
}

TEST_CASE("spatial gradient is a forward difference with zero last column and row") {
  Tensor<double> v(Shape{1, 1, 2, 3});
  for (int i = 0; i < 6; ++i) v[i] = i * i;  // rows {0,1,4}, {9,16,25}
  const auto g = nn::spatial_gradient(nn::constant(v));
  CHECK(g.dx.value().at(0, 0, 0, 0) == 1);
  CHECK(g.dx.value().at(0, 0, 0, 1) == 3);
  CHECK(g.dx.value().at(0, 0, 0, 2) == 0);
  CHECK(g.dx.value().at(0, 0, 1, 1) == 9);
  CHECK(g.dy.value().at(0, 0, 0, 0) == 9);
  CHECK(g.dy.value().at(0, 0, 0, 2) == 21);
  CHECK(g.dy.value().at(0, 0, 1, 0) == 0);
}

TEST_CASE("reductions") {
  const auto t = testutil::random_tensor(Shape{2, 3, 2, 2}, 12);
  const auto x = nn::constant(t);
  double total = 0;
  for (double v : t.values()) total += v;
  CHECK(nn::sum(x).value().item() == doctest::Approx(total));
  CHECK(nn::mean(x).value().item() == doctest::Approx(total / 24));
  CHECK(nn::spatial_mean(x).shape() == Shape{2, 3, 1, 1});
  CHECK(nn::channel_max(x).shape() == Shape{2, 1, 2, 2});
  const double m = std::max({t.at(1, 0, 1, 0), t.at(1, 1, 1, 0), t.at(1, 2, 1, 0)});
  CHECK(nn::channel_max(x).value().at(1, 0, 1, 0) == m);
  CHECK(nn::channel_sum(x).value().at(0, 0, 0, 1) ==
        doctest::Approx(t.at(0, 0, 0, 1) + t.at(0, 1, 0, 1) + t.at(0, 2, 0, 1)));
  const auto cat = nn::concat_channels<double>({x, nn::spatial_gradient(x).dx});
  CHECK(cat.shape() == Shape{2, 6, 2, 2});
  CHECK(cat.value().at(1, 2, 1, 1) == t.at(1, 2, 1, 1));
}

TEST_CASE("finite-difference check of a composite expression") {
  const auto x = testutil::random_tensor(Shape{1, 2, 4, 4}, 13);
  const auto w = testutil::random_tensor(Shape{3, 2, 3, 3}, 14);
  const ScalarFn f = [](const std::vector<Var<double>>& v) {
    const auto h = nn::silu(nn::conv2d(v[0], v[1], Var<double>{}, 1, 1));
    return nn::mean(nn::square(nn::sub(h, nn::spatial_mean(h))));
  };
  const auto r = check_gradients("composite", f, {x, w}, GradCheckOptions{});
  CHECK(r.entries == x.size() + w.size());
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("AdamW first step closed form") {
  nn::ParamStore<double> store;
  auto& p = store.add("w", Tensor<double>(Shape{1, 1, 1, 3}, 0.5));
  p.grad = Tensor<double>(Shape{1, 1, 1, 3});
  p.grad[0] = 2.0;
  p.grad[1] = -0.25;
  p.grad[2] = 0.0;
  nn::AdamWConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.01;
  nn::adamw_step(store, cfg);
  // m_hat = g, v_hat = g^2, so the step is lr * sign(g) * |g| / (|g| + eps)
  const auto& v = store.at("w").value;
  CHECK(v[0] == doctest::Approx(0.5 - 0.1 * 2.0 / (2.0 + 1e-8) - 0.1 * 0.01 * 0.5).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.5 + 0.1 * 0.25 / (0.25 + 1e-8) - 0.1 * 0.01 * 0.5).epsilon(1e-12));
  CHECK(v[2] == doctest::Approx(0.5 - 0.1 * 0.01 * 0.5).epsilon(1e-12));
  CHECK(store.step() == 1);
}

TEST_CASE("AdamW second step with bias correction") {
  nn::ParamStore<double> store;
  auto& p = store.add("w", Tensor<double>(Shape{1, 1, 1, 1}, 1.0));
  nn::AdamWConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.0;
  const double g1 = 1.0;
  const double g2 = -3.0;
  p.grad = Tensor<double>(Shape{1, 1, 1, 1}, g1);
  nn::adamw_step(store, cfg);
  store.at("w").grad = Tensor<double>(Shape{1, 1, 1, 1}, g2);
  nn::adamw_step(store, cfg);
  const double m = 0.9 * (0.1 * g1) + 0.1 * g2;
  const double v = 0.999 * (0.001 * g1 * g1) + 0.001 * g2 * g2;
  const double m_hat = m / (1 - 0.81);
  const double v_hat = v / (1 - 0.999 * 0.999);
  const double theta1 = 1.0 - 0.01 * 1.0 / (1.0 + 1e-8);
  const double expected = theta1 - 0.01 * m_hat / (std::sqrt(v_hat) + 1e-8);
  CHECK(store.at("w").value.item() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("AdamW without a gradient and with zero gradients") {
  nn::ParamStore<double> store;
  store.add("w", testutil::random_tensor(Shape{1, 1, 2, 2}, 15));
  try {
    nn::adamw_step(store, nn::AdamWConfig{});
    FAIL("expected MissingGradient");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingGradient);
  }
  const auto before = store.at("w").value;
  nn::AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  for (int i = 0; i < 3; ++i) {
    store.at("w").grad = Tensor<double>(Shape{1, 1, 2, 2});
    nn::adamw_step(store, cfg);
  }
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(store.at("w").value[i] == before[i]);
}

TEST_CASE("parameter initialisation is seeded and bounded") {
  const std::vector<nn::ParamSpec> specs{{"a", Shape{4, 3, 3, 3}, nn::ParamSpec::Init::KaimingUniform},
                                         {"b", Shape{1, 4, 1, 1}, nn::ParamSpec::Init::Zero}};
  const auto s1 = nn::init_params<float>(specs, 7);
  const auto s2 = nn::init_params<float>(specs, 7);
  const auto s3 = nn::init_params<float>(specs, 8);
  CHECK(s1 == s2);
  CHECK_FALSE(s1 == s3);
  const double bound = std::sqrt(6.0 / 27.0);
  for (float v : s1.at("a").value.values()) CHECK(std::abs(v) <= bound);
  for (float v : s1.at("b").value.values()) CHECK(v == 0.0f);
  CHECK(s1.count() == 4 * 27 + 4);
  nn::ParamStore<float> dup;
  dup.add("x", Tensor<float>(Shape{1, 1, 1, 1}));
  CHECK_THROWS_AS(dup.add("x", Tensor<float>(Shape{1, 1, 1, 1})), Error);
}

TEST_CASE("unreached parameters collect zero gradients") {
  nn::ParamStore<double> store;
  store.add("used", Tensor<double>(Shape{1, 1, 1, 1}, 2.0));
  store.add("unused", Tensor<double>(Shape{1, 1, 1, 2}, 1.0));
  const nn::BoundParams<double> params(store, true);
  nn::backward(nn::square(params["used"]));
  params.collect_grads(store);
  CHECK(store.at("used").grad.item() == doctest::Approx(4.0));
  CHECK(store.at("unused").grad.shape() == Shape{1, 1, 1, 2});
  CHECK(store.at("unused").grad[1] == 0.0);
  CHECK_THROWS_AS(params["missing"], Error);
}
