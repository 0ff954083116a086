#include "simi/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "simi/attention.hpp"
#include "simi/enhancer.hpp"
#include "simi/losses.hpp"

namespace simi {
namespace {

using nn::Var;
using Vars = std::vector<Var<double>>;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Tensor<double> uniform(Shape shape, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor<double> t(shape);
    for (double& v : t.values()) v = dist(rng_);
    return t;
  }

  // Uniform in [lo, hi] with magnitude at least `gap`, keeping values off kinks at 0.
  Tensor<double> away_from_zero(Shape shape, double hi, double gap) {
    std::uniform_real_distribution<double> mag(gap, hi);
    std::bernoulli_distribution sign(0.5);
    Tensor<double> t(shape);
    for (double& v : t.values()) v = sign(rng_) ? mag(rng_) : -mag(rng_);
    return t;
  }

  // Unit-range image whose values are exact 8-bit levels.
  Tensor<double> image(Shape shape, int lo = 0, int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    Tensor<double> t(shape);
    for (double& v : t.values()) v = dist(rng_) / 255.0;
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

// sum(y * r) for a fixed random r turns any tensor output into a scalar whose
// gradient exercises every output element with a distinct weight.
ScalarFn project(std::function<Var<double>(const Vars&)> op, Tensor<double> weights) {
  auto w = std::make_shared<Tensor<double>>(std::move(weights));
  return [op = std::move(op), w](const Vars& in) {
    Var<double> y = op(in);
    require_same_shape(y.shape(), w->shape(), "gradcheck projection");
    return nn::sum(nn::mul(y, nn::constant(*w)));
  };
}

Vars leaves(const std::vector<Tensor<double>>& values, bool requires_grad) {
  Vars out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(Var<double>::leaf(v, requires_grad));
  return out;
}

nn::BoundParams<double> bind_specs(const std::vector<nn::ParamSpec>& specs, const Vars& vars, std::size_t offset) {
  std::vector<std::string> names;
  for (const auto& s : specs) names.push_back(s.name);
  return nn::BoundParams<double>(std::move(names), Vars(vars.begin() + offset, vars.begin() + offset + specs.size()));
}

std::vector<Tensor<double>> initial_values(const std::vector<nn::ParamSpec>& specs, std::uint64_t seed,
                                           Sampler& sampler) {
  const auto store = nn::init_params<double>(specs, seed);
  std::vector<Tensor<double>> values;
  for (const auto& p : store.params()) {
    // Zero-initialised biases would sit on ReLU kinks; give them small values.
    bool zero = std::all_of(p.value.values().begin(), p.value.values().end(), [](double v) { return v == 0; });
    values.push_back(zero ? sampler.uniform(p.value.shape(), -0.1, 0.1) : p.value);
  }
  return values;
}

}  // namespace

GradCheckResult check_gradients(const std::string& name, const ScalarFn& fn,
                                const std::vector<Tensor<double>>& inputs, const GradCheckOptions& options,
                                std::vector<std::size_t> checked) {
  if (checked.empty()) {
    for (std::size_t i = 0; i < inputs.size(); ++i) checked.push_back(i);
  }
  const Vars vars = leaves(inputs, true);
  const Var<double> out = fn(vars);
  nn::backward(out);

  GradCheckResult result{name, 0.0, 0};
  std::vector<Tensor<double>> probe = inputs;
  for (const std::size_t i : checked) {
    const Tensor<double>& analytic = vars[i].grad();
    const std::size_t count = inputs[i].size();
    std::size_t stride = 1;
    if (options.max_entries_per_tensor > 0 && count > options.max_entries_per_tensor) {
      stride = count / options.max_entries_per_tensor;
    }
    for (std::size_t e = (stride > 1 ? stride / 2 : 0); e < count; e += stride) {
      const double original = inputs[i][e];
      auto at = [&](double offset) {
        probe[i][e] = original + offset;
        return fn(leaves(probe, false)).value().item();
      };
      const double h = options.step;
      const double numeric = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
      probe[i][e] = original;
      const double a = analytic.empty() ? 0.0 : analytic[e];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(a - numeric) / denom);
      ++result.entries;
    }
  }
  return result;
}

double GradCheckReport::max_rel_error() const {
  double worst = 0;
  for (const auto& r : results) worst = std::max(worst, r.max_rel_error);
  return worst;
}

GradCheckReport run_gradcheck_suite(int size, std::uint64_t seed) {
  if (size < 4) throw Error(Errc::InvalidConfig, "gradcheck size must be at least 4");
  Sampler s(seed);
  GradCheckReport report;
  auto run = [&](const std::string& name, const ScalarFn& fn, const std::vector<Tensor<double>>& inputs,
                 std::vector<std::size_t> checked = {}, GradCheckOptions o = GradCheckOptions{}) {
    report.results.push_back(check_gradients(name, fn, inputs, o, std::move(checked)));
  };
  const int n = 2;
  const Shape img{n, 3, size, size};
  const Shape col{n, 3, 1, 1};
  const Shape pix{n, 1, size, size};

  // Convolution.
  {
    const auto x = s.uniform(Shape{n, 4, size, size}, -1, 1);
    const auto w3 = s.uniform(Shape{5, 4, 3, 3}, -0.5, 0.5);
    const auto w1 = s.uniform(Shape{5, 4, 1, 1}, -0.5, 0.5);
    const auto b = s.uniform(Shape{1, 5, 1, 1}, -0.5, 0.5);
    run("conv2d k3 s1 p1",
        project([](const Vars& v) { return nn::conv2d(v[0], v[1], v[2], 1, 1); },
                s.uniform(Shape{n, 5, size, size}, -1, 1)),
        {x, w3, b});
    const int strided = (size - 3) / 2 + 1;
    run("conv2d k3 s2 p0",
        project([](const Vars& v) { return nn::conv2d(v[0], v[1], v[2], 2, 0); },
                s.uniform(Shape{n, 5, strided, strided}, -1, 1)),
        {x, w3, b});
    run("conv2d k1 no-bias",
        project([](const Vars& v) { return nn::conv2d(v[0], v[1], Var<double>{}, 1, 0); },
                s.uniform(Shape{n, 5, size, size}, -1, 1)),
        {x, w1});
  }

  // Elementwise unary ops.
  {
    const auto r = s.uniform(img, -1, 1);
    const auto x = s.away_from_zero(img, 2, 0.05);
    const auto positive = s.uniform(img, 0.2, 2);
    auto unary = [&](const std::string& name, std::function<Var<double>(const Var<double>&)> f,
                     const Tensor<double>& input) {
      run(name, project([f](const Vars& v) { return f(v[0]); }, r), {input});
    };
    unary("silu", [](const Var<double>& v) { return nn::silu(v); }, x);
    unary("relu", [](const Var<double>& v) { return nn::relu(v); }, x);
    unary("logistic", [](const Var<double>& v) { return nn::logistic(v); }, x);
    unary("sharp_sigmoid", [](const Var<double>& v) { return nn::sharp_sigmoid(v); }, s.uniform(img, -0.3, 0.3));
    unary("abs", [](const Var<double>& v) { return nn::abs(v); }, x);
    unary("square", [](const Var<double>& v) { return nn::square(v); }, x);
    unary("sqrt", [](const Var<double>& v) { return nn::sqrt(v); }, positive);
    unary("clamp", [](const Var<double>& v) { return nn::clamp(v, -1.0, 1.0); }, x);
    unary("add_scalar", [](const Var<double>& v) { return nn::add_scalar(v, 0.3); }, x);
    unary("scale", [](const Var<double>& v) { return nn::scale(v, -1.7); }, x);
  }

  // Broadcasting binary ops.
  {
    const auto r = s.uniform(img, -1, 1);
    const auto a = s.uniform(img, -1, 1);
    for (const Shape& bs : {img, col, pix}) {
      const auto b = s.uniform(bs, -1, 1);
      const auto denom = s.uniform(bs, 0.5, 1.5);
      const std::string tag = " " + bs.str();
      run("add" + tag, project([](const Vars& v) { return nn::add(v[0], v[1]); }, r), {a, b});
      run("sub" + tag, project([](const Vars& v) { return nn::sub(v[0], v[1]); }, r), {a, b});
      run("mul" + tag, project([](const Vars& v) { return nn::mul(v[0], v[1]); }, r), {a, b});
      run("div" + tag, project([](const Vars& v) { return nn::div(v[0], v[1], 1e-6); }, r), {a, denom});
    }
  }

  // Reductions and layout ops.
  {
    const auto x = s.uniform(img, -1, 1);
    run("sum", [](const Vars& v) { return nn::sum(v[0]); }, {x});
    run("mean of squares", [](const Vars& v) { return nn::mean(nn::square(v[0])); }, {x});
    run("spatial_mean", project([](const Vars& v) { return nn::spatial_mean(v[0]); }, s.uniform(col, -1, 1)), {x});
    run("spatial_max", project([](const Vars& v) { return nn::spatial_max(v[0]); }, s.uniform(col, -1, 1)), {x});
    run("channel_sum", project([](const Vars& v) { return nn::channel_sum(v[0]); }, s.uniform(pix, -1, 1)), {x});
    run("channel_mean", project([](const Vars& v) { return nn::channel_mean(v[0]); }, s.uniform(pix, -1, 1)), {x});
    run("channel_max", project([](const Vars& v) { return nn::channel_max(v[0]); }, s.uniform(pix, -1, 1)), {x});
    const auto y = s.uniform(Shape{n, 2, size, size}, -1, 1);
    run("concat_channels",
        project([](const Vars& v) { return nn::concat_channels<double>({v[0], v[1]}); },
                s.uniform(Shape{n, 5, size, size}, -1, 1)),
        {x, y});
    const auto rx = s.uniform(img, -1, 1);
    const auto ry = s.uniform(img, -1, 1);
    run("spatial_gradient",
        [rx, ry](const Vars& v) {
          auto g = nn::spatial_gradient(v[0]);
          return nn::add(nn::sum(nn::mul(g.dx, nn::constant(rx))), nn::sum(nn::mul(g.dy, nn::constant(ry))));
        },
        {x});
  }

  // Attention.
  {
    const AttentionShape shape{8, 4, 7};
    const auto specs = attention_param_specs("attn", shape);
    auto values = initial_values(specs, seed + 1, s);
    values.insert(values.begin(), s.uniform(Shape{n, 8, size, size}, -1, 1));
    const auto r = s.uniform(Shape{n, 8, size, size}, -1, 1);
    auto block = [specs](std::function<Var<double>(const Var<double>&, const AttentionParams<double>&)> f) {
      return [specs, f](const Vars& v) { return f(v[0], bind_attention(bind_specs(specs, v, 1), "attn")); };
    };
    run("channel_attention", project(block(channel_attention<double>), r), values);
    run("spatial_attention", project(block(spatial_attention<double>), r), values);
    run("cbam", project(block(cbam<double>), r), values);
  }

  // Curve block, smoothing and the recursive update.
  {
    EnhancerConfig cfg;
    cfg.stages = 1;
    cfg.feature_channels = 4;
    cfg.smoothing_units = 1;
    std::vector<nn::ParamSpec> specs;
    for (const auto& spec : enhancer_param_specs(cfg)) {
      if (spec.name.rfind("dea.0.", 0) == 0 || spec.name.rfind("smooth.", 0) == 0) specs.push_back(spec);
    }
    auto values = initial_values(specs, seed + 2, s);
    values.insert(values.begin(), s.uniform(Shape{n, 4, size, size}, -1, 1));
    const double eps = cfg.epsilon_floor;
    const auto r_feat = s.uniform(Shape{n, 4, size, size}, -1, 1);
    const auto r1 = s.uniform(img, -1, 1);
    const auto r2 = s.uniform(img, -1, 1);
    run("dea_block",
        [specs, eps, r_feat, r1, r2](const Vars& v) {
          auto out = dea_block(v[0], bind_specs(specs, v, 1), 0, eps);
          return nn::add(nn::sum(nn::mul(out.features, nn::constant(r_feat))),
                         nn::add(nn::sum(nn::mul(out.curves.l1, nn::constant(r1))),
                                 nn::sum(nn::mul(out.curves.l2, nn::constant(r2)))));
        },
        values);

    std::vector<Tensor<double>> smooth_values{s.uniform(Shape{n, kStackChannels, size, size}, 0, 1)};
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (specs[i].name.rfind("smooth.", 0) == 0) smooth_values.push_back(values[i + 1]);
    }
    std::vector<nn::ParamSpec> smooth_specs;
    for (const auto& spec : specs) {
      if (spec.name.rfind("smooth.", 0) == 0) smooth_specs.push_back(spec);
    }
    run("smoothing_stack",
        project([smooth_specs](const Vars& v) { return smoothing_stack(v[0], bind_specs(smooth_specs, v, 1), 1); },
                s.uniform(Shape{n, kStackChannels, size, size}, -1, 1)),
        smooth_values);

    run("recursive_update",
        project(
            [](const Vars& v) {
              return recursive_update(v[0], CurvePair<double>{v[1], v[2]});
            },
            r1),
        {s.uniform(img, 0.05, 0.6), s.uniform(img, 0.05, 0.95), s.uniform(img, 0.2, 0.95)});
  }

  // Loss terms.
  {
    const auto in = s.uniform(img, 0.02, 0.4);
    const auto out = s.uniform(img, 0.1, 0.9);
    LossOptions channel_mode;
    channel_mode.chroma = ChromaMode::ChannelMean;
    run("color_factors", project([](const Vars& v) { return color_factors(v[0]); }, s.uniform(img, -1, 1)), {out});
    run("loss_local_color", [](const Vars& v) { return loss_local_color(v[0], v[1]); }, {in, out});
    run("loss_global_chroma", [](const Vars& v) { return loss_global_chroma(v[0]); }, {out});
    run("loss_global_chroma channel_mean",
        [channel_mode](const Vars& v) { return loss_global_chroma(v[0], channel_mode); }, {out});
    run("loss_brightness", [](const Vars& v) { return loss_brightness(v[0], v[1]); }, {in, out});
    run("loss_smoothness",
        [](const Vars& v) {
          auto [s1, s2] = loss_smoothness<double>({{v[0], v[1]}, {v[2], v[3]}});
          return nn::add(nn::scale(s1, 2.0), s2);
        },
        {s.uniform(img, 0, 1), s.uniform(img, 0, 1), s.uniform(img, 0, 1), s.uniform(img, 0, 1)});
  }

  // Full weighted objective with respect to every parameter entry of a
  // reduced model, then sampled entries of every tensor of the default model.
  auto full_objective = [&](const std::string& name, const EnhancerConfig& cfg, std::size_t max_entries) {
    const auto specs = enhancer_param_specs(cfg);
    const auto store = init_params<double>(cfg, seed + 3);
    std::vector<Tensor<double>> values{s.image(Shape{1, 3, size, size}, 5, 120)};
    for (const auto& p : store.params()) values.push_back(p.value);
    std::vector<std::size_t> checked;
    for (std::size_t i = 1; i < values.size(); ++i) checked.push_back(i);
    const LossWeights weights;
    GradCheckOptions o;
    o.max_entries_per_tensor = max_entries;
    run(name,
        [specs, cfg, weights](const Vars& v) {
          const auto params = bind_specs(specs, v, 1);
          const auto trace = forward(v[0], params, cfg);
          return loss_total(v[0], trace, weights).total;
        },
        values, checked, o);
  };
  EnhancerConfig reduced;
  reduced.stages = 2;
  reduced.smoothing_units = 1;
  reduced.feature_channels = 4;
  full_objective("total loss, reduced model, all entries", reduced, 0);
  full_objective("total loss, default model, sampled entries", EnhancerConfig{}, 12);
  return report;
}

}  // namespace simi
