#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "simi/ops.hpp"

namespace simi {

/// Relative error used by every gradient check:
///   |analytic - numeric| / max(|analytic|, |numeric|, floor)
/// The floor turns the measure into an absolute one for gradients too small
/// for central differences to resolve relatively.
struct GradCheckOptions {
  double step = 1e-5;
  double floor = 1e-3;
  // Upper bound on checked entries per input tensor (0 = all), chosen with
  // a seeded stride so the subset covers the whole tensor.
  std::size_t max_entries_per_tensor = 0;
};

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0;
  std::size_t entries = 0;
};

using ScalarFn = std::function<nn::Var<double>(const std::vector<nn::Var<double>>&)>;

/// Central-difference check of d fn / d inputs[i] for every i in `checked`
/// (all inputs when empty). `fn` must return a scalar.
GradCheckResult check_gradients(const std::string& name, const ScalarFn& fn,
                                const std::vector<Tensor<double>>& inputs, const GradCheckOptions& options,
                                std::vector<std::size_t> checked = {});

struct GradCheckReport {
  std::vector<GradCheckResult> results;
  double max_rel_error() const;
};

/// Every differentiable op, the attention block, the curve block, the
/// recursive update, each loss term and the full weighted objective on a
/// size x size input, all in double precision.
GradCheckReport run_gradcheck_suite(int size, std::uint64_t seed);

}  // namespace simi
