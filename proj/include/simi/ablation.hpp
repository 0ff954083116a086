#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "simi/config.hpp"
#include "simi/image_io.hpp"
#include "simi/metrics.hpp"

namespace simi {

/// One row of the comparison: a variant differs from the base config in a
/// single factor (decomposition kind or the self-information switch).
struct AblationVariant {
  std::string name;
  EnhancerConfig enhancer;
};

/// bitplane, log, quant and no-SIMM, each derived from `base`.
std::vector<AblationVariant> ablation_variants(const EnhancerConfig& base);

struct AblationOptions {
  // Iterations-to-threshold counts steps until total <= threshold * initial.
  double loss_threshold = 0.5;
  std::optional<RawImage> probe;
  // Paired evaluation, files matched by name; skipped when either is empty.
  std::filesystem::path low_dir;
  std::filesystem::path ref_dir;
  // Per-variant checkpoints and logs go to out_dir/<variant>; none when empty.
  std::filesystem::path out_dir;
};

struct AblationRow {
  std::string variant;
  std::size_t parameters = 0;
  std::uint64_t iterations = 0;
  double initial_loss = 0;
  double final_loss = 0;
  std::optional<std::uint64_t> iterations_to_threshold;
  std::optional<double> brightness_gain;  // mean(enhanced probe) - mean(probe), unit range
  std::optional<double> psnr;
  std::optional<double> ssim;
};

struct AblationTable {
  double loss_threshold = 0.5;
  std::uint64_t seed = 0;
  std::vector<AblationRow> rows;

  nlohmann::json to_json() const;
  /// Fixed-width columns, one line per variant, "-" for missing cells.
  std::string to_text() const;
};

AblationTable run_ablation(const TrainConfig& config, const std::vector<RawImage>& images,
                           const AblationOptions& options);

/// Mean over all channels and pixels in [0, 1].
double mean_level(const RawImage& image);

/// Paired images of low_dir and ref_dir (matched by file name) enhanced and
/// scored with PSNR / SSIM.
MetricReport evaluate_pairs(const nn::ParamStore<float>& store, const EnhancerConfig& config,
                            const std::filesystem::path& low_dir, const std::filesystem::path& ref_dir);

}  // namespace simi
