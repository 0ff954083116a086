#include "simi/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "simi/trainer.hpp"

namespace simi {
namespace fs = std::filesystem;

std::vector<AblationVariant> ablation_variants(const EnhancerConfig& base) {
  std::vector<AblationVariant> out;
  auto with = [&](std::string name, DecompositionMode mode, bool self_information) {
    EnhancerConfig c = base;
    c.decomposition = std::move(mode);
    c.self_information = self_information;
    out.push_back({std::move(name), std::move(c)});
  };
  const auto levels = base.decomposition.levels;
  with("bitplane", DecompositionMode::bitplane(), true);
  with("log", DecompositionMode::log_threshold(), true);
  with("quant", DecompositionMode::quant_threshold(levels), true);
  with("no-SIMM", DecompositionMode::bitplane(), false);
  return out;
}

double mean_level(const RawImage& image) {
  if (image.data.empty()) return 0.0;
  double total = 0;
  for (const auto v : image.data) total += v;
  return total / (255.0 * static_cast<double>(image.data.size()));
}

MetricReport evaluate_pairs(const nn::ParamStore<float>& store, const EnhancerConfig& config,
                            const fs::path& low_dir, const fs::path& ref_dir) {
  const auto low = DatasetIndex::scan(low_dir, 0);
  MetricReport report;
  for (const auto& path : low.paths()) {
    const fs::path ref_path = ref_dir / path.filename();
    if (!fs::exists(ref_path)) throw Error(Errc::FileNotFound, "no reference for " + path.filename().string());
    const RawImage enhanced = from_unit_tensor(enhance(to_unit_tensor<float>(load_image(path)), store, config));
    const RawImage ref = load_image(ref_path);
    report.add({path.filename().string(), psnr(enhanced, ref), ssim(enhanced, ref)});
  }
  return report;
}

AblationTable run_ablation(const TrainConfig& config, const std::vector<RawImage>& images,
                           const AblationOptions& options) {
  config.validate();
  AblationTable table;
  table.loss_threshold = options.loss_threshold;
  table.seed = config.seed;
  const bool paired = !options.low_dir.empty() && !options.ref_dir.empty();

  for (const auto& variant : ablation_variants(config.enhancer)) {
    TrainConfig vc = config;
    vc.enhancer = variant.enhancer;
    vc.validate();
    Trainer trainer(vc, images, init_params<float>(vc.enhancer, vc.enhancer.seed));

    AblationRow row;
    row.variant = variant.name;
    row.parameters = trainer.store().count();
    row.iterations = vc.max_iterations;
    row.initial_loss = trainer.evaluate(0).total;
    row.final_loss = row.initial_loss;
    const double target = options.loss_threshold * row.initial_loss;
    auto record = [&](const StepRecord& r) {
      row.final_loss = r.loss.total;
      if (!row.iterations_to_threshold && r.loss.total <= target) row.iterations_to_threshold = r.step;
    };
    if (options.out_dir.empty()) {
      for (std::uint64_t i = 0; i < vc.max_iterations; ++i) record(trainer.step());
    } else {
      run_training(trainer, vc.max_iterations, {options.out_dir / variant.name, record});
    }

    if (options.probe) {
      const RawImage out =
          from_unit_tensor(enhance(to_unit_tensor<float>(*options.probe), trainer.store(), vc.enhancer));
      row.brightness_gain = mean_level(out) - mean_level(*options.probe);
    }
    if (paired) {
      const auto report = evaluate_pairs(trainer.store(), vc.enhancer, options.low_dir, options.ref_dir);
      row.psnr = report.mean_psnr;
      row.ssim = report.mean_ssim;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

nlohmann::json AblationTable::to_json() const {
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"variant", r.variant},
                         {"parameters", r.parameters},
                         {"iterations", r.iterations},
                         {"initial_loss", r.initial_loss},
                         {"final_loss", r.final_loss},
                         {"iterations_to_threshold", opt(r.iterations_to_threshold)},
                         {"brightness_gain", opt(r.brightness_gain)},
                         {"psnr", opt(r.psnr)},
                         {"ssim", opt(r.ssim)}});
  }
  return {{"loss_threshold", loss_threshold}, {"seed", seed}, {"rows", rows_json}};
}

std::string AblationTable::to_text() const {
  auto num = [](std::optional<double> v, const char* fmt) {
    if (!v) return std::string("-");
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, *v);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> cells{
      {"Variant", "Params", "Iters", "Loss0", "LossN", "Iteration", "dBright", "PSNR", "SSIM"}};
  for (const auto& r : rows) {
    cells.push_back({r.variant, std::to_string(r.parameters), std::to_string(r.iterations),
                     num(r.initial_loss, "%.4f"), num(r.final_loss, "%.4f"),
                     r.iterations_to_threshold ? std::to_string(*r.iterations_to_threshold) : "-",
                     num(r.brightness_gain, "%+.4f"), num(r.psnr, "%.2f"), num(r.ssim, "%.4f")});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream os;
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i == 0) {
        os << line[i] << std::string(width[i] - line[i].size(), ' ');
      } else {
        os << "  " << std::string(width[i] - line[i].size(), ' ') << line[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace simi
