#include <cblas.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "simi/ablation.hpp"
#include "simi/decompose.hpp"
#include "simi/gradcheck.hpp"
#include "simi/metrics.hpp"
#include "simi/trainer.hpp"

namespace fs = std::filesystem;
using namespace simi;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string config;
};

TrainConfig load_config(const Globals& g) {
  TrainConfig config = g.config.empty() ? TrainConfig{} : load_train_config(g.config);
  if (g.seed) {
    config.seed = *g.seed;
    config.enhancer.seed = *g.seed;
  }
  config.validate();
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
}

struct Loaded {
  EnhancerConfig config;
  nn::ParamStore<float> store;
};

Loaded load_model(const fs::path& checkpoint) {
  Checkpoint<float> ckpt = load_checkpoint<float>(checkpoint);
  EnhancerConfig config = checkpoint_config(ckpt.meta);
  return {config, load_matching_checkpoint(checkpoint, config)};
}

int cmd_decompose(const Globals& g, const std::string& mode_name, const fs::path& in, const fs::path& out_dir) {
  DecompositionMode mode = DecompositionMode::parse(mode_name);
  if (!g.config.empty()) mode.levels = load_config(g).enhancer.decomposition.levels;
  mode.validate();
  const RawImage image = load_image(in);
  const Tensor<float> stack = decompose(to_unit_tensor<float>(image), mode);
  fs::create_directories(out_dir);
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < kPlanesPerChannel; ++k) {
      const fs::path path = out_dir / ("c" + std::to_string(c) + "_p" + std::to_string(k) + ".png");
      save_image(path, plane_to_gray(stack, 0, c * kPlanesPerChannel + k));
    }
  }
  return 0;
}

int cmd_train(const Globals& g, const fs::path& data, const fs::path& out_dir, const std::string& resume_from) {
  const TrainConfig config = load_config(g);
  std::cerr << "parameters: " << init_params<float>(config.enhancer, 0).count() << '\n';
  const fs::path final_ckpt = resume_from.empty() ? train(config, data, out_dir)
                                                  : resume(resume_from, config, data, out_dir);
  std::cout << final_ckpt.string() << '\n';
  return 0;
}

int cmd_enhance(const fs::path& checkpoint, const fs::path& in, const fs::path& out, const std::string& trace_dir) {
  const Loaded model = load_model(checkpoint);
  const Tensor<float> input = to_unit_tensor<float>(load_image(in));
  if (trace_dir.empty()) {
    save_image(out, from_unit_tensor(enhance(input, model.store, model.config)));
    return 0;
  }
  const nn::BoundParams<float> params(model.store, false);
  const auto trace = forward(nn::constant(input), params, model.config);
  save_image(out, from_unit_tensor(trace.output().value()));
  fs::create_directories(trace_dir);
  for (std::size_t i = 0; i < trace.images.size(); ++i) {
    save_image(fs::path(trace_dir) / ("image_" + std::to_string(i) + ".png"),
               from_unit_tensor(trace.images[i].value()));
  }
  for (std::size_t i = 0; i < trace.curves.size(); ++i) {
    const std::string stage = std::to_string(i + 1);
    save_image(fs::path(trace_dir) / ("l1_" + stage + ".png"), from_unit_tensor(trace.curves[i].l1.value()));
    save_image(fs::path(trace_dir) / ("l2_" + stage + ".png"), from_unit_tensor(trace.curves[i].l2.value()));
  }
  return 0;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& low_dir, const fs::path& ref_dir, const fs::path& report) {
  const Loaded model = load_model(checkpoint);
  const MetricReport metrics = evaluate_pairs(model.store, model.config, low_dir, ref_dir);
  write_text(report, metrics.to_json().dump(2) + "\n");
  std::printf("images %zu  PSNR %.4f dB  SSIM %.4f\n", metrics.images.size(), metrics.mean_psnr, metrics.mean_ssim);
  return 0;
}

int cmd_gradcheck(int size, std::uint64_t seed) {
  const GradCheckReport report = run_gradcheck_suite(size, seed);
  for (const auto& r : report.results) {
    std::fprintf(stderr, "%-48s entries %6zu  max rel err %.3e\n", r.name.c_str(), r.entries, r.max_rel_error);
  }
  const double worst = report.max_rel_error();
  std::printf("max rel err %.6e\n", worst);
  return worst < 1e-4 ? 0 : 1;
}

struct AblateArgs {
  std::string data;
  std::string out_dir;
  std::string probe;
  std::string low_dir;
  std::string ref_dir;
  std::optional<std::uint64_t> iterations;
  double threshold = 0.5;
};

int cmd_ablate(const Globals& g, const AblateArgs& a) {
  TrainConfig config = load_config(g);
  if (a.iterations) config.max_iterations = *a.iterations;
  const DatasetIndex index = DatasetIndex::scan(a.data, config.seed);
  AblationOptions options;
  options.loss_threshold = a.threshold;
  if (!a.probe.empty()) options.probe = load_image(a.probe);
  options.low_dir = a.low_dir;
  options.ref_dir = a.ref_dir;
  options.out_dir = a.out_dir;
  const AblationTable table = run_ablation(config, load_dataset(index), options);
  const std::string text = table.to_text();
  if (!a.out_dir.empty()) {
    write_text(fs::path(a.out_dir) / "ablation.json", table.to_json().dump(2) + "\n");
    write_text(fs::path(a.out_dir) / "ablation.txt", text);
  }
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-information guided low-light image enhancement"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for parameter init, data order and crops");
  app.add_option("--threads", g.threads, "BLAS threads")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "Training config (JSON)");

  std::string mode = "bitplane", in, out, out_dir, data, resume_from, checkpoint, trace_dir, low_dir, ref_dir,
              report;
  int size = 8;
  std::uint64_t gc_seed = 1;
  AblateArgs ablate;

  auto* decompose_cmd = app.add_subcommand("decompose", "Write the 24 plane maps of an image as PNGs");
  decompose_cmd->add_option("--mode", mode, "bitplane | log | quant");
  decompose_cmd->add_option("--in", in)->required();
  decompose_cmd->add_option("--out-dir", out_dir)->required();

  auto* train_cmd = app.add_subcommand("train", "Train on a directory of images");
  train_cmd->add_option("--data", data)->required();
  train_cmd->add_option("--out-dir", out_dir)->required();
  train_cmd->add_option("--resume", resume_from, "Checkpoint to continue from");
  train_cmd->add_option("--config", g.config, "Training config (JSON)");

  auto* enhance_cmd = app.add_subcommand("enhance", "Enhance one image");
  enhance_cmd->add_option("--checkpoint", checkpoint)->required();
  enhance_cmd->add_option("--in", in)->required();
  enhance_cmd->add_option("--out", out)->required();
  enhance_cmd->add_option("--dump-trace", trace_dir, "Write every intermediate image and curve map here");

  auto* eval_cmd = app.add_subcommand("eval", "PSNR / SSIM over paired directories");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--low-dir", low_dir)->required();
  eval_cmd->add_option("--ref-dir", ref_dir)->required();
  eval_cmd->add_option("--report", report)->required();

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every gradient");
  gradcheck_cmd->add_option("--size", size);
  gradcheck_cmd->add_option("--seed", gc_seed);

  auto* ablate_cmd = app.add_subcommand("ablate", "Train every decomposition variant and compare");
  ablate_cmd->add_option("--data", ablate.data)->required();
  ablate_cmd->add_option("--out-dir", ablate.out_dir);
  ablate_cmd->add_option("--probe", ablate.probe, "Dark image for the brightness column");
  ablate_cmd->add_option("--low-dir", ablate.low_dir);
  ablate_cmd->add_option("--ref-dir", ablate.ref_dir);
  ablate_cmd->add_option("--iterations", ablate.iterations);
  ablate_cmd->add_option("--threshold", ablate.threshold, "Loss fraction for the iteration column");
  ablate_cmd->add_option("--config", g.config, "Training config (JSON)");

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  openblas_set_num_threads(g.threads);
  try {
    if (*decompose_cmd) return cmd_decompose(g, mode, in, out_dir);
    if (*train_cmd) return cmd_train(g, data, out_dir, resume_from);
    if (*enhance_cmd) return cmd_enhance(checkpoint, in, out, trace_dir);
    if (*eval_cmd) return cmd_eval(checkpoint, low_dir, ref_dir, report);
    if (*gradcheck_cmd) return cmd_gradcheck(size, gc_seed);
    if (*ablate_cmd) return cmd_ablate(g, ablate);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
