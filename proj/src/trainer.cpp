#include "simi/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace simi {
namespace fs = std::filesystem;
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Small counter-based stream; every draw depends only on (key, counter).
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}
  std::uint64_t next() { return splitmix64(key_ ^ splitmix64(counter_++)); }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return std::min(static_cast<std::uint64_t>(u * static_cast<double>(bound)), bound - 1);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png" || ext == ".ppm";
}

}  // namespace

DatasetIndex::DatasetIndex(std::vector<fs::path> paths, std::uint64_t seed)
    : paths_(std::move(paths)), seed_(seed) {
  if (paths_.empty()) throw Error(Errc::EmptyDataset, "dataset holds no images");
}

DatasetIndex DatasetIndex::scan(const fs::path& dir, std::uint64_t seed) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::FileNotFound, "no such directory " + dir.string());
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) paths.push_back(entry.path());
  }
  if (paths.empty()) throw Error(Errc::EmptyDataset, "no PNG/PPM images in " + dir.string());
  std::sort(paths.begin(), paths.end());
  return DatasetIndex(std::move(paths), seed);
}

std::vector<std::size_t> DatasetIndex::epoch_order(std::uint64_t epoch) const {
  std::vector<std::size_t> order(paths_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Stream rng(splitmix64(seed_) ^ splitmix64(~epoch));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

std::size_t DatasetIndex::sample_at(std::uint64_t position) const {
  return epoch_order(position / paths_.size())[position % paths_.size()];
}

RawImage reflect_crop(const RawImage& image, int x0, int y0, int size) {
  RawImage out(size, size, image.channels);
  for (int y = 0; y < size; ++y) {
    const int sy = reflect_index(y0 + y, image.height);
    for (int x = 0; x < size; ++x) {
      const int sx = reflect_index(x0 + x, image.width);
      for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = image.at(sx, sy, c);
    }
  }
  return out;
}

std::vector<RawImage> load_dataset(const DatasetIndex& index) {
  std::vector<RawImage> images;
  images.reserve(index.size());
  for (const auto& p : index.paths()) images.push_back(load_image(p));
  return images;
}

Trainer::Trainer(TrainConfig config, std::vector<RawImage> images, nn::ParamStore<float> store)
    : config_(std::move(config)),
      images_(std::move(images)),
      order_([&] {
        if (images_.empty()) throw Error(Errc::EmptyDataset, "no training images");
        std::vector<fs::path> ids;
        for (std::size_t i = 0; i < images_.size(); ++i) ids.emplace_back(std::to_string(i));
        return DatasetIndex(std::move(ids), config_.seed);
      }()),
      store_(std::move(store)) {
  config_.validate();
}

Tensor<float> Trainer::batch(std::uint64_t iteration) const {
  const int b = config_.batch_size;
  const int size = config_.crop_size;
  Tensor<float> out(Shape{b, 3, size, size});
  for (int j = 0; j < b; ++j) {
    const std::uint64_t position = iteration * static_cast<std::uint64_t>(b) + j;
    const RawImage& image = images_[order_.sample_at(position)];
    Stream rng(splitmix64(config_.seed + 0x5851f42d4c957f2dull) ^ splitmix64(position));
    const int x0 = image.width > size ? static_cast<int>(rng.below(image.width - size + 1)) : 0;
    const int y0 = image.height > size ? static_cast<int>(rng.below(image.height - size + 1)) : 0;
    const RawImage crop = reflect_crop(image, x0, y0, size);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) out.at(j, c, y, x) = static_cast<float>(crop.at(x, y, c)) / 255.0f;
  }
  return out;
}

LossReport Trainer::evaluate(std::uint64_t iteration) const {
  const nn::BoundParams<float> params(store_, false);
  auto input = nn::constant(batch(iteration));
  const auto trace = forward(input, params, config_.enhancer);
  return loss_total(input, trace, config_.weights, config_.loss).report(config_.weights);
}

StepRecord Trainer::step() {
  const std::uint64_t iteration = store_.step();
  const nn::BoundParams<float> params(store_, true);
  auto input = nn::constant(batch(iteration));
  const auto trace = forward(input, params, config_.enhancer);
  const auto terms = loss_total(input, trace, config_.weights, config_.loss);
  const LossReport report = terms.report(config_.weights);
  if (!std::isfinite(report.total) || !std::isfinite(terms.total.value().item())) {
    throw Error(Errc::DivergedLoss, "non-finite loss at step " + std::to_string(iteration + 1));
  }
  nn::backward(terms.total);
  params.collect_grads(store_);
  nn::adamw_step(store_, config_.adamw());
  store_.clear_grads();
  return {store_.step(), report};
}

fs::path checkpoint_path(const fs::path& out_dir, std::uint64_t step) {
  char name[64];
  std::snprintf(name, sizeof name, "checkpoint_%08llu.simi", static_cast<unsigned long long>(step));
  return out_dir / name;
}

CheckpointMeta checkpoint_meta(const EnhancerConfig& config) {
  return {config_digest(config), canonical_json(config)};
}

EnhancerConfig checkpoint_config(const CheckpointMeta& meta) {
  try {
    return enhancer_config_from_json(nlohmann::json::parse(meta.config_json));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptCheckpoint, std::string("unreadable embedded config: ") + e.what());
  }
}

TrainSummary run_training(Trainer& trainer, std::uint64_t iterations, const RunOptions& options) {
  fs::create_directories(options.out_dir);
  const CheckpointMeta meta = checkpoint_meta(trainer.config().enhancer);
  const std::uint64_t every = trainer.config().checkpoint_every;
  const std::uint64_t end = trainer.iteration() + iterations;
  std::ofstream log(options.out_dir / "train_log.jsonl", std::ios::app);
  if (!log) throw Error(Errc::IoError, "cannot open training log in " + options.out_dir.string());

  TrainSummary summary;
  auto save = [&] {
    const fs::path path = checkpoint_path(options.out_dir, trainer.iteration());
    save_checkpoint(path, trainer.store(), meta);
    summary.checkpoints.push_back(path);
    summary.final_checkpoint = path;
  };
  while (trainer.iteration() < end) {
    StepRecord record;
    try {
      record = trainer.step();
    } catch (const Error& e) {
      if (e.code() != Errc::DivergedLoss) throw;
      const std::string last = summary.final_checkpoint.empty() ? std::string("none")
                                                                : summary.final_checkpoint.string();
      throw Error(Errc::DivergedLoss, std::string(e.what()) + "; last good checkpoint: " + last);
    }
    log << record.loss.to_json_line(record.step) << '\n';
    summary.history.push_back(record);
    if (options.on_step) options.on_step(record);
    if (record.step % every == 0 || record.step == end) save();
  }
  if (iterations == 0) save();
  log.flush();
  return summary;
}

nn::ParamStore<float> load_matching_checkpoint(const fs::path& checkpoint, const EnhancerConfig& config) {
  Checkpoint<float> ckpt = load_checkpoint<float>(checkpoint);
  if (ckpt.meta.config_digest != config_digest(config)) {
    throw Error(Errc::ConfigDigestMismatch, "checkpoint " + checkpoint.string() +
                                                " was written for a different architecture");
  }
  const auto specs = enhancer_param_specs(config);
  if (specs.size() != ckpt.store.size()) throw Error(Errc::CorruptCheckpoint, "parameter count mismatch");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& p = ckpt.store.params()[i];
    if (p.name != specs[i].name || !(p.value.shape() == specs[i].shape)) {
      throw Error(Errc::CorruptCheckpoint, "unexpected parameter '" + p.name + "'");
    }
  }
  return std::move(ckpt.store);
}

fs::path train(const TrainConfig& config, const fs::path& data_dir, const fs::path& out_dir) {
  config.validate();
  const DatasetIndex index = DatasetIndex::scan(data_dir, config.seed);
  Trainer trainer(config, load_dataset(index), init_params<float>(config.enhancer, config.enhancer.seed));
  return run_training(trainer, config.max_iterations, {out_dir, nullptr}).final_checkpoint;
}

fs::path resume(const fs::path& checkpoint, const TrainConfig& config, const fs::path& data_dir,
                const fs::path& out_dir) {
  config.validate();
  nn::ParamStore<float> store = load_matching_checkpoint(checkpoint, config.enhancer);
  const DatasetIndex index = DatasetIndex::scan(data_dir, config.seed);
  Trainer trainer(config, load_dataset(index), std::move(store));
  return run_training(trainer, config.max_iterations, {out_dir, nullptr}).final_checkpoint;
}

}  // namespace simi
