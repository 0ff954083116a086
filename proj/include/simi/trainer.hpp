#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "simi/checkpoint.hpp"
#include "simi/config.hpp"
#include "simi/image_io.hpp"
#include "simi/losses.hpp"

namespace simi {

/// Image paths (sorted by file name) with a seeded Fisher-Yates order per
/// epoch. The sample stream position p maps to epoch p / size.
class DatasetIndex {
 public:
  DatasetIndex(std::vector<std::filesystem::path> paths, std::uint64_t seed);

  /// Every *.png / *.ppm file directly inside `dir`. Throws EmptyDataset
  /// when there is none.
  static DatasetIndex scan(const std::filesystem::path& dir, std::uint64_t seed);

  const std::vector<std::filesystem::path>& paths() const { return paths_; }
  std::size_t size() const { return paths_.size(); }
  std::vector<std::size_t> epoch_order(std::uint64_t epoch) const;
  /// Index into paths() of stream position `position`.
  std::size_t sample_at(std::uint64_t position) const;

 private:
  std::vector<std::filesystem::path> paths_;
  std::uint64_t seed_;
};

/// Square crop of `size` at (x0, y0); coordinates outside the image are
/// mirrored (reflect padding without repeating the edge pixel).
RawImage reflect_crop(const RawImage& image, int x0, int y0, int size);

struct StepRecord {
  std::uint64_t step;  // 1-based optimizer step that produced this report
  LossReport loss;
};

/// Single-threaded optimisation loop over in-memory images. Batches are a
/// pure function of (seed, iteration), so training may stop and resume at
/// any step without changing the trajectory.
class Trainer {
 public:
  Trainer(TrainConfig config, std::vector<RawImage> images, nn::ParamStore<float> store);

  /// Unit-range batch (B,3,crop,crop) consumed by optimizer step `iteration`
  /// (0-based).
  Tensor<float> batch(std::uint64_t iteration) const;

  /// Forward, loss, backward and one AdamW update. Throws DivergedLoss on
  /// a non-finite objective, leaving the parameters untouched.
  StepRecord step();

  /// Loss of the current parameters on the batch of `iteration`, no update.
  LossReport evaluate(std::uint64_t iteration) const;

  const TrainConfig& config() const { return config_; }
  const nn::ParamStore<float>& store() const { return store_; }
  std::uint64_t iteration() const { return store_.step(); }

 private:
  TrainConfig config_;
  std::vector<RawImage> images_;
  DatasetIndex order_;
  nn::ParamStore<float> store_;
};

struct TrainSummary {
  std::filesystem::path final_checkpoint;
  std::vector<std::filesystem::path> checkpoints;
  std::vector<StepRecord> history;
};

struct RunOptions {
  std::filesystem::path out_dir;
  // Called after every completed step.
  std::function<void(const StepRecord&)> on_step;
};

/// Checkpoint file name for an optimizer step.
std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, std::uint64_t step);

/// Metadata (architecture JSON + digest) written with every checkpoint.
CheckpointMeta checkpoint_meta(const EnhancerConfig& config);

/// Runs `iterations` steps, writing a checkpoint whenever the step count is
/// a multiple of checkpoint_every and after the last step, and appending one
/// JSON line per step to out_dir/train_log.jsonl.
TrainSummary run_training(Trainer& trainer, std::uint64_t iterations, const RunOptions& options);

/// Loads every image of a DatasetIndex.
std::vector<RawImage> load_dataset(const DatasetIndex& index);

/// Fresh training run of config.max_iterations steps. Returns the final
/// checkpoint path.
std::filesystem::path train(const TrainConfig& config, const std::filesystem::path& data_dir,
                            const std::filesystem::path& out_dir);

/// Continues a checkpoint for config.max_iterations further steps. Throws
/// ConfigDigestMismatch when the architecture differs from the checkpoint.
std::filesystem::path resume(const std::filesystem::path& checkpoint, const TrainConfig& config,
                             const std::filesystem::path& data_dir, const std::filesystem::path& out_dir);

/// Reads a checkpoint and checks it against `config` (digest and layout).
nn::ParamStore<float> load_matching_checkpoint(const std::filesystem::path& checkpoint,
                                               const EnhancerConfig& config);

/// Architecture stored inside a checkpoint.
EnhancerConfig checkpoint_config(const CheckpointMeta& meta);

}  // namespace simi
