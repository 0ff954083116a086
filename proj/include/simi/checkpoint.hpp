#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "simi/param_store.hpp"

namespace simi {

/// Binary checkpoint layout (all integers and values little-endian):
///
///   "SIMICKPT" | u32 version | u32 scalar bytes (4 or 8) | u64 config digest
///   | u32 len + config JSON | u64 optimizer step | u32 parameter count
///   | per parameter: u32 len + UTF-8 name, i32 n,c,h,w, raw values
///   | "ADAM" | per parameter: raw m, raw v | "END!"
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t config_digest = 0;
  std::string config_json;
};

template <typename T>
struct Checkpoint {
  CheckpointMeta meta;
  nn::ParamStore<T> store;
};

/// Writes atomically (temporary file, then rename).
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const nn::ParamStore<T>& store,
                     const CheckpointMeta& meta);

/// Throws FileNotFound or CorruptCheckpoint. Values stored at another
/// precision are converted.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace simi
