#pragma once

#include <filesystem>
#include <vector>

#include "mvm/net/unet.hpp"

namespace mvm::net {

/// Training metadata carried alongside the parameters.
struct CheckpointMeta {
    int64_t step = 0;
    uint64_t seed = 0;
    std::vector<double> loss_history;
};

/// Single-file container: magic, JSON header (version, config, named array
/// index, metadata), then the concatenated float32 little-endian parameter
/// blob.
void save_checkpoint(MTAttentionUNet<float>& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
    NetworkConfig config;
    CheckpointMeta meta;
};

/// Loads parameters into `model`; throws IoError when the file's config does
/// not match the model's, or on version/length/name mismatches.
LoadedCheckpoint load_checkpoint(MTAttentionUNet<float>& model, const std::filesystem::path& path);

/// Reads only the header (config + metadata) without a model.
LoadedCheckpoint peek_checkpoint(const std::filesystem::path& path);

}  // namespace mvm::net
