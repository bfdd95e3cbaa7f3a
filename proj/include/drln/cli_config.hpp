#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "drln/degrade.hpp"
#include "drln/network.hpp"
#include "drln/trainer.hpp"

namespace drln {

/// Flat merged view of network/train/degradation settings plus paths, loaded
/// from `key = value` files (# comments) with command-line overrides. Unknown
/// keys are rejected. emit_config round-trips through parse_config_text.
struct CliConfig {
    // network
    std::string preset = "desk";
    int scale = 2;
    int channels = 32;
    int n_blocks = 2;
    int drlms_per_block = 3;
    int rbs_per_drlm = 3;
    int reduction = 4;
    int input_channels = 3;
    bool mean_shift = true;
    // training
    int batch_size = 16;
    int lr_patch = 48;
    double lr0 = 1e-4;
    long long halve_every = 200000;
    long long max_steps = 0;
    std::uint64_t seed = 0;
    long long checkpoint_every = 1000;
    // degradation
    std::string kind = "bi";
    double sigma = 0.0;
    double blur_variance = 1.6;
    // paths / flags
    std::string hr_dir;
    std::string out_dir;
    std::string manifest;
    std::string checkpoint;
    std::string sr_dir;
    std::string input;
    std::string resume;
    bool self_ensemble = false;

    bool operator==(const CliConfig&) const = default;

    NetworkConfig network() const;
    TrainConfig train() const;
    DegradationSpec degradation() const;
};

/// Applies one key; "preset" resets the network block to preset defaults, so
/// later keys can still override individual fields. Throws on unknown keys.
void apply_config_key(CliConfig& cfg, const std::string& key, const std::string& value);

CliConfig parse_config_text(const std::string& text, CliConfig base = {});
CliConfig load_config_file(const std::filesystem::path& path, CliConfig base = {});

/// Resolved-config echo; parses back into an equal CliConfig.
std::string emit_config(const CliConfig& cfg);

}  // namespace drln
