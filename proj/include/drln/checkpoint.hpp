#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "drln/network.hpp"
#include "drln/trainer.hpp"

namespace drln {

/// On-disk model archive. Layout (little-endian):
///   magic "DRLNCKPT" | version u16 | config_len u32 | config text |
///   repeated { name_len u32 | name | dtype u8 | dims u32 x4 | payload }
/// The config block is `key = value` text carrying the network and train
/// configuration, the step counter and the sampler RNG state.
struct Checkpoint {
    std::uint16_t version = 1;
    NetworkConfig net_cfg;
    TrainConfig train_cfg;
    long long step = 0;
    std::uint64_t rng_state = 0;
    std::vector<std::pair<std::string, Tensor<float>>> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint checkpoint_from_trainer(TrainerState& state);
TrainerState trainer_from_checkpoint(const Checkpoint& ckpt);

/// Rebuilds just the network (inference path); adam tensors are ignored.
Network<float> network_from_checkpoint(const Checkpoint& ckpt);

}  // namespace drln
