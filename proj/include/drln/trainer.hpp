#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "drln/degrade.hpp"
#include "drln/image.hpp"
#include "drln/network.hpp"

namespace drln {

struct TrainConfig {
    int batch_size = 16;
    int lr_patch = 48;        // LR patch edge; HR patch is lr_patch*scale
    double lr0 = 1e-4;
    long long halve_every = 200000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long max_steps = 0;
    std::uint64_t seed = 0;
    long long checkpoint_every = 1000;

    void validate() const;
};

/// Step-decay schedule: lr0 * 0.5^floor(step / halve_every).
double lr_at(long long step, const TrainConfig& cfg);

struct TrainSample {
    Image lr;
    Image hr;
};

/// Decodes every manifest pair into memory (desk-scale datasets).
std::vector<TrainSample> load_dataset(const Manifest& manifest);

struct Batch {
    Tensor<float> lr;
    Tensor<float> hr;
};

/// Aligned LR/HR patch pairs with a per-pair dihedral augmentation. A pure
/// function of (cfg.seed, step): replaying a step reproduces the batch
/// bit-exactly.
Batch sample_batch(const std::vector<TrainSample>& dataset, const TrainConfig& cfg, int scale,
                   long long step);

/// Bias-corrected ADAM update; t is the 1-based step count.
void adam_step(Tensor<float>& param, const std::vector<float>& grad, Tensor<float>& m,
               Tensor<float>& v, long long t, double lr, double beta1, double beta2, double eps);

struct TrainerState {
    Network<float> net;
    TrainConfig cfg;
    long long step = 0;
    std::vector<Tensor<float>> adam_m;  // aligned with net.named_params()
    std::vector<Tensor<float>> adam_v;
};

TrainerState make_trainer(Network<float> net, TrainConfig cfg);

struct TraceRow {
    long long step = 0;
    float loss = 0.0f;
    double lr = 0.0;
};

struct TrainResult {
    std::vector<TraceRow> trace;
    std::filesystem::path final_checkpoint;
};

/// Runs sample -> forward -> L1 -> backward -> adam from state.step to
/// cfg.max_steps. Appends `step,loss,lr` rows to out_dir/trace.csv and writes
/// checkpoints periodically plus checkpoint_final.ckpt at the end. A
/// non-finite loss aborts after writing checkpoint_diagnostic.ckpt.
TrainResult train(TrainerState& state, const std::vector<TrainSample>& dataset,
                  const std::filesystem::path& out_dir);

}  // namespace drln
