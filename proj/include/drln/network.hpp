#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drln/ops.hpp"
#include "drln/tensor.hpp"

namespace drln {

/// Architecture hyperparameters. The "paper" preset pins channels=64,
/// 3 DRLMs of 3 residual blocks per cascading block and a reduction of 4;
/// the "desk" preset shrinks to 32 channels and 2 cascading blocks.
struct NetworkConfig {
    int scale = 2;               // in {2, 3, 4, 8}
    int channels = 64;
    int n_blocks = 6;            // cascading blocks
    int drlms_per_block = 3;
    int rbs_per_drlm = 3;
    int reduction = 4;           // attention branch width divisor
    int input_channels = 3;      // 3 RGB or 1 gray
    bool mean_shift = true;      // subtract/add rgb_mean around the network
    std::array<float, 3> rgb_mean{0.4488f, 0.4371f, 0.4040f};  // DIV2K
    std::string preset = "paper";

    static NetworkConfig paper_preset(int scale);
    static NetworkConfig desk_preset(int scale);

    void validate() const;

    /// Upsampler stages as pixel-shuffle factors (x8 = three chained x2).
    std::vector<int> upsample_stages() const;
};

template <typename T>
struct ResidualBlock {
    ConvParams<T> conv1;
    ConvParams<T> conv2;
};

template <typename T>
struct LaplacianAttention {
    ConvParams<T> branch3;  // 3x3, dilation 3, pad 3, channels -> channels/reduction
    ConvParams<T> branch5;  // dilation 5, pad 5
    ConvParams<T> branch7;  // dilation 7, pad 7
    ConvParams<T> fuse;     // 1x1, 3*(channels/reduction) -> channels
};

template <typename T>
struct Drlm {
    std::vector<ResidualBlock<T>> rbs;
    std::vector<ConvParams<T>> dense_compressors;  // 1x1, (i+1)*C -> C, one before RB i+1
    ConvParams<T> final_compression;               // 1x1, C -> C
    LaplacianAttention<T> attention;
};

template <typename T>
struct CascadingBlock {
    std::vector<Drlm<T>> drlms;
    std::vector<ConvParams<T>> cascade_compressors;  // 1x1, (i+1)*C -> C, one per DRLM
};

template <typename T>
struct Network {
    NetworkConfig cfg;
    ConvParams<T> head;                                   // input_channels -> C
    std::vector<CascadingBlock<T>> blocks;
    ConvParams<T> tail;                                   // C -> C, before long skip
    std::vector<std::pair<ConvParams<T>, int>> upsampler; // conv C -> C*r^2 + shuffle r
    ConvParams<T> reconstruction;                         // C -> input_channels

    /// Parameters in fixed construction order; names are stable across runs
    /// and define the checkpoint layout.
    std::vector<std::pair<std::string, Tensor<T>>> named_params();
    std::size_t param_count() const;
};

/// Eq-style building blocks, exposed for composition tests.
template <typename T>
Tensor<T> residual_block(const ResidualBlock<T>& rb, const Tensor<T>& x);

template <typename T>
Tensor<T> dense_residual_unit(const Drlm<T>& unit, const Tensor<T>& x);

template <typename T>
Tensor<T> laplacian_attention(const LaplacianAttention<T>& att, const Tensor<T>& fc);

template <typename T>
Tensor<T> drlm_forward(const Drlm<T>& unit, const Tensor<T>& x);

template <typename T>
Tensor<T> cascading_block(const CascadingBlock<T>& block, const Tensor<T>& x);

/// Full pipeline: optional mean shift, head conv, cascaded trunk with long
/// skip, sub-pixel upsampling, reconstruction, mean shift back.
template <typename T>
Tensor<T> forward(const Network<T>& net, const Tensor<T>& lr);

/// Deterministic fan-in-scaled uniform initialization from `seed`.
template <typename T>
Network<T> build_network(const NetworkConfig& cfg, std::uint64_t seed);

#define DRLN_EXTERN_NET(T)                                                          \
    extern template struct Network<T>;                                              \
    extern template Tensor<T> residual_block<T>(const ResidualBlock<T>&, const Tensor<T>&); \
    extern template Tensor<T> dense_residual_unit<T>(const Drlm<T>&, const Tensor<T>&); \
    extern template Tensor<T> laplacian_attention<T>(const LaplacianAttention<T>&, const Tensor<T>&); \
    extern template Tensor<T> drlm_forward<T>(const Drlm<T>&, const Tensor<T>&);     \
    extern template Tensor<T> cascading_block<T>(const CascadingBlock<T>&, const Tensor<T>&); \
    extern template Tensor<T> forward<T>(const Network<T>&, const Tensor<T>&);       \
    extern template Network<T> build_network<T>(const NetworkConfig&, std::uint64_t);

DRLN_EXTERN_NET(float)
DRLN_EXTERN_NET(double)
#undef DRLN_EXTERN_NET

}  // namespace drln
