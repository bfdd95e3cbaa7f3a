#pragma once

#include <span>
#include <vector>

#include "drln/tensor.hpp"

namespace drln {

/// Learnable convolution parameters. weight is (C_out, C_in, kh, kw); bias,
/// when defined, is (1, C_out, 1, 1). Stride/padding/dilation apply to both
/// spatial axes. Effective kernel extent is dilation*(k-1)+1.
template <typename T>
struct ConvParams {
    Tensor<T> weight;
    Tensor<T> bias;
    int stride = 1;
    int padding = 0;
    int dilation = 1;

    int out_channels() const { return weight.shape().n; }
    int in_channels() const { return weight.shape().c; }
};

/// Output spatial extent: floor((in + 2p - d*(k-1) - 1)/s) + 1.
int conv_out_extent(int in, int kernel, int stride, int padding, int dilation);

/// Direct 2-D convolution (zero padding):
/// out[n,o,y,x] = bias[o] + sum_{c,i,j} w[o,c,i,j] * in[n,c, y*s+i*d-p, x*s+j*d-p].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvParams<T>& params);

/// Elementwise max(0, v). Subgradient at 0 is 0.
template <typename T>
Tensor<T> relu(const Tensor<T>& input);

/// Elementwise 1/(1+exp(-v)); outputs strictly inside (0,1) for finite input.
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input);

/// Spatial mean per (n, c): output shape (N, C, 1, 1).
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input);

/// ESPCN rearrangement: (N, C, H, W) -> (N, C/r^2, H*r, W*r) with
/// out[n,c,y*r+a,x*r+b] = in[n, c*r^2 + a*r + b, y, x].
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, int r);

/// Concatenation along the channel axis; parts must agree on N, H, W.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// Per-channel scaling: gate is (N, C, 1, 1), x is (N, C, H, W).
template <typename T>
Tensor<T> mul_broadcast(const Tensor<T>& gate, const Tensor<T>& x);

/// Mean absolute difference over all elements; scalar result. sign(0) = 0.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target);

/// Sum of all elements; scalar result.
template <typename T>
Tensor<T> sum(const Tensor<T>& input);

/// Adds offsets[c] to every element of channel c (mean-shift plumbing);
/// gradient passes through unchanged.
template <typename T>
Tensor<T> shift_channels(const Tensor<T>& input, std::span<const T> offsets);

#define DRLN_EXTERN_OPS(T)                                                       \
    extern template Tensor<T> conv2d<T>(const Tensor<T>&, const ConvParams<T>&); \
    extern template Tensor<T> relu<T>(const Tensor<T>&);                          \
    extern template Tensor<T> sigmoid<T>(const Tensor<T>&);                       \
    extern template Tensor<T> global_avg_pool<T>(const Tensor<T>&);               \
    extern template Tensor<T> pixel_shuffle<T>(const Tensor<T>&, int);            \
    extern template Tensor<T> concat_channels<T>(const std::vector<Tensor<T>>&);  \
    extern template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);         \
    extern template Tensor<T> mul_broadcast<T>(const Tensor<T>&, const Tensor<T>&); \
    extern template Tensor<T> l1_loss<T>(const Tensor<T>&, const Tensor<T>&);     \
    extern template Tensor<T> sum<T>(const Tensor<T>&);                           \
    extern template Tensor<T> shift_channels<T>(const Tensor<T>&, std::span<const T>);

DRLN_EXTERN_OPS(float)
DRLN_EXTERN_OPS(double)
#undef DRLN_EXTERN_OPS

}  // namespace drln
