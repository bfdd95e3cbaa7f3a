#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "drln/image.hpp"
#include "drln/ops.hpp"
#include "drln/rng.hpp"
#include "drln/tensor.hpp"

namespace drln::testing {

template <typename T>
Tensor<T> random_tensor(Rng& rng, Shape s, bool requires_grad = false, double lo = -1.0,
                        double hi = 1.0) {
    std::vector<T> data(s.numel());
    for (auto& v : data) v = static_cast<T>(rng.uniform(lo, hi));
    return Tensor<T>::from_data(s, std::move(data), requires_grad);
}

/// Reference convolution: direct quadruple loop straight from the definition.
/// Intentionally independent of the engine's loop structure.
template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& input, const ConvParams<T>& p) {
    const Shape& in = input.shape();
    const Shape& w = p.weight.shape();
    const int out_h = conv_out_extent(in.h, w.h, p.stride, p.padding, p.dilation);
    const int out_w = conv_out_extent(in.w, w.w, p.stride, p.padding, p.dilation);
    Tensor<T> out = Tensor<T>::zeros(Shape{in.n, w.n, out_h, out_w});
    for (int n = 0; n < in.n; ++n)
        for (int oc = 0; oc < w.n; ++oc)
            for (int oy = 0; oy < out_h; ++oy)
                for (int ox = 0; ox < out_w; ++ox) {
                    T acc = p.bias.defined() ? p.bias.at(0, oc, 0, 0) : T(0);
                    for (int ic = 0; ic < in.c; ++ic)
                        for (int ki = 0; ki < w.h; ++ki)
                            for (int kj = 0; kj < w.w; ++kj) {
                                const int iy = oy * p.stride + ki * p.dilation - p.padding;
                                const int ix = ox * p.stride + kj * p.dilation - p.padding;
                                if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
                                acc += p.weight.at(oc, ic, ki, kj) * input.at(n, ic, iy, ix);
                            }
                    out.at(n, oc, oy, ox) = acc;
                }
    return out;
}

template <typename T>
bool all_close(const Tensor<T>& a, const Tensor<T>& b, double rtol, double atol) {
    if (!(a.shape() == b.shape())) return false;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double va = a.values()[i], vb = b.values()[i];
        if (std::abs(va - vb) > atol + rtol * std::max(std::abs(va), std::abs(vb))) return false;
    }
    return true;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i)
        worst = std::max(worst, std::abs(static_cast<double>(a.values()[i]) - b.values()[i]));
    return worst;
}

/// Central finite difference of a scalar-valued function at one coordinate.
template <typename T, typename LossFn>
double fd_grad(LossFn&& loss_fn, Tensor<T>& leaf, std::size_t idx, double h = 1e-5) {
    T* data = leaf.mutable_data();
    const T saved = data[idx];
    const double step = h * std::max(1.0, std::abs(static_cast<double>(saved)));
    data[idx] = static_cast<T>(saved + step);
    const double up = static_cast<double>(loss_fn().item());
    data[idx] = static_cast<T>(saved - step);
    const double down = static_cast<double>(loss_fn().item());
    data[idx] = saved;
    return (up - down) / (2.0 * step);
}

inline double rel_err(double a, double b) {
    const double denom = std::max(std::abs(a), std::abs(b));
    if (denom < 1e-7) return std::abs(a - b);
    return std::abs(a - b) / denom;
}

/// Smooth bandlimited texture: a few random sinusoidal gratings per channel.
/// Deterministic in (seed, size).
inline Image make_texture(std::uint64_t seed, int w, int h, int channels = 3) {
    Rng rng(seed);
    Image img = Image::create(w, h, channels);
    for (int c = 0; c < channels; ++c) {
        struct Wave {
            double fx, fy, phase, amp;
        };
        std::vector<Wave> waves;
        for (int k = 0; k < 3; ++k)
            waves.push_back({rng.uniform(0.02, 0.25), rng.uniform(0.02, 0.25),
                             rng.uniform(0.0, 6.28318), rng.uniform(0.1, 0.25)});
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = 0.5;
                for (const auto& wave : waves)
                    v += wave.amp *
                         std::sin(6.28318530717958647 * (wave.fx * x + wave.fy * y) + wave.phase);
                img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
    }
    return img;
}

/// Unique scratch directory under the system temp dir; removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path = std::filesystem::temp_directory_path() /
               ("drln_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

}  // namespace drln::testing
