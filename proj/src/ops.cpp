#include "drln/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "drln/parallel.hpp"

namespace drln {

namespace {

// Floor/ceil division for possibly negative numerators (b > 0).
inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
inline int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

// Output index range [lo, hi) for which in = out*s + k*d - p lands inside
// [0, in_extent).
inline void valid_out_range(int in_extent, int out_extent, int k, int s, int p, int d,
                            int& lo, int& hi) {
    lo = std::max(0, ceil_div(p - k * d, s));
    hi = std::min(out_extent, floor_div(in_extent - 1 + p - k * d, s) + 1);
}

template <typename T>
bool tracks_grad(const Tensor<T>& t) {
    return t.defined() && (t.requires_grad() || !t.impl()->parents.empty());
}

}  // namespace

int conv_out_extent(int in, int kernel, int stride, int padding, int dilation) {
    return (in + 2 * padding - dilation * (kernel - 1) - 1) / stride + 1;
}

// ---------------------------------------------------------------------------
// conv2d

namespace {

template <typename T>
void conv2d_forward_kernel(const Shape& in_s, const T* in, const Shape& w_s, const T* w,
                           const T* bias, int s, int p, int d, int out_h, int out_w,
                           T* out) {
    const int kh = w_s.h, kw = w_s.w, ci = w_s.c, co = w_s.n;
    parallel_for(static_cast<std::int64_t>(in_s.n) * co, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t idx = begin; idx < end; ++idx) {
            const int n = static_cast<int>(idx / co);
            const int oc = static_cast<int>(idx % co);
            T* out_plane = out + (static_cast<std::size_t>(n) * co + oc) * out_h * out_w;
            const T b = bias ? bias[oc] : T(0);
            for (int i = 0; i < out_h * out_w; ++i) out_plane[i] = b;

            for (int ic = 0; ic < ci; ++ic) {
                const T* in_plane = in + (static_cast<std::size_t>(n) * ci + ic) * in_s.h * in_s.w;
                const T* w_plane = w + (static_cast<std::size_t>(oc) * ci + ic) * kh * kw;
                for (int ki = 0; ki < kh; ++ki) {
                    int oy_lo, oy_hi;
                    valid_out_range(in_s.h, out_h, ki, s, p, d, oy_lo, oy_hi);
                    for (int kj = 0; kj < kw; ++kj) {
                        const T wv = w_plane[ki * kw + kj];
                        if (wv == T(0)) continue;
                        int ox_lo, ox_hi;
                        valid_out_range(in_s.w, out_w, kj, s, p, d, ox_lo, ox_hi);
                        const int shift = kj * d - p;
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const int iy = oy * s + ki * d - p;
                            const T* in_row = in_plane + static_cast<std::size_t>(iy) * in_s.w;
                            T* out_row = out_plane + static_cast<std::size_t>(oy) * out_w;
                            if (s == 1) {
                                const T* src = in_row + shift;
                                for (int ox = ox_lo; ox < ox_hi; ++ox)
                                    out_row[ox] += wv * src[ox];
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ++ox)
                                    out_row[ox] += wv * in_row[ox * s + shift];
                            }
                        }
                    }
                }
            }
        }
    });
}

// dW[o,c,i,j] = sum_{n,oy,ox} gout[n,o,oy,ox] * in[n,c, oy*s+i*d-p, ox*s+j*d-p]
template <typename T>
void conv2d_backward_weight(const Shape& in_s, const T* in, const Shape& w_s,
                            const Shape& out_s, const T* gout, int s, int p, int d,
                            T* dw) {
    const int kh = w_s.h, kw = w_s.w, ci = w_s.c, co = w_s.n;
    const int out_h = out_s.h, out_w = out_s.w;
    parallel_for(static_cast<std::int64_t>(co) * ci, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t idx = begin; idx < end; ++idx) {
            const int oc = static_cast<int>(idx / ci);
            const int ic = static_cast<int>(idx % ci);
            T* dw_plane = dw + (static_cast<std::size_t>(oc) * ci + ic) * kh * kw;
            for (int ki = 0; ki < kh; ++ki) {
                int oy_lo, oy_hi;
                valid_out_range(in_s.h, out_h, ki, s, p, d, oy_lo, oy_hi);
                for (int kj = 0; kj < kw; ++kj) {
                    int ox_lo, ox_hi;
                    valid_out_range(in_s.w, out_w, kj, s, p, d, ox_lo, ox_hi);
                    const int shift = kj * d - p;
                    // Four fixed accumulation lanes; merge order never varies.
                    T acc0 = 0, acc1 = 0, acc2 = 0, acc3 = 0;
                    for (int n = 0; n < in_s.n; ++n) {
                        const T* in_plane =
                            in + (static_cast<std::size_t>(n) * ci + ic) * in_s.h * in_s.w;
                        const T* g_plane =
                            gout + (static_cast<std::size_t>(n) * co + oc) * out_h * out_w;
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const int iy = oy * s + ki * d - p;
                            const T* in_row = in_plane + static_cast<std::size_t>(iy) * in_s.w;
                            const T* g_row = g_plane + static_cast<std::size_t>(oy) * out_w;
                            int ox = ox_lo;
                            if (s == 1) {
                                const T* src = in_row + shift;
                                for (; ox + 4 <= ox_hi; ox += 4) {
                                    acc0 += g_row[ox] * src[ox];
                                    acc1 += g_row[ox + 1] * src[ox + 1];
                                    acc2 += g_row[ox + 2] * src[ox + 2];
                                    acc3 += g_row[ox + 3] * src[ox + 3];
                                }
                                for (; ox < ox_hi; ++ox) acc0 += g_row[ox] * src[ox];
                            } else {
                                for (; ox < ox_hi; ++ox)
                                    acc0 += g_row[ox] * in_row[ox * s + shift];
                            }
                        }
                    }
                    dw_plane[ki * kw + kj] += ((acc0 + acc1) + (acc2 + acc3));
                }
            }
        }
    });
}

template <typename T>
void conv2d_backward_input(const Shape& in_s, const Shape& w_s, const T* w,
                           const Shape& out_s, const T* gout, int s, int p, int d,
                           T* din) {
    const int kh = w_s.h, kw = w_s.w, ci = w_s.c, co = w_s.n;
    const int out_h = out_s.h, out_w = out_s.w;
    parallel_for(static_cast<std::int64_t>(in_s.n) * ci, [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t idx = begin; idx < end; ++idx) {
            const int n = static_cast<int>(idx / ci);
            const int ic = static_cast<int>(idx % ci);
            T* din_plane = din + (static_cast<std::size_t>(n) * ci + ic) * in_s.h * in_s.w;
            for (int oc = 0; oc < co; ++oc) {
                const T* g_plane = gout + (static_cast<std::size_t>(n) * co + oc) * out_h * out_w;
                const T* w_plane = w + (static_cast<std::size_t>(oc) * ci + ic) * kh * kw;
                for (int ki = 0; ki < kh; ++ki) {
                    int oy_lo, oy_hi;
                    valid_out_range(in_s.h, out_h, ki, s, p, d, oy_lo, oy_hi);
                    for (int kj = 0; kj < kw; ++kj) {
                        const T wv = w_plane[ki * kw + kj];
                        if (wv == T(0)) continue;
                        int ox_lo, ox_hi;
                        valid_out_range(in_s.w, out_w, kj, s, p, d, ox_lo, ox_hi);
                        const int shift = kj * d - p;
                        for (int oy = oy_lo; oy < oy_hi; ++oy) {
                            const int iy = oy * s + ki * d - p;
                            T* din_row = din_plane + static_cast<std::size_t>(iy) * in_s.w;
                            const T* g_row = g_plane + static_cast<std::size_t>(oy) * out_w;
                            if (s == 1) {
                                T* dst = din_row + shift;
                                for (int ox = ox_lo; ox < ox_hi; ++ox)
                                    dst[ox] += wv * g_row[ox];
                            } else {
                                for (int ox = ox_lo; ox < ox_hi; ++ox)
                                    din_row[ox * s + shift] += wv * g_row[ox];
                            }
                        }
                    }
                }
            }
        }
    });
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvParams<T>& params) {
    const Shape& in_s = input.shape();
    const Shape& w_s = params.weight.shape();
    if (w_s.n <= 0 || w_s.c <= 0 || w_s.h <= 0 || w_s.w <= 0)
        throw std::invalid_argument("conv2d: weight extents must be positive");
    if (in_s.c != w_s.c)
        throw std::invalid_argument("conv2d: input has " + std::to_string(in_s.c) +
                                    " channels but weight expects " + std::to_string(w_s.c));
    if (params.bias.defined() && params.bias.shape().c != w_s.n)
        throw std::invalid_argument("conv2d: bias length does not match output channels");
    if (params.stride < 1 || params.dilation < 1 || params.padding < 0)
        throw std::invalid_argument("conv2d: invalid stride/padding/dilation");

    const int s = params.stride, p = params.padding, d = params.dilation;
    const int out_h = conv_out_extent(in_s.h, w_s.h, s, p, d);
    const int out_w = conv_out_extent(in_s.w, w_s.w, s, p, d);
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("conv2d: non-positive output size " + std::to_string(out_h) +
                                    "x" + std::to_string(out_w));

    Shape out_s{in_s.n, w_s.n, out_h, out_w};
    std::vector<T> out(out_s.numel());
    conv2d_forward_kernel(in_s, input.data(), w_s, params.weight.data(),
                          params.bias.defined() ? params.bias.data() : nullptr, s, p, d,
                          out_h, out_w, out.data());

    const bool has_bias = params.bias.defined();
    std::vector<Tensor<T>> parents{input, params.weight};
    if (has_bias) parents.push_back(params.bias);

    const bool need_din = tracks_grad(input);
    const bool need_dw = tracks_grad(params.weight);
    const bool need_db = has_bias && tracks_grad(params.bias);
    Tensor<T> x = input;
    Tensor<T> weight = params.weight;

    return make_op_result<T>(
        out_s, std::move(out), std::move(parents),
        [=](const std::vector<T>& gout, const auto& parent_grad) {
            if (need_din)
                conv2d_backward_input(x.shape(), weight.shape(), weight.data(), out_s,
                                      gout.data(), s, p, d, parent_grad(0).data());
            if (need_dw)
                conv2d_backward_weight(x.shape(), x.data(), weight.shape(), out_s,
                                       gout.data(), s, p, d, parent_grad(1).data());
            if (need_db) {
                std::vector<T>& db = parent_grad(2);
                const int co = out_s.c;
                const std::size_t plane = static_cast<std::size_t>(out_s.h) * out_s.w;
                for (int n = 0; n < out_s.n; ++n)
                    for (int oc = 0; oc < co; ++oc) {
                        const T* g = gout.data() + (static_cast<std::size_t>(n) * co + oc) * plane;
                        T acc = 0;
                        for (std::size_t i = 0; i < plane; ++i) acc += g[i];
                        db[oc] += acc;
                    }
            }
        });
}

// ---------------------------------------------------------------------------
// elementwise / structural ops

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
    std::vector<T> out(input.numel());
    const T* x = input.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
    Tensor<T> saved = input;
    return make_op_result<T>(input.shape(), std::move(out), {input},
                             [saved](const std::vector<T>& gout, const auto& parent_grad) {
                                 std::vector<T>& dx = parent_grad(0);
                                 const T* x = saved.data();
                                 for (std::size_t i = 0; i < gout.size(); ++i)
                                     if (x[i] > T(0)) dx[i] += gout[i];
                             });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input) {
    std::vector<T> out(input.numel());
    const T* x = input.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = T(1) / (T(1) + std::exp(-x[i]));
    // Saved copy of the outputs; capturing the result tensor itself would form
    // an ownership cycle through its own backward closure.
    std::vector<T> y = out;
    return make_op_result<T>(input.shape(), std::move(out), {input},
                             [y = std::move(y)](const std::vector<T>& gout, const auto& parent_grad) {
                                 std::vector<T>& dx = parent_grad(0);
                                 for (std::size_t i = 0; i < gout.size(); ++i)
                                     dx[i] += gout[i] * y[i] * (T(1) - y[i]);
                             });
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input) {
    const Shape& s = input.shape();
    if (s.h < 1 || s.w < 1)
        throw std::invalid_argument("global_avg_pool: empty spatial extent");
    const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
    std::vector<T> out(static_cast<std::size_t>(s.n) * s.c);
    const T* x = input.data();
    for (std::size_t nc = 0; nc < out.size(); ++nc) {
        T acc = 0;
        const T* src = x + nc * plane;
        for (std::size_t i = 0; i < plane; ++i) acc += src[i];
        out[nc] = acc / static_cast<T>(plane);
    }
    return make_op_result<T>(Shape{s.n, s.c, 1, 1}, std::move(out), {input},
                             [s, plane](const std::vector<T>& gout, const auto& parent_grad) {
                                 std::vector<T>& dx = parent_grad(0);
                                 for (std::size_t nc = 0; nc < gout.size(); ++nc) {
                                     const T g = gout[nc] / static_cast<T>(plane);
                                     T* dst = dx.data() + nc * plane;
                                     for (std::size_t i = 0; i < plane; ++i) dst[i] += g;
                                 }
                             });
}

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, int r) {
    const Shape& s = input.shape();
    if (r < 1) throw std::invalid_argument("pixel_shuffle: r must be positive");
    if (s.c % (r * r) != 0)
        throw std::invalid_argument("pixel_shuffle: channels " + std::to_string(s.c) +
                                    " not divisible by r^2=" + std::to_string(r * r));
    const Shape out_s{s.n, s.c / (r * r), s.h * r, s.w * r};
    std::vector<T> out(out_s.numel());
    const T* x = input.data();

    auto scatter = [&](const T* src, T* dst) {
        for (int n = 0; n < s.n; ++n)
            for (int oc = 0; oc < out_s.c; ++oc)
                for (int a = 0; a < r; ++a)
                    for (int b = 0; b < r; ++b) {
                        const int ic = oc * r * r + a * r + b;
                        const T* sp = src + ((static_cast<std::size_t>(n) * s.c + ic) * s.h) * s.w;
                        for (int y = 0; y < s.h; ++y) {
                            T* dp = dst +
                                    ((static_cast<std::size_t>(n) * out_s.c + oc) * out_s.h +
                                     (y * r + a)) * out_s.w + b;
                            for (int xw = 0; xw < s.w; ++xw) dp[xw * r] = sp[y * s.w + xw];
                        }
                    }
    };
    scatter(x, out.data());

    return make_op_result<T>(out_s, std::move(out), {input},
                             [s, out_s, r](const std::vector<T>& gout, const auto& parent_grad) {
                                 std::vector<T>& dx = parent_grad(0);
                                 for (int n = 0; n < s.n; ++n)
                                     for (int oc = 0; oc < out_s.c; ++oc)
                                         for (int a = 0; a < r; ++a)
                                             for (int b = 0; b < r; ++b) {
                                                 const int ic = oc * r * r + a * r + b;
                                                 T* dp = dx.data() +
                                                         (static_cast<std::size_t>(n) * s.c + ic) *
                                                             s.h * s.w;
                                                 for (int y = 0; y < s.h; ++y) {
                                                     const T* gp =
                                                         gout.data() +
                                                         ((static_cast<std::size_t>(n) * out_s.c + oc) *
                                                              out_s.h + (y * r + a)) * out_s.w + b;
                                                     for (int xw = 0; xw < s.w; ++xw)
                                                         dp[y * s.w + xw] += gp[xw * r];
                                                 }
                                             }
                             });
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_channels: empty part list");
    const Shape& first = parts.front().shape();
    int total_c = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.n != first.n || s.h != first.h || s.w != first.w)
            throw std::invalid_argument("concat_channels: mismatched extents " + s.str() +
                                        " vs " + first.str());
        total_c += s.c;
    }
    const Shape out_s{first.n, total_c, first.h, first.w};
    const std::size_t plane = static_cast<std::size_t>(first.h) * first.w;
    std::vector<T> out(out_s.numel());
    std::vector<int> channels;
    channels.reserve(parts.size());
    for (const auto& p : parts) channels.push_back(p.shape().c);

    for (int n = 0; n < first.n; ++n) {
        std::size_t dst_c = 0;
        for (const auto& p : parts) {
            const int pc = p.shape().c;
            const T* src = p.data() + static_cast<std::size_t>(n) * pc * plane;
            T* dst = out.data() + (static_cast<std::size_t>(n) * total_c + dst_c) * plane;
            std::copy(src, src + static_cast<std::size_t>(pc) * plane, dst);
            dst_c += pc;
        }
    }

    return make_op_result<T>(
        out_s, std::move(out), parts,
        [out_s, channels, plane](const std::vector<T>& gout, const auto& parent_grad) {
            for (int n = 0; n < out_s.n; ++n) {
                std::size_t src_c = 0;
                for (std::size_t pi = 0; pi < channels.size(); ++pi) {
                    const int pc = channels[pi];
                    std::vector<T>& dx = parent_grad(pi);
                    const T* src =
                        gout.data() + (static_cast<std::size_t>(n) * out_s.c + src_c) * plane;
                    T* dst = dx.data() + static_cast<std::size_t>(n) * pc * plane;
                    for (std::size_t i = 0; i < static_cast<std::size_t>(pc) * plane; ++i)
                        dst[i] += src[i];
                    src_c += pc;
                }
            }
        });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    if (!(a.shape() == b.shape()))
        throw std::invalid_argument("add: shape mismatch " + a.shape().str() + " vs " +
                                    b.shape().str());
    std::vector<T> out(a.numel());
    const T* pa = a.data();
    const T* pb = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pa[i] + pb[i];
    return make_op_result<T>(a.shape(), std::move(out), {a, b},
                             [](const std::vector<T>& gout, const auto& parent_grad) {
                                 std::vector<T>& da = parent_grad(0);
                                 std::vector<T>& db = parent_grad(1);
                                 for (std::size_t i = 0; i < gout.size(); ++i) {
                                     da[i] += gout[i];
                                     db[i] += gout[i];
                                 }
                             });
}

template <typename T>
Tensor<T> mul_broadcast(const Tensor<T>& gate, const Tensor<T>& x) {
    const Shape& gs = gate.shape();
    const Shape& xs = x.shape();
    if (gs.n != xs.n || gs.c != xs.c || gs.h != 1 || gs.w != 1)
        throw std::invalid_argument("mul_broadcast: gate must be (N,C,1,1) matching x, got " +
                                    gs.str() + " vs " + xs.str());
    const std::size_t plane = static_cast<std::size_t>(xs.h) * xs.w;
    std::vector<T> out(xs.numel());
    const T* g = gate.data();
    const T* px = x.data();
    for (std::size_t nc = 0; nc < static_cast<std::size_t>(xs.n) * xs.c; ++nc) {
        const T gv = g[nc];
        const T* src = px + nc * plane;
        T* dst = out.data() + nc * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = gv * src[i];
    }
    Tensor<T> gate_saved = gate;
    Tensor<T> x_saved = x;
    return make_op_result<T>(
        xs, std::move(out), {gate, x},
        [gate_saved, x_saved, plane](const std::vector<T>& gout, const auto& parent_grad) {
            std::vector<T>& dg = parent_grad(0);
            std::vector<T>& dx = parent_grad(1);
            const T* g = gate_saved.data();
            const T* px = x_saved.data();
            for (std::size_t nc = 0; nc < dg.size(); ++nc) {
                const T* go = gout.data() + nc * plane;
                const T* src = px + nc * plane;
                T* dst = dx.data() + nc * plane;
                T acc = 0;
                const T gv = g[nc];
                for (std::size_t i = 0; i < plane; ++i) {
                    acc += go[i] * src[i];
                    dst[i] += gv * go[i];
                }
                dg[nc] += acc;
            }
        });
}

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    if (!(pred.shape() == target.shape()))
        throw std::invalid_argument("l1_loss: shape mismatch " + pred.shape().str() + " vs " +
                                    target.shape().str());
    const std::size_t count = pred.numel();
    const T* pp = pred.data();
    const T* pt = target.data();
    T acc = 0;
    for (std::size_t i = 0; i < count; ++i) acc += std::abs(pp[i] - pt[i]);
    Tensor<T> pred_saved = pred;
    Tensor<T> target_saved = target;
    return make_op_result<T>(
        Shape{1, 1, 1, 1}, {acc / static_cast<T>(count)}, {pred, target},
        [pred_saved, target_saved, count](const std::vector<T>& gout, const auto& parent_grad) {
            std::vector<T>& dp = parent_grad(0);
            std::vector<T>& dt = parent_grad(1);
            const T scale = gout[0] / static_cast<T>(count);
            const T* pp = pred_saved.data();
            const T* pt = target_saved.data();
            for (std::size_t i = 0; i < count; ++i) {
                const T diff = pp[i] - pt[i];
                const T sign = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
                dp[i] += scale * sign;
                dt[i] -= scale * sign;
            }
        });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& input) {
    const T* x = input.data();
    T acc = 0;
    for (std::size_t i = 0; i < input.numel(); ++i) acc += x[i];
    return make_op_result<T>(Shape{1, 1, 1, 1}, {acc}, {input},
                             [](const std::vector<T>& gout, const auto& parent_grad) {
                                 std::vector<T>& dx = parent_grad(0);
                                 for (auto& v : dx) v += gout[0];
                             });
}

template <typename T>
Tensor<T> shift_channels(const Tensor<T>& input, std::span<const T> offsets) {
    const Shape& s = input.shape();
    if (static_cast<int>(offsets.size()) != s.c)
        throw std::invalid_argument("shift_channels: offset count does not match channels");
    const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
    std::vector<T> out(input.numel());
    const T* x = input.data();
    for (int n = 0; n < s.n; ++n)
        for (int c = 0; c < s.c; ++c) {
            const T off = offsets[c];
            const T* src = x + (static_cast<std::size_t>(n) * s.c + c) * plane;
            T* dst = out.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] + off;
        }
    return make_op_result<T>(s, std::move(out), {input},
                             [](const std::vector<T>& gout, const auto& parent_grad) {
                                 std::vector<T>& dx = parent_grad(0);
                                 for (std::size_t i = 0; i < gout.size(); ++i) dx[i] += gout[i];
                             });
}

#define DRLN_INSTANTIATE_OPS(T)                                                \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const ConvParams<T>&);      \
    template Tensor<T> relu<T>(const Tensor<T>&);                              \
    template Tensor<T> sigmoid<T>(const Tensor<T>&);                           \
    template Tensor<T> global_avg_pool<T>(const Tensor<T>&);                   \
    template Tensor<T> pixel_shuffle<T>(const Tensor<T>&, int);                \
    template Tensor<T> concat_channels<T>(const std::vector<Tensor<T>>&);      \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);             \
    template Tensor<T> mul_broadcast<T>(const Tensor<T>&, const Tensor<T>&);   \
    template Tensor<T> l1_loss<T>(const Tensor<T>&, const Tensor<T>&);         \
    template Tensor<T> sum<T>(const Tensor<T>&);                               \
    template Tensor<T> shift_channels<T>(const Tensor<T>&, std::span<const T>);

DRLN_INSTANTIATE_OPS(float)
DRLN_INSTANTIATE_OPS(double)
#undef DRLN_INSTANTIATE_OPS

}  // namespace drln
