#include "drln/network.hpp"

#include <cmath>
#include <stdexcept>

#include "drln/rng.hpp"

namespace drln {

NetworkConfig NetworkConfig::paper_preset(int scale) {
    NetworkConfig cfg;
    cfg.scale = scale;
    cfg.channels = 64;
    cfg.n_blocks = 6;
    cfg.drlms_per_block = 3;
    cfg.rbs_per_drlm = 3;
    cfg.reduction = 4;
    cfg.preset = "paper";
    cfg.validate();
    return cfg;
}

NetworkConfig NetworkConfig::desk_preset(int scale) {
    NetworkConfig cfg;
    cfg.scale = scale;
    cfg.channels = 32;
    cfg.n_blocks = 2;
    cfg.drlms_per_block = 3;
    cfg.rbs_per_drlm = 3;
    cfg.reduction = 4;
    cfg.preset = "desk";
    cfg.validate();
    return cfg;
}

void NetworkConfig::validate() const {
    if (scale != 2 && scale != 3 && scale != 4 && scale != 8)
        throw std::invalid_argument("scale must be one of {2,3,4,8}");
    if (channels < 1 || n_blocks < 1 || drlms_per_block < 1 || rbs_per_drlm < 1)
        throw std::invalid_argument("network extents must be positive");
    if (reduction < 1 || channels % reduction != 0)
        throw std::invalid_argument("channels must be divisible by reduction");
    if (input_channels != 1 && input_channels != 3)
        throw std::invalid_argument("input_channels must be 1 or 3");
}

std::vector<int> NetworkConfig::upsample_stages() const {
    switch (scale) {
        case 2: return {2};
        case 3: return {3};
        case 4: return {2, 2};
        case 8: return {2, 2, 2};
        default: throw std::invalid_argument("unsupported scale");
    }
}

// ---------------------------------------------------------------------------
// forward composition

template <typename T>
Tensor<T> residual_block(const ResidualBlock<T>& rb, const Tensor<T>& x) {
    // tau(conv(tau(conv(x))) + x); the outer activation follows the skip sum.
    auto h = relu(conv2d(x, rb.conv1));
    h = conv2d(h, rb.conv2);
    return relu(add(h, x));
}

template <typename T>
Tensor<T> dense_residual_unit(const Drlm<T>& unit, const Tensor<T>& x) {
    // RB1 sees x; each later RB sees a 1x1 compression of [x; outputs so far].
    std::vector<Tensor<T>> collected{x};
    Tensor<T> out = residual_block(unit.rbs[0], x);
    collected.push_back(out);
    for (std::size_t i = 1; i < unit.rbs.size(); ++i) {
        auto squeezed = conv2d(concat_channels(collected), unit.dense_compressors[i - 1]);
        out = residual_block(unit.rbs[i], squeezed);
        collected.push_back(out);
    }
    return out;
}

template <typename T>
Tensor<T> laplacian_attention(const LaplacianAttention<T>& att, const Tensor<T>& fc) {
    auto gd = global_avg_pool(fc);
    auto r3 = relu(conv2d(gd, att.branch3));
    auto r5 = relu(conv2d(gd, att.branch5));
    auto r7 = relu(conv2d(gd, att.branch7));
    auto gp = concat_channels<T>({r3, r5, r7});
    auto gate = sigmoid(conv2d(gp, att.fuse));
    return mul_broadcast(gate, fc);
}

template <typename T>
Tensor<T> drlm_forward(const Drlm<T>& unit, const Tensor<T>& x) {
    auto fr = dense_residual_unit(unit, x);
    auto fc = conv2d(fr, unit.final_compression);
    return laplacian_attention(unit.attention, fc);
}

template <typename T>
Tensor<T> cascading_block(const CascadingBlock<T>& block, const Tensor<T>& x) {
    // Cascade: after each DRLM, concatenate the block input with every DRLM
    // output so far and squeeze back to C channels.
    std::vector<Tensor<T>> cascade{x};
    Tensor<T> cur = x;
    for (std::size_t i = 0; i < block.drlms.size(); ++i) {
        cascade.push_back(drlm_forward(block.drlms[i], cur));
        cur = conv2d(concat_channels(cascade), block.cascade_compressors[i]);
    }
    return add(cur, x);  // medium skip
}

template <typename T>
Tensor<T> forward(const Network<T>& net, const Tensor<T>& lr) {
    const Shape& s = lr.shape();
    if (s.n < 1 || s.h < 1 || s.w < 1)
        throw std::invalid_argument("forward: input must be a non-empty 4-D tensor");
    if (s.c != net.cfg.input_channels)
        throw std::invalid_argument("forward: input has " + std::to_string(s.c) +
                                    " channels, network expects " +
                                    std::to_string(net.cfg.input_channels));

    std::vector<T> mean(net.cfg.input_channels, T(0));
    const bool shift = net.cfg.mean_shift && net.cfg.input_channels == 3;
    if (shift)
        for (int c = 0; c < 3; ++c) mean[c] = static_cast<T>(net.cfg.rgb_mean[c]);

    Tensor<T> x = lr;
    if (shift) {
        std::vector<T> neg(mean);
        for (auto& v : neg) v = -v;
        x = shift_channels<T>(x, neg);
    }

    auto f0 = conv2d(x, net.head);
    auto t = f0;
    for (const auto& block : net.blocks) t = cascading_block(block, t);
    auto fg = add(f0, conv2d(t, net.tail));  // long skip

    auto fu = fg;
    for (const auto& [conv, r] : net.upsampler) fu = pixel_shuffle(conv2d(fu, conv), r);

    auto y = conv2d(fu, net.reconstruction);
    if (shift) y = shift_channels<T>(y, mean);
    return y;
}

// ---------------------------------------------------------------------------
// construction

namespace {

template <typename T>
ConvParams<T> make_conv(Rng& rng, int c_out, int c_in, int k, int pad, int dilation) {
    // Fan-in-scaled uniform bounds (kaiming_uniform with a = sqrt(5)); keeps
    // activations near the data range through the deep residual trunk.
    const double fan_in = static_cast<double>(c_in) * k * k;
    const double w_bound = 1.0 / std::sqrt(fan_in);
    const double b_bound = 1.0 / std::sqrt(fan_in);

    std::vector<T> w(static_cast<std::size_t>(c_out) * c_in * k * k);
    for (auto& v : w) v = static_cast<T>(rng.uniform(-w_bound, w_bound));
    std::vector<T> b(static_cast<std::size_t>(c_out));
    for (auto& v : b) v = static_cast<T>(rng.uniform(-b_bound, b_bound));

    ConvParams<T> p;
    p.weight = Tensor<T>::from_data(Shape{c_out, c_in, k, k}, std::move(w), true);
    p.bias = Tensor<T>::from_data(Shape{1, c_out, 1, 1}, std::move(b), true);
    p.stride = 1;
    p.padding = pad;
    p.dilation = dilation;
    return p;
}

}  // namespace

template <typename T>
Network<T> build_network(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);

    const int C = cfg.channels;
    const int red = C / cfg.reduction;

    Network<T> net;
    net.cfg = cfg;
    net.head = make_conv<T>(rng, C, cfg.input_channels, 3, 1, 1);

    for (int b = 0; b < cfg.n_blocks; ++b) {
        CascadingBlock<T> block;
        for (int m = 0; m < cfg.drlms_per_block; ++m) {
            Drlm<T> drlm;
            for (int r = 0; r < cfg.rbs_per_drlm; ++r) {
                ResidualBlock<T> rb;
                rb.conv1 = make_conv<T>(rng, C, C, 3, 1, 1);
                rb.conv2 = make_conv<T>(rng, C, C, 3, 1, 1);
                drlm.rbs.push_back(std::move(rb));
            }
            for (int r = 1; r < cfg.rbs_per_drlm; ++r)
                drlm.dense_compressors.push_back(make_conv<T>(rng, C, (r + 1) * C, 1, 0, 1));
            drlm.final_compression = make_conv<T>(rng, C, C, 1, 0, 1);
            drlm.attention.branch3 = make_conv<T>(rng, red, C, 3, 3, 3);
            drlm.attention.branch5 = make_conv<T>(rng, red, C, 3, 5, 5);
            drlm.attention.branch7 = make_conv<T>(rng, red, C, 3, 7, 7);
            drlm.attention.fuse = make_conv<T>(rng, C, 3 * red, 1, 0, 1);
            block.drlms.push_back(std::move(drlm));
        }
        for (int m = 0; m < cfg.drlms_per_block; ++m)
            block.cascade_compressors.push_back(make_conv<T>(rng, C, (m + 2) * C, 1, 0, 1));
        net.blocks.push_back(std::move(block));
    }

    net.tail = make_conv<T>(rng, C, C, 3, 1, 1);
    for (int r : cfg.upsample_stages())
        net.upsampler.emplace_back(make_conv<T>(rng, C * r * r, C, 3, 1, 1), r);
    net.reconstruction = make_conv<T>(rng, cfg.input_channels, C, 3, 1, 1);
    return net;
}

// ---------------------------------------------------------------------------
// parameter enumeration

namespace {

template <typename T>
void collect_conv(std::vector<std::pair<std::string, Tensor<T>>>& out, const std::string& name,
                  const ConvParams<T>& conv) {
    out.emplace_back(name + ".weight", conv.weight);
    if (conv.bias.defined()) out.emplace_back(name + ".bias", conv.bias);
}

}  // namespace

template <typename T>
std::vector<std::pair<std::string, Tensor<T>>> Network<T>::named_params() {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    collect_conv(out, "head", head);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::string bp = "blocks." + std::to_string(b);
        const auto& block = blocks[b];
        for (std::size_t m = 0; m < block.drlms.size(); ++m) {
            const std::string mp = bp + ".drlms." + std::to_string(m);
            const auto& drlm = block.drlms[m];
            for (std::size_t r = 0; r < drlm.rbs.size(); ++r) {
                collect_conv(out, mp + ".rbs." + std::to_string(r) + ".conv1", drlm.rbs[r].conv1);
                collect_conv(out, mp + ".rbs." + std::to_string(r) + ".conv2", drlm.rbs[r].conv2);
            }
            for (std::size_t r = 0; r < drlm.dense_compressors.size(); ++r)
                collect_conv(out, mp + ".dense_compressors." + std::to_string(r),
                             drlm.dense_compressors[r]);
            collect_conv(out, mp + ".final_compression", drlm.final_compression);
            collect_conv(out, mp + ".attention.branch3", drlm.attention.branch3);
            collect_conv(out, mp + ".attention.branch5", drlm.attention.branch5);
            collect_conv(out, mp + ".attention.branch7", drlm.attention.branch7);
            collect_conv(out, mp + ".attention.fuse", drlm.attention.fuse);
        }
        for (std::size_t m = 0; m < block.cascade_compressors.size(); ++m)
            collect_conv(out, bp + ".cascade_compressors." + std::to_string(m),
                         block.cascade_compressors[m]);
    }
    collect_conv(out, "tail", tail);
    for (std::size_t u = 0; u < upsampler.size(); ++u)
        collect_conv(out, "upsampler." + std::to_string(u), upsampler[u].first);
    collect_conv(out, "reconstruction", reconstruction);
    return out;
}

template <typename T>
std::size_t Network<T>::param_count() const {
    std::size_t total = 0;
    auto& self = const_cast<Network<T>&>(*this);
    for (auto& [name, t] : self.named_params()) total += t.numel();
    return total;
}

#define DRLN_INSTANTIATE_NET(T)                                                     \
    template struct Network<T>;                                                     \
    template Tensor<T> residual_block<T>(const ResidualBlock<T>&, const Tensor<T>&); \
    template Tensor<T> dense_residual_unit<T>(const Drlm<T>&, const Tensor<T>&);    \
    template Tensor<T> laplacian_attention<T>(const LaplacianAttention<T>&, const Tensor<T>&); \
    template Tensor<T> drlm_forward<T>(const Drlm<T>&, const Tensor<T>&);           \
    template Tensor<T> cascading_block<T>(const CascadingBlock<T>&, const Tensor<T>&); \
    template Tensor<T> forward<T>(const Network<T>&, const Tensor<T>&);             \
    template Network<T> build_network<T>(const NetworkConfig&, std::uint64_t);

DRLN_INSTANTIATE_NET(float)
DRLN_INSTANTIATE_NET(double)
#undef DRLN_INSTANTIATE_NET

}  // namespace drln
