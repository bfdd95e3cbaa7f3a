#include "drln/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "drln/network.hpp"
#include "drln/ops.hpp"
#include "drln/rng.hpp"

namespace drln {

namespace {

using DTensor = Tensor<double>;

DTensor random_tensor(Rng& rng, Shape s, bool requires_grad, double lo = -1.0, double hi = 1.0) {
    std::vector<double> data(s.numel());
    for (auto& v : data) v = rng.uniform(lo, hi);
    return DTensor::from_data(s, std::move(data), requires_grad);
}

// Values kept away from zero so ReLU/L1 kinks never sit inside the FD stencil.
DTensor random_tensor_off_kink(Rng& rng, Shape s, bool requires_grad) {
    std::vector<double> data(s.numel());
    for (auto& v : data) {
        const double mag = rng.uniform(0.2, 1.0);
        v = rng.next_below(2) ? mag : -mag;
    }
    return DTensor::from_data(s, std::move(data), requires_grad);
}

double rel_err(double a, double b) {
    const double denom = std::max(std::abs(a), std::abs(b));
    if (denom < 1e-7) return std::abs(a - b);
    return std::abs(a - b) / denom;
}

// Compares analytic gradients of `loss_fn` against central differences at
// `n_samples` random coordinates of each tensor in `leaves`.
double check_gradients(const std::function<DTensor()>& loss_fn, std::vector<DTensor> leaves,
                       int n_samples, Rng& rng, bool corrupt) {
    for (auto& leaf : leaves) leaf.zero_grad();
    auto loss = loss_fn();
    backward(loss);

    double worst = 0.0;
    for (auto& leaf : leaves) {
        std::vector<double> analytic = leaf.grad();
        if (corrupt)
            for (auto& g : analytic) g = g * 1.5 + 1e-3;
        for (int s = 0; s < n_samples; ++s) {
            const std::size_t i = rng.next_below(leaf.numel());
            double* x = leaf.mutable_data();
            const double saved = x[i];
            const double h = 1e-5 * std::max(1.0, std::abs(saved));

            x[i] = saved + h;
            const double up = loss_fn().item();
            x[i] = saved - h;
            const double down = loss_fn().item();
            x[i] = saved;

            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, rel_err(analytic[i], fd));
        }
    }
    return worst;
}

ConvParams<double> random_conv(Rng& rng, int c_out, int c_in, int k, int pad, int dilation) {
    ConvParams<double> p;
    p.weight = random_tensor(rng, Shape{c_out, c_in, k, k}, true);
    p.bias = random_tensor(rng, Shape{1, c_out, 1, 1}, true);
    p.padding = pad;
    p.dilation = dilation;
    return p;
}

struct OpCheck {
    std::string name;
    std::function<double(Rng&, bool)> run;  // returns worst relative error
};

std::vector<OpCheck> build_checks() {
    std::vector<OpCheck> checks;

    checks.push_back({"conv2d", [](Rng& rng, bool corrupt) {
        auto x = random_tensor(rng, Shape{2, 3, 7, 7}, true);
        auto p = random_conv(rng, 4, 3, 3, 2, 2);
        auto fn = [&] { return sum(conv2d(x, p)); };
        return check_gradients(fn, {x, p.weight, p.bias}, 20, rng, corrupt);
    }});

    checks.push_back({"relu", [](Rng& rng, bool corrupt) {
        auto x = random_tensor_off_kink(rng, Shape{2, 3, 6, 6}, true);
        auto w = random_tensor(rng, Shape{2, 3, 6, 6}, false);
        auto fn = [&] { return sum(mul_broadcast(global_avg_pool(w), relu(x))); };
        return check_gradients(fn, {x}, 20, rng, corrupt);
    }});

    checks.push_back({"sigmoid", [](Rng& rng, bool corrupt) {
        auto x = random_tensor(rng, Shape{2, 3, 6, 6}, true, -3.0, 3.0);
        auto fn = [&] { return l1_loss(sigmoid(x), DTensor::full(x.shape(), 2.0)); };
        return check_gradients(fn, {x}, 20, rng, corrupt);
    }});

    checks.push_back({"global_avg_pool", [](Rng& rng, bool corrupt) {
        auto x = random_tensor(rng, Shape{2, 4, 5, 5}, true);
        auto w = random_tensor(rng, Shape{2, 4, 1, 1}, false);
        auto fn = [&] { return sum(mul_broadcast(w, global_avg_pool(x))); };
        return check_gradients(fn, {x}, 20, rng, corrupt);
    }});

    checks.push_back({"pixel_shuffle", [](Rng& rng, bool corrupt) {
        auto x = random_tensor(rng, Shape{1, 8, 4, 4}, true);
        auto w = random_tensor(rng, Shape{1, 2, 8, 8}, false);
        auto fn = [&] { return sum(mul_broadcast(global_avg_pool(w), pixel_shuffle(x, 2))); };
        return check_gradients(fn, {x}, 20, rng, corrupt);
    }});

    checks.push_back({"concat_channels", [](Rng& rng, bool corrupt) {
        auto a = random_tensor(rng, Shape{1, 2, 4, 4}, true);
        auto b = random_tensor(rng, Shape{1, 3, 4, 4}, true);
        auto w = random_tensor(rng, Shape{1, 5, 4, 4}, false);
        auto fn = [&] {
            return sum(mul_broadcast(global_avg_pool(w), concat_channels<double>({a, b})));
        };
        return check_gradients(fn, {a, b}, 20, rng, corrupt);
    }});

    checks.push_back({"add", [](Rng& rng, bool corrupt) {
        auto a = random_tensor(rng, Shape{2, 3, 5, 5}, true);
        auto b = random_tensor(rng, Shape{2, 3, 5, 5}, true);
        auto w = random_tensor(rng, Shape{2, 3, 5, 5}, false);
        auto fn = [&] { return sum(mul_broadcast(global_avg_pool(w), add(a, b))); };
        return check_gradients(fn, {a, b}, 20, rng, corrupt);
    }});

    checks.push_back({"mul_broadcast", [](Rng& rng, bool corrupt) {
        auto gate = random_tensor(rng, Shape{2, 3, 1, 1}, true);
        auto x = random_tensor(rng, Shape{2, 3, 5, 5}, true);
        auto fn = [&] { return sum(mul_broadcast(gate, x)); };
        return check_gradients(fn, {gate, x}, 20, rng, corrupt);
    }});

    checks.push_back({"l1_loss", [](Rng& rng, bool corrupt) {
        auto pred = random_tensor_off_kink(rng, Shape{2, 3, 5, 5}, true);
        auto target = DTensor::zeros(Shape{2, 3, 5, 5});
        auto fn = [&] { return l1_loss(pred, target); };
        return check_gradients(fn, {pred}, 20, rng, corrupt);
    }});

    checks.push_back({"network", [](Rng& rng, bool corrupt) {
        auto cfg = NetworkConfig::desk_preset(2);
        auto net = build_network<double>(cfg, rng.next_u64());
        auto x = random_tensor(rng, Shape{1, 3, 8, 8}, false, 0.0, 1.0);
        auto target = random_tensor(rng, Shape{1, 3, 16, 16}, false, 0.0, 1.0);
        auto fn = [&] { return l1_loss(forward(net, x), target); };

        // 20 parameters sampled across the whole network, 1 coordinate each.
        auto params = net.named_params();
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            auto& leaf = params[rng.next_below(params.size())].second;
            worst = std::max(worst, check_gradients(fn, {leaf}, 1, rng, corrupt));
        }
        return worst;
    }});

    return checks;
}

}  // namespace

std::vector<std::string> gradcheck_op_names() {
    std::vector<std::string> names;
    for (const auto& check : build_checks()) names.push_back(check.name);
    return names;
}

std::vector<GradCheckEntry> run_gradcheck(std::uint64_t seed,
                                          const std::vector<std::string>& only_ops,
                                          const std::string& fault_op) {
    auto checks = build_checks();
    if (!only_ops.empty()) {
        for (const auto& requested : only_ops) {
            const bool known = std::any_of(checks.begin(), checks.end(),
                                           [&](const OpCheck& c) { return c.name == requested; });
            if (!known) throw std::invalid_argument("gradcheck: unknown op '" + requested + "'");
        }
    }

    std::vector<GradCheckEntry> entries;
    Rng rng(seed);
    for (auto& check : checks) {
        if (!only_ops.empty() &&
            std::find(only_ops.begin(), only_ops.end(), check.name) == only_ops.end())
            continue;
        GradCheckEntry entry;
        entry.op = check.name;
        entry.samples = 20;
        entry.worst_rel_err = check.run(rng, check.name == fault_op);
        entries.push_back(std::move(entry));
    }
    return entries;
}

bool gradcheck_passed(const std::vector<GradCheckEntry>& entries, double threshold) {
    return std::all_of(entries.begin(), entries.end(), [&](const GradCheckEntry& e) {
        return std::isfinite(e.worst_rel_err) && e.worst_rel_err < threshold;
    });
}

}  // namespace drln
