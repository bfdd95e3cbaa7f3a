#include "drln/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "drln/checkpoint.hpp"
#include "drln/rng.hpp"

namespace drln {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
    if (batch_size < 1 || lr_patch < 1) throw std::invalid_argument("batch/patch must be positive");
    if (lr0 <= 0.0 || halve_every < 1) throw std::invalid_argument("learning rate schedule invalid");
    if (max_steps < 0 || checkpoint_every < 1) throw std::invalid_argument("step counts invalid");
}

double lr_at(long long step, const TrainConfig& cfg) {
    if (step < 0) throw std::invalid_argument("lr_at: negative step");
    const long long halvings = step / cfg.halve_every;
    return cfg.lr0 * std::pow(0.5, static_cast<double>(halvings));
}

std::vector<TrainSample> load_dataset(const Manifest& manifest) {
    std::vector<TrainSample> dataset;
    dataset.reserve(manifest.rows.size());
    for (const auto& row : manifest.rows)
        dataset.push_back(TrainSample{read_png(row.lr_path), read_png(row.hr_path)});
    return dataset;
}

namespace {

Image crop(const Image& img, int y0, int x0, int size) {
    Image out = Image::create(size, size, img.channels);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return out;
}

void copy_into_batch(Tensor<float>& batch, int item, const Image& img) {
    const Shape& s = batch.shape();
    for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < s.h; ++y)
            for (int x = 0; x < s.w; ++x) batch.at(item, c, y, x) = img.at(y, x, c);
}

}  // namespace

Batch sample_batch(const std::vector<TrainSample>& dataset, const TrainConfig& cfg, int scale,
                   long long step) {
    if (dataset.empty()) throw std::invalid_argument("sample_batch: empty dataset");
    const int p = cfg.lr_patch;
    const int channels = dataset.front().lr.channels;

    Batch batch;
    batch.lr = Tensor<float>::zeros(Shape{cfg.batch_size, channels, p, p});
    batch.hr = Tensor<float>::zeros(Shape{cfg.batch_size, channels, p * scale, p * scale});

    Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(step));
    for (int i = 0; i < cfg.batch_size; ++i) {
        const TrainSample& sample = dataset[rng.next_below(dataset.size())];
        if (sample.lr.width < p || sample.lr.height < p)
            throw std::invalid_argument("sample_batch: patch larger than image " +
                                        std::to_string(sample.lr.width) + "x" +
                                        std::to_string(sample.lr.height));
        const int y0 = static_cast<int>(rng.next_below(sample.lr.height - p + 1));
        const int x0 = static_cast<int>(rng.next_below(sample.lr.width - p + 1));
        const int aug = static_cast<int>(rng.next_below(8));

        Image lr_patch = dihedral_apply(crop(sample.lr, y0, x0, p), aug);
        Image hr_patch = dihedral_apply(crop(sample.hr, y0 * scale, x0 * scale, p * scale), aug);
        copy_into_batch(batch.lr, i, lr_patch);
        copy_into_batch(batch.hr, i, hr_patch);
    }
    return batch;
}

void adam_step(Tensor<float>& param, const std::vector<float>& grad, Tensor<float>& m,
               Tensor<float>& v, long long t, double lr, double beta1, double beta2, double eps) {
    if (grad.size() != param.numel() || m.numel() != param.numel() || v.numel() != param.numel())
        throw std::invalid_argument("adam_step: shape mismatch");
    if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");

    const float b1 = static_cast<float>(beta1);
    const float b2 = static_cast<float>(beta2);
    const float corr1 = static_cast<float>(1.0 - std::pow(beta1, static_cast<double>(t)));
    const float corr2 = static_cast<float>(1.0 - std::pow(beta2, static_cast<double>(t)));
    const float flr = static_cast<float>(lr);
    const float feps = static_cast<float>(eps);

    float* p = param.mutable_data();
    float* pm = m.mutable_data();
    float* pv = v.mutable_data();
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const float g = grad[i];
        pm[i] = b1 * pm[i] + (1.0f - b1) * g;
        pv[i] = b2 * pv[i] + (1.0f - b2) * g * g;
        const float m_hat = pm[i] / corr1;
        const float v_hat = pv[i] / corr2;
        p[i] -= flr * m_hat / (std::sqrt(v_hat) + feps);
    }
}

TrainerState make_trainer(Network<float> net, TrainConfig cfg) {
    cfg.validate();
    TrainerState state;
    state.net = std::move(net);
    state.cfg = cfg;
    for (auto& [name, t] : state.net.named_params()) {
        state.adam_m.push_back(Tensor<float>::zeros(t.shape()));
        state.adam_v.push_back(Tensor<float>::zeros(t.shape()));
    }
    return state;
}

TrainResult train(TrainerState& state, const std::vector<TrainSample>& dataset,
                  const fs::path& out_dir) {
    state.cfg.validate();
    fs::create_directories(out_dir);

    const fs::path trace_path = out_dir / "trace.csv";
    const bool fresh = !fs::exists(trace_path) || fs::file_size(trace_path) == 0;
    std::ofstream trace(trace_path, std::ios::app);
    if (!trace) throw std::runtime_error("cannot write " + trace_path.string());
    if (fresh) trace << "step,loss,lr\n";

    auto params = state.net.named_params();
    TrainResult result;

    auto save = [&](const std::string& name) {
        const fs::path path = out_dir / name;
        Checkpoint ckpt = checkpoint_from_trainer(state);
        save_checkpoint(path, ckpt);
        return path;
    };

    for (long long step = state.step; step < state.cfg.max_steps; ++step) {
        const double lr = lr_at(step, state.cfg);
        Batch batch = sample_batch(dataset, state.cfg, state.net.cfg.scale, step);

        auto pred = forward(state.net, batch.lr);
        auto loss = l1_loss(pred, batch.hr);
        const float loss_value = loss.item();

        if (!std::isfinite(loss_value)) {
            save("checkpoint_diagnostic.ckpt");
            throw std::runtime_error("non-finite loss " + std::to_string(loss_value) +
                                     " at step " + std::to_string(step) +
                                     "; diagnostic checkpoint written");
        }

        for (auto& [name, t] : params) t.zero_grad();
        backward(loss);
        for (std::size_t i = 0; i < params.size(); ++i)
            adam_step(params[i].second, params[i].second.grad(), state.adam_m[i],
                      state.adam_v[i], step + 1, lr, state.cfg.beta1, state.cfg.beta2,
                      state.cfg.eps);

        state.step = step + 1;
        char row[96];
        std::snprintf(row, sizeof row, "%lld,%.9g,%.9g\n", step, static_cast<double>(loss_value), lr);
        trace << row;
        result.trace.push_back(TraceRow{step, loss_value, lr});

        if (state.cfg.checkpoint_every > 0 && state.step % state.cfg.checkpoint_every == 0 &&
            state.step < state.cfg.max_steps)
            save("checkpoint_step" + std::to_string(state.step) + ".ckpt");
    }

    trace.flush();
    result.final_checkpoint = save("checkpoint_final.ckpt");
    return result;
}

}  // namespace drln
