// drln: train, degrade, super-resolve and evaluate with the DRLN toolkit.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "drln/checkpoint.hpp"
#include "drln/cli_config.hpp"
#include "drln/degrade.hpp"
#include "drln/gradcheck.hpp"
#include "drln/metrics.hpp"
#include "drln/sr.hpp"
#include "drln/trainer.hpp"

namespace fs = std::filesystem;
using namespace drln;

namespace {

void echo_config(const CliConfig& cfg) {
    std::printf("# resolved configuration\n%s# end configuration\n", emit_config(cfg).c_str());
}

int cmd_degrade(const CliConfig& cfg) {
    if (cfg.hr_dir.empty() || cfg.out_dir.empty())
        throw std::runtime_error("degrade requires --hr and --out");
    echo_config(cfg);
    const Manifest manifest = make_pairs(cfg.hr_dir, cfg.degradation(), cfg.out_dir);
    std::printf("wrote %zu LR/HR pairs to %s (manifest.tsv, %zu skipped)\n",
                manifest.rows.size(), cfg.out_dir.c_str(), manifest.skipped.size());
    return 0;
}

int cmd_train(const CliConfig& cfg) {
    if (cfg.out_dir.empty()) throw std::runtime_error("train requires --out");
    echo_config(cfg);

    TrainerState state;
    if (!cfg.resume.empty()) {
        Checkpoint ckpt = load_checkpoint(cfg.resume);
        if (cfg.max_steps > 0) ckpt.train_cfg.max_steps = cfg.max_steps;
        state = trainer_from_checkpoint(ckpt);
        std::printf("resumed from %s at step %lld\n", cfg.resume.c_str(), state.step);
        if (state.step >= state.cfg.max_steps) {
            std::printf("run already finished (step %lld >= max_steps %lld); nothing to do\n",
                        state.step, state.cfg.max_steps);
            return 0;
        }
    } else {
        Network<float> net = build_network<float>(cfg.network(), cfg.seed);
        std::printf("built %s network: %zu parameters\n", cfg.preset.c_str(),
                    net.param_count());
        state = make_trainer(std::move(net), cfg.train());
    }

    if (cfg.manifest.empty()) throw std::runtime_error("train requires --manifest");
    const std::vector<TrainSample> dataset = load_dataset(read_manifest(cfg.manifest));
    if (dataset.empty()) throw std::runtime_error("manifest has no usable rows");

    const TrainResult result = train(state, dataset, cfg.out_dir);
    if (!result.trace.empty())
        std::printf("trained to step %lld, final loss %.6g\n", state.step,
                    static_cast<double>(result.trace.back().loss));
    std::printf("checkpoint: %s\n", result.final_checkpoint.string().c_str());
    return 0;
}

int cmd_sr(const CliConfig& cfg) {
    if (cfg.checkpoint.empty() || cfg.input.empty() || cfg.out_dir.empty())
        throw std::runtime_error("sr requires --checkpoint, --input and --out");
    echo_config(cfg);

    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
    if (cfg.scale != 0 && cfg.scale != ckpt.net_cfg.scale)
        throw std::runtime_error("requested scale x" + std::to_string(cfg.scale) +
                                 " but checkpoint was trained for x" +
                                 std::to_string(ckpt.net_cfg.scale));
    const Network<float> net = network_from_checkpoint(ckpt);

    std::vector<fs::path> inputs;
    if (fs::is_directory(cfg.input)) {
        for (const auto& entry : fs::directory_iterator(cfg.input))
            if (entry.is_regular_file() && entry.path().extension() == ".png")
                inputs.push_back(entry.path());
        std::sort(inputs.begin(), inputs.end());
    } else {
        inputs.push_back(cfg.input);
    }
    if (inputs.empty()) throw std::runtime_error("no .png inputs under " + cfg.input);

    fs::create_directories(cfg.out_dir);
    auto run_net = [&](const Image& lr) { return super_resolve(net, lr); };
    for (const auto& path : inputs) {
        const Image lr = read_png(path);
        const Image sr = cfg.self_ensemble ? self_ensemble(lr, run_net) : run_net(lr);
        const fs::path out = fs::path(cfg.out_dir) / path.filename();
        write_png(out, sr);
        std::printf("%s -> %s (%dx%d)\n", path.string().c_str(), out.string().c_str(),
                    sr.width, sr.height);
    }
    return 0;
}

int cmd_eval(const CliConfig& cfg, const std::string& csv_path) {
    if (cfg.manifest.empty() || cfg.sr_dir.empty())
        throw std::runtime_error("eval requires --manifest and --sr");
    echo_config(cfg);

    const Manifest manifest = read_manifest(cfg.manifest);
    if (manifest.rows.empty()) throw std::runtime_error("no rows in manifest");

    const EvalReport report = evaluate(manifest, cfg.sr_dir, cfg.scale);
    std::printf("%s", format_report(report).c_str());

    const fs::path csv = csv_path.empty() ? fs::path(cfg.sr_dir) / "report.csv" : fs::path(csv_path);
    std::ofstream out(csv);
    out << report_csv(report);
    std::printf("csv: %s\n", csv.string().c_str());

    if (!report.all_ok) {
        for (const auto& row : report.rows)
            if (!row.ok) std::fprintf(stderr, "failed: %s: %s\n", row.name.c_str(), row.error.c_str());
        return 1;
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, const std::string& ops_csv, double threshold,
                  const std::string& fault) {
    std::vector<std::string> only;
    if (!ops_csv.empty()) {
        std::string item;
        std::istringstream ss(ops_csv);
        while (std::getline(ss, item, ',')) only.push_back(item);
    }
    const auto entries = run_gradcheck(seed, only, fault);
    bool ok = true;
    std::string worst_op;
    for (const auto& e : entries) {
        const bool pass = std::isfinite(e.worst_rel_err) && e.worst_rel_err < threshold;
        std::printf("%-18s worst rel err %.3e  [%s]\n", e.op.c_str(), e.worst_rel_err,
                    pass ? "ok" : "FAIL");
        if (!pass && ok) {
            ok = false;
            worst_op = e.op;
        }
    }
    if (!ok) {
        std::fprintf(stderr, "gradient check failed for op '%s' (threshold %g)\n",
                     worst_op.c_str(), threshold);
        return 1;
    }
    std::printf("all %zu op classes below threshold %g\n", entries.size(), threshold);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRLN super-resolution toolkit"};
    app.require_subcommand(1);

    std::string config_file;
    CliConfig cfg;
    // Raw flag values; only flags the user actually passed override the file.
    std::string kind = "bi", preset, input, out, hr, manifest, checkpoint, sr_dir, resume, csv;
    int scale = 0;
    double sigma = -1.0;
    long long steps = -1, seed = -1;
    int batch = 0, patch = 0;
    double lr0 = 0.0;
    bool ensemble = false;

    auto* degrade_cmd = app.add_subcommand("degrade", "Generate LR images from HR images");
    degrade_cmd->add_option("--kind", kind, "Degradation: bi, bd or nd")
        ->check(CLI::IsMember({"bi", "bd", "nd"}));
    degrade_cmd->add_option("--scale", scale, "Downscale factor (2,3,4,8)");
    degrade_cmd->add_option("--sigma", sigma, "ND noise sigma in [0,255]");
    degrade_cmd->add_option("--seed", seed, "ND noise seed");
    degrade_cmd->add_option("--hr", hr, "Directory of HR .png images")->required();
    degrade_cmd->add_option("--out", out, "Output directory")->required();

    auto* train_cmd = app.add_subcommand("train", "Train a model on degraded pairs");
    train_cmd->add_option("--config", config_file, "key = value config file");
    train_cmd->add_option("--preset", preset, "Architecture preset")
        ->check(CLI::IsMember({"paper", "desk"}));
    train_cmd->add_option("--steps", steps, "Total training steps");
    train_cmd->add_option("--resume", resume, "Checkpoint to resume from");
    train_cmd->add_option("--manifest", manifest, "Training pair manifest");
    train_cmd->add_option("--out", out, "Output directory");
    train_cmd->add_option("--seed", seed, "Init/sampler seed");
    train_cmd->add_option("--scale", scale, "Upscaling factor");
    train_cmd->add_option("--batch", batch, "Batch size");
    train_cmd->add_option("--patch", patch, "LR patch size");
    train_cmd->add_option("--lr0", lr0, "Initial learning rate");

    auto* sr_cmd = app.add_subcommand("sr", "Super-resolve images with a checkpoint");
    sr_cmd->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
    sr_cmd->add_option("--input", input, "LR .png file or directory")->required();
    sr_cmd->add_option("--out", out, "Output directory")->required();
    sr_cmd->add_option("--scale", scale, "Expected scale (checked against checkpoint)");
    sr_cmd->add_flag("--self-ensemble", ensemble, "Average the 8 dihedral transforms");

    auto* eval_cmd = app.add_subcommand("eval", "Y-channel PSNR/SSIM against a manifest");
    eval_cmd->add_option("--manifest", manifest, "Pair manifest")->required();
    eval_cmd->add_option("--sr", sr_dir, "Directory of SR images")->required();
    eval_cmd->add_option("--scale", scale, "Scale (sets border shave)")->required();
    eval_cmd->add_option("--csv", csv, "CSV output path");

    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    std::string ops_csv, fault;
    double threshold = 1e-3;
    grad_cmd->add_option("--ops", ops_csv, "Comma-separated op subset");
    grad_cmd->add_option("--seed", seed, "RNG seed");
    grad_cmd->add_option("--threshold", threshold, "Worst relative error allowed");
    grad_cmd->add_option("--fault", fault, "Corrupt one op's gradients (testing)")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!config_file.empty()) cfg = load_config_file(config_file, cfg);
        if (!preset.empty()) apply_config_key(cfg, "preset", preset);
        if (scale > 0) cfg.scale = scale;
        if (sigma >= 0.0) cfg.sigma = sigma;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (steps >= 0) cfg.max_steps = steps;
        if (batch > 0) cfg.batch_size = batch;
        if (patch > 0) cfg.lr_patch = patch;
        if (lr0 > 0.0) cfg.lr0 = lr0;
        cfg.kind = kind;
        if (!hr.empty()) cfg.hr_dir = hr;
        if (!out.empty()) cfg.out_dir = out;
        if (!manifest.empty()) cfg.manifest = manifest;
        if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
        if (!sr_dir.empty()) cfg.sr_dir = sr_dir;
        if (!input.empty()) cfg.input = input;
        if (!resume.empty()) cfg.resume = resume;
        cfg.self_ensemble = ensemble;

        if (app.got_subcommand(degrade_cmd)) return cmd_degrade(cfg);
        if (app.got_subcommand(train_cmd)) return cmd_train(cfg);
        if (app.got_subcommand(sr_cmd)) return cmd_sr(cfg);
        if (app.got_subcommand(eval_cmd)) return cmd_eval(cfg, csv);
        if (app.got_subcommand(grad_cmd))
            return cmd_gradcheck(seed >= 0 ? static_cast<std::uint64_t>(seed) : 1, ops_csv,
                                 threshold, fault);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
