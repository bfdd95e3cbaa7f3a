#include "drln/cli_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drln {

NetworkConfig CliConfig::network() const {
    NetworkConfig cfg;
    cfg.scale = scale;
    cfg.channels = channels;
    cfg.n_blocks = n_blocks;
    cfg.drlms_per_block = drlms_per_block;
    cfg.rbs_per_drlm = rbs_per_drlm;
    cfg.reduction = reduction;
    cfg.input_channels = input_channels;
    cfg.mean_shift = mean_shift;
    cfg.preset = preset;
    cfg.validate();
    return cfg;
}

TrainConfig CliConfig::train() const {
    TrainConfig cfg;
    cfg.batch_size = batch_size;
    cfg.lr_patch = lr_patch;
    cfg.lr0 = lr0;
    cfg.halve_every = halve_every;
    cfg.max_steps = max_steps;
    cfg.seed = seed;
    cfg.checkpoint_every = checkpoint_every;
    cfg.validate();
    return cfg;
}

DegradationSpec CliConfig::degradation() const {
    DegradationSpec spec;
    spec.kind = kind_from_name(kind);
    spec.scale = scale;
    spec.sigma_noise = sigma;
    spec.blur_variance = blur_variance;
    spec.rng_seed = seed;
    return spec;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw std::invalid_argument("config key '" + key + "': bad integer '" + v + "'");
    }
}

long long to_ll(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long out = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw std::invalid_argument("config key '" + key + "': bad integer '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (...) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw std::invalid_argument("config key '" + key + "': bad bool '" + v + "'");
}

void apply_preset(CliConfig& cfg, const std::string& name) {
    if (name == "paper") {
        cfg.channels = 64;
        cfg.n_blocks = 6;
    } else if (name == "desk") {
        cfg.channels = 32;
        cfg.n_blocks = 2;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "' (expected paper or desk)");
    }
    cfg.drlms_per_block = 3;
    cfg.rbs_per_drlm = 3;
    cfg.reduction = 4;
    cfg.preset = name;
}

}  // namespace

void apply_config_key(CliConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "preset") apply_preset(cfg, value);
    else if (key == "scale") cfg.scale = to_int(key, value);
    else if (key == "channels") cfg.channels = to_int(key, value);
    else if (key == "n_blocks") cfg.n_blocks = to_int(key, value);
    else if (key == "drlms_per_block") cfg.drlms_per_block = to_int(key, value);
    else if (key == "rbs_per_drlm") cfg.rbs_per_drlm = to_int(key, value);
    else if (key == "reduction") cfg.reduction = to_int(key, value);
    else if (key == "input_channels") cfg.input_channels = to_int(key, value);
    else if (key == "mean_shift") cfg.mean_shift = to_bool(key, value);
    else if (key == "batch_size") cfg.batch_size = to_int(key, value);
    else if (key == "lr_patch") cfg.lr_patch = to_int(key, value);
    else if (key == "lr0") cfg.lr0 = to_double(key, value);
    else if (key == "halve_every") cfg.halve_every = to_ll(key, value);
    else if (key == "max_steps") cfg.max_steps = to_ll(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_ll(key, value));
    else if (key == "checkpoint_every") cfg.checkpoint_every = to_ll(key, value);
    else if (key == "kind") { kind_from_name(value); cfg.kind = value; }
    else if (key == "sigma") cfg.sigma = to_double(key, value);
    else if (key == "blur_variance") cfg.blur_variance = to_double(key, value);
    else if (key == "hr_dir") cfg.hr_dir = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "manifest") cfg.manifest = value;
    else if (key == "checkpoint") cfg.checkpoint = value;
    else if (key == "sr_dir") cfg.sr_dir = value;
    else if (key == "input") cfg.input = value;
    else if (key == "resume") cfg.resume = value;
    else if (key == "self_ensemble") cfg.self_ensemble = to_bool(key, value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

CliConfig parse_config_text(const std::string& text, CliConfig base) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + line + "'");
        apply_config_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

CliConfig load_config_file(const std::filesystem::path& path, CliConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), base);
}

std::string emit_config(const CliConfig& cfg) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "preset = " << cfg.preset << "\n"
        << "scale = " << cfg.scale << "\n"
        << "channels = " << cfg.channels << "\n"
        << "n_blocks = " << cfg.n_blocks << "\n"
        << "drlms_per_block = " << cfg.drlms_per_block << "\n"
        << "rbs_per_drlm = " << cfg.rbs_per_drlm << "\n"
        << "reduction = " << cfg.reduction << "\n"
        << "input_channels = " << cfg.input_channels << "\n"
        << "mean_shift = " << (cfg.mean_shift ? 1 : 0) << "\n"
        << "batch_size = " << cfg.batch_size << "\n"
        << "lr_patch = " << cfg.lr_patch << "\n"
        << "lr0 = " << num(cfg.lr0) << "\n"
        << "halve_every = " << cfg.halve_every << "\n"
        << "max_steps = " << cfg.max_steps << "\n"
        << "seed = " << cfg.seed << "\n"
        << "checkpoint_every = " << cfg.checkpoint_every << "\n"
        << "kind = " << cfg.kind << "\n"
        << "sigma = " << num(cfg.sigma) << "\n"
        << "blur_variance = " << num(cfg.blur_variance) << "\n"
        << "hr_dir = " << cfg.hr_dir << "\n"
        << "out_dir = " << cfg.out_dir << "\n"
        << "manifest = " << cfg.manifest << "\n"
        << "checkpoint = " << cfg.checkpoint << "\n"
        << "sr_dir = " << cfg.sr_dir << "\n"
        << "input = " << cfg.input << "\n"
        << "resume = " << cfg.resume << "\n"
        << "self_ensemble = " << (cfg.self_ensemble ? 1 : 0) << "\n";
    return out.str();
}

}  // namespace drln
