#include "drln/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace drln {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace {

constexpr char kMagic[8] = {'D', 'R', 'L', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::uint8_t kDtypeF64 = 1;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_float(float v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string encode_config(const Checkpoint& ckpt) {
    const NetworkConfig& n = ckpt.net_cfg;
    const TrainConfig& t = ckpt.train_cfg;
    std::ostringstream out;
    out << "preset = " << n.preset << "\n"
        << "scale = " << n.scale << "\n"
        << "channels = " << n.channels << "\n"
        << "n_blocks = " << n.n_blocks << "\n"
        << "drlms_per_block = " << n.drlms_per_block << "\n"
        << "rbs_per_drlm = " << n.rbs_per_drlm << "\n"
        << "reduction = " << n.reduction << "\n"
        << "input_channels = " << n.input_channels << "\n"
        << "mean_shift = " << (n.mean_shift ? 1 : 0) << "\n"
        << "rgb_mean = " << fmt_float(n.rgb_mean[0]) << "," << fmt_float(n.rgb_mean[1]) << ","
        << fmt_float(n.rgb_mean[2]) << "\n"
        << "batch_size = " << t.batch_size << "\n"
        << "lr_patch = " << t.lr_patch << "\n"
        << "lr0 = " << fmt_double(t.lr0) << "\n"
        << "halve_every = " << t.halve_every << "\n"
        << "beta1 = " << fmt_double(t.beta1) << "\n"
        << "beta2 = " << fmt_double(t.beta2) << "\n"
        << "eps = " << fmt_double(t.eps) << "\n"
        << "max_steps = " << t.max_steps << "\n"
        << "seed = " << t.seed << "\n"
        << "checkpoint_every = " << t.checkpoint_every << "\n"
        << "step = " << ckpt.step << "\n"
        << "rng_state = " << ckpt.rng_state << "\n";
    return out.str();
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad config line: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void decode_config(const std::string& text, Checkpoint& ckpt) {
    auto kv = parse_kv(text);
    auto get = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error(std::string("checkpoint config missing ") + key);
        return it->second;
    };
    NetworkConfig& n = ckpt.net_cfg;
    TrainConfig& t = ckpt.train_cfg;
    n.preset = get("preset");
    n.scale = std::stoi(get("scale"));
    n.channels = std::stoi(get("channels"));
    n.n_blocks = std::stoi(get("n_blocks"));
    n.drlms_per_block = std::stoi(get("drlms_per_block"));
    n.rbs_per_drlm = std::stoi(get("rbs_per_drlm"));
    n.reduction = std::stoi(get("reduction"));
    n.input_channels = std::stoi(get("input_channels"));
    n.mean_shift = get("mean_shift") == "1";
    {
        std::istringstream ss(get("rgb_mean"));
        std::string part;
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ss, part, ',')) throw std::runtime_error("bad rgb_mean");
            n.rgb_mean[i] = std::stof(part);
        }
    }
    t.batch_size = std::stoi(get("batch_size"));
    t.lr_patch = std::stoi(get("lr_patch"));
    t.lr0 = std::stod(get("lr0"));
    t.halve_every = std::stoll(get("halve_every"));
    t.beta1 = std::stod(get("beta1"));
    t.beta2 = std::stod(get("beta2"));
    t.eps = std::stod(get("eps"));
    t.max_steps = std::stoll(get("max_steps"));
    t.seed = std::stoull(get("seed"));
    t.checkpoint_every = std::stoll(get("checkpoint_every"));
    ckpt.step = std::stoll(get("step"));
    ckpt.rng_state = std::stoull(get("rng_state"));
}

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated checkpoint");
    return v;
}

}  // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());

    out.write(kMagic, sizeof kMagic);
    write_raw(out, kVersion);

    const std::string config = encode_config(ckpt);
    write_raw(out, static_cast<std::uint32_t>(config.size()));
    out.write(config.data(), static_cast<std::streamsize>(config.size()));

    for (const auto& [name, tensor] : ckpt.tensors) {
        write_raw(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_raw(out, kDtypeF32);
        const Shape& s = tensor.shape();
        for (int dim : {s.n, s.c, s.h, s.w}) write_raw(out, static_cast<std::uint32_t>(dim));
        out.write(reinterpret_cast<const char*>(tensor.data()),
                  static_cast<std::streamsize>(tensor.numel() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());

    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error(path.string() + ": not a DRLN checkpoint");
    Checkpoint ckpt;
    ckpt.version = read_raw<std::uint16_t>(in);
    if (ckpt.version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(ckpt.version));

    const auto config_len = read_raw<std::uint32_t>(in);
    std::string config(config_len, '\0');
    in.read(config.data(), config_len);
    if (!in) throw std::runtime_error("truncated checkpoint config");
    decode_config(config, ckpt);

    while (true) {
        std::uint32_t name_len;
        in.read(reinterpret_cast<char*>(&name_len), sizeof name_len);
        if (in.eof()) break;
        if (!in) throw std::runtime_error("truncated checkpoint entry");
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto dtype = read_raw<std::uint8_t>(in);
        Shape s;
        s.n = static_cast<int>(read_raw<std::uint32_t>(in));
        s.c = static_cast<int>(read_raw<std::uint32_t>(in));
        s.h = static_cast<int>(read_raw<std::uint32_t>(in));
        s.w = static_cast<int>(read_raw<std::uint32_t>(in));

        std::vector<float> data(s.numel());
        if (dtype == kDtypeF32) {
            in.read(reinterpret_cast<char*>(data.data()),
                    static_cast<std::streamsize>(data.size() * sizeof(float)));
        } else if (dtype == kDtypeF64) {
            std::vector<double> wide(s.numel());
            in.read(reinterpret_cast<char*>(wide.data()),
                    static_cast<std::streamsize>(wide.size() * sizeof(double)));
            for (std::size_t i = 0; i < wide.size(); ++i) data[i] = static_cast<float>(wide[i]);
        } else {
            throw std::runtime_error("unknown tensor dtype tag " + std::to_string(dtype));
        }
        if (!in) throw std::runtime_error("truncated tensor payload for " + name);
        ckpt.tensors.emplace_back(std::move(name),
                                  Tensor<float>::from_data(s, std::move(data)));
    }
    return ckpt;
}

Checkpoint checkpoint_from_trainer(TrainerState& state) {
    Checkpoint ckpt;
    ckpt.net_cfg = state.net.cfg;
    ckpt.train_cfg = state.cfg;
    ckpt.step = state.step;
    ckpt.rng_state = state.cfg.seed;

    auto params = state.net.named_params();
    for (auto& [name, t] : params) ckpt.tensors.emplace_back(name, t);
    for (std::size_t i = 0; i < params.size(); ++i)
        ckpt.tensors.emplace_back("adam.m." + params[i].first, state.adam_m[i]);
    for (std::size_t i = 0; i < params.size(); ++i)
        ckpt.tensors.emplace_back("adam.v." + params[i].first, state.adam_v[i]);
    return ckpt;
}

namespace {

void load_named_into(Network<float>& net, const Checkpoint& ckpt,
                     std::vector<Tensor<float>>* adam_m, std::vector<Tensor<float>>* adam_v) {
    std::map<std::string, const Tensor<float>*> index;
    for (const auto& [name, t] : ckpt.tensors) index[name] = &t;

    auto fetch = [&](const std::string& name) -> const Tensor<float>& {
        auto it = index.find(name);
        if (it == index.end()) throw std::runtime_error("checkpoint missing tensor " + name);
        return *it->second;
    };
    auto copy_into = [](Tensor<float>& dst, const Tensor<float>& src, const std::string& name) {
        if (!(dst.shape() == src.shape()))
            throw std::runtime_error("checkpoint tensor " + name + " has shape " +
                                     src.shape().str() + ", expected " + dst.shape().str());
        std::copy(src.data(), src.data() + src.numel(), dst.mutable_data());
    };

    auto params = net.named_params();
    for (auto& [name, t] : params) copy_into(t, fetch(name), name);
    if (adam_m) {
        adam_m->clear();
        adam_v->clear();
        for (auto& [name, t] : params) {
            Tensor<float> m = Tensor<float>::zeros(t.shape());
            Tensor<float> v = Tensor<float>::zeros(t.shape());
            copy_into(m, fetch("adam.m." + name), "adam.m." + name);
            copy_into(v, fetch("adam.v." + name), "adam.v." + name);
            adam_m->push_back(std::move(m));
            adam_v->push_back(std::move(v));
        }
    }
}

}  // namespace

TrainerState trainer_from_checkpoint(const Checkpoint& ckpt) {
    TrainerState state;
    state.net = build_network<float>(ckpt.net_cfg, 0);
    state.cfg = ckpt.train_cfg;
    state.step = ckpt.step;
    load_named_into(state.net, ckpt, &state.adam_m, &state.adam_v);
    return state;
}

Network<float> network_from_checkpoint(const Checkpoint& ckpt) {
    Network<float> net = build_network<float>(ckpt.net_cfg, 0);
    load_named_into(net, ckpt, nullptr, nullptr);
    return net;
}

}  // namespace drln
