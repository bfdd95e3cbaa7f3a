#include "drln/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "drln/parallel.hpp"
#include "drln/rng.hpp"

namespace drln {

namespace fs = std::filesystem;

std::string kind_name(DegradationKind kind) {
    switch (kind) {
        case DegradationKind::BI: return "bi";
        case DegradationKind::BD: return "bd";
        case DegradationKind::ND: return "nd";
    }
    throw std::logic_error("bad kind");
}

DegradationKind kind_from_name(const std::string& name) {
    if (name == "bi") return DegradationKind::BI;
    if (name == "bd") return DegradationKind::BD;
    if (name == "nd") return DegradationKind::ND;
    throw std::invalid_argument("unknown degradation kind '" + name + "'");
}

void DegradationSpec::validate() const {
    if (scale != 2 && scale != 3 && scale != 4 && scale != 8)
        throw std::invalid_argument("degradation scale must be one of {2,3,4,8}");
    if (sigma_noise < 0.0 || sigma_noise > 255.0)
        throw std::invalid_argument("sigma must be in [0,255]");
    if (blur_variance <= 0.0) throw std::invalid_argument("blur variance must be positive");
    if (kind == DegradationKind::BD && scale != 3)
        std::fprintf(stderr, "warning: BD protocol is defined for scale 3, got %d\n", scale);
}

// ---------------------------------------------------------------------------
// bicubic resampling

namespace {

// Keys' cubic with a = -0.5.
double cubic_kernel(double x) {
    const double ax = std::abs(x);
    if (ax <= 1.0) return (1.5 * ax - 2.5) * ax * ax + 1.0;
    if (ax < 2.0) return ((-0.5 * ax + 2.5) * ax - 4.0) * ax + 2.0;
    return 0.0;
}

}  // namespace

ResampleTap resample_taps(int in_extent, int out_extent, int i) {
    const double scale = static_cast<double>(out_extent) / in_extent;
    const double u = (i + 0.5) / scale - 0.5;
    // Antialiasing: on downscale the kernel is stretched by 1/scale.
    const double kscale = scale < 1.0 ? scale : 1.0;
    const double support = 2.0 / kscale;
    const int left = static_cast<int>(std::floor(u - support));
    const int taps = static_cast<int>(std::ceil(2.0 * support)) + 2;

    ResampleTap tap;
    tap.indices.reserve(taps);
    tap.weights.reserve(taps);
    double total = 0.0;
    for (int t = 0; t < taps; ++t) {
        const int j = left + t;
        const double w = kscale * cubic_kernel(kscale * (u - j));
        tap.indices.push_back(std::clamp(j, 0, in_extent - 1));
        tap.weights.push_back(w);
        total += w;
    }
    for (auto& w : tap.weights) w /= total;
    return tap;
}

namespace {

Image resample_axis_x(const Image& img, int out_w) {
    Image out = Image::create(out_w, img.height, img.channels);
    std::vector<ResampleTap> taps(out_w);
    for (int i = 0; i < out_w; ++i) taps[i] = resample_taps(img.width, out_w, i);
    parallel_for(img.height, [&](std::int64_t y0, std::int64_t y1) {
        for (int y = static_cast<int>(y0); y < y1; ++y)
            for (int x = 0; x < out_w; ++x) {
                const ResampleTap& tap = taps[x];
                for (int c = 0; c < img.channels; ++c) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < tap.indices.size(); ++t)
                        acc += tap.weights[t] * img.at(y, tap.indices[t], c);
                    out.at(y, x, c) = static_cast<float>(acc);
                }
            }
    });
    return out;
}

Image resample_axis_y(const Image& img, int out_h) {
    Image out = Image::create(img.width, out_h, img.channels);
    std::vector<ResampleTap> taps(out_h);
    for (int i = 0; i < out_h; ++i) taps[i] = resample_taps(img.height, out_h, i);
    parallel_for(out_h, [&](std::int64_t y0, std::int64_t y1) {
        for (int y = static_cast<int>(y0); y < y1; ++y) {
            const ResampleTap& tap = taps[y];
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < tap.indices.size(); ++t)
                        acc += tap.weights[t] * img.at(tap.indices[t], x, c);
                    out.at(y, x, c) = static_cast<float>(acc);
                }
        }
    });
    return out;
}

}  // namespace

Image bicubic_resize(const Image& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("bicubic_resize: degenerate output size");
    Image out = img;
    if (out_h != img.height) out = resample_axis_y(out, out_h);
    if (out_w != img.width) out = resample_axis_x(out, out_w);
    return out;
}

Image bicubic_downscale(const Image& img, int scale) {
    return bicubic_resize(img, img.width / scale, img.height / scale);
}

Image bicubic_upscale(const Image& img, int scale) {
    return bicubic_resize(img, img.width * scale, img.height * scale);
}

// ---------------------------------------------------------------------------
// blur / noise protocols

std::vector<double> gaussian_kernel_1d(double variance) {
    const double sigma = std::sqrt(variance);
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * variance));
        total += k[i + radius];
    }
    for (auto& v : k) v /= total;
    return k;
}

Image gaussian_blur(const Image& img, double variance) {
    const std::vector<double> k = gaussian_kernel_1d(variance);
    const int radius = static_cast<int>(k.size() / 2);

    Image tmp = Image::create(img.width, img.height, img.channels);
    parallel_for(img.height, [&](std::int64_t y0, std::int64_t y1) {
        for (int y = static_cast<int>(y0); y < y1; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c) {
                    double acc = 0.0;
                    for (int t = -radius; t <= radius; ++t) {
                        const int xx = std::clamp(x + t, 0, img.width - 1);
                        acc += k[t + radius] * img.at(y, xx, c);
                    }
                    tmp.at(y, x, c) = static_cast<float>(acc);
                }
    });
    Image out = Image::create(img.width, img.height, img.channels);
    parallel_for(img.height, [&](std::int64_t y0, std::int64_t y1) {
        for (int y = static_cast<int>(y0); y < y1; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c) {
                    double acc = 0.0;
                    for (int t = -radius; t <= radius; ++t) {
                        const int yy = std::clamp(y + t, 0, img.height - 1);
                        acc += k[t + radius] * tmp.at(yy, x, c);
                    }
                    out.at(y, x, c) = static_cast<float>(acc);
                }
    });
    return out;
}

Image blur_downsample(const Image& img, int scale, double variance) {
    return bicubic_downscale(gaussian_blur(img, variance), scale);
}

Image noisy_downsample(const Image& img, int scale, double sigma, std::uint64_t seed) {
    Image out = bicubic_downscale(img, scale);
    if (sigma > 0.0) {
        Rng rng(seed);
        const double s = sigma / 255.0;
        for (auto& v : out.data) {
            const double noisy = v + s * rng.normal();
            v = static_cast<float>(std::clamp(noisy, 0.0, 1.0));
        }
    }
    return out;
}

Image degrade(const Image& hr, const DegradationSpec& spec) {
    switch (spec.kind) {
        case DegradationKind::BI: return bicubic_downscale(hr, spec.scale);
        case DegradationKind::BD: return blur_downsample(hr, spec.scale, spec.blur_variance);
        case DegradationKind::ND:
            return noisy_downsample(hr, spec.scale, spec.sigma_noise, spec.rng_seed);
    }
    throw std::logic_error("bad kind");
}

// ---------------------------------------------------------------------------
// dataset ingestion

Manifest make_pairs(const fs::path& hr_dir, const DegradationSpec& spec,
                    const fs::path& out_dir) {
    spec.validate();
    if (!fs::is_directory(hr_dir))
        throw std::runtime_error("HR directory does not exist: " + hr_dir.string());

    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(hr_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());

    fs::create_directories(out_dir / "HR");
    fs::create_directories(out_dir / "LR");

    Manifest manifest;
    for (const auto& input : inputs) {
        Image hr;
        try {
            hr = read_png(input);
            if (hr.width < spec.scale || hr.height < spec.scale)
                throw std::runtime_error("smaller than scale factor");
        } catch (const std::exception& e) {
            std::fprintf(stderr, "warning: skipping %s: %s\n", input.string().c_str(), e.what());
            manifest.skipped.push_back(input.filename().string() + ": " + e.what());
            continue;
        }
        hr = modulo_crop(hr, spec.scale);
        const Image lr = degrade(hr, spec);

        const fs::path hr_out = out_dir / "HR" / input.filename();
        const fs::path lr_out = out_dir / "LR" / input.filename();
        write_png(hr_out, hr);
        write_png(lr_out, lr);

        ManifestRow row;
        row.hr_path = hr_out.string();
        row.lr_path = lr_out.string();
        row.kind = spec.kind;
        row.scale = spec.scale;
        row.sigma = spec.kind == DegradationKind::ND ? spec.sigma_noise : 0.0;
        row.seed = spec.kind == DegradationKind::ND ? spec.rng_seed : 0;
        manifest.rows.push_back(std::move(row));
    }

    write_manifest(out_dir / "manifest.tsv", manifest);
    return manifest;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& note : manifest.skipped) out << "# skipped " << note << "\n";
    for (const auto& row : manifest.rows) {
        char sigma[32];
        std::snprintf(sigma, sizeof sigma, "%.9g", row.sigma);
        out << row.hr_path << '\t' << row.lr_path << '\t' << kind_name(row.kind) << '\t'
            << row.scale << '\t' << sigma << '\t' << row.seed << '\n';
    }
}

Manifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest " + path.string());
    Manifest manifest;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        ManifestRow row;
        std::string kind;
        if (!(std::getline(ss, row.hr_path, '\t') && std::getline(ss, row.lr_path, '\t') &&
              std::getline(ss, kind, '\t') && (ss >> row.scale >> row.sigma >> row.seed)))
            throw std::runtime_error("malformed manifest row: " + line);
        row.kind = kind_from_name(kind);
        manifest.rows.push_back(std::move(row));
    }
    return manifest;
}

}  // namespace drln
