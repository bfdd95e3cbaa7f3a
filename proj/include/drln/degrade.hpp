#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drln/image.hpp"

namespace drln {

enum class DegradationKind { BI, BD, ND };

std::string kind_name(DegradationKind kind);
DegradationKind kind_from_name(const std::string& name);

/// Degradation protocol: bicubic (BI), Gaussian blur then bicubic (BD, paper
/// protocol is x3 with variance 1.6), or bicubic plus Gaussian noise (ND,
/// sigma in [0,255] units).
struct DegradationSpec {
    DegradationKind kind = DegradationKind::BI;
    int scale = 2;
    double sigma_noise = 0.0;
    double blur_variance = 1.6;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Separable cubic resampling (a = -0.5), antialiased on downscale by
/// widening the kernel support, replicate boundaries, normalized weights.
Image bicubic_resize(const Image& img, int out_w, int out_h);

Image bicubic_downscale(const Image& img, int scale);
Image bicubic_upscale(const Image& img, int scale);

/// Per-axis resampling weights, exposed for oracle tests: for output index i,
/// contributions (index, weight) over the input axis.
struct ResampleTap {
    std::vector<int> indices;
    std::vector<double> weights;
};
ResampleTap resample_taps(int in_extent, int out_extent, int i);

/// Normalized Gaussian blur with replicate edges; kernel radius is
/// ceil(3*sigma) with sigma = sqrt(variance).
Image gaussian_blur(const Image& img, double variance);

/// gaussian_blur followed by bicubic downscale (paper protocol: x3, 1.6).
Image blur_downsample(const Image& img, int scale, double variance = 1.6);

/// The normalized 1-D blur kernel used by blur_downsample.
std::vector<double> gaussian_kernel_1d(double variance);

/// Bicubic downscale then i.i.d. Gaussian noise of std sigma/255, clamped to
/// [0,1]. Deterministic for a given seed.
Image noisy_downsample(const Image& img, int scale, double sigma, std::uint64_t seed);

Image degrade(const Image& hr, const DegradationSpec& spec);

struct ManifestRow {
    std::string hr_path;
    std::string lr_path;
    DegradationKind kind = DegradationKind::BI;
    int scale = 2;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

struct Manifest {
    std::vector<ManifestRow> rows;
    std::vector<std::string> skipped;  // unreadable inputs, recorded as comments
};

/// Ingests every .png under hr_dir (sorted by name), modulo-crops to the
/// scale, writes cropped HR and degraded LR images under out_dir plus a
/// manifest.tsv. Unreadable files are skipped with a warning.
Manifest make_pairs(const std::filesystem::path& hr_dir, const DegradationSpec& spec,
                    const std::filesystem::path& out_dir);

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace drln
