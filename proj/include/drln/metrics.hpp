#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "drln/degrade.hpp"
#include "drln/image.hpp"

namespace drln {

/// ITU-R BT.601 luminance: Y = (65.481 R + 128.553 G + 24.966 B + 16)/255.
/// Maps [0,1]^3 into [16/255, 235/255].
Image rgb_to_y(const Image& img);

/// PSNR in dB on [0,1] data after cropping `shave` pixels from each border.
/// Identical crops give +infinity.
double psnr(const Image& a, const Image& b, int shave);

/// Mean local SSIM over 11x11 Gaussian windows (sigma 1.5, K1=0.01, K2=0.03,
/// dynamic range 1), valid windows only. Inputs are single-channel.
double ssim(const Image& a, const Image& b);

struct EvalRow {
    std::string name;
    double psnr_db = 0.0;
    double ssim = 0.0;
    bool ok = false;
    std::string error;
};

struct EvalReport {
    std::vector<EvalRow> rows;  // sorted by name
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    int scale = 0;
    int shave = 0;
    std::string channel_mode;  // "y-8bit" for the table protocol
    bool all_ok = true;
};

/// Table-style protocol: 8-bit quantized images, luminance channel, border
/// shave of `scale` pixels. SR files are looked up in sr_dir by the LR file
/// name. Missing or broken rows are marked failed and excluded from means.
EvalReport evaluate(const Manifest& manifest, const std::filesystem::path& sr_dir, int scale);

std::string format_report(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace drln
