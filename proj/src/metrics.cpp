#include "drln/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace drln {

namespace fs = std::filesystem;

Image rgb_to_y(const Image& img) {
    if (img.channels != 3) throw std::invalid_argument("rgb_to_y: expected 3-channel input");
    Image y = Image::create(img.width, img.height, 1);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) {
            const double v = 65.481 * img.at(r, c, 0) + 128.553 * img.at(r, c, 1) +
                             24.966 * img.at(r, c, 2) + 16.0;
            y.at(r, c, 0) = static_cast<float>(v / 255.0);
        }
    return y;
}

double psnr(const Image& a, const Image& b, int shave) {
    if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
    if (shave < 0 || 2 * shave >= std::min(a.width, a.height))
        throw std::invalid_argument("psnr: shave too large for image");
    double se = 0.0;
    std::size_t count = 0;
    for (int y = shave; y < a.height - shave; ++y)
        for (int x = shave; x < a.width - shave; ++x)
            for (int c = 0; c < a.channels; ++c) {
                const double d = static_cast<double>(a.at(y, x, c)) - b.at(y, x, c);
                se += d * d;
                ++count;
            }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(static_cast<double>(count) / se);
}

// ---------------------------------------------------------------------------
// SSIM

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& ssim_window_1d() {
    static const std::vector<double> w = [] {
        std::vector<double> k(kWindow);
        double total = 0.0;
        for (int i = 0; i < kWindow; ++i) {
            const double d = i - (kWindow - 1) / 2.0;
            k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            total += k[i];
        }
        for (auto& v : k) v /= total;
        return k;
    }();
    return w;
}

// Separable Gaussian filter, valid region only: (H-10) x (W-10).
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h, int& out_w,
                                 int& out_h) {
    const auto& k = ssim_window_1d();
    out_w = w - kWindow + 1;
    out_h = h - kWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(out_w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int t = 0; t < kWindow; ++t) acc += k[t] * img[static_cast<std::size_t>(y) * w + x + t];
            rows[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int t = 0; t < kWindow; ++t)
                acc += k[t] * rows[static_cast<std::size_t>(y + t) * out_w + x];
            out[static_cast<std::size_t>(y) * out_w + x] = acc;
        }
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (a.channels != 1 || b.channels != 1)
        throw std::invalid_argument("ssim: single-channel inputs required");
    if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
    if (a.width < kWindow || a.height < kWindow)
        throw std::invalid_argument("ssim: image smaller than 11x11 window");

    const std::size_t n = a.pixel_count();
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = a.data[i];
        y[i] = b.data[i];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }

    int vw = 0, vh = 0;
    const auto mu_x = filter_valid(x, a.width, a.height, vw, vh);
    const auto mu_y = filter_valid(y, a.width, a.height, vw, vh);
    const auto s_xx = filter_valid(xx, a.width, a.height, vw, vh);
    const auto s_yy = filter_valid(yy, a.width, a.height, vw, vh);
    const auto s_xy = filter_valid(xy, a.width, a.height, vw, vh);

    double total = 0.0;
    const std::size_t count = static_cast<std::size_t>(vw) * vh;
    for (std::size_t i = 0; i < count; ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double var_x = s_xx[i] - mx * mx;
        const double var_y = s_yy[i] - my * my;
        const double cov = s_xy[i] - mx * my;
        total += ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) /
                 ((mx * mx + my * my + kC1) * (var_x + var_y + kC2));
    }
    return total / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// evaluation protocol

EvalReport evaluate(const Manifest& manifest, const fs::path& sr_dir, int scale) {
    EvalReport report;
    report.scale = scale;
    report.shave = scale;
    report.channel_mode = "y-8bit";

    for (const auto& row : manifest.rows) {
        EvalRow out;
        out.name = fs::path(row.lr_path).filename().string();
        const fs::path sr_path = sr_dir / out.name;
        try {
            Image hr = quantize8(read_png(row.hr_path));
            Image sr = quantize8(read_png(sr_path));
            if (!sr.same_shape(hr))
                throw std::runtime_error("SR shape " + std::to_string(sr.width) + "x" +
                                         std::to_string(sr.height) + " != HR " +
                                         std::to_string(hr.width) + "x" + std::to_string(hr.height));
            const Image hy = hr.channels == 3 ? rgb_to_y(hr) : hr;
            const Image sy = sr.channels == 3 ? rgb_to_y(sr) : sr;
            out.psnr_db = psnr(hy, sy, scale);

            // SSIM on the same shaved region as PSNR.
            Image hs = Image::create(hy.width - 2 * scale, hy.height - 2 * scale, 1);
            Image ss = Image::create(hs.width, hs.height, 1);
            for (int y = 0; y < hs.height; ++y)
                for (int x = 0; x < hs.width; ++x) {
                    hs.at(y, x, 0) = hy.at(y + scale, x + scale, 0);
                    ss.at(y, x, 0) = sy.at(y + scale, x + scale, 0);
                }
            out.ssim = ssim(hs, ss);
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
            report.all_ok = false;
        }
        report.rows.push_back(std::move(out));
    }

    std::sort(report.rows.begin(), report.rows.end(),
              [](const EvalRow& a, const EvalRow& b) { return a.name < b.name; });

    // Infinite PSNR rows (identical images) enter the mean only when every
    // row is infinite.
    double psnr_total = 0.0, ssim_total = 0.0;
    std::size_t ok_count = 0, finite_count = 0;
    for (const auto& row : report.rows) {
        if (!row.ok) continue;
        ++ok_count;
        ssim_total += row.ssim;
        if (std::isfinite(row.psnr_db)) {
            psnr_total += row.psnr_db;
            ++finite_count;
        }
    }
    if (ok_count > 0) {
        report.mean_ssim = ssim_total / static_cast<double>(ok_count);
        report.mean_psnr = finite_count > 0
                               ? psnr_total / static_cast<double>(finite_count)
                               : std::numeric_limits<double>::infinity();
    }
    return report;
}

namespace {

std::string format_psnr(double v) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    std::size_t name_width = 4;
    for (const auto& row : report.rows) name_width = std::max(name_width, row.name.size());

    out << "protocol: scale x" << report.scale << ", shave " << report.shave << ", channel "
        << report.channel_mode << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %10s  %8s\n", static_cast<int>(name_width), "name",
                  "psnr_db", "ssim");
    out << line;
    for (const auto& row : report.rows) {
        if (row.ok)
            std::snprintf(line, sizeof line, "%-*s  %10s  %8.4f\n",
                          static_cast<int>(name_width), row.name.c_str(),
                          format_psnr(row.psnr_db).c_str(), row.ssim);
        else
            std::snprintf(line, sizeof line, "%-*s  FAILED: %s\n", static_cast<int>(name_width),
                          row.name.c_str(), row.error.c_str());
        out << line;
    }
    std::snprintf(line, sizeof line, "%-*s  %10s  %8.4f\n", static_cast<int>(name_width), "mean",
                  format_psnr(report.mean_psnr).c_str(), report.mean_ssim);
    out << line;
    return out.str();
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "name,psnr_db,ssim\n";
    char line[256];
    for (const auto& row : report.rows) {
        if (!row.ok) continue;
        std::snprintf(line, sizeof line, "%s,%s,%.6f\n", row.name.c_str(),
                      format_psnr(row.psnr_db).c_str(), row.ssim);
        out << line;
    }
    return out.str();
}

}  // namespace drln
