#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "drln/degrade.hpp"
#include "drln/metrics.hpp"
#include "helpers.hpp"

using namespace drln;
using namespace drln::testing;

namespace {

// Same Keys' cubic the resizer documents, written independently.
double cubic_ref(double x) {
    const double a = -0.5;
    const double ax = std::abs(x);
    if (ax <= 1.0) return (a + 2.0) * ax * ax * ax - (a + 3.0) * ax * ax + 1.0;
    if (ax < 2.0) return a * (ax * ax * ax - 5.0 * ax * ax + 8.0 * ax - 4.0);
    return 0.0;
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("bicubic resize preserves constants (kernel partition of unity)") {
    Image img = Image::create(31, 17, 3, 0.4375f);
    for (auto [w, h] : {std::pair{15, 8}, {62, 34}, {11, 29}}) {
        Image out = bicubic_resize(img, w, h);
        for (float v : out.data) CHECK(std::abs(v - 0.4375) < 1e-9);
    }
}

TEST_CASE("bicubic resize at factor 1 is the identity") {
    Image img = make_texture(1, 23, 19);
    Image out = bicubic_resize(img, 23, 19);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(static_cast<double>(out.data[i]) - img.data[i]) < 1e-12);
}

TEST_CASE("1-D ramp downscaled x2 matches direct kernel-sum evaluation") {
    const int n = 24;
    Image ramp = Image::create(n, 1, 1);
    for (int x = 0; x < n; ++x) ramp.at(0, x, 0) = static_cast<float>(x) / (n - 1);

    Image down = bicubic_resize(ramp, n / 2, 1);

    for (int i = 0; i < n / 2; ++i) {
        // Direct evaluation: antialiased kernel k(x) = s*cubic(s*x), s = 1/2,
        // support 4/s, replicate edges, weights normalized.
        const double s = 0.5;
        const double u = (i + 0.5) / s - 0.5;
        const double support = 2.0 / s;
        const int left = static_cast<int>(std::floor(u - support));
        double acc = 0.0, total = 0.0;
        for (int t = 0; t < static_cast<int>(std::ceil(2 * support)) + 2; ++t) {
            const int j = left + t;
            const double w = s * cubic_ref(s * (u - j));
            const int jc = std::clamp(j, 0, n - 1);
            acc += w * ramp.at(0, jc, 0);
            total += w;
        }
        CHECK(down.at(0, i, 0) == doctest::Approx(acc / total).epsilon(1e-6));
    }
}

TEST_CASE("gaussian kernel is normalized and matches the closed form") {
    const auto k = gaussian_kernel_1d(1.6);
    CHECK(k.size() == 9);  // radius ceil(3*sqrt(1.6)) = 4
    double total = 0.0;
    for (double v : k) total += v;
    CHECK(std::abs(total - 1.0) < 1e-12);

    // Ratios equal the closed-form Gaussian at integer offsets.
    for (int i = -4; i <= 4; ++i) {
        const double expected = std::exp(-i * i / (2.0 * 1.6));
        CHECK(k[i + 4] / k[4] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("blur_downsample keeps constants; impulse response matches the closed form") {
    Image img = Image::create(30, 30, 1, 0.625f);
    Image out = blur_downsample(img, 3);
    CHECK(out.width == 10);
    for (float v : out.data) CHECK(std::abs(v - 0.625) < 1e-9);

    // An impulse through the blur reproduces the normalized 2-D Gaussian:
    // value at offset (dy,dx) relative to center = exp(-(dy^2+dx^2)/(2*1.6)).
    Image impulse = Image::create(33, 33, 1, 0.0f);
    impulse.at(16, 16, 0) = 1.0f;
    Image blurred = gaussian_blur(impulse, 1.6);
    const double center = blurred.at(16, 16, 0);
    CHECK(center > 0.0);
    for (int dy = -4; dy <= 4; ++dy)
        for (int dx = -4; dx <= 4; ++dx) {
            const double expected = std::exp(-(dy * dy + dx * dx) / (2.0 * 1.6));
            CHECK(blurred.at(16 + dy, 16 + dx, 0) / center ==
                  doctest::Approx(expected).epsilon(1e-5));
        }
}

TEST_CASE("noisy_downsample: sigma 0 equals bicubic exactly, seeds reproduce") {
    Image img = make_texture(3, 64, 48);
    Image clean = bicubic_downscale(img, 2);
    Image nd0 = noisy_downsample(img, 2, 0.0, 7);
    REQUIRE(nd0.data.size() == clean.data.size());
    for (std::size_t i = 0; i < clean.data.size(); ++i) CHECK(nd0.data[i] == clean.data[i]);

    Image a = noisy_downsample(img, 2, 25.0, 7);
    Image b = noisy_downsample(img, 2, 25.0, 7);
    for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
    Image c = noisy_downsample(img, 2, 25.0, 8);
    CHECK(max_abs_diff(image_to_tensor(a), image_to_tensor(c)) > 0.0);
}

TEST_CASE("noisy_downsample: empirical noise std within 2% of sigma/255") {
    // Mid-gray 1024x1024 HR -> 512x512 LR; clamping never triggers.
    Image img = Image::create(1024, 1024, 1, 0.5f);
    Image clean = bicubic_downscale(img, 2);
    Image noisy = noisy_downsample(img, 2, 25.0, 99);

    double mean = 0.0;
    for (std::size_t i = 0; i < clean.data.size(); ++i)
        mean += noisy.data[i] - clean.data[i];
    mean /= static_cast<double>(clean.data.size());
    double var = 0.0;
    for (std::size_t i = 0; i < clean.data.size(); ++i) {
        const double d = noisy.data[i] - clean.data[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(clean.data.size());

    const double target = 25.0 / 255.0;
    CHECK(std::sqrt(var) == doctest::Approx(target).epsilon(0.02));
}

TEST_CASE("ND PSNR decreases monotonically in sigma") {
    Image hr = make_texture(11, 96, 96);
    Image clean = bicubic_downscale(hr, 2);
    Image clean_q = quantize8(clean);

    double prev = std::numeric_limits<double>::infinity();
    for (double sigma : {10.0, 15.0, 20.0, 25.0}) {
        Image noisy = quantize8(noisy_downsample(hr, 2, sigma, 5));
        const double p = psnr(rgb_to_y(clean_q), rgb_to_y(noisy), 0);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("downscale-upscale beats nearest-neighbor on smooth content") {
    Image hr = make_texture(21, 64, 64);
    Image lr = bicubic_downscale(hr, 2);
    Image up_cubic = bicubic_upscale(lr, 2);
    Image up_nearest = nearest_upscale(lr, 2);
    const double p_cubic = psnr(rgb_to_y(quantize8(up_cubic)), rgb_to_y(quantize8(hr)), 2);
    const double p_nearest = psnr(rgb_to_y(quantize8(up_nearest)), rgb_to_y(quantize8(hr)), 2);
    CHECK(p_cubic > p_nearest);
}

TEST_CASE("make_pairs writes cropped pairs, manifest, and is deterministic") {
    TempDir tmp("pairs");
    const auto hr_dir = tmp.path / "hr";
    std::filesystem::create_directories(hr_dir);
    for (int i = 0; i < 5; ++i)
        write_png(hr_dir / ("img" + std::to_string(i) + ".png"),
                  make_texture(100 + i, 37 + i, 29 + i));

    DegradationSpec spec;
    spec.kind = DegradationKind::BI;
    spec.scale = 4;

    const auto out1 = tmp.path / "out1";
    Manifest m = make_pairs(hr_dir, spec, out1);
    REQUIRE(m.rows.size() == 5);
    for (int i = 0; i < 5; ++i) {
        Image lr = read_png(m.rows[i].lr_path);
        Image hr = read_png(m.rows[i].hr_path);
        CHECK(hr.width == ((37 + i) / 4) * 4);
        CHECK(hr.height == ((29 + i) / 4) * 4);
        CHECK(lr.width == hr.width / 4);
        CHECK(lr.height == hr.height / 4);
    }

    // Round-trip through the manifest file.
    Manifest loaded = read_manifest(out1 / "manifest.tsv");
    REQUIRE(loaded.rows.size() == 5);
    CHECK(loaded.rows[0].kind == DegradationKind::BI);
    CHECK(loaded.rows[0].scale == 4);

    // Byte-identical rerun.
    const auto out2 = tmp.path / "out2";
    make_pairs(hr_dir, spec, out2);
    CHECK(file_bytes(out1 / "manifest.tsv").size() > 0);
    for (int i = 0; i < 5; ++i) {
        const std::string name = "img" + std::to_string(i) + ".png";
        CHECK(file_bytes(out1 / "LR" / name) == file_bytes(out2 / "LR" / name));
    }
    // Manifests differ only in the out1/out2 path prefix by construction.

    // Empty directory: empty manifest, no failure.
    const auto empty_dir = tmp.path / "empty";
    std::filesystem::create_directories(empty_dir);
    Manifest empty = make_pairs(empty_dir, spec, tmp.path / "out_empty");
    CHECK(empty.rows.empty());

    // Unreadable file is skipped and recorded.
    std::ofstream(hr_dir / "broken.png") << "not a png";
    Manifest with_bad = make_pairs(hr_dir, spec, tmp.path / "out3");
    CHECK(with_bad.rows.size() == 5);
    CHECK(with_bad.skipped.size() == 1);

    // Missing input directory is an error, unlike an empty one.
    CHECK_THROWS(make_pairs(tmp.path / "never_created", spec, tmp.path / "out4"));
}

TEST_CASE("image 8-bit round trip stays within 1/510") {
    Image img = make_texture(31, 16, 16);
    Image q = quantize8(img);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(q.data[i] - img.data[i]) <= 1.0 / 510.0 + 1e-9);

    TempDir tmp("roundtrip");
    write_png(tmp.path / "t.png", img);
    Image back = read_png(tmp.path / "t.png");
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(back.data[i] - img.data[i]) <= 1.0 / 510.0 + 1e-9);
}

TEST_CASE("dihedral transforms invert exactly for all 8 elements") {
    Image img = make_texture(41, 13, 9);
    for (int k = 0; k < 8; ++k) {
        Image round = dihedral_unapply(dihedral_apply(img, k), k);
        REQUIRE(round.same_shape(img));
        for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(round.data[i] == img.data[i]);
    }
    // The 8 elements are distinct maps on an asymmetric image.
    for (int k = 1; k < 8; ++k) {
        Image t = dihedral_apply(img, k);
        if (t.same_shape(img)) {
            bool differs = false;
            for (std::size_t i = 0; i < img.data.size() && !differs; ++i)
                differs = t.data[i] != img.data[i];
            CHECK(differs);
        }
    }
}

TEST_CASE("degradation spec validation") {
    DegradationSpec spec;
    spec.scale = 5;
    CHECK_THROWS(spec.validate());
    spec.scale = 2;
    spec.sigma_noise = 300.0;
    CHECK_THROWS(spec.validate());
}
