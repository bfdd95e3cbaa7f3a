#include "drln/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace drln {

Image Image::create(int w, int h, int c, float fill) {
    if (w < 1 || h < 1 || (c != 1 && c != 3))
        throw std::invalid_argument("Image::create: bad extents");
    Image img;
    img.width = w;
    img.height = h;
    img.channels = c;
    img.data.assign(static_cast<std::size_t>(w) * h * c, fill);
    return img;
}

std::uint8_t to_byte(float v) {
    float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed to decode " + path.string());
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error(path.string() + ": 16-bit PNG not supported (8-bit only)");
    }
    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int c = static_cast<int>(png_get_channels(png, info));
    if (c != 1 && c != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error(path.string() + ": unsupported channel count " + std::to_string(c));
    }

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * c);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * w * c;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img = Image::create(w, h, c);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.data[i] = static_cast<float>(bytes[i]) / 255.0f;
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("write_png: channels must be 1 or 3");

    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode " + path.string());
    }

    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                row[static_cast<std::size_t>(x) * img.channels + c] = to_byte(img.at(y, x, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image quantize8(const Image& img) {
    Image out = img;
    for (auto& v : out.data) v = static_cast<float>(to_byte(v)) / 255.0f;
    return out;
}

Tensor<float> image_to_tensor(const Image& img) {
    Shape s{1, img.channels, img.height, img.width};
    std::vector<float> data(s.numel());
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                data[(static_cast<std::size_t>(c) * img.height + y) * img.width + x] =
                    img.at(y, x, c);
    return Tensor<float>::from_data(s, std::move(data));
}

Image tensor_to_image(const Tensor<float>& t, int batch_index) {
    const Shape& s = t.shape();
    if (s.c != 1 && s.c != 3)
        throw std::invalid_argument("tensor_to_image: channels must be 1 or 3");
    Image img = Image::create(s.w, s.h, s.c);
    for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < s.h; ++y)
            for (int x = 0; x < s.w; ++x) img.at(y, x, c) = t.at(batch_index, c, y, x);
    return img;
}

Image modulo_crop(const Image& img, int m) {
    if (m < 1) throw std::invalid_argument("modulo_crop: m must be positive");
    const int w = (img.width / m) * m;
    const int h = (img.height / m) * m;
    if (w < 1 || h < 1) throw std::invalid_argument("modulo_crop: image smaller than modulus");
    if (w == img.width && h == img.height) return img;
    Image out = Image::create(w, h, img.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, x, c);
    return out;
}

namespace {

Image rotate_ccw(const Image& img, int quarter_turns) {
    const int r = ((quarter_turns % 4) + 4) % 4;
    if (r == 0) return img;
    const bool swap = (r % 2) == 1;
    Image out = Image::create(swap ? img.height : img.width, swap ? img.width : img.height,
                              img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            int oy = 0, ox = 0;
            switch (r) {
                case 1: oy = img.width - 1 - x; ox = y; break;
                case 2: oy = img.height - 1 - y; ox = img.width - 1 - x; break;
                case 3: oy = x; ox = img.height - 1 - y; break;
            }
            for (int c = 0; c < img.channels; ++c) out.at(oy, ox, c) = img.at(y, x, c);
        }
    return out;
}

Image mirror_x(const Image& img) {
    Image out = Image::create(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, img.width - 1 - x, c) = img.at(y, x, c);
    return out;
}

}  // namespace

Image dihedral_apply(const Image& img, int k) {
    if (k < 0 || k > 7) throw std::invalid_argument("dihedral: k must be in [0,8)");
    Image out = rotate_ccw(img, k & 3);
    if (k & 4) out = mirror_x(out);
    return out;
}

Image dihedral_unapply(const Image& img, int k) {
    if (k < 0 || k > 7) throw std::invalid_argument("dihedral: k must be in [0,8)");
    Image out = (k & 4) ? mirror_x(img) : img;
    return rotate_ccw(out, 4 - (k & 3));
}

Image nearest_upscale(const Image& img, int scale) {
    if (scale < 1) throw std::invalid_argument("nearest_upscale: scale must be positive");
    Image out = Image::create(img.width * scale, img.height * scale, img.channels);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y / scale, x / scale, c);
    return out;
}

}  // namespace drln
