#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "drln/tensor.hpp"

namespace drln {

/// 8-bit-backed raster with a real-valued [0,1] working copy. Samples are
/// interleaved row-major (y, x, c); channels is 1 (gray) or 3 (RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    static Image create(int w, int h, int c, float fill = 0.0f);

    float at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

/// Reads an 8-bit PNG (gray or RGB; palette expanded, alpha stripped).
/// 16-bit files are rejected.
Image read_png(const std::filesystem::path& path);

/// Writes an 8-bit PNG; values are clamped to [0,1] and rounded.
/// Fixed encoder settings keep outputs byte-identical across runs.
void write_png(const std::filesystem::path& path, const Image& img);

/// round(v*255)/255 on every sample; the 8-bit grid the PNG writer uses.
Image quantize8(const Image& img);

std::uint8_t to_byte(float v);

/// Image <-> single-batch planar tensor.
Tensor<float> image_to_tensor(const Image& img);
Image tensor_to_image(const Tensor<float>& t, int batch_index = 0);

/// Crops to the largest top-left region whose extents are multiples of m.
Image modulo_crop(const Image& img, int m);

/// Dihedral-group element k in [0,8): rotate CCW by 90*(k&3) degrees, then
/// mirror horizontally if k>=4. dihedral_unapply inverts exactly.
Image dihedral_apply(const Image& img, int k);
Image dihedral_unapply(const Image& img, int k);

Image nearest_upscale(const Image& img, int scale);

}  // namespace drln
