// Python bindings: numpy-facing wrappers over the tensor ops, degradation
// pipeline, metrics, and checkpoint inference.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "drln/checkpoint.hpp"
#include "drln/degrade.hpp"
#include "drln/gradcheck.hpp"
#include "drln/metrics.hpp"
#include "drln/network.hpp"
#include "drln/sr.hpp"

namespace py = pybind11;
using namespace drln;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor<float> tensor_from_array(const Array& arr) {
    if (arr.ndim() != 4) throw std::invalid_argument("expected a 4-D (N,C,H,W) array");
    Shape s{static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
            static_cast<int>(arr.shape(2)), static_cast<int>(arr.shape(3))};
    std::vector<float> data(arr.data(), arr.data() + arr.size());
    return Tensor<float>::from_data(s, std::move(data));
}

Array array_from_tensor(const Tensor<float>& t) {
    const Shape& s = t.shape();
    Array out({s.n, s.c, s.h, s.w});
    std::copy(t.data(), t.data() + t.numel(), out.mutable_data());
    return out;
}

Image image_from_array(const Array& arr) {
    if (arr.ndim() == 2) {
        Image img = Image::create(static_cast<int>(arr.shape(1)),
                                  static_cast<int>(arr.shape(0)), 1);
        std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
        return img;
    }
    if (arr.ndim() == 3 && (arr.shape(2) == 1 || arr.shape(2) == 3)) {
        Image img = Image::create(static_cast<int>(arr.shape(1)),
                                  static_cast<int>(arr.shape(0)),
                                  static_cast<int>(arr.shape(2)));
        std::copy(arr.data(), arr.data() + arr.size(), img.data.begin());
        return img;
    }
    throw std::invalid_argument("expected an (H,W) or (H,W,1|3) array in [0,1]");
}

Array array_from_image(const Image& img) {
    Array out({img.height, img.width, img.channels});
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

ConvParams<float> conv_params(const Array& weight, const std::optional<Array>& bias, int stride,
                              int padding, int dilation) {
    ConvParams<float> p;
    p.weight = tensor_from_array(weight);
    if (bias) {
        py::buffer_info info = bias->request();
        std::vector<float> data(bias->data(), bias->data() + bias->size());
        p.bias = Tensor<float>::from_data(
            Shape{1, static_cast<int>(bias->size()), 1, 1}, std::move(data));
    }
    p.stride = stride;
    p.padding = padding;
    p.dilation = dilation;
    return p;
}

/// Inference-oriented handle around a network.
class Model {
public:
    Model(const std::string& preset, int scale, std::uint64_t seed) {
        NetworkConfig cfg = preset == "paper" ? NetworkConfig::paper_preset(scale)
                                              : NetworkConfig::desk_preset(scale);
        net_ = build_network<float>(cfg, seed);
    }
    explicit Model(const std::string& checkpoint_path)
        : net_(network_from_checkpoint(load_checkpoint(checkpoint_path))) {}

    int scale() const { return net_.cfg.scale; }
    std::size_t param_count() const { return net_.param_count(); }

    Array upscale(const Array& lr, bool ensemble) const {
        const Image img = image_from_array(lr);
        Image out = ensemble
                        ? self_ensemble(img, [&](const Image& i) { return super_resolve(net_, i); })
                        : super_resolve(net_, img);
        return array_from_image(out);
    }

    Array forward_tensor(const Array& batch) const {
        NoGradGuard no_grad;
        return array_from_tensor(forward(net_, tensor_from_array(batch)));
    }

private:
    Network<float> net_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "DRLN super-resolution toolkit";

    m.def(
        "conv2d",
        [](const Array& input, const Array& weight, const std::optional<Array>& bias, int stride,
           int padding, int dilation) {
            return array_from_tensor(
                conv2d(tensor_from_array(input), conv_params(weight, bias, stride, padding, dilation)));
        },
        py::arg("input"), py::arg("weight"), py::arg("bias") = std::nullopt,
        py::arg("stride") = 1, py::arg("padding") = 0, py::arg("dilation") = 1);
    m.def("relu", [](const Array& x) { return array_from_tensor(relu(tensor_from_array(x))); });
    m.def("sigmoid",
          [](const Array& x) { return array_from_tensor(sigmoid(tensor_from_array(x))); });
    m.def("global_avg_pool", [](const Array& x) {
        return array_from_tensor(global_avg_pool(tensor_from_array(x)));
    });
    m.def("pixel_shuffle", [](const Array& x, int r) {
        return array_from_tensor(pixel_shuffle(tensor_from_array(x), r));
    });
    m.def("concat_channels", [](const std::vector<Array>& parts) {
        std::vector<Tensor<float>> tensors;
        for (const auto& p : parts) tensors.push_back(tensor_from_array(p));
        return array_from_tensor(concat_channels(tensors));
    });
    m.def("add", [](const Array& a, const Array& b) {
        return array_from_tensor(add(tensor_from_array(a), tensor_from_array(b)));
    });
    m.def("mul_broadcast", [](const Array& gate, const Array& x) {
        return array_from_tensor(mul_broadcast(tensor_from_array(gate), tensor_from_array(x)));
    });
    m.def("l1_loss", [](const Array& pred, const Array& target) {
        return l1_loss(tensor_from_array(pred), tensor_from_array(target)).item();
    });

    m.def(
        "bicubic_resize",
        [](const Array& img, int out_w, int out_h) {
            return array_from_image(bicubic_resize(image_from_array(img), out_w, out_h));
        },
        py::arg("img"), py::arg("out_w"), py::arg("out_h"));
    m.def(
        "gaussian_blur",
        [](const Array& img, double variance) {
            return array_from_image(gaussian_blur(image_from_array(img), variance));
        },
        py::arg("img"), py::arg("variance") = 1.6);
    m.def(
        "noisy_downsample",
        [](const Array& img, int scale, double sigma, std::uint64_t seed) {
            return array_from_image(noisy_downsample(image_from_array(img), scale, sigma, seed));
        },
        py::arg("img"), py::arg("scale"), py::arg("sigma"), py::arg("seed") = 0);

    m.def("rgb_to_y",
          [](const Array& img) { return array_from_image(rgb_to_y(image_from_array(img))); });
    m.def(
        "psnr",
        [](const Array& a, const Array& b, int shave) {
            return psnr(image_from_array(a), image_from_array(b), shave);
        },
        py::arg("a"), py::arg("b"), py::arg("shave") = 0);
    m.def("ssim", [](const Array& a, const Array& b) {
        return ssim(image_from_array(a), image_from_array(b));
    });

    m.def(
        "gradcheck",
        [](std::uint64_t seed, const std::vector<std::string>& ops) {
            py::dict out;
            for (const auto& e : run_gradcheck(seed, ops))
                out[py::str(e.op)] = e.worst_rel_err;
            return out;
        },
        py::arg("seed") = 1, py::arg("ops") = std::vector<std::string>{});

    py::class_<Model>(m, "Model")
        .def(py::init<const std::string&, int, std::uint64_t>(), py::arg("preset") = "desk",
             py::arg("scale") = 2, py::arg("seed") = 0)
        .def_static("load", [](const std::string& path) { return Model(path); })
        .def_property_readonly("scale", &Model::scale)
        .def_property_readonly("param_count", &Model::param_count)
        .def("upscale", &Model::upscale, py::arg("lr"), py::arg("self_ensemble") = false)
        .def("forward", &Model::forward_tensor, py::arg("batch"));
}
