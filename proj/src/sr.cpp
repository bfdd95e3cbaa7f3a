#include "drln/sr.hpp"

#include <stdexcept>
#include <vector>

namespace drln {

Image super_resolve(const Network<float>& net, const Image& lr) {
    NoGradGuard no_grad;
    auto out = forward(net, image_to_tensor(lr));
    return tensor_to_image(out);
}

Image self_ensemble(const Image& lr, const std::function<Image(const Image&)>& sr_fn) {
    std::vector<double> acc;
    Image shape_ref;
    for (int k = 0; k < 8; ++k) {
        const Image sr = dihedral_unapply(sr_fn(dihedral_apply(lr, k)), k);
        if (k == 0) {
            shape_ref = sr;
            acc.assign(sr.data.size(), 0.0);
        } else if (!sr.same_shape(shape_ref)) {
            throw std::runtime_error("self_ensemble: transform changed output shape");
        }
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sr.data[i];
    }
    Image out = shape_ref;
    for (std::size_t i = 0; i < acc.size(); ++i) out.data[i] = static_cast<float>(acc[i] / 8.0);
    return out;
}

}  // namespace drln
