#pragma once

#include <functional>

#include "drln/image.hpp"
#include "drln/network.hpp"

namespace drln {

/// Single forward pass on one image (no gradient recording).
Image super_resolve(const Network<float>& net, const Image& lr);

/// Geometric self-ensemble: applies all 8 dihedral transforms to the input,
/// super-resolves each, inverse-transforms and averages in real-valued space.
/// For a transform-equivariant operator this equals a single pass.
Image self_ensemble(const Image& lr, const std::function<Image(const Image&)>& sr_fn);

}  // namespace drln
