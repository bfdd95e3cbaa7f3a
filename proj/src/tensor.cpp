#include "drln/tensor.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace drln {

std::string Shape::str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
}

namespace {
thread_local bool g_grad_mode = true;
}

bool grad_mode_enabled() { return g_grad_mode; }
void set_grad_mode(bool enabled) { g_grad_mode = enabled; }

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape s, bool requires_grad) {
    return from_data(s, std::vector<T>(s.numel(), T(0)), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape s, T value, bool requires_grad) {
    return from_data(s, std::vector<T>(s.numel(), value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_data(Shape s, std::vector<T> values, bool requires_grad) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0)
        throw std::invalid_argument("tensor shape extents must be non-negative");
    if (values.size() != s.numel())
        throw std::invalid_argument("tensor data length " + std::to_string(values.size()) +
                                    " does not match shape " + s.str());
    auto impl = std::make_shared<Impl>();
    impl->shape = s;
    impl->data = std::move(values);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

template <typename T>
void Tensor<T>::accumulate_grad(std::span<const T> g) {
    if (g.size() != numel())
        throw std::invalid_argument("gradient size does not match tensor");
    if (impl_->grad.empty()) impl_->grad.assign(numel(), T(0));
    for (std::size_t i = 0; i < g.size(); ++i) impl_->grad[i] += g[i];
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
    return from_data(impl_->shape, impl_->data, impl_->requires_grad);
}

template <typename T>
Tensor<T> make_op_result(Shape shape, std::vector<T> values,
                         std::vector<Tensor<T>> parents,
                         detail::BackwardFn<T> backward_fn) {
    auto out = Tensor<T>::from_data(shape, std::move(values), false);
    if (!grad_mode_enabled()) return out;

    bool track = std::any_of(parents.begin(), parents.end(), [](const Tensor<T>& p) {
        return p.requires_grad() || !p.impl()->parents.empty();
    });
    if (!track) return out;

    auto impl = out.impl();
    impl->parents.reserve(parents.size());
    for (auto& p : parents) impl->parents.push_back(p.impl());
    impl->backward = std::move(backward_fn);
    return out;
}

template <typename T>
void backward(const Tensor<T>& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw std::invalid_argument("backward() requires a scalar loss");

    using ImplPtr = detail::TensorImpl<T>*;

    // Iterative post-order DFS; reversing it yields a topological order.
    std::vector<ImplPtr> order;
    std::unordered_set<ImplPtr> seen;
    struct Frame {
        ImplPtr node;
        std::size_t next_child;
    };
    std::vector<Frame> stack{{loss.impl().get(), 0}};
    seen.insert(loss.impl().get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_child < f.node->parents.size()) {
            ImplPtr child = f.node->parents[f.next_child++].get();
            if (seen.insert(child).second && !child->parents.empty())
                stack.push_back({child, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    // Per-sweep gradient buffers; only leaves receive persistent accumulation.
    std::unordered_map<ImplPtr, std::vector<T>> grads;
    grads[loss.impl().get()] = {T(1)};

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        ImplPtr node = *it;
        auto found = grads.find(node);
        if (found == grads.end()) continue;  // unreachable from loss
        if (node->parents.empty()) continue;

        const std::vector<T>& out_grad = found->second;
        auto parent_grad = [&](std::size_t i) -> std::vector<T>& {
            ImplPtr p = node->parents[i].get();
            auto& buf = grads[p];
            if (buf.empty()) buf.assign(p->shape.numel(), T(0));
            return buf;
        };
        node->backward(out_grad, parent_grad);
    }

    for (auto& [node, g] : grads) {
        if (node->parents.empty() && node->requires_grad) {
            if (node->grad.empty()) node->grad.assign(node->shape.numel(), T(0));
            for (std::size_t i = 0; i < g.size(); ++i) node->grad[i] += g[i];
        }
    }
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> make_op_result<float>(Shape, std::vector<float>,
                                             std::vector<Tensor<float>>,
                                             detail::BackwardFn<float>);
template Tensor<double> make_op_result<double>(Shape, std::vector<double>,
                                               std::vector<Tensor<double>>,
                                               detail::BackwardFn<double>);
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace drln
