#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace drln {

/// Extents of a dense 4-D tensor in (batch, channel, height, width) order.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t numel() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

namespace detail {

template <typename T>
struct TensorImpl;

// Closure that propagates this node's gradient to its parents. `parent_grad(i)`
// hands back the accumulation buffer for parent i, allocated on first use.
template <typename T>
using BackwardFn = std::function<void(
    const std::vector<T>& out_grad,
    const std::function<std::vector<T>&(std::size_t)>& parent_grad)>;

template <typename T>
struct TensorImpl {
    Shape shape;
    std::vector<T> data;
    bool requires_grad = false;
    std::vector<T> grad;  // leaf accumulation buffer, allocated lazily

    // Recorded graph node: empty parents means leaf / constant.
    std::vector<std::shared_ptr<TensorImpl<T>>> parents;
    BackwardFn<T> backward;
};

}  // namespace detail

// Thread-local switch that suspends graph recording (inference path).
bool grad_mode_enabled();
void set_grad_mode(bool enabled);

struct NoGradGuard {
    NoGradGuard() : prev_(grad_mode_enabled()) { set_grad_mode(false); }
    ~NoGradGuard() { set_grad_mode(prev_); }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

/// Dense 4-D tensor over float or double. Value-semantic handle to shared
/// storage; data is immutable after construction except through mutable_data()
/// (parameter updates) and the gradient buffer.
template <typename T>
class Tensor {
public:
    using Impl = detail::TensorImpl<T>;

    Tensor() = default;

    static Tensor zeros(Shape s, bool requires_grad = false);
    static Tensor full(Shape s, T value, bool requires_grad = false);
    static Tensor from_data(Shape s, std::vector<T> values, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t numel() const { return impl_->shape.numel(); }

    const T* data() const { return impl_->data.data(); }
    T* mutable_data() { return impl_->data.data(); }
    std::span<const T> values() const& { return impl_->data; }
    std::span<const T> values() const&& = delete;  // would dangle past the temporary

    T at(int n, int c, int y, int x) const { return impl_->data[index(n, c, y, x)]; }
    T& at(int n, int c, int y, int x) { return impl_->data[index(n, c, y, x)]; }

    /// Single value of a scalar-shaped tensor.
    T item() const {
        if (numel() != 1) throw std::invalid_argument("item(): tensor is not scalar");
        return impl_->data[0];
    }

    bool requires_grad() const { return impl_ && impl_->requires_grad; }
    bool is_leaf() const { return impl_ && impl_->parents.empty(); }

    /// Accumulated gradient; zeros if backward never reached this leaf.
    std::vector<T> grad() const {
        if (!impl_->grad.empty()) return impl_->grad;
        return std::vector<T>(numel(), T(0));
    }
    void zero_grad() { impl_->grad.assign(numel(), T(0)); }
    void accumulate_grad(std::span<const T> g);

    std::size_t index(int n, int c, int y, int x) const {
        const Shape& s = impl_->shape;
        return ((static_cast<std::size_t>(n) * s.c + c) * s.h + y) * s.w + x;
    }

    std::shared_ptr<Impl> impl() const { return impl_; }

    /// Deep copy of shape+data; drops graph history and gradient.
    Tensor clone() const;

private:
    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

    std::shared_ptr<Impl> impl_;

    template <typename U>
    friend Tensor<U> make_op_result(Shape, std::vector<U>,
                                    std::vector<Tensor<U>>,
                                    detail::BackwardFn<U>);
};

/// Assembles an op output: records parents and the backward closure when grad
/// mode is on and any input participates in a gradient computation.
template <typename T>
Tensor<T> make_op_result(Shape shape, std::vector<T> values,
                         std::vector<Tensor<T>> parents,
                         detail::BackwardFn<T> backward);

/// Reverse-mode sweep from a scalar loss. Visits each recorded node exactly
/// once in reverse topological order and accumulates into leaf gradients
/// (additively across repeated calls). Throws if `loss` is not scalar.
template <typename T>
void backward(const Tensor<T>& loss);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template Tensor<float> make_op_result<float>(Shape, std::vector<float>,
                                                    std::vector<Tensor<float>>,
                                                    detail::BackwardFn<float>);
extern template Tensor<double> make_op_result<double>(Shape, std::vector<double>,
                                                      std::vector<Tensor<double>>,
                                                      detail::BackwardFn<double>);
extern template void backward<float>(const Tensor<float>&);
extern template void backward<double>(const Tensor<double>&);

}  // namespace drln
