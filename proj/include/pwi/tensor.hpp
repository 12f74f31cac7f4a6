// Dense row-major double tensors plus the reverse-mode tape they record on.
//
// The graph is define-by-run: every operation in ops.hpp computes its value
// eagerly and, when a tape is active and an operand participates in
// differentiation, pushes a backward closure onto that tape. backward()
// replays the closures in exact reverse emission order. A tape can be
// consumed once; a fresh forward pass opens a fresh TapeScope.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pwi/error.hpp"

namespace pwi {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << " x ";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

namespace detail {

struct TensorImpl {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated lazily, same length as value
    bool requires_grad = false;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

}  // namespace detail

class Tensor {
public:
    Tensor() : impl_(std::make_shared<detail::TensorImpl>()) {}

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        Tensor t;
        check_shape(shape);
        t.impl_->shape = std::move(shape);
        t.impl_->value.assign(shape_size(t.impl_->shape), 0.0);
        t.set_requires_grad(requires_grad);
        return t;
    }

    static Tensor full(Shape shape, double fill, bool requires_grad = false) {
        Tensor t = zeros(std::move(shape), requires_grad);
        for (double& v : t.impl_->value) v = fill;
        return t;
    }

    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
        check_shape(shape);
        if (shape_size(shape) != values.size())
            throw ShapeError("tensor shape " + shape_str(shape) + " does not match " +
                             std::to_string(values.size()) + " values");
        Tensor t;
        t.impl_->shape = std::move(shape);
        t.impl_->value = std::move(values);
        t.set_requires_grad(requires_grad);
        return t;
    }

    static Tensor scalar(double v, bool requires_grad = false) {
        return from({1}, {v}, requires_grad);
    }

    // Uniform init in [lo, hi]; the default weight initializer.
    static Tensor uniform(Shape shape, double lo, double hi, std::mt19937_64& rng,
                          bool requires_grad = true) {
        Tensor t = zeros(std::move(shape), requires_grad);
        std::uniform_real_distribution<double> dist(lo, hi);
        for (double& v : t.impl_->value) v = dist(rng);
        return t;
    }

    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t size() const { return impl_->value.size(); }
    std::size_t dim(std::size_t i) const { return impl_->shape[i]; }

    std::vector<double>& values() { return impl_->value; }
    const std::vector<double>& values() const { return impl_->value; }
    double* data() { return impl_->value.data(); }
    const double* data() const { return impl_->value.data(); }

    double item() const {
        if (size() != 1)
            throw ContractError("item() on non-scalar tensor of shape " + shape_str(shape()));
        return impl_->value[0];
    }

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool b) {
        impl_->requires_grad = b;
        if (b) impl_->ensure_grad();
    }

    const std::vector<double>& grad() const {
        if (!impl_->requires_grad)
            throw ContractError("grad() on a tensor that does not require gradients");
        impl_->ensure_grad();
        return impl_->grad;
    }

    void zero_grad() {
        if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
    }

    std::shared_ptr<detail::TensorImpl> impl() const { return impl_; }

private:
    static void check_shape(const Shape& shape) {
        for (std::size_t d : shape)
            if (d == 0) throw ShapeError("zero dimension in shape " + shape_str(shape));
    }

    std::shared_ptr<detail::TensorImpl> impl_;
};

// Ordered record of backward closures. Traversal is strictly reverse
// emission order; a second backward without a fresh tape is rejected.
class Tape {
public:
    void record(std::function<void()> fn) {
        if (consumed_)
            throw ContractError("recording onto a consumed tape; open a new TapeScope");
        nodes_.push_back(std::move(fn));
    }

    void backward(const Tensor& loss) {
        if (loss.size() != 1)
            throw ContractError("backward requires a scalar loss, got shape " +
                                shape_str(loss.shape()));
        if (consumed_) throw ContractError("backward already run on this graph");
        consumed_ = true;
        if (!loss.requires_grad()) return;  // constant loss: nothing reachable
        loss.impl()->ensure_grad();
        loss.impl()->grad[0] += 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    }

    std::size_t node_count() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

    static Tape* current() { return current_; }

private:
    friend class TapeScope;
    static inline thread_local Tape* current_ = nullptr;

    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

// RAII activation of a tape on the current thread. Scopes nest; the
// innermost one receives the recordings.
class TapeScope {
public:
    TapeScope() : prev_(Tape::current_) { Tape::current_ = &tape_; }
    ~TapeScope() { Tape::current_ = prev_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

    Tape& tape() { return tape_; }
    void backward(const Tensor& loss) { tape_.backward(loss); }

private:
    Tape tape_;
    Tape* prev_;
};

}  // namespace pwi
