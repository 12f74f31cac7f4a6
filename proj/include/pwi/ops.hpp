// Differentiable operations over Tensor. Forward values are computed
// eagerly; backward closures are recorded on the active tape.
//
// Accumulation orders are part of the contract here: matmul/conv2d sum
// their inner loops in ascending index order so results can be compared
// bitwise against straightforward reference loops.
#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <vector>

#include "pwi/error.hpp"
#include "pwi/tensor.hpp"

namespace pwi {

namespace detail {

inline bool taped(std::initializer_list<const Tensor*> inputs) {
    if (!Tape::current()) return false;
    for (const Tensor* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

// Marks the output differentiable and pre-sizes grad buffers; returns the
// tape to record on.
inline Tape& arm(Tensor& out, std::initializer_list<const Tensor*> inputs) {
    out.set_requires_grad(true);
    for (const Tensor* t : inputs)
        if (t->requires_grad()) t->impl()->ensure_grad();
    return *Tape::current();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
    if (detail::taped({&a, &b})) {
        auto& tape = detail::arm(out, {&a, &b});
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        tape.record([ai, bi, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) {
                if (ai->requires_grad) ai->grad[i] += oi->grad[i];
                if (bi->requires_grad) bi->grad[i] += oi->grad[i];
            }
        });
    }
    return out;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
    if (detail::taped({&a, &b})) {
        auto& tape = detail::arm(out, {&a, &b});
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        tape.record([ai, bi, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) {
                if (ai->requires_grad) ai->grad[i] += oi->grad[i];
                if (bi->requires_grad) bi->grad[i] -= oi->grad[i];
            }
        });
    }
    return out;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    if (detail::taped({&a, &b})) {
        auto& tape = detail::arm(out, {&a, &b});
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        tape.record([ai, bi, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) {
                if (ai->requires_grad) ai->grad[i] += oi->grad[i] * bi->value[i];
                if (bi->requires_grad) bi->grad[i] += oi->grad[i] * ai->value[i];
            }
        });
    }
    return out;
}

inline Tensor add_scalar(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + c;
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) ai->grad[i] += oi->grad[i];
        });
    }
    return out;
}

inline Tensor mul_scalar(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * c;
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi, c] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) ai->grad[i] += c * oi->grad[i];
        });
    }
    return out;
}

inline Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

inline Tensor tanh(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = std::tanh(a.data()[i]);
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) {
                double y = oi->value[i];
                ai->grad[i] += oi->grad[i] * (1.0 - y * y);
            }
        });
    }
    return out;
}

inline Tensor sigmoid(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = 1.0 / (1.0 + std::exp(-a.data()[i]));
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) {
                double y = oi->value[i];
                ai->grad[i] += oi->grad[i] * y * (1.0 - y);
            }
        });
    }
    return out;
}

inline Tensor relu(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i)
                if (ai->value[i] > 0.0) ai->grad[i] += oi->grad[i];
        });
    }
    return out;
}

inline Tensor log(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a.data()[i] > 0.0))
            throw NumericError("log of non-positive value " + std::to_string(a.data()[i]));
        out.data()[i] = std::log(a.data()[i]);
    }
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            for (std::size_t i = 0; i < oi->value.size(); ++i)
                ai->grad[i] += oi->grad[i] / ai->value[i];
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    const std::size_t m = a.dim(0), p = a.dim(1), n = b.dim(1);
    Tensor out = Tensor::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < p; ++k) acc += a.data()[i * p + k] * b.data()[k * n + j];
            out.data()[i * n + j] = acc;
        }
    if (detail::taped({&a, &b})) {
        auto& tape = detail::arm(out, {&a, &b});
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        tape.record([ai, bi, oi, m, p, n] {
            if (ai->requires_grad)
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t k = 0; k < p; ++k) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < n; ++j)
                            acc += oi->grad[i * n + j] * bi->value[k * n + j];
                        ai->grad[i * p + k] += acc;
                    }
            if (bi->requires_grad)
                for (std::size_t k = 0; k < p; ++k)
                    for (std::size_t j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < m; ++i)
                            acc += ai->value[i * p + k] * oi->grad[i * n + j];
                        bi->grad[k * n + j] += acc;
                    }
        });
    }
    return out;
}

inline Tensor matvec(const Tensor& w, const Tensor& x) {
    if (w.rank() != 2 || x.rank() != 1 || w.dim(1) != x.dim(0))
        throw ShapeError("matvec: incompatible shapes " + shape_str(w.shape()) + " and " +
                         shape_str(x.shape()));
    const std::size_t m = w.dim(0), n = w.dim(1);
    Tensor out = Tensor::zeros({m});
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += w.data()[i * n + j] * x.data()[j];
        out.data()[i] = acc;
    }
    if (detail::taped({&w, &x})) {
        auto& tape = detail::arm(out, {&w, &x});
        auto wi = w.impl(), xi = x.impl(), oi = out.impl();
        tape.record([wi, xi, oi, m, n] {
            for (std::size_t i = 0; i < m; ++i) {
                double g = oi->grad[i];
                for (std::size_t j = 0; j < n; ++j) {
                    if (wi->requires_grad) wi->grad[i * n + j] += g * xi->value[j];
                    if (xi->requires_grad) xi->grad[j] += g * wi->value[i * n + j];
                }
            }
        });
    }
    return out;
}

inline Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: rank-2 tensor required");
    const std::size_t m = a.dim(0), n = a.dim(1);
    Tensor out = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data()[j * m + i] = a.data()[i * n + j];
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi, m, n] {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) ai->grad[i * n + j] += oi->grad[j * m + i];
        });
    }
    return out;
}

inline Tensor dot(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * b.data()[i];
    Tensor out = Tensor::scalar(acc);
    if (detail::taped({&a, &b})) {
        auto& tape = detail::arm(out, {&a, &b});
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        tape.record([ai, bi, oi] {
            double g = oi->grad[0];
            for (std::size_t i = 0; i < ai->value.size(); ++i) {
                if (ai->requires_grad) ai->grad[i] += g * bi->value[i];
                if (bi->requires_grad) bi->grad[i] += g * ai->value[i];
            }
        });
    }
    return out;
}

inline Tensor l2_norm(const Tensor& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * a.data()[i];
    double r = std::sqrt(acc);
    Tensor out = Tensor::scalar(r);
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            double r = oi->value[0];
            if (r == 0.0) return;  // subgradient 0 at the origin
            double g = oi->grad[0] / r;
            for (std::size_t i = 0; i < ai->value.size(); ++i) ai->grad[i] += g * ai->value[i];
        });
    }
    return out;
}

// Cosine similarity; 0 with no gradient when either vector has zero norm.
inline Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "cosine_similarity");
    double s = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a.data()[i] * b.data()[i];
        na += a.data()[i] * a.data()[i];
        nb += b.data()[i] * b.data()[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    double denom = na * nb;
    double c = denom == 0.0 ? 0.0 : s / denom;
    Tensor out = Tensor::scalar(c);
    if (detail::taped({&a, &b})) {
        auto& tape = detail::arm(out, {&a, &b});
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        tape.record([ai, bi, oi, na, nb, c] {
            double denom = na * nb;
            if (denom == 0.0) return;
            double g = oi->grad[0];
            for (std::size_t i = 0; i < ai->value.size(); ++i) {
                if (ai->requires_grad)
                    ai->grad[i] += g * (bi->value[i] / denom - c * ai->value[i] / (na * na));
                if (bi->requires_grad)
                    bi->grad[i] += g * (ai->value[i] / denom - c * bi->value[i] / (nb * nb));
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

inline Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
    Tensor out = Tensor::scalar(acc);
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            double g = oi->grad[0];
            for (std::size_t i = 0; i < ai->value.size(); ++i) ai->grad[i] += g;
        });
    }
    return out;
}

inline Tensor mean(const Tensor& a) {
    return mul_scalar(sum(a), 1.0 / static_cast<double>(a.size()));
}

// ---------------------------------------------------------------------------
// shape surgery
// ---------------------------------------------------------------------------

inline Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_size(shape) != a.size())
        throw ShapeError("reshape: " + shape_str(a.shape()) + " to " + shape_str(shape) +
                         " changes element count");
    Tensor out = Tensor::from(std::move(shape), a.values());
    if (detail::taped({&a})) {
        auto& tape = detail::arm(out, {&a});
        auto ai = a.impl(), oi = out.impl();
        tape.record([ai, oi] {
            for (std::size_t i = 0; i < ai->value.size(); ++i) ai->grad[i] += oi->grad[i];
        });
    }
    return out;
}

inline Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const Shape& base = parts[0].shape();
    if (axis >= base.size()) throw ShapeError("concat: axis out of range");
    Shape out_shape = base;
    std::size_t total_axis = 0;
    for (const Tensor& p : parts) {
        if (p.rank() != base.size()) throw ShapeError("concat: rank mismatch");
        for (std::size_t d = 0; d < base.size(); ++d)
            if (d != axis && p.shape()[d] != base[d])
                throw ShapeError("concat: shapes " + shape_str(base) + " and " +
                                 shape_str(p.shape()) + " differ off-axis");
        total_axis += p.shape()[axis];
    }
    out_shape[axis] = total_axis;

    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < axis; ++d) outer *= base[d];
    for (std::size_t d = axis + 1; d < base.size(); ++d) inner *= base[d];

    Tensor out = Tensor::zeros(out_shape);
    std::size_t offset = 0;
    for (const Tensor& p : parts) {
        const std::size_t pa = p.shape()[axis];
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t a2 = 0; a2 < pa; ++a2)
                for (std::size_t in = 0; in < inner; ++in)
                    out.data()[(o * total_axis + offset + a2) * inner + in] =
                        p.data()[(o * pa + a2) * inner + in];
        offset += pa;
    }

    bool any_grad = false;
    for (const Tensor& p : parts)
        if (p.requires_grad()) any_grad = true;
    if (Tape::current() && any_grad) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<detail::TensorImpl>> impls;
        for (const Tensor& p : parts) {
            if (p.requires_grad()) p.impl()->ensure_grad();
            impls.push_back(p.impl());
        }
        auto oi = out.impl();
        Tape::current()->record([impls, oi, outer, inner, total_axis, axis] {
            std::size_t offset = 0;
            for (const auto& pi : impls) {
                const std::size_t pa = pi->shape[axis];
                if (pi->requires_grad)
                    for (std::size_t o = 0; o < outer; ++o)
                        for (std::size_t a2 = 0; a2 < pa; ++a2)
                            for (std::size_t in = 0; in < inner; ++in)
                                pi->grad[(o * pa + a2) * inner + in] +=
                                    oi->grad[(o * total_axis + offset + a2) * inner + in];
                offset += pa;
            }
        });
    }
    return out;
}

// Stack 1-D tensors of equal length as the rows of a matrix.
inline Tensor stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ShapeError("stack_rows: no inputs");
    const std::size_t m = rows[0].size();
    Tensor out = Tensor::zeros({rows.size(), m});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].rank() != 1 || rows[r].size() != m)
            throw ShapeError("stack_rows: row " + std::to_string(r) + " has shape " +
                             shape_str(rows[r].shape()));
        std::copy(rows[r].data(), rows[r].data() + m, out.data() + r * m);
    }
    bool any_grad = false;
    for (const Tensor& r : rows)
        if (r.requires_grad()) any_grad = true;
    if (Tape::current() && any_grad) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<detail::TensorImpl>> impls;
        for (const Tensor& r : rows) {
            if (r.requires_grad()) r.impl()->ensure_grad();
            impls.push_back(r.impl());
        }
        auto oi = out.impl();
        Tape::current()->record([impls, oi, m] {
            for (std::size_t r = 0; r < impls.size(); ++r)
                if (impls[r]->requires_grad)
                    for (std::size_t j = 0; j < m; ++j)
                        impls[r]->grad[j] += oi->grad[r * m + j];
        });
    }
    return out;
}

inline Tensor row(const Tensor& x, std::size_t r) {
    if (x.rank() != 2 || r >= x.dim(0))
        throw ShapeError("row: index " + std::to_string(r) + " out of range for " +
                         shape_str(x.shape()));
    const std::size_t m = x.dim(1);
    Tensor out = Tensor::from({m}, std::vector<double>(x.data() + r * m, x.data() + (r + 1) * m));
    if (detail::taped({&x})) {
        auto& tape = detail::arm(out, {&x});
        auto xi = x.impl(), oi = out.impl();
        tape.record([xi, oi, r, m] {
            for (std::size_t j = 0; j < m; ++j) xi->grad[r * m + j] += oi->grad[j];
        });
    }
    return out;
}

inline Tensor slice_rows(const Tensor& x, std::size_t r0, std::size_t r1) {
    if (x.rank() != 2 || r0 >= r1 || r1 > x.dim(0))
        throw ShapeError("slice_rows: range [" + std::to_string(r0) + ", " + std::to_string(r1) +
                         ") out of bounds for " + shape_str(x.shape()));
    const std::size_t m = x.dim(1);
    Tensor out = Tensor::from({r1 - r0, m},
                              std::vector<double>(x.data() + r0 * m, x.data() + r1 * m));
    if (detail::taped({&x})) {
        auto& tape = detail::arm(out, {&x});
        auto xi = x.impl(), oi = out.impl();
        tape.record([xi, oi, r0, m] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) xi->grad[r0 * m + i] += oi->grad[i];
        });
    }
    return out;
}

inline Tensor slice(const Tensor& x, std::size_t b, std::size_t e) {
    if (x.rank() != 1 || b >= e || e > x.size())
        throw ShapeError("slice: range [" + std::to_string(b) + ", " + std::to_string(e) +
                         ") out of bounds for " + shape_str(x.shape()));
    Tensor out = Tensor::from({e - b}, std::vector<double>(x.data() + b, x.data() + e));
    if (detail::taped({&x})) {
        auto& tape = detail::arm(out, {&x});
        auto xi = x.impl(), oi = out.impl();
        tape.record([xi, oi, b] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) xi->grad[b + i] += oi->grad[i];
        });
    }
    return out;
}

inline Tensor at(const Tensor& x, std::size_t i) {
    if (x.rank() != 1 || i >= x.size())
        throw ShapeError("at: index " + std::to_string(i) + " out of range for " +
                         shape_str(x.shape()));
    Tensor out = Tensor::scalar(x.data()[i]);
    if (detail::taped({&x})) {
        auto& tape = detail::arm(out, {&x});
        auto xi = x.impl(), oi = out.impl();
        tape.record([xi, oi, i] { xi->grad[i] += oi->grad[0]; });
    }
    return out;
}

// ---------------------------------------------------------------------------
// broadcast bias adds (the only broadcasting beyond scalars)
// ---------------------------------------------------------------------------

inline Tensor add_row_bias(const Tensor& x, const Tensor& b) {
    if (x.rank() != 2 || b.rank() != 1 || x.dim(1) != b.dim(0))
        throw ShapeError("add_row_bias: shapes " + shape_str(x.shape()) + " and " +
                         shape_str(b.shape()) + " incompatible");
    const std::size_t n = x.dim(0), m = x.dim(1);
    Tensor out = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out.data()[i * m + j] = x.data()[i * m + j] + b.data()[j];
    if (detail::taped({&x, &b})) {
        auto& tape = detail::arm(out, {&x, &b});
        auto xi = x.impl(), bi = b.impl(), oi = out.impl();
        tape.record([xi, bi, oi, n, m] {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    if (xi->requires_grad) xi->grad[i * m + j] += oi->grad[i * m + j];
                    if (bi->requires_grad) bi->grad[j] += oi->grad[i * m + j];
                }
        });
    }
    return out;
}

inline Tensor add_channel_bias(const Tensor& x, const Tensor& b) {
    if (x.rank() != 3 || b.rank() != 1 || x.dim(0) != b.dim(0))
        throw ShapeError("add_channel_bias: shapes " + shape_str(x.shape()) + " and " +
                         shape_str(b.shape()) + " incompatible");
    const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
    Tensor out = Tensor::zeros(x.shape());
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < hw; ++i)
            out.data()[ch * hw + i] = x.data()[ch * hw + i] + b.data()[ch];
    if (detail::taped({&x, &b})) {
        auto& tape = detail::arm(out, {&x, &b});
        auto xi = x.impl(), bi = b.impl(), oi = out.impl();
        tape.record([xi, bi, oi, c, hw] {
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t i = 0; i < hw; ++i) {
                    if (xi->requires_grad) xi->grad[ch * hw + i] += oi->grad[ch * hw + i];
                    if (bi->requires_grad) bi->grad[ch] += oi->grad[ch * hw + i];
                }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// softmax
// ---------------------------------------------------------------------------

inline Tensor softmax(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) throw ShapeError("softmax: axis out of range");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::isnan(x.data()[i])) throw NumericError("softmax: NaN input");
    const std::size_t n = x.dim(axis);
    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < axis; ++d) outer *= x.dim(d);
    for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.dim(d);

    Tensor out = Tensor::zeros(x.shape());
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double mx = x.data()[base];
            for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, x.data()[base + k * inner]);
            double z = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                double e = std::exp(x.data()[base + k * inner] - mx);
                out.data()[base + k * inner] = e;
                z += e;
            }
            for (std::size_t k = 0; k < n; ++k) out.data()[base + k * inner] /= z;
        }
    if (detail::taped({&x})) {
        auto& tape = detail::arm(out, {&x});
        auto xi = x.impl(), oi = out.impl();
        tape.record([xi, oi, outer, inner, n] {
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t in = 0; in < inner; ++in) {
                    const std::size_t base = o * n * inner + in;
                    double dot = 0.0;
                    for (std::size_t k = 0; k < n; ++k)
                        dot += oi->grad[base + k * inner] * oi->value[base + k * inner];
                    for (std::size_t k = 0; k < n; ++k)
                        xi->grad[base + k * inner] +=
                            oi->value[base + k * inner] * (oi->grad[base + k * inner] - dot);
                }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// convolution stack
// ---------------------------------------------------------------------------

// Cross-correlation with zero same-padding; inner accumulation runs over
// (in-channel, ky, kx) ascending.
inline Tensor conv2d(const Tensor& input, const Tensor& kernels) {
    if (input.rank() != 3 || kernels.rank() != 4)
        throw ShapeError("conv2d: need [C,H,W] input and [Co,Ci,kh,kw] kernels, got " +
                         shape_str(input.shape()) + " and " + shape_str(kernels.shape()));
    if (kernels.dim(1) != input.dim(0))
        throw ShapeError("conv2d: channel mismatch between input " + shape_str(input.shape()) +
                         " and kernels " + shape_str(kernels.shape()));
    const std::size_t ci_n = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t co_n = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
    if (kh % 2 == 0 || kw % 2 == 0)
        throw ShapeError("conv2d: kernel spatial size must be odd, got " +
                         shape_str(kernels.shape()));
    const std::size_t ph = kh / 2, pw = kw / 2;

    Tensor out = Tensor::zeros({co_n, h, w});
    const double* in = input.data();
    const double* kn = kernels.data();
    for (std::size_t co = 0; co < co_n; ++co)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (std::size_t ci = 0; ci < ci_n; ++ci)
                    for (std::size_t ky = 0; ky < kh; ++ky) {
                        const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) -
                                                  static_cast<std::ptrdiff_t>(ph);
                        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
                        for (std::size_t kx = 0; kx < kw; ++kx) {
                            const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) -
                                                      static_cast<std::ptrdiff_t>(pw);
                            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
                            acc += in[(ci * h + sy) * w + sx] *
                                   kn[((co * ci_n + ci) * kh + ky) * kw + kx];
                        }
                    }
                out.data()[(co * h + y) * w + x] = acc;
            }
    if (detail::taped({&input, &kernels})) {
        auto& tape = detail::arm(out, {&input, &kernels});
        auto ii = input.impl(), ki = kernels.impl(), oi = out.impl();
        tape.record([ii, ki, oi, ci_n, co_n, h, w, kh, kw, ph, pw] {
            for (std::size_t co = 0; co < co_n; ++co)
                for (std::size_t y = 0; y < h; ++y)
                    for (std::size_t x = 0; x < w; ++x) {
                        const double g = oi->grad[(co * h + y) * w + x];
                        if (g == 0.0) continue;
                        for (std::size_t ci = 0; ci < ci_n; ++ci)
                            for (std::size_t ky = 0; ky < kh; ++ky) {
                                const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) -
                                                          static_cast<std::ptrdiff_t>(ph);
                                if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
                                for (std::size_t kx = 0; kx < kw; ++kx) {
                                    const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) -
                                                              static_cast<std::ptrdiff_t>(pw);
                                    if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
                                    const std::size_t in_idx = (ci * h + sy) * w + sx;
                                    const std::size_t k_idx = ((co * ci_n + ci) * kh + ky) * kw + kx;
                                    if (ii->requires_grad) ii->grad[in_idx] += g * ki->value[k_idx];
                                    if (ki->requires_grad) ki->grad[k_idx] += g * ii->value[in_idx];
                                }
                            }
                    }
        });
    }
    return out;
}

// 2x2 max pooling with stride 2; a trailing odd row/column forms a partial
// window. Gradient routes to the first maximal element in row-major window
// order.
inline Tensor maxpool2d(const Tensor& input) {
    if (input.rank() != 3) throw ShapeError("maxpool2d: need [C,H,W], got " +
                                            shape_str(input.shape()));
    const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
    Tensor out = Tensor::zeros({c, oh, ow});
    std::vector<std::size_t> argmax(c * oh * ow);
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = 0;
                for (std::size_t dy = 0; dy < 2 && 2 * oy + dy < h; ++dy)
                    for (std::size_t dx = 0; dx < 2 && 2 * ox + dx < w; ++dx) {
                        const std::size_t idx = (ch * h + 2 * oy + dy) * w + 2 * ox + dx;
                        if (input.data()[idx] > best) {
                            best = input.data()[idx];
                            best_idx = idx;
                        }
                    }
                out.data()[(ch * oh + oy) * ow + ox] = best;
                argmax[(ch * oh + oy) * ow + ox] = best_idx;
            }
    if (detail::taped({&input})) {
        auto& tape = detail::arm(out, {&input});
        auto ii = input.impl(), oi = out.impl();
        tape.record([ii, oi, argmax] {
            for (std::size_t i = 0; i < oi->value.size(); ++i) ii->grad[argmax[i]] += oi->grad[i];
        });
    }
    return out;
}

// Fit a [C,h,w] volume onto a [C,S,S] grid: zero-pad bottom/right, crop
// top-left when a side exceeds S.
inline Tensor pad2d(const Tensor& x, std::size_t s) {
    if (x.rank() != 3) throw ShapeError("pad2d: need [C,H,W], got " + shape_str(x.shape()));
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t ch_ = std::min(h, s), cw = std::min(w, s);
    Tensor out = Tensor::zeros({c, s, s});
    for (std::size_t k = 0; k < c; ++k)
        for (std::size_t y = 0; y < ch_; ++y)
            for (std::size_t xx = 0; xx < cw; ++xx)
                out.data()[(k * s + y) * s + xx] = x.data()[(k * h + y) * w + xx];
    if (detail::taped({&x})) {
        auto& tape = detail::arm(out, {&x});
        auto xi = x.impl(), oi = out.impl();
        tape.record([xi, oi, c, h, w, s, ch_, cw] {
            for (std::size_t k = 0; k < c; ++k)
                for (std::size_t y = 0; y < ch_; ++y)
                    for (std::size_t xx = 0; xx < cw; ++xx)
                        xi->grad[(k * h + y) * w + xx] += oi->grad[(k * s + y) * s + xx];
        });
    }
    return out;
}

// Multiply every channel of a [C,H,W] volume by a constant per-position
// mask of H*W weights. The mask is data, not a differentiable input.
inline Tensor scale_by_mask(const Tensor& x, const std::vector<double>& mask) {
    if (x.rank() != 3 || mask.size() != x.dim(1) * x.dim(2))
        throw ShapeError("scale_by_mask: mask of " + std::to_string(mask.size()) +
                         " weights does not cover " + shape_str(x.shape()));
    const std::size_t c = x.dim(0), hw = mask.size();
    Tensor out = Tensor::zeros(x.shape());
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < hw; ++i)
            out.data()[ch * hw + i] = x.data()[ch * hw + i] * mask[i];
    if (detail::taped({&x})) {
        auto& tape = detail::arm(out, {&x});
        auto xi = x.impl(), oi = out.impl();
        tape.record([xi, oi, mask, c, hw] {
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t i = 0; i < hw; ++i)
                    xi->grad[ch * hw + i] += oi->grad[ch * hw + i] * mask[i];
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// lookup
// ---------------------------------------------------------------------------

inline Tensor embedding(const Tensor& table, const std::vector<int>& ids) {
    if (table.rank() != 2) throw ShapeError("embedding: table must be [V,h]");
    const std::size_t v = table.dim(0), hdim = table.dim(1);
    if (ids.empty()) throw InputError("embedding: empty id sequence");
    Tensor out = Tensor::zeros({ids.size(), hdim});
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] < 0 || static_cast<std::size_t>(ids[t]) >= v)
            throw InputError("embedding: id " + std::to_string(ids[t]) + " outside table of " +
                             std::to_string(v) + " rows");
        std::copy(table.data() + ids[t] * hdim, table.data() + (ids[t] + 1) * hdim,
                  out.data() + t * hdim);
    }
    if (detail::taped({&table})) {
        auto& tape = detail::arm(out, {&table});
        auto ti = table.impl(), oi = out.impl();
        tape.record([ti, oi, ids, hdim] {
            for (std::size_t t = 0; t < ids.size(); ++t)
                for (std::size_t j = 0; j < hdim; ++j)
                    ti->grad[ids[t] * hdim + j] += oi->grad[t * hdim + j];
        });
    }
    return out;
}

}  // namespace pwi
