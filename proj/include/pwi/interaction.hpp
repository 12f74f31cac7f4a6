// Pairwise interaction layer: the similarity cube built from per-token
// context vectors, and the greedy focus function that keeps maximally
// similar non-conflicting token pairs at full magnitude.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pwi/encoders.hpp"
#include "pwi/error.hpp"
#include "pwi/ops.hpp"
#include "pwi/tensor.hpp"

namespace pwi {

// Comparison unit: cosine measure, Euclidean distance, dot product.
// Degenerate when a zero norm makes the cosine undefined; it is reported
// as 0 in that case.
struct CoU {
    double cos = 0.0;
    double l2 = 0.0;
    double dot = 0.0;
    bool degenerate = false;
};

inline CoU co_u(const double* u, const double* v, std::size_t n) {
    CoU r;
    double s = 0.0, nu = 0.0, nv = 0.0, dd = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += u[k] * v[k];
    for (std::size_t k = 0; k < n; ++k) nu += u[k] * u[k];
    for (std::size_t k = 0; k < n; ++k) nv += v[k] * v[k];
    for (std::size_t k = 0; k < n; ++k) dd += (u[k] - v[k]) * (u[k] - v[k]);
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    const double denom = nu * nv;
    r.degenerate = denom == 0.0;
    r.cos = r.degenerate ? 0.0 : s / denom;
    r.l2 = std::sqrt(dd);
    r.dot = s;
    return r;
}

inline CoU co_u(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size())
        throw ShapeError("co_u: vectors of length " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()));
    return co_u(u.data(), v.data(), u.size());
}

// Channel layout: pair type (ff, bb, add, cat) x measure (cos, l2, dot),
// flat index pair_type * 3 + measure. The unified path has the single
// pair type "uni".
enum class PairType { FF = 0, BB = 1, Add = 2, Cat = 3 };
enum class Measure { Cos = 0, L2 = 1, Dot = 2 };

inline constexpr int kMeasureCount = 3;  // coU emits three values

inline int channel_index(PairType p, Measure m) {
    return static_cast<int>(p) * kMeasureCount + static_cast<int>(m);
}

inline std::string channel_name(int flat, bool directional) {
    static const char* measures[] = {"cos", "l2", "dot"};
    static const char* pairs[] = {"ff", "bb", "add", "cat"};
    if (directional) return std::string(pairs[flat / 3]) + "." + measures[flat % 3];
    return std::string("uni.") + measures[flat % 3];
}

struct SimCube {
    Tensor grid;  // [channels, |s1|, |s2|]
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool directional = false;
    std::size_t degenerate_pairs = 0;

    // set by apply_focus
    std::vector<double> focus_mask;  // rows*cols of {1.0, 0.1}
    std::vector<std::pair<std::size_t, std::size_t>> focused_pairs;

    int channels() const { return directional ? 4 * kMeasureCount : kMeasureCount; }
};

namespace detail {

// Accumulates d(loss)/d(a_k), d(loss)/d(b_k) for one coU of vectors a, b
// given the output gradients of its three measure channels.
template <typename GetA, typename GetB, typename AddDA, typename AddDB>
inline void cou_backward(std::size_t n, GetA a, GetB b, AddDA da, AddDB db, double g_cos,
                         double g_l2, double g_dot) {
    double s = 0.0, nu2 = 0.0, nv2 = 0.0, dd = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double ak = a(k), bk = b(k);
        s += ak * bk;
        nu2 += ak * ak;
        nv2 += bk * bk;
        dd += (ak - bk) * (ak - bk);
    }
    const double nu = std::sqrt(nu2), nv = std::sqrt(nv2);
    const double denom = nu * nv;
    const double dist = std::sqrt(dd);
    const double c = denom == 0.0 ? 0.0 : s / denom;
    for (std::size_t k = 0; k < n; ++k) {
        const double ak = a(k), bk = b(k);
        double ga = 0.0, gb = 0.0;
        if (g_cos != 0.0 && denom != 0.0) {
            ga += g_cos * (bk / denom - c * ak / nu2);
            gb += g_cos * (ak / denom - c * bk / nv2);
        }
        if (g_l2 != 0.0 && dist != 0.0) {
            ga += g_l2 * (ak - bk) / dist;
            gb -= g_l2 * (ak - bk) / dist;
        }
        ga += g_dot * bk;
        gb += g_dot * ak;
        da(k, ga);
        db(k, gb);
    }
}

}  // namespace detail

// 12-channel cube over directional context vectors. One recorded tape node
// with an analytic backward; forward accumulation matches a per-pair coU
// loop exactly.
inline SimCube build_simcube_directional(const Tensor& u_fwd, const Tensor& u_bwd,
                                         const Tensor& v_fwd, const Tensor& v_bwd) {
    if (u_fwd.rank() != 2 || u_bwd.shape() != u_fwd.shape() || v_fwd.rank() != 2 ||
        v_bwd.shape() != v_fwd.shape() || u_fwd.dim(1) != v_fwd.dim(1))
        throw ShapeError("build_simcube: directional halves disagree: " +
                         shape_str(u_fwd.shape()) + "/" + shape_str(u_bwd.shape()) + " vs " +
                         shape_str(v_fwd.shape()) + "/" + shape_str(v_bwd.shape()));
    const std::size_t n1 = u_fwd.dim(0), n2 = v_fwd.dim(0), h = u_fwd.dim(1);

    SimCube cube;
    cube.rows = n1;
    cube.cols = n2;
    cube.directional = true;
    cube.grid = Tensor::zeros({4 * kMeasureCount, n1, n2});

    const double* uf = u_fwd.data();
    const double* ub = u_bwd.data();
    const double* vf = v_fwd.data();
    const double* vb = v_bwd.data();
    double* g = cube.grid.data();
    const std::size_t plane = n1 * n2;

    std::vector<double> cat_u(2 * h), cat_v(2 * h), add_u(h), add_v(h);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t cell = i * n2 + j;
            auto put = [&](PairType p, const CoU& r) {
                g[channel_index(p, Measure::Cos) * plane + cell] = r.cos;
                g[channel_index(p, Measure::L2) * plane + cell] = r.l2;
                g[channel_index(p, Measure::Dot) * plane + cell] = r.dot;
                if (r.degenerate) ++cube.degenerate_pairs;
            };
            put(PairType::FF, co_u(uf + i * h, vf + j * h, h));
            put(PairType::BB, co_u(ub + i * h, vb + j * h, h));
            for (std::size_t k = 0; k < h; ++k) {
                add_u[k] = uf[i * h + k] + ub[i * h + k];
                add_v[k] = vf[j * h + k] + vb[j * h + k];
            }
            put(PairType::Add, co_u(add_u.data(), add_v.data(), h));
            for (std::size_t k = 0; k < h; ++k) {
                cat_u[k] = uf[i * h + k];
                cat_u[h + k] = ub[i * h + k];
                cat_v[k] = vf[j * h + k];
                cat_v[h + k] = vb[j * h + k];
            }
            put(PairType::Cat, co_u(cat_u.data(), cat_v.data(), 2 * h));
        }

    if (detail::taped({&u_fwd, &u_bwd, &v_fwd, &v_bwd})) {
        auto& tape = detail::arm(cube.grid, {&u_fwd, &u_bwd, &v_fwd, &v_bwd});
        auto ufi = u_fwd.impl(), ubi = u_bwd.impl(), vfi = v_fwd.impl(), vbi = v_bwd.impl();
        auto gi = cube.grid.impl();
        tape.record([ufi, ubi, vfi, vbi, gi, n1, n2, h, plane] {
            auto grad_of = [](const std::shared_ptr<pwi::detail::TensorImpl>& t) -> double* {
                return t->requires_grad ? t->grad.data() : nullptr;
            };
            double* duf = grad_of(ufi);
            double* dub = grad_of(ubi);
            double* dvf = grad_of(vfi);
            double* dvb = grad_of(vbi);
            const double* uf = ufi->value.data();
            const double* ub = ubi->value.data();
            const double* vf = vfi->value.data();
            const double* vb = vbi->value.data();
            const double* og = gi->grad.data();
            for (std::size_t i = 0; i < n1; ++i)
                for (std::size_t j = 0; j < n2; ++j) {
                    const std::size_t cell = i * n2 + j;
                    auto grads_at = [&](PairType p) {
                        return std::array<double, 3>{
                            og[channel_index(p, Measure::Cos) * plane + cell],
                            og[channel_index(p, Measure::L2) * plane + cell],
                            og[channel_index(p, Measure::Dot) * plane + cell]};
                    };
                    {
                        auto gg = grads_at(PairType::FF);
                        detail::cou_backward(
                            h, [&](std::size_t k) { return uf[i * h + k]; },
                            [&](std::size_t k) { return vf[j * h + k]; },
                            [&](std::size_t k, double d) { if (duf) duf[i * h + k] += d; },
                            [&](std::size_t k, double d) { if (dvf) dvf[j * h + k] += d; },
                            gg[0], gg[1], gg[2]);
                    }
                    {
                        auto gg = grads_at(PairType::BB);
                        detail::cou_backward(
                            h, [&](std::size_t k) { return ub[i * h + k]; },
                            [&](std::size_t k) { return vb[j * h + k]; },
                            [&](std::size_t k, double d) { if (dub) dub[i * h + k] += d; },
                            [&](std::size_t k, double d) { if (dvb) dvb[j * h + k] += d; },
                            gg[0], gg[1], gg[2]);
                    }
                    {
                        // additive halves share one gradient contribution
                        auto gg = grads_at(PairType::Add);
                        detail::cou_backward(
                            h, [&](std::size_t k) { return uf[i * h + k] + ub[i * h + k]; },
                            [&](std::size_t k) { return vf[j * h + k] + vb[j * h + k]; },
                            [&](std::size_t k, double d) {
                                if (duf) duf[i * h + k] += d;
                                if (dub) dub[i * h + k] += d;
                            },
                            [&](std::size_t k, double d) {
                                if (dvf) dvf[j * h + k] += d;
                                if (dvb) dvb[j * h + k] += d;
                            },
                            gg[0], gg[1], gg[2]);
                    }
                    {
                        // concatenation: first half forward, second backward
                        auto gg = grads_at(PairType::Cat);
                        detail::cou_backward(
                            2 * h,
                            [&](std::size_t k) {
                                return k < h ? uf[i * h + k] : ub[i * h + k - h];
                            },
                            [&](std::size_t k) {
                                return k < h ? vf[j * h + k] : vb[j * h + k - h];
                            },
                            [&](std::size_t k, double d) {
                                if (k < h) {
                                    if (duf) duf[i * h + k] += d;
                                } else if (dub) {
                                    dub[i * h + k - h] += d;
                                }
                            },
                            [&](std::size_t k, double d) {
                                if (k < h) {
                                    if (dvf) dvf[j * h + k] += d;
                                } else if (dvb) {
                                    dvb[j * h + k - h] += d;
                                }
                            },
                            gg[0], gg[1], gg[2]);
                    }
                }
        });
    }
    return cube;
}

// 3-channel cube from unified context vectors (no BiLSTM halves).
inline SimCube build_simcube_unified(const Tensor& u, const Tensor& v) {
    if (u.rank() != 2 || v.rank() != 2 || u.dim(1) != v.dim(1))
        throw ShapeError("build_simcube: unified vectors disagree: " + shape_str(u.shape()) +
                         " vs " + shape_str(v.shape()));
    const std::size_t n1 = u.dim(0), n2 = v.dim(0), h = u.dim(1);

    SimCube cube;
    cube.rows = n1;
    cube.cols = n2;
    cube.directional = false;
    cube.grid = Tensor::zeros({kMeasureCount, n1, n2});

    const std::size_t plane = n1 * n2;
    double* g = cube.grid.data();
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            const CoU r = co_u(u.data() + i * h, v.data() + j * h, h);
            const std::size_t cell = i * n2 + j;
            g[static_cast<int>(Measure::Cos) * plane + cell] = r.cos;
            g[static_cast<int>(Measure::L2) * plane + cell] = r.l2;
            g[static_cast<int>(Measure::Dot) * plane + cell] = r.dot;
            if (r.degenerate) ++cube.degenerate_pairs;
        }

    if (detail::taped({&u, &v})) {
        auto& tape = detail::arm(cube.grid, {&u, &v});
        auto ui = u.impl(), vi = v.impl(), gi = cube.grid.impl();
        tape.record([ui, vi, gi, n1, n2, h, plane] {
            double* du = ui->requires_grad ? ui->grad.data() : nullptr;
            double* dv = vi->requires_grad ? vi->grad.data() : nullptr;
            const double* uv = ui->value.data();
            const double* vv = vi->value.data();
            const double* og = gi->grad.data();
            for (std::size_t i = 0; i < n1; ++i)
                for (std::size_t j = 0; j < n2; ++j) {
                    const std::size_t cell = i * n2 + j;
                    detail::cou_backward(
                        h, [&](std::size_t k) { return uv[i * h + k]; },
                        [&](std::size_t k) { return vv[j * h + k]; },
                        [&](std::size_t k, double d) { if (du) du[i * h + k] += d; },
                        [&](std::size_t k, double d) { if (dv) dv[j * h + k] += d; },
                        og[0 * plane + cell], og[1 * plane + cell], og[2 * plane + cell]);
                }
        });
    }
    return cube;
}

inline SimCube build_simcube(const ContextVectors& cv) {
    const bool has_dir = cv.s1_fwd || cv.s1_bwd || cv.s2_fwd || cv.s2_bwd;
    const bool full_dir = cv.s1_fwd && cv.s1_bwd && cv.s2_fwd && cv.s2_bwd;
    const bool has_uni = cv.s1_unified && cv.s2_unified;
    if (has_dir && !full_dir)
        throw ConfigError("build_simcube: directional context is incomplete for one sentence");
    if (full_dir) return build_simcube_directional(*cv.s1_fwd, *cv.s1_bwd, *cv.s2_fwd, *cv.s2_bwd);
    if (!has_uni)
        throw ConfigError("build_simcube: context vectors carry neither directional halves nor "
                          "unified vectors");
    return build_simcube_unified(*cv.s1_unified, *cv.s2_unified);
}

// ---------------------------------------------------------------------------
// focus function
// ---------------------------------------------------------------------------

// Greedy matching over one similarity plane: visit cells in decreasing
// similarity (ties lexicographic by (i, j)), keep a cell when neither its
// row nor its column is taken yet.
inline std::vector<std::pair<std::size_t, std::size_t>> greedy_matching(
    const double* sim, std::size_t n1, std::size_t n2) {
    struct Cell {
        double s;
        std::size_t i, j;
    };
    std::vector<Cell> cells;
    cells.reserve(n1 * n2);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) cells.push_back({sim[i * n2 + j], i, j});
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.s != b.s) return a.s > b.s;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<char> row_used(n1, 0), col_used(n2, 0);
    std::vector<std::pair<std::size_t, std::size_t>> selected;
    for (const Cell& c : cells) {
        if (row_used[c.i] || col_used[c.j]) continue;
        row_used[c.i] = 1;
        col_used[c.j] = 1;
        selected.emplace_back(c.i, c.j);
    }
    return selected;
}

// Which similarity plane drives a focus pass. The first pass reads the
// cosine of the additive pair type (plain cosine on the unified path); an
// optional second pass reads the corresponding dot-product plane.
inline int focus_channel(bool directional, int pass) {
    const Measure m = pass == 0 ? Measure::Cos : Measure::Dot;
    return directional ? channel_index(PairType::Add, m) : static_cast<int>(m);
}

// Scales every channel at unselected positions by 0.1. The mask is a
// constant of the forward pass; gradients flow through the scaling only.
inline void apply_focus(SimCube& cube, int passes = 1) {
    if (passes < 1 || passes > 2)
        throw ConfigError("apply_focus: pass count must be 1 or 2, got " + std::to_string(passes));
    const std::size_t n1 = cube.rows, n2 = cube.cols;
    const std::size_t plane = n1 * n2;
    std::vector<double> mask(plane, 0.1);
    cube.focused_pairs.clear();
    for (int pass = 0; pass < passes; ++pass) {
        const double* sim = cube.grid.data() + focus_channel(cube.directional, pass) * plane;
        for (auto [i, j] : greedy_matching(sim, n1, n2)) {
            if (mask[i * n2 + j] != 1.0) cube.focused_pairs.emplace_back(i, j);
            mask[i * n2 + j] = 1.0;
        }
    }
    cube.grid = scale_by_mask(cube.grid, mask);
    cube.focus_mask = std::move(mask);
}

// CSV dump: one block per channel, then the focus mask when present.
inline void dump_cube_csv(const SimCube& cube, std::ostream& os) {
    const std::size_t plane = cube.rows * cube.cols;
    for (int c = 0; c < cube.channels(); ++c) {
        os << "# channel " << c << " " << channel_name(c, cube.directional) << "\n";
        for (std::size_t i = 0; i < cube.rows; ++i) {
            for (std::size_t j = 0; j < cube.cols; ++j) {
                if (j) os << ",";
                os << cube.grid.data()[c * plane + i * cube.cols + j];
            }
            os << "\n";
        }
    }
    if (!cube.focus_mask.empty()) {
        os << "# focus_mask\n";
        for (std::size_t i = 0; i < cube.rows; ++i) {
            for (std::size_t j = 0; j < cube.cols; ++j) {
                if (j) os << ",";
                os << cube.focus_mask[i * cube.cols + j];
            }
            os << "\n";
        }
    }
}

}  // namespace pwi
