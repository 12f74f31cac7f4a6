#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pwi/ops.hpp"
#include "pwi/tensor.hpp"

using namespace pwi;

TEST(Tensor, ShapeMatchesStorage) {
    Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    EXPECT_EQ(shape_size(t.shape()), t.values().size());
    EXPECT_EQ(t.rank(), 2u);
    EXPECT_EQ(t.dim(0), 2u);
    EXPECT_EQ(t.dim(1), 3u);
}

TEST(Tensor, GradSharesShape) {
    Tensor t = Tensor::zeros({4, 2}, true);
    EXPECT_EQ(t.grad().size(), t.size());
}

TEST(Tensor, FromRejectsLengthMismatch) {
    EXPECT_THROW(Tensor::from({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
}

TEST(Tensor, ItemRequiresScalar) {
    EXPECT_THROW(Tensor::from({2}, {1.0, 2.0}).item(), ContractError);
    EXPECT_DOUBLE_EQ(Tensor::scalar(7.0).item(), 7.0);
}

TEST(Tensor, UniformIsSeedDeterministic) {
    std::mt19937_64 a(7), b(7);
    Tensor x = Tensor::uniform({3, 3}, -1.0, 1.0, a);
    Tensor y = Tensor::uniform({3, 3}, -1.0, 1.0, b);
    EXPECT_EQ(x.values(), y.values());
    for (double v : x.values()) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Tape, SquareGradient) {
    Tensor x = Tensor::scalar(3.0, true);
    TapeScope scope;
    Tensor loss = mul(x, x);
    scope.backward(loss);
    EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(Tape, SoftmaxSumHasZeroGradient) {
    Tensor x = Tensor::from({3}, {0.3, -1.2, 2.0}, true);
    TapeScope scope;
    scope.backward(sum(softmax(x, 0)));
    for (double g : x.grad()) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(Tape, UnreachableTensorKeepsZeroGrad) {
    Tensor a = Tensor::scalar(2.0, true);
    Tensor b = Tensor::scalar(5.0, true);
    TapeScope scope;
    scope.backward(mul(a, a));
    EXPECT_DOUBLE_EQ(b.grad()[0], 0.0);
}

TEST(Tape, SecondBackwardRejected) {
    Tensor x = Tensor::scalar(1.0, true);
    TapeScope scope;
    Tensor loss = mul(x, x);
    Tape::current()->backward(loss);
    EXPECT_THROW(Tape::current()->backward(loss), ContractError);
}

TEST(Tape, BackwardNeedsScalarLoss) {
    Tensor x = Tensor::from({2}, {1.0, 2.0}, true);
    TapeScope scope;
    Tensor y = mul(x, x);
    EXPECT_THROW(Tape::current()->backward(y), ContractError);
}

// Reverse-order traversal is observable through a reused intermediate:
// z = y*y with y = tanh(x) only differentiates correctly when y's node
// runs after z's.
TEST(Tape, ReusedIntermediateAccumulates) {
    Tensor x = Tensor::scalar(0.7, true);
    TapeScope scope;
    Tensor y = pwi::tanh(x);
    scope.backward(mul(y, y));
    const double yv = std::tanh(0.7);
    EXPECT_NEAR(x.grad()[0], 2.0 * yv * (1.0 - yv * yv), 1e-12);
}

TEST(Ops, MatmulIdentity) {
    Tensor i2 = Tensor::from({2, 2}, {1, 0, 0, 1});
    Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
    EXPECT_EQ(matmul(i2, m).values(), m.values());
}

TEST(Ops, MatmulHandValue) {
    Tensor a = Tensor::from({1, 2}, {1, 2});
    Tensor b = Tensor::from({2, 1}, {3, 4});
    EXPECT_DOUBLE_EQ(matmul(a, b).values()[0], 11.0);
}

TEST(Ops, MatmulShapeError) {
    Tensor a = Tensor::from({2, 3}, std::vector<double>(6, 1.0));
    Tensor b = Tensor::from({2, 2}, std::vector<double>(4, 1.0));
    EXPECT_THROW(matmul(a, b), ShapeError);
}

TEST(Ops, MatmulMatchesNaiveBitwise) {
    std::mt19937_64 rng(11);
    Tensor a = Tensor::uniform({4, 5}, -2.0, 2.0, rng);
    Tensor b = Tensor::uniform({5, 3}, -2.0, 2.0, rng);
    EXPECT_EQ(matmul(a, b).values(), oracle::matmul(a.values(), 4, 5, b.values(), 3));
}

TEST(Ops, MatmulSumGradIsOnesTimesBT) {
    std::mt19937_64 rng(12);
    Tensor a = Tensor::uniform({3, 4}, -1.0, 1.0, rng);
    Tensor b = Tensor::uniform({4, 2}, -1.0, 1.0, rng);
    a.set_requires_grad(true);
    {
        TapeScope scope;
        scope.backward(sum(matmul(a, b)));
    }
    // d/dA sum(AB) = ones(m,n) x B^T; entry (i,t) = sum_j B[t,j]
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t t = 0; t < 4; ++t) {
            double expect = 0.0;
            for (std::size_t j = 0; j < 2; ++j) expect += b.values()[t * 2 + j];
            EXPECT_NEAR(a.grad()[i * 4 + t], expect, 1e-12);
        }
}

TEST(Ops, SoftmaxUniformOnZeros) {
    Tensor x = Tensor::from({3}, {0, 0, 0});
    const std::vector<double> p = softmax(x, 0).values();
    for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Ops, SoftmaxShiftInvariant) {
    Tensor x = Tensor::from({4}, {0.5, -1.0, 2.0, 0.25});
    Tensor y = Tensor::from({4}, {0.5 + 3.0, -1.0 + 3.0, 2.0 + 3.0, 0.25 + 3.0});
    std::vector<double> px = softmax(x, 0).values(), py = softmax(y, 0).values();
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(px[i], py[i], 1e-12);
}

TEST(Ops, SoftmaxHandValue) {
    Tensor x = Tensor::from({2}, {0.0, std::log(3.0)});
    std::vector<double> p = softmax(x, 0).values();
    EXPECT_NEAR(p[0], 0.25, 1e-12);
    EXPECT_NEAR(p[1], 0.75, 1e-12);
}

TEST(Ops, SoftmaxRejectsNaN) {
    Tensor x = Tensor::from({2}, {std::nan(""), 0.0});
    EXPECT_THROW(softmax(x, 0), NumericError);
}

TEST(Ops, ConvZeroInputZeroOutput) {
    Tensor in = Tensor::zeros({1, 3, 3});
    Tensor k = Tensor::from({1, 1, 3, 3}, std::vector<double>(9, 0.5));
    const std::vector<double> out = conv2d(in, k).values();
    for (double v : out) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Ops, ConvOnesKernelCounts) {
    Tensor in = Tensor::from({1, 3, 3}, std::vector<double>(9, 1.0));
    Tensor k = Tensor::from({1, 1, 3, 3}, std::vector<double>(9, 1.0));
    std::vector<double> out = conv2d(in, k).values();
    EXPECT_DOUBLE_EQ(out[4], 9.0);  // center
    EXPECT_DOUBLE_EQ(out[1], 6.0);  // edge
    EXPECT_DOUBLE_EQ(out[0], 4.0);  // corner
}

TEST(Ops, ConvMatchesNaiveBitwise) {
    std::mt19937_64 rng(13);
    Tensor in = Tensor::uniform({3, 5, 4}, -1.0, 1.0, rng);
    Tensor k = Tensor::uniform({2, 3, 3, 3}, -1.0, 1.0, rng);
    EXPECT_EQ(conv2d(in, k).values(), oracle::conv2d(in.values(), 3, 5, 4, k.values(), 2, 3, 3));
}

TEST(Ops, ConvRejectsEvenKernel) {
    Tensor in = Tensor::zeros({1, 4, 4});
    Tensor k = Tensor::zeros({1, 1, 2, 2});
    EXPECT_THROW(conv2d(in, k), ShapeError);
}

TEST(Ops, MaxpoolHandValue) {
    Tensor in = Tensor::from({1, 2, 2}, {1, 2, 3, 4});
    std::vector<double> out = maxpool2d(in).values();
    ASSERT_EQ(out.size(), 1u);
    EXPECT_DOUBLE_EQ(out[0], 4.0);
}

TEST(Ops, MaxpoolTieGradientOnFirstElement) {
    Tensor in = Tensor::from({1, 2, 2}, {5, 5, 5, 5}, true);
    {
        TapeScope scope;
        scope.backward(sum(maxpool2d(in)));
    }
    EXPECT_DOUBLE_EQ(in.grad()[0], 1.0);
    EXPECT_DOUBLE_EQ(in.grad()[1], 0.0);
    EXPECT_DOUBLE_EQ(in.grad()[2], 0.0);
    EXPECT_DOUBLE_EQ(in.grad()[3], 0.0);
}

TEST(Ops, MaxpoolMatchesNaive) {
    std::mt19937_64 rng(14);
    Tensor in = Tensor::uniform({2, 8, 8}, -3.0, 3.0, rng);
    EXPECT_EQ(maxpool2d(in).values(), oracle::maxpool2d(in.values(), 2, 8, 8));
}

TEST(Ops, MaxpoolOddEdges) {
    Tensor in = Tensor::from({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    Tensor out = maxpool2d(in);
    ASSERT_EQ(out.shape(), (Shape{1, 2, 2}));
    EXPECT_DOUBLE_EQ(out.values()[0], 5.0);
    EXPECT_DOUBLE_EQ(out.values()[1], 6.0);
    EXPECT_DOUBLE_EQ(out.values()[2], 8.0);
    EXPECT_DOUBLE_EQ(out.values()[3], 9.0);
}

TEST(Ops, LogRejectsNonPositive) {
    EXPECT_THROW(pwi::log(Tensor::from({2}, {1.0, 0.0})), NumericError);
    EXPECT_THROW(pwi::log(Tensor::from({1}, {-2.0})), NumericError);
}

TEST(Ops, CosineSimilarityZeroVectorIsZero) {
    Tensor a = Tensor::from({2}, {0.0, 0.0});
    Tensor b = Tensor::from({2}, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(cosine_similarity(a, b).item(), 0.0);
}

TEST(Ops, Pad2dPlacesBlockTopLeft) {
    Tensor x = Tensor::from({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
    Tensor p = pad2d(x, 4);
    ASSERT_EQ(p.shape(), (Shape{2, 4, 4}));
    EXPECT_DOUBLE_EQ(p.values()[0], 1.0);
    EXPECT_DOUBLE_EQ(p.values()[1], 2.0);
    EXPECT_DOUBLE_EQ(p.values()[4], 3.0);
    EXPECT_DOUBLE_EQ(p.values()[2], 0.0);
    EXPECT_DOUBLE_EQ(p.values()[15], 0.0);
}

TEST(Ops, Pad2dIdentityWhenSized) {
    Tensor x = Tensor::from({1, 2, 2}, {1, 2, 3, 4});
    EXPECT_EQ(pad2d(x, 2).values(), x.values());
}

// Gradient reaching the input must come only from the original region;
// weights multiplying padding cells must not leak in.
TEST(Ops, Pad2dPaddingContributesNoGradient) {
    std::mt19937_64 rng(15);
    Tensor x = Tensor::uniform({2, 3, 3}, -1.0, 1.0, rng);
    Tensor w = Tensor::uniform({2, 5, 5}, -1.0, 1.0, rng);
    x.set_requires_grad(true);
    {
        TapeScope scope;
        scope.backward(sum(mul(pad2d(x, 5), w)));
    }
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                EXPECT_DOUBLE_EQ(x.grad()[(c * 3 + i) * 3 + j], w.values()[(c * 5 + i) * 5 + j]);
}

TEST(Ops, EmbeddingScatterAddsGradient) {
    Tensor table = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6}, true);
    {
        TapeScope scope;
        scope.backward(sum(embedding(table, {1, 1, 0})));
    }
    EXPECT_DOUBLE_EQ(table.grad()[0], 1.0);  // id 0 once
    EXPECT_DOUBLE_EQ(table.grad()[2], 2.0);  // id 1 twice
    EXPECT_DOUBLE_EQ(table.grad()[4], 0.0);  // id 2 unused
}

// Finite-difference checks for every differentiable op, at smooth points.
TEST(Gradients, ElementwiseOps) {
    std::mt19937_64 rng(21);
    Tensor a = Tensor::uniform({2, 3}, 0.2, 1.5, rng);
    Tensor b = Tensor::uniform({2, 3}, 0.2, 1.5, rng);
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    auto check = [&](const std::function<Tensor()>& f) {
        oracle::GradCheck r = oracle::grad_check({a, b}, f);
        EXPECT_LE(r.max_rel, 1e-4);
        EXPECT_GE(r.points, 10u);
    };
    check([&] { return sum(add(a, b)); });
    check([&] { return sum(sub(a, b)); });
    check([&] { return sum(mul(a, b)); });
    check([&] { return sum(pwi::tanh(a)); });
    check([&] { return sum(sigmoid(a)); });
    check([&] { return sum(relu(a)); });  // inputs bounded away from 0
    check([&] { return sum(pwi::log(a)); });
    check([&] { return sum(mul_scalar(a, -1.7)); });
    check([&] { return sum(add_scalar(a, 0.3)); });
    check([&] { return mean(mul(a, a)); });
}

TEST(Gradients, LinearAlgebraOps) {
    std::mt19937_64 rng(22);
    Tensor a = Tensor::uniform({3, 4}, -1.0, 1.0, rng);
    Tensor b = Tensor::uniform({4, 2}, -1.0, 1.0, rng);
    Tensor v = Tensor::uniform({4}, -1.0, 1.0, rng);
    Tensor u = Tensor::uniform({4}, 0.3, 1.0, rng);
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    v.set_requires_grad(true);
    u.set_requires_grad(true);
    EXPECT_LE(oracle::grad_check({a, b}, [&] { return sum(matmul(a, b)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({a, v}, [&] { return sum(matvec(a, v)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({a}, [&] { return sum(mul(transpose(a), transpose(a))); }).max_rel,
              1e-4);
    EXPECT_LE(oracle::grad_check({u, v}, [&] { return dot(u, v); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({u}, [&] { return l2_norm(u); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({u, v}, [&] { return cosine_similarity(u, v); }).max_rel, 1e-4);
}

TEST(Gradients, StructuralOps) {
    std::mt19937_64 rng(23);
    Tensor a = Tensor::uniform({2, 3}, -1.0, 1.0, rng);
    Tensor b = Tensor::uniform({2, 3}, -1.0, 1.0, rng);
    Tensor bias = Tensor::uniform({3}, -1.0, 1.0, rng);
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    bias.set_requires_grad(true);
    auto sq = [](const Tensor& t) { return sum(mul(t, t)); };
    EXPECT_LE(oracle::grad_check({a}, [&] { return sq(reshape(a, {6})); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({a, b}, [&] { return sq(concat({a, b}, 0)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({a, b}, [&] { return sq(concat({a, b}, 1)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({a}, [&] { return sq(row(a, 1)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({a}, [&] { return sq(slice_rows(a, 0, 2)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({a}, [&] {
                  return sq(stack_rows({row(a, 0), row(a, 1)}));
              }).max_rel,
              1e-4);
    EXPECT_LE(oracle::grad_check({a, bias}, [&] { return sq(add_row_bias(a, bias)); }).max_rel,
              1e-4);
    EXPECT_LE(oracle::grad_check({a}, [&] {
                  Tensor flat = reshape(a, {6});
                  return sq(slice(flat, 1, 5));
              }).max_rel,
              1e-4);
    EXPECT_LE(oracle::grad_check({a}, [&] {
                  Tensor flat = reshape(a, {6});
                  return mul(at(flat, 2), at(flat, 2));
              }).max_rel,
              1e-4);
}

TEST(Gradients, SoftmaxAndSpatialOps) {
    std::mt19937_64 rng(24);
    Tensor x = Tensor::uniform({2, 4}, -1.0, 1.0, rng);
    Tensor img = Tensor::uniform({2, 5, 5}, -1.0, 1.0, rng);
    Tensor ker = Tensor::uniform({3, 2, 3, 3}, -1.0, 1.0, rng);
    Tensor cb = Tensor::uniform({3}, -1.0, 1.0, rng);
    x.set_requires_grad(true);
    img.set_requires_grad(true);
    ker.set_requires_grad(true);
    cb.set_requires_grad(true);
    auto sq = [](const Tensor& t) { return sum(mul(t, t)); };
    EXPECT_LE(oracle::grad_check({x}, [&] { return sq(softmax(x, 0)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({x}, [&] { return sq(softmax(x, 1)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({img, ker}, [&] { return sq(conv2d(img, ker)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({img}, [&] { return sq(maxpool2d(img)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({img}, [&] { return sq(pad2d(img, 7)); }).max_rel, 1e-4);
    EXPECT_LE(oracle::grad_check({img, ker, cb},
                                 [&] { return sq(add_channel_bias(conv2d(img, ker), cb)); })
                  .max_rel,
              1e-4);
    std::vector<double> mask(25);
    for (std::size_t i = 0; i < 25; ++i) mask[i] = i % 2 ? 1.0 : 0.1;
    EXPECT_LE(oracle::grad_check({img}, [&] { return sq(scale_by_mask(img, mask)); }).max_rel,
              1e-4);
    Tensor table = Tensor::uniform({4, 3}, -1.0, 1.0, rng);
    table.set_requires_grad(true);
    EXPECT_LE(oracle::grad_check({table}, [&] {
                  return sq(embedding(table, {0, 2, 2, 3}));
              }).max_rel,
              1e-4);
}
