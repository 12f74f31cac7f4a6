// Deep convolutional classifier over the focused similarity cube.
//
// Default stack: five blocks of (3x3 conv + ReLU) x {2,2,3,3,2}, each
// followed by a 2x2 max-pool, then two fully connected layers and a
// softmax. Counting convolutions, pools, and fully connected layers gives
// the 19 layers of the default configuration.
#pragma once

#include <cstddef>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "pwi/error.hpp"
#include "pwi/ops.hpp"
#include "pwi/tensor.hpp"

namespace pwi {

struct ConvBlockSpec {
    std::size_t convs = 1;
    std::size_t channels = 8;

    bool operator==(const ConvBlockSpec&) const = default;
};

struct ClassifierConfig {
    std::size_t grid_size = 32;
    std::vector<ConvBlockSpec> blocks = {{2, 128}, {2, 164}, {3, 192}, {3, 192}, {2, 128}};
    std::vector<std::size_t> fc_widths = {128};
    std::size_t classes = 5;

    bool operator==(const ClassifierConfig&) const = default;

    // convolutions + pools (one per block) + fully connected layers
    std::size_t counted_layers() const {
        std::size_t n = blocks.size() + fc_widths.size() + 1;
        for (const ConvBlockSpec& b : blocks) n += b.convs;
        return n;
    }

    // spatial side length entering each block, plus the final one
    std::vector<std::size_t> spatial_trace() const {
        std::vector<std::size_t> trace{grid_size};
        for (std::size_t b = 0; b < blocks.size(); ++b)
            trace.push_back((trace.back() + 1) / 2);
        return trace;
    }

    std::size_t flatten_size() const {
        const std::size_t side = spatial_trace().back();
        return blocks.back().channels * side * side;
    }

    void validate() const {
        if (classes < 2) throw ConfigError("classifier: at least 2 classes required");
        if (blocks.empty()) throw ConfigError("classifier: at least one conv block required");
        for (const ConvBlockSpec& b : blocks)
            if (b.convs == 0 || b.channels == 0)
                throw ConfigError("classifier: empty conv block in configuration");
        if (grid_size == 0) throw ConfigError("classifier: grid size must be positive");
    }
};

struct ConvLayerParams {
    Tensor kernel;  // [Cout, Cin, 3, 3]
    Tensor bias;    // [Cout]
};

struct FcParams {
    Tensor weight;  // [out, in]
    Tensor bias;    // [out]
};

struct ClassifierParams {
    std::vector<std::vector<ConvLayerParams>> blocks;
    std::vector<FcParams> fc;  // hidden layers then the output layer

    static ClassifierParams init(const ClassifierConfig& cfg, std::size_t in_channels,
                                 std::mt19937_64& rng) {
        cfg.validate();
        ClassifierParams p;
        std::size_t cin = in_channels;
        for (const ConvBlockSpec& spec : cfg.blocks) {
            std::vector<ConvLayerParams> block;
            for (std::size_t c = 0; c < spec.convs; ++c) {
                block.push_back({Tensor::uniform({spec.channels, cin, 3, 3}, -0.05, 0.05, rng),
                                 Tensor::zeros({spec.channels}, true)});
                cin = spec.channels;
            }
            p.blocks.push_back(std::move(block));
        }
        std::size_t in = cfg.flatten_size();
        for (std::size_t w : cfg.fc_widths) {
            p.fc.push_back({Tensor::uniform({w, in}, -0.05, 0.05, rng), Tensor::zeros({w}, true)});
            in = w;
        }
        p.fc.push_back(
            {Tensor::uniform({cfg.classes, in}, -0.05, 0.05, rng), Tensor::zeros({cfg.classes}, true)});
        return p;
    }

    std::size_t in_channels() const { return blocks.at(0).at(0).kernel.dim(1); }

    std::vector<Tensor> parameters() {
        std::vector<Tensor> out;
        for (auto& block : blocks)
            for (auto& conv : block) {
                out.push_back(conv.kernel);
                out.push_back(conv.bias);
            }
        for (auto& layer : fc) {
            out.push_back(layer.weight);
            out.push_back(layer.bias);
        }
        return out;
    }
};

// Fits a variable [C, |s1|, |s2|] cube onto the fixed CNN grid: zero-pad
// bottom/right, truncate sentences past the grid edge.
inline Tensor pad_to_grid(const Tensor& grid, std::size_t s) {
    if (grid.rank() != 3) throw ShapeError("pad_to_grid: need [C,H,W], got " +
                                           shape_str(grid.shape()));
    if (grid.dim(1) > s || grid.dim(2) > s)
        std::cerr << "warning: interaction grid " << grid.dim(1) << "x" << grid.dim(2)
                  << " truncated to the first " << s << " tokens per sentence\n";
    return pad2d(grid, s);
}

// [C,S,S] grid to a distribution over classes.
inline Tensor cnn_forward(const Tensor& grid, const ClassifierConfig& cfg,
                          const ClassifierParams& params) {
    if (grid.rank() != 3 || grid.dim(0) != params.in_channels() || grid.dim(1) != cfg.grid_size ||
        grid.dim(2) != cfg.grid_size)
        throw ConfigError("cnn_forward: grid " + shape_str(grid.shape()) +
                          " does not match classifier expecting [" +
                          std::to_string(params.in_channels()) + " x " +
                          std::to_string(cfg.grid_size) + " x " + std::to_string(cfg.grid_size) +
                          "]");
    Tensor x = grid;
    for (const auto& block : params.blocks) {
        for (const auto& conv : block)
            x = relu(add_channel_bias(conv2d(x, conv.kernel), conv.bias));
        x = maxpool2d(x);
    }
    Tensor flat = reshape(x, {x.size()});
    for (std::size_t f = 0; f + 1 < params.fc.size(); ++f)
        flat = relu(add(matvec(params.fc[f].weight, flat), params.fc[f].bias));
    const FcParams& out = params.fc.back();
    return softmax(add(matvec(out.weight, flat), out.bias), 0);
}

}  // namespace pwi
