#pragma once

#include <random>

#include "dyadnet/model.hpp"

namespace dyadnet {

/// Face-detector architecture skeleton: 32x36 retina, four alternating
/// convolution / pooling layers (4, 4, 14, 14 maps), 14 neurons treated as
/// 7x6 convolutions connected one-to-one, one output neuron. 951 trainable
/// parameters. Weights start at zero.
inline NetworkModel make_cff_skeleton() {
    NetworkModel m;
    m.name = "cff";
    m.input = {1, 36, 32};

    Layer c1;
    c1.kind = LayerKind::Convolution;
    c1.input_maps = 1;
    c1.output_maps = 4;
    c1.kernel_rows = 5;
    c1.kernel_cols = 5;
    for (int i = 0; i < 4; ++i) {
        c1.connections.push_back({0, i});
        c1.kernels.emplace_back(5, 5);
    }
    c1.biases.assign(4, 0.0);
    m.layers.push_back(std::move(c1));

    Layer p1;
    p1.kind = LayerKind::AveragePooling;
    p1.input_maps = p1.output_maps = 4;
    p1.pool_rows = p1.pool_cols = 2;
    p1.coefficients.assign(4, 0.0);
    p1.biases.assign(4, 0.0);
    m.layers.push_back(std::move(p1));

    Layer c2;
    c2.kind = LayerKind::Convolution;
    c2.input_maps = 4;
    c2.output_maps = 14;
    c2.kernel_rows = 3;
    c2.kernel_cols = 3;
    // partial connectivity: eight single-input maps, six two-input maps
    for (int t = 0; t < 8; ++t) c2.connections.push_back({t % 4, t});
    const int pairs[6][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}};
    for (int t = 0; t < 6; ++t) {
        c2.connections.push_back({pairs[t][0], 8 + t});
        c2.connections.push_back({pairs[t][1], 8 + t});
    }
    c2.kernels.assign(20, RealMatrix(3, 3));
    c2.biases.assign(14, 0.0);
    m.layers.push_back(std::move(c2));

    Layer p2;
    p2.kind = LayerKind::AveragePooling;
    p2.input_maps = p2.output_maps = 14;
    p2.pool_rows = p2.pool_cols = 2;
    p2.coefficients.assign(14, 0.0);
    p2.biases.assign(14, 0.0);
    m.layers.push_back(std::move(p2));

    Layer n1; // neurons as full-extent convolutions, one per map
    n1.kind = LayerKind::Convolution;
    n1.input_maps = 14;
    n1.output_maps = 14;
    n1.kernel_rows = 7;
    n1.kernel_cols = 6;
    for (int i = 0; i < 14; ++i) {
        n1.connections.push_back({i, i});
        n1.kernels.emplace_back(7, 6);
    }
    n1.biases.assign(14, 0.0);
    m.layers.push_back(std::move(n1));

    Layer out;
    out.kind = LayerKind::FullyConnected;
    out.input_maps = 14;
    out.output_maps = 1;
    out.weights = RealMatrix(1, 14);
    out.connections = complete_bipartite(14, 1);
    out.biases.assign(1, 0.0);
    m.layers.push_back(std::move(out));

    m.validate();
    return m;
}

/// Digit-classifier architecture skeleton: 32x32 input, 5 conv maps (5x5),
/// pooling, 50 conv maps (3x3, fully connected), pooling, 100 neurons as 6x6
/// convolutions (fully connected), 10 outputs. 183375 weights.
inline NetworkModel make_mnist_skeleton() {
    NetworkModel m;
    m.name = "mnist-net";
    m.input = {1, 32, 32};

    Layer c1;
    c1.kind = LayerKind::Convolution;
    c1.input_maps = 1;
    c1.output_maps = 5;
    c1.kernel_rows = c1.kernel_cols = 5;
    for (int i = 0; i < 5; ++i) {
        c1.connections.push_back({0, i});
        c1.kernels.emplace_back(5, 5);
    }
    c1.biases.assign(5, 0.0);
    m.layers.push_back(std::move(c1));

    Layer p1;
    p1.kind = LayerKind::AveragePooling;
    p1.input_maps = p1.output_maps = 5;
    p1.pool_rows = p1.pool_cols = 2;
    p1.coefficients.assign(5, 0.0);
    p1.biases.assign(5, 0.0);
    m.layers.push_back(std::move(p1));

    Layer c2;
    c2.kind = LayerKind::Convolution;
    c2.input_maps = 5;
    c2.output_maps = 50;
    c2.kernel_rows = c2.kernel_cols = 3;
    for (int o = 0; o < 50; ++o)
        for (int i = 0; i < 5; ++i) c2.connections.push_back({i, o});
    c2.kernels.assign(250, RealMatrix(3, 3));
    c2.biases.assign(50, 0.0);
    m.layers.push_back(std::move(c2));

    Layer p2;
    p2.kind = LayerKind::AveragePooling;
    p2.input_maps = p2.output_maps = 50;
    p2.pool_rows = p2.pool_cols = 2;
    p2.coefficients.assign(50, 0.0);
    p2.biases.assign(50, 0.0);
    m.layers.push_back(std::move(p2));

    Layer n1;
    n1.kind = LayerKind::Convolution;
    n1.input_maps = 50;
    n1.output_maps = 100;
    n1.kernel_rows = n1.kernel_cols = 6;
    for (int o = 0; o < 100; ++o)
        for (int i = 0; i < 50; ++i) n1.connections.push_back({i, o});
    n1.kernels.assign(5000, RealMatrix(6, 6));
    n1.biases.assign(100, 0.0);
    m.layers.push_back(std::move(n1));

    Layer out;
    out.kind = LayerKind::FullyConnected;
    out.input_maps = 100;
    out.output_maps = 10;
    out.weights = RealMatrix(10, 100);
    out.connections = complete_bipartite(100, 10);
    out.biases.assign(10, 0.0);
    m.layers.push_back(std::move(out));

    m.validate();
    return m;
}

/// Fill every weight, coefficient and bias with N(0, sigma) values from a
/// seeded generator. Handy for deterministic test fixtures.
inline void randomize_weights(NetworkModel& model, std::uint32_t seed, double sigma = 0.25) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    for (auto& l : model.layers) {
        for (auto& k : l.kernels)
            for (auto& v : k.data) v = dist(rng);
        for (auto& v : l.weights.data) v = dist(rng);
        for (auto& c : l.coefficients) c = 0.5 + 0.25 * dist(rng);
        for (auto& b : l.biases) b = 0.25 * dist(rng);
    }
}

} // namespace dyadnet
