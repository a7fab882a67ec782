#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyadnet/activation.hpp"
#include "dyadnet/csd.hpp"
#include "dyadnet/dyadic.hpp"
#include "dyadnet/errors.hpp"
#include "dyadnet/matrix.hpp"

namespace dyadnet {

/// One approximated weight matrix: integer matrix z scaled by 2^-scale_log2
/// (so t = z / 2^scale), with the expansion factor kept both as the real
/// sweep optimum and as its CSD rounding. Engines apply z first and fold
/// alpha and the scale into a single CSD constant per output value.
struct ApproximateWeight {
    int rows = 0;
    int cols = 0;
    double alpha = 1.0;                 // expansion factor from the sweep
    CsdCode alpha_csd;                  // alpha rounded to CSD (set-scale factorization)
    int scale_log2 = 0;                 // t = z / 2^scale_log2
    std::vector<std::int64_t> z;        // integer entries, row-major
    std::vector<CsdCode> z_csd;         // CSD form per integer entry
    double frobenius_error = 0.0;       // |M - alpha T|^2 from the sweep

    std::int64_t z_at(int r, int c) const { return z[static_cast<std::size_t>(r) * cols + c]; }

    DyadicRational entry(int r, int c) const { return DyadicRational(z_at(r, c), scale_log2); }

    DyadicMatrix t_star() const {
        DyadicMatrix t(rows, cols);
        for (std::size_t i = 0; i < z.size(); ++i) t.data[i] = DyadicRational(z[i], scale_log2);
        return t;
    }

    /// alpha_csd with the set scale folded in (integer-scale factorization):
    /// decoded weight = combined_factor() * z exactly.
    CsdCode combined_factor() const {
        CsdCode c = alpha_csd;
        for (auto& d : c.digits) d.exponent -= scale_log2;
        c.value = c.decode();
        return c;
    }

    /// Exact dyadic value of the realized weight at (r, c).
    double weight_value(int r, int c) const {
        return combined_factor().value * static_cast<double>(z_at(r, c));
    }
};

/// Pooling coefficient or bias replaced by its nearest CSD value.
struct CsdScalar {
    DyadicRational value;
    CsdCode csd;

    static CsdScalar encode(double v, int fraction_bits) {
        CsdScalar s;
        s.csd = csd_encode(v, fraction_bits);
        double scaled = std::ldexp(s.csd.value, fraction_bits);
        s.value = DyadicRational(std::llround(scaled), fraction_bits);
        return s;
    }
};

enum class LayerKind { Convolution, AveragePooling, FullyConnected };

inline const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Convolution: return "convolution";
        case LayerKind::AveragePooling: return "average_pooling";
        case LayerKind::FullyConnected: return "fully_connected";
    }
    return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "convolution") return LayerKind::Convolution;
    if (s == "average_pooling") return LayerKind::AveragePooling;
    if (s == "fully_connected") return LayerKind::FullyConnected;
    throw DataError("unknown layer kind \"" + s + "\"");
}

struct Connection {
    int from = 0; // input map
    int to = 0;   // output map

    friend bool operator==(const Connection&, const Connection&) = default;
};

struct Shape {
    int maps = 0;
    int height = 0;
    int width = 0;

    friend bool operator==(const Shape&, const Shape&) = default;

    std::string to_string() const {
        return std::to_string(maps) + "x" + std::to_string(height) + "x" + std::to_string(width);
    }
};

struct Layer {
    LayerKind kind = LayerKind::Convolution;
    ActivationKind activation = ActivationKind::Exact;
    int input_maps = 0;
    int output_maps = 0;

    // Convolution: one kernel per connection pair, in table order.
    int kernel_rows = 0;
    int kernel_cols = 0;
    std::vector<Connection> connections; // conv and fully-connected (complete bipartite)
    std::vector<RealMatrix> kernels;
    std::vector<ApproximateWeight> approx_kernels;

    // AveragePooling: one coefficient per map.
    int pool_rows = 0;
    int pool_cols = 0;
    std::vector<double> coefficients;
    std::vector<CsdScalar> approx_coefficients;

    // FullyConnected: output_maps x flattened-input matrix; approximate form
    // is one ApproximateWeight per output row (one expansion factor each).
    RealMatrix weights;
    std::vector<ApproximateWeight> approx_rows;

    // One bias per output map / neuron.
    std::vector<double> biases;
    std::vector<CsdScalar> approx_biases;

    std::string set_name; // dyadic set used when approximated

    bool has_weights() const { return kind != LayerKind::AveragePooling; }
};

struct NetworkModel {
    enum class Precision { Exact, Approximate };

    std::string name;
    Shape input; // input.maps = channels
    std::vector<Layer> layers;
    Precision precision = Precision::Exact;

    bool is_approximate() const { return precision == Precision::Approximate; }

    int weight_layer_count() const {
        int n = 0;
        for (const auto& l : layers)
            if (l.has_weights()) ++n;
        return n;
    }

    /// Output shape of layer `i` given its input shape; throws DataError with
    /// the layer position on any inconsistency.
    static Shape layer_output_shape(const Layer& l, const Shape& in, int layer_index,
                                    bool approximate) {
        auto fail = [layer_index](const std::string& what) -> Shape {
            throw DataError("layer " + std::to_string(layer_index) + ": " + what);
        };
        switch (l.kind) {
            case LayerKind::Convolution: {
                if (l.input_maps != in.maps)
                    return fail("expects " + std::to_string(l.input_maps) + " input maps, got " +
                                std::to_string(in.maps));
                if (l.kernel_rows <= 0 || l.kernel_cols <= 0) return fail("non-positive kernel size");
                if (l.kernel_rows > in.height || l.kernel_cols > in.width)
                    return fail("kernel exceeds input size " + in.to_string());
                std::size_t kcount = approximate ? l.approx_kernels.size() : l.kernels.size();
                if (l.connections.empty()) return fail("empty connection table");
                if (kcount != l.connections.size())
                    return fail("kernel count does not match connection table");
                std::vector<bool> covered(static_cast<std::size_t>(l.output_maps), false);
                for (const auto& c : l.connections) {
                    if (c.from < 0 || c.from >= in.maps || c.to < 0 || c.to >= l.output_maps)
                        return fail("dangling connection " + std::to_string(c.from) + "->" +
                                    std::to_string(c.to));
                    covered[static_cast<std::size_t>(c.to)] = true;
                }
                for (int m = 0; m < l.output_maps; ++m)
                    if (!covered[static_cast<std::size_t>(m)])
                        return fail("output map " + std::to_string(m) + " has no connection");
                for (std::size_t k = 0; k < kcount; ++k) {
                    int kr = approximate ? l.approx_kernels[k].rows : l.kernels[k].rows;
                    int kc = approximate ? l.approx_kernels[k].cols : l.kernels[k].cols;
                    if (kr != l.kernel_rows || kc != l.kernel_cols)
                        return fail("kernel " + std::to_string(k) + " has wrong dimensions");
                }
                if (l.biases.size() + l.approx_biases.size() != static_cast<std::size_t>(l.output_maps))
                    return fail("bias count does not match output maps");
                return {l.output_maps, in.height - l.kernel_rows + 1, in.width - l.kernel_cols + 1};
            }
            case LayerKind::AveragePooling: {
                if (l.input_maps != in.maps || l.output_maps != in.maps)
                    return fail("pooling must keep the map count");
                if (l.pool_rows <= 0 || l.pool_cols <= 0) return fail("non-positive pool window");
                if (in.height % l.pool_rows != 0 || in.width % l.pool_cols != 0)
                    return fail("pool window does not divide " + in.to_string());
                std::size_t ccount = approximate ? l.approx_coefficients.size() : l.coefficients.size();
                if (ccount != static_cast<std::size_t>(in.maps))
                    return fail("coefficient count does not match maps");
                if (l.biases.size() + l.approx_biases.size() != static_cast<std::size_t>(in.maps))
                    return fail("bias count does not match maps");
                return {in.maps, in.height / l.pool_rows, in.width / l.pool_cols};
            }
            case LayerKind::FullyConnected: {
                long flat = static_cast<long>(in.maps) * in.height * in.width;
                int in_size = approximate
                                  ? (l.approx_rows.empty() ? 0 : l.approx_rows.front().cols)
                                  : l.weights.cols;
                int out_size = approximate ? static_cast<int>(l.approx_rows.size()) : l.weights.rows;
                if (out_size != l.output_maps) return fail("row count does not match output count");
                if (in_size != flat)
                    return fail("weight columns (" + std::to_string(in_size) +
                                ") do not match flattened input (" + std::to_string(flat) + ")");
                if (l.connections.size() != static_cast<std::size_t>(in.maps) * l.output_maps)
                    return fail("fully-connected table must be complete bipartite");
                if (l.biases.size() + l.approx_biases.size() != static_cast<std::size_t>(l.output_maps))
                    return fail("bias count does not match outputs");
                return {l.output_maps, 1, 1};
            }
        }
        return fail("unknown layer kind");
    }

    Shape output_shape() const {
        if (layers.empty()) throw DataError("model has no layers");
        Shape s = input;
        for (std::size_t i = 0; i < layers.size(); ++i)
            s = layer_output_shape(layers[i], s, static_cast<int>(i), is_approximate());
        return s;
    }

    void validate() const {
        if (input.maps <= 0 || input.height <= 0 || input.width <= 0)
            throw DataError("model input shape must be positive");
        (void)output_shape();
    }
};

/// Complete bipartite table for fully-connected layers (generated, never
/// implied).
inline std::vector<Connection> complete_bipartite(int input_maps, int output_maps) {
    std::vector<Connection> t;
    t.reserve(static_cast<std::size_t>(input_maps) * output_maps);
    for (int o = 0; o < output_maps; ++o)
        for (int i = 0; i < input_maps; ++i) t.push_back({i, o});
    return t;
}

struct ParameterCensus {
    std::int64_t matrix_count = 0;     // kernels + pooling coefficients + FC rows
    std::int64_t weight_count = 0;     // matrix entries
    std::int64_t pool_coeff_count = 0;
    std::int64_t bias_count = 0;

    std::int64_t trainable_total() const { return weight_count + pool_coeff_count + bias_count; }
};

inline ParameterCensus parameter_census(const NetworkModel& model) {
    ParameterCensus c;
    const bool ap = model.is_approximate();
    for (const auto& l : model.layers) {
        c.bias_count += static_cast<std::int64_t>(ap ? l.approx_biases.size() : l.biases.size());
        switch (l.kind) {
            case LayerKind::Convolution: {
                std::int64_t k = static_cast<std::int64_t>(ap ? l.approx_kernels.size() : l.kernels.size());
                c.matrix_count += k;
                c.weight_count += k * l.kernel_rows * l.kernel_cols;
                break;
            }
            case LayerKind::AveragePooling: {
                std::int64_t n = static_cast<std::int64_t>(ap ? l.approx_coefficients.size()
                                                              : l.coefficients.size());
                c.matrix_count += n; // 1x1 coefficient matrices
                c.pool_coeff_count += n;
                break;
            }
            case LayerKind::FullyConnected: {
                std::int64_t rows = ap ? static_cast<std::int64_t>(l.approx_rows.size()) : l.weights.rows;
                std::int64_t cols = ap ? (l.approx_rows.empty() ? 0 : l.approx_rows.front().cols)
                                       : l.weights.cols;
                c.matrix_count += rows; // one weight vector per neuron
                c.weight_count += rows * cols;
                break;
            }
        }
    }
    return c;
}

} // namespace dyadnet
