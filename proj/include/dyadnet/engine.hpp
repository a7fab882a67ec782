#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadnet/activation.hpp"
#include "dyadnet/errors.hpp"
#include "dyadnet/model.hpp"

namespace dyadnet {

struct FixedPointFormat {
    enum class Overflow { Saturate, Error };

    int total_bits = 32;
    int fraction_bits = 16;
    Overflow overflow_policy = Overflow::Saturate;

    void validate() const {
        if (!(fraction_bits > 0 && fraction_bits < total_bits && total_bits <= 62))
            throw ConfigError("FixedPointFormat: need 0 < fraction_bits < total_bits <= 62");
    }

    std::int64_t raw_limit() const { return (std::int64_t(1) << (total_bits - 1)) - 1; }
};

/// Per-inference operation counters. `multiplications` counts general
/// two-operand multiplies in the weight arithmetic; the multiplierless engine
/// never issues one. Activation internals are not mixed into the arithmetic
/// counters; scalar-domain activation calls only tick `activation_evals`.
struct InstructionTrace {
    std::uint64_t multiplications = 0;            // weight * value (reference engine)
    std::uint64_t additions = 0;                  // within-kernel / within-dot accumulation
    std::uint64_t csd_additions = 0;              // adds from CSD digit expansion
    std::uint64_t bit_shifts = 0;                 // shifts from CSD digit expansion
    std::uint64_t combine_additions = 0;          // summing connections into a shared map
    std::uint64_t bias_additions = 0;             // applying a nonzero bias
    std::uint64_t pooling_additions = 0;          // window sums
    std::uint64_t coefficient_multiplications = 0; // pooling coefficient (reference engine)
    std::uint64_t activation_evals = 0;
    std::uint64_t saturations = 0;

    nlohmann::ordered_json to_json() const {
        return nlohmann::ordered_json{{"multiplications", multiplications},
                                      {"additions", additions},
                                      {"csd_additions", csd_additions},
                                      {"bit_shifts", bit_shifts},
                                      {"combine_additions", combine_additions},
                                      {"bias_additions", bias_additions},
                                      {"pooling_additions", pooling_additions},
                                      {"coefficient_multiplications", coefficient_multiplications},
                                      {"activation_evals", activation_evals},
                                      {"saturations", saturations}};
    }
};

/// Multi-channel real-valued input image, map-major row-major storage.
struct Image {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int c, int h, int w)
        : channels(c), height(h), width(w),
          data(static_cast<std::size_t>(c) * h * w, 0.0) {}

    double& at(int c, int r, int col) {
        return data[(static_cast<std::size_t>(c) * height + r) * width + col];
    }
    double at(int c, int r, int col) const {
        return data[(static_cast<std::size_t>(c) * height + r) * width + col];
    }
};

namespace detail {

struct MapSet {
    int maps = 0, height = 0, width = 0;
    std::vector<double> v;

    MapSet(int m, int h, int w)
        : maps(m), height(h), width(w), v(static_cast<std::size_t>(m) * h * w, 0.0) {}
    double& at(int m, int r, int c) {
        return v[(static_cast<std::size_t>(m) * height + r) * width + c];
    }
    double at(int m, int r, int c) const {
        return v[(static_cast<std::size_t>(m) * height + r) * width + c];
    }
};

struct FixedMapSet {
    int maps = 0, height = 0, width = 0;
    std::vector<std::int64_t> v;

    FixedMapSet(int m, int h, int w)
        : maps(m), height(h), width(w), v(static_cast<std::size_t>(m) * h * w, 0) {}
    std::int64_t& at(int m, int r, int c) {
        return v[(static_cast<std::size_t>(m) * height + r) * width + c];
    }
    std::int64_t at(int m, int r, int c) const {
        return v[(static_cast<std::size_t>(m) * height + r) * width + c];
    }
};

// Arithmetic shift with round-half-toward-plus-infinity on right shifts.
inline std::int64_t shift_round(std::int64_t v, int k) {
    if (k >= 0) return v << k;
    int s = -k;
    if (s >= 63) return 0;
    return (v + (std::int64_t(1) << (s - 1))) >> s;
}

// x times the coded constant, as the digit-wise shift-add expansion.
inline std::int64_t csd_apply(std::int64_t x, const CsdCode& code, InstructionTrace& t) {
    std::int64_t acc = 0;
    bool first = true;
    for (const auto& d : code.digits) {
        std::int64_t term = shift_round(x, d.exponent);
        if (d.exponent != 0) ++t.bit_shifts;
        if (first) {
            acc = d.sign > 0 ? term : -term;
            first = false;
        } else {
            acc += d.sign > 0 ? term : -term;
            ++t.csd_additions;
        }
    }
    return acc;
}

// Forming a coded constant from its digits (bias application).
inline std::int64_t csd_constant(const CsdCode& code, int fraction_bits, InstructionTrace& t) {
    std::int64_t acc = 0;
    bool first = true;
    for (const auto& d : code.digits) {
        int e = d.exponent + fraction_bits;
        std::int64_t term = e >= 0 ? (std::int64_t(1) << e) : shift_round(1, e);
        if (d.exponent != 0) ++t.bit_shifts;
        if (first) {
            acc = d.sign > 0 ? term : -term;
            first = false;
        } else {
            acc += d.sign > 0 ? term : -term;
            ++t.csd_additions;
        }
    }
    return acc;
}

inline std::int64_t saturate(std::int64_t v, const FixedPointFormat& fmt, InstructionTrace& t,
                             int layer, const std::string& where) {
    std::int64_t lim = fmt.raw_limit();
    if (v > lim || v < -lim) {
        if (fmt.overflow_policy == FixedPointFormat::Overflow::Error)
            throw DataError("layer " + std::to_string(layer) + ": fixed-point overflow at " + where);
        ++t.saturations;
        return v > lim ? lim : -lim;
    }
    return v;
}

inline std::int64_t ah_times(std::int64_t x) { // 7/4 = 2 - 1/4
    return (x << 1) - shift_round(x, -2);
}

inline std::int64_t fixed_activate(ActivationKind kind, std::int64_t raw,
                                   const FixedPointFormat& fmt, InstructionTrace& t) {
    ++t.activation_evals;
    const int f = fmt.fraction_bits;
    const std::int64_t one = std::int64_t(1) << f;
    const std::int64_t ah_one = ah_times(one);
    switch (kind) {
        case ActivationKind::Identity:
            return raw;
        case ActivationKind::Relu:
            return raw > 0 ? raw : 0;
        case ActivationKind::LinearI: {
            if (raw >= 4 * one) return ah_one;
            if (raw < -4 * one) return -ah_one;
            return ah_times(shift_round(raw, -2));
        }
        case ActivationKind::LinearII: {
            if (raw >= 2 * one) return ah_one;
            if (raw < -2 * one) return -ah_one;
            return ah_times(shift_round(raw, -1));
        }
        case ActivationKind::Plan: {
            std::int64_t x = raw < 0 ? -raw : raw;
            std::int64_t p;
            if (x < one)
                p = shift_round(x, -1);
            else if (x < shift_round(19 * one, -3))
                p = shift_round(x, -2) + shift_round(one, -2);
            else if (x < 5 * one)
                p = shift_round(x, -4) + shift_round(11 * one, -4);
            else
                p = one;
            std::int64_t y = ah_times(p);
            return raw < 0 ? -y : y;
        }
        case ActivationKind::Asg: {
            std::int64_t x = raw < 0 ? -raw : raw;
            std::int64_t k = x >> f;
            std::int64_t g;
            if (k >= 62) {
                g = one;
            } else {
                std::int64_t fr = x & (one - 1);
                std::int64_t inner = one - (fr >> 1);
                g = one - shift_round(inner, -static_cast<int>(k));
            }
            std::int64_t y = ah_times(g);
            return raw < 0 ? -y : y;
        }
        case ActivationKind::Exact:
        case ActivationKind::QuadraticI:
        case ActivationKind::QuadraticII: {
            // scalar-domain evaluation, requantized to the working format
            double x = std::ldexp(static_cast<double>(raw), -f);
            return std::llround(std::ldexp(activate(kind, x), f));
        }
    }
    return raw;
}

} // namespace detail

/// Floating-point reference evaluator. Approximate models run on their
/// decoded dyadic weights, so only fixed-point rounding separates this from
/// the multiplierless engine.
inline std::vector<double> infer_reference(const NetworkModel& model, const Image& input,
                                           InstructionTrace* trace_out = nullptr) {
    model.validate();
    if (input.channels != model.input.maps || input.height != model.input.height ||
        input.width != model.input.width)
        throw DataError("input shape does not match the model");

    InstructionTrace trace;
    const bool ap = model.is_approximate();
    detail::MapSet cur(input.channels, input.height, input.width);
    cur.v = input.data;

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const Layer& l = model.layers[li];
        Shape out_shape = NetworkModel::layer_output_shape(
            l, {cur.maps, cur.height, cur.width}, static_cast<int>(li), ap);
        detail::MapSet next(out_shape.maps, out_shape.height, out_shape.width);

        switch (l.kind) {
            case LayerKind::Convolution: {
                std::vector<bool> written(static_cast<std::size_t>(l.output_maps), false);
                for (std::size_t k = 0; k < l.connections.size(); ++k) {
                    const auto& conn = l.connections[k];
                    std::vector<double> w;
                    if (ap) {
                        const auto& aw = l.approx_kernels[k];
                        double factor = aw.combined_factor().value;
                        w.reserve(aw.z.size());
                        for (std::int64_t z : aw.z) w.push_back(factor * static_cast<double>(z));
                    } else {
                        w = l.kernels[k].data;
                    }
                    const int kr = l.kernel_rows, kc = l.kernel_cols;
                    for (int r = 0; r < next.height; ++r) {
                        for (int c = 0; c < next.width; ++c) {
                            double acc = 0.0;
                            for (int i = 0; i < kr; ++i)
                                for (int j = 0; j < kc; ++j)
                                    acc += w[static_cast<std::size_t>(i) * kc + j] *
                                           cur.at(conn.from, r + i, c + j);
                            trace.multiplications += static_cast<std::uint64_t>(kr) * kc;
                            trace.additions += static_cast<std::uint64_t>(kr) * kc - 1;
                            if (written[static_cast<std::size_t>(conn.to)]) {
                                next.at(conn.to, r, c) += acc;
                                ++trace.combine_additions;
                            } else {
                                next.at(conn.to, r, c) = acc;
                            }
                        }
                    }
                    written[static_cast<std::size_t>(conn.to)] = true;
                }
                for (int m = 0; m < l.output_maps; ++m) {
                    double bias = ap ? l.approx_biases[m].value.value() : l.biases[m];
                    for (int r = 0; r < next.height; ++r)
                        for (int c = 0; c < next.width; ++c) {
                            if (bias != 0.0) {
                                next.at(m, r, c) += bias;
                                ++trace.bias_additions;
                            }
                            next.at(m, r, c) = activate(l.activation, next.at(m, r, c));
                            ++trace.activation_evals;
                        }
                }
                break;
            }
            case LayerKind::AveragePooling: {
                const int pr = l.pool_rows, pc = l.pool_cols;
                const double inv = 1.0 / (pr * pc);
                for (int m = 0; m < next.maps; ++m) {
                    double coeff = ap ? l.approx_coefficients[m].value.value() : l.coefficients[m];
                    double bias = ap ? l.approx_biases[m].value.value() : l.biases[m];
                    for (int r = 0; r < next.height; ++r)
                        for (int c = 0; c < next.width; ++c) {
                            double sum = 0.0;
                            for (int i = 0; i < pr; ++i)
                                for (int j = 0; j < pc; ++j)
                                    sum += cur.at(m, r * pr + i, c * pc + j);
                            trace.pooling_additions += static_cast<std::uint64_t>(pr) * pc - 1;
                            double v = sum * inv * coeff;
                            ++trace.coefficient_multiplications;
                            if (bias != 0.0) {
                                v += bias;
                                ++trace.bias_additions;
                            }
                            next.at(m, r, c) = activate(l.activation, v);
                            ++trace.activation_evals;
                        }
                }
                break;
            }
            case LayerKind::FullyConnected: {
                const std::size_t in_size = cur.v.size();
                for (int o = 0; o < l.output_maps; ++o) {
                    double acc = 0.0;
                    if (ap) {
                        const auto& row = l.approx_rows[o];
                        double factor = row.combined_factor().value;
                        for (std::size_t i = 0; i < in_size; ++i)
                            acc += factor * static_cast<double>(row.z[i]) * cur.v[i];
                    } else {
                        for (std::size_t i = 0; i < in_size; ++i)
                            acc += l.weights.data[static_cast<std::size_t>(o) * in_size + i] * cur.v[i];
                    }
                    trace.multiplications += in_size;
                    trace.additions += in_size - 1;
                    double bias = ap ? l.approx_biases[o].value.value() : l.biases[o];
                    if (bias != 0.0) {
                        acc += bias;
                        ++trace.bias_additions;
                    }
                    next.at(o, 0, 0) = activate(l.activation, acc);
                    ++trace.activation_evals;
                }
                break;
            }
        }
        cur = std::move(next);
    }

    if (trace_out) *trace_out = trace;
    return cur.v;
}

/// Fixed-point evaluator for approximate models only: every multiplication by
/// a network constant is expanded into its CSD shift-add sequence, and the
/// trace proves no general multiply was issued.
inline std::vector<double> infer_multiplierless(const NetworkModel& model, const Image& input,
                                                const FixedPointFormat& fmt = {},
                                                InstructionTrace* trace_out = nullptr) {
    fmt.validate();
    model.validate();
    if (!model.is_approximate())
        throw DataError("multiplierless engine requires an approximate model");
    if (input.channels != model.input.maps || input.height != model.input.height ||
        input.width != model.input.width)
        throw DataError("input shape does not match the model");

    using detail::csd_apply;
    using detail::csd_constant;
    using detail::saturate;
    using detail::shift_round;

    InstructionTrace trace;
    const int f = fmt.fraction_bits;
    detail::FixedMapSet cur(input.channels, input.height, input.width);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        std::int64_t q = std::llround(std::ldexp(input.data[i], f));
        cur.v[i] = saturate(q, fmt, trace, -1, "input");
    }

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const Layer& l = model.layers[li];
        const int layer = static_cast<int>(li);
        Shape out_shape = NetworkModel::layer_output_shape(
            l, {cur.maps, cur.height, cur.width}, layer, true);
        detail::FixedMapSet next(out_shape.maps, out_shape.height, out_shape.width);

        auto apply_bias_act = [&](std::int64_t acc, const CsdScalar& bias,
                                  const std::string& where) -> std::int64_t {
            if (!bias.csd.digits.empty()) {
                acc += csd_constant(bias.csd, f, trace);
                ++trace.bias_additions;
            }
            std::int64_t y = detail::fixed_activate(l.activation, acc, fmt, trace);
            return saturate(y, fmt, trace, layer, where);
        };

        switch (l.kind) {
            case LayerKind::Convolution: {
                std::vector<bool> written(static_cast<std::size_t>(l.output_maps), false);
                std::vector<CsdCode> factors;
                factors.reserve(l.approx_kernels.size());
                for (const auto& aw : l.approx_kernels) factors.push_back(aw.combined_factor());
                for (std::size_t k = 0; k < l.connections.size(); ++k) {
                    const auto& conn = l.connections[k];
                    const auto& aw = l.approx_kernels[k];
                    const int kr = aw.rows, kc = aw.cols;
                    for (int r = 0; r < next.height; ++r) {
                        for (int c = 0; c < next.width; ++c) {
                            std::int64_t acc = 0;
                            bool first = true;
                            for (int i = 0; i < kr; ++i)
                                for (int j = 0; j < kc; ++j) {
                                    const auto& code = aw.z_csd[static_cast<std::size_t>(i) * kc + j];
                                    if (code.digits.empty()) continue;
                                    std::int64_t term =
                                        csd_apply(cur.at(conn.from, r + i, c + j), code, trace);
                                    if (first) {
                                        acc = term;
                                        first = false;
                                    } else {
                                        acc += term;
                                        ++trace.additions;
                                    }
                                }
                            acc = csd_apply(acc, factors[k], trace);
                            if (written[static_cast<std::size_t>(conn.to)]) {
                                next.at(conn.to, r, c) += acc;
                                ++trace.combine_additions;
                            } else {
                                next.at(conn.to, r, c) = acc;
                            }
                        }
                    }
                    written[static_cast<std::size_t>(conn.to)] = true;
                }
                for (int m = 0; m < l.output_maps; ++m)
                    for (int r = 0; r < next.height; ++r)
                        for (int c = 0; c < next.width; ++c)
                            next.at(m, r, c) =
                                apply_bias_act(next.at(m, r, c), l.approx_biases[m],
                                               "map " + std::to_string(m) + " pixel (" +
                                                   std::to_string(r) + "," + std::to_string(c) + ")");
                break;
            }
            case LayerKind::AveragePooling: {
                const int pr = l.pool_rows, pc = l.pool_cols;
                const int win = pr * pc;
                if ((win & (win - 1)) != 0)
                    throw DataError("layer " + std::to_string(layer) +
                                    ": multiplierless pooling needs a power-of-two window");
                int mean_shift = 0;
                while ((1 << mean_shift) < win) ++mean_shift;
                for (int m = 0; m < next.maps; ++m) {
                    const auto& coeff = l.approx_coefficients[m];
                    for (int r = 0; r < next.height; ++r)
                        for (int c = 0; c < next.width; ++c) {
                            std::int64_t sum = 0;
                            for (int i = 0; i < pr; ++i)
                                for (int j = 0; j < pc; ++j)
                                    sum += cur.at(m, r * pr + i, c * pc + j);
                            trace.pooling_additions += static_cast<std::uint64_t>(win) - 1;
                            std::int64_t mean = shift_round(sum, -mean_shift);
                            if (mean_shift > 0) ++trace.bit_shifts;
                            std::int64_t v = csd_apply(mean, coeff.csd, trace);
                            next.at(m, r, c) = apply_bias_act(
                                v, l.approx_biases[m],
                                "map " + std::to_string(m) + " pixel (" + std::to_string(r) + "," +
                                    std::to_string(c) + ")");
                        }
                }
                break;
            }
            case LayerKind::FullyConnected: {
                const std::size_t in_size = cur.v.size();
                for (int o = 0; o < l.output_maps; ++o) {
                    const auto& row = l.approx_rows[o];
                    CsdCode factor = row.combined_factor();
                    std::int64_t acc = 0;
                    bool first = true;
                    for (std::size_t i = 0; i < in_size; ++i) {
                        if (row.z_csd[i].digits.empty()) continue;
                        std::int64_t term = csd_apply(cur.v[i], row.z_csd[i], trace);
                        if (first) {
                            acc = term;
                            first = false;
                        } else {
                            acc += term;
                            ++trace.additions;
                        }
                    }
                    acc = csd_apply(acc, factor, trace);
                    next.at(o, 0, 0) =
                        apply_bias_act(acc, l.approx_biases[o], "output " + std::to_string(o));
                }
                break;
            }
        }
        cur = std::move(next);
    }

    std::vector<double> out;
    out.reserve(cur.v.size());
    for (std::int64_t v : cur.v) out.push_back(std::ldexp(static_cast<double>(v), -f));
    if (trace_out) *trace_out = trace;
    return out;
}

} // namespace dyadnet
