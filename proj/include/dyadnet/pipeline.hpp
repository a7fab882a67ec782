#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "dyadnet/approx.hpp"
#include "dyadnet/csd.hpp"
#include "dyadnet/errors.hpp"
#include "dyadnet/model.hpp"

namespace dyadnet {

inline constexpr int kAlphaFractionBits = 8;   // CSD width for expansion factors
inline constexpr int kScalarFractionBits = 7;  // 8-bit codes for pooling and bias

/// One dyadic set per weight-bearing layer, parsed from "i" (broadcast) or
/// "i,j,k,...".
struct SchemeAssignment {
    std::vector<std::string> set_names;

    static SchemeAssignment parse(const std::string& text, int weight_layers) {
        if (weight_layers <= 0) throw ConfigError("scheme: model has no weight layers");
        std::vector<int> idx;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t comma = text.find(',', pos);
            std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                          : comma - pos);
            if (tok.empty()) throw ConfigError("scheme: empty index in \"" + text + "\"");
            int i = 0;
            try {
                i = std::stoi(tok);
            } catch (const std::exception&) {
                throw ConfigError("scheme: bad index \"" + tok + "\"");
            }
            if (i < 1 || i > 10) throw ConfigError("scheme: set index must be 1..10");
            idx.push_back(i);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (idx.size() == 1) idx.assign(static_cast<std::size_t>(weight_layers), idx[0]);
        if (idx.size() != static_cast<std::size_t>(weight_layers))
            throw ConfigError("scheme lists " + std::to_string(idx.size()) + " sets but the model has " +
                              std::to_string(weight_layers) + " weight layers");
        SchemeAssignment s;
        for (int i : idx) s.set_names.push_back("D" + std::to_string(i));
        return s;
    }

    std::string label() const {
        std::string out = "A";
        bool uniform = true;
        for (const auto& n : set_names)
            if (n != set_names.front()) uniform = false;
        if (uniform) return out + set_names.front().substr(1);
        for (std::size_t i = 0; i < set_names.size(); ++i) {
            if (i) out += ',';
            out += set_names[i].substr(1);
        }
        return out;
    }
};

/// Scheme label recovered from an approximate model's per-layer set names.
inline std::string scheme_label(const NetworkModel& model) {
    std::vector<std::string> names;
    for (const auto& l : model.layers)
        if (l.has_weights() && !l.set_name.empty()) names.push_back(l.set_name);
    if (names.empty()) return "";
    SchemeAssignment s;
    s.set_names = names;
    return s.label();
}

/// Sweep one matrix and package the result for the multiplierless engines.
inline ApproximateWeight approximate_matrix(const RealMatrix& m, const DyadicSet& set,
                                            const SweepConfig& cfg = {},
                                            int alpha_fraction_bits = kAlphaFractionBits) {
    ApproximationResult res = sweep(m, set, cfg);
    ApproximateWeight w;
    w.rows = m.rows;
    w.cols = m.cols;
    w.alpha = res.alpha_star;
    w.alpha_csd = csd_encode(res.alpha_star, alpha_fraction_bits);
    w.scale_log2 = set.scale_log2();
    w.frobenius_error = res.error_star;
    w.z.reserve(res.t_star.data.size());
    for (const auto& r : res.t_star.data)
        w.z.push_back(r.num << (w.scale_log2 - r.log2_den));
    w.z_csd.reserve(w.z.size());
    for (std::int64_t z : w.z) w.z_csd.push_back(csd_encode_integer(z));
    return w;
}

namespace detail {

inline int worker_count(std::size_t tasks) {
    unsigned n = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("DYADNET_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) n = static_cast<unsigned>(v);
    }
    if (n == 0) n = 1;
    if (tasks < 16) return 1;
    return static_cast<int>(std::min<std::size_t>(n, tasks));
}

struct MatrixTask {
    const RealMatrix* src = nullptr;
    const DyadicSet* set = nullptr;
    ApproximateWeight* dst = nullptr;
};

// Independent per-matrix sweeps; each task writes only its own slot, so the
// result is identical for any worker count.
inline void run_matrix_tasks(std::vector<MatrixTask>& tasks, const SweepConfig& cfg,
                             int alpha_bits) {
    int workers = worker_count(tasks.size());
    if (workers <= 1) {
        for (auto& t : tasks) *t.dst = approximate_matrix(*t.src, *t.set, cfg, alpha_bits);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (tasks.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        std::size_t lo = static_cast<std::size_t>(w) * chunk;
        std::size_t hi = std::min(tasks.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&tasks, &cfg, alpha_bits, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i)
                *tasks[i].dst = approximate_matrix(*tasks[i].src, *tasks[i].set, cfg, alpha_bits);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail

/// Replace every weight matrix by its dyadic approximation over the scheme's
/// set for that layer, every pooling coefficient and bias by its nearest
/// 8-bit CSD value, and every sigmoid activation by `activation`.
inline NetworkModel approximate_network(const NetworkModel& model, const SchemeAssignment& scheme,
                                        ActivationKind activation,
                                        const SweepConfig& cfg = {},
                                        int alpha_fraction_bits = kAlphaFractionBits,
                                        int scalar_fraction_bits = kScalarFractionBits) {
    if (model.is_approximate())
        throw ConfigError("approximate_network expects an exact model");
    model.validate();
    if (static_cast<int>(scheme.set_names.size()) != model.weight_layer_count())
        throw ConfigError("scheme lists " + std::to_string(scheme.set_names.size()) +
                          " sets but the model has " + std::to_string(model.weight_layer_count()) +
                          " weight layers");

    NetworkModel out = model;
    out.precision = NetworkModel::Precision::Approximate;

    std::vector<DyadicSet> sets;
    sets.reserve(scheme.set_names.size());
    for (const auto& n : scheme.set_names) sets.push_back(DyadicSet::builtin(n));

    // Per-row views for fully-connected layers must outlive the task run.
    std::vector<RealMatrix> row_storage;
    std::size_t row_count = 0;
    for (const auto& l : out.layers)
        if (l.kind == LayerKind::FullyConnected) row_count += static_cast<std::size_t>(l.weights.rows);
    row_storage.reserve(row_count);

    std::vector<detail::MatrixTask> tasks;
    int weight_layer = 0;
    for (auto& l : out.layers) {
        if (!l.has_weights()) continue;
        const DyadicSet& set = sets[static_cast<std::size_t>(weight_layer)];
        l.set_name = set.name();
        if (l.kind == LayerKind::Convolution) {
            l.approx_kernels.resize(l.kernels.size());
            for (std::size_t k = 0; k < l.kernels.size(); ++k)
                tasks.push_back({&l.kernels[k], &set, &l.approx_kernels[k]});
        } else {
            l.approx_rows.resize(static_cast<std::size_t>(l.weights.rows));
            for (int r = 0; r < l.weights.rows; ++r) {
                std::vector<double> row(l.weights.data.begin() + static_cast<std::size_t>(r) * l.weights.cols,
                                        l.weights.data.begin() + static_cast<std::size_t>(r + 1) * l.weights.cols);
                row_storage.emplace_back(1, l.weights.cols, std::move(row));
                tasks.push_back({&row_storage.back(), &set, &l.approx_rows[static_cast<std::size_t>(r)]});
            }
        }
        ++weight_layer;
    }

    detail::run_matrix_tasks(tasks, cfg, alpha_fraction_bits);

    for (auto& l : out.layers) {
        for (double c : l.coefficients)
            l.approx_coefficients.push_back(CsdScalar::encode(c, scalar_fraction_bits));
        for (double b : l.biases)
            l.approx_biases.push_back(CsdScalar::encode(b, scalar_fraction_bits));
        l.coefficients.clear();
        l.biases.clear();
        l.kernels.clear();
        l.weights = RealMatrix();
        if (l.activation != ActivationKind::Relu && l.activation != ActivationKind::Identity)
            l.activation = activation;
    }

    out.validate();
    return out;
}

} // namespace dyadnet
