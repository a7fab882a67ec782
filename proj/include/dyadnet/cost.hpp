#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "dyadnet/csd.hpp"
#include "dyadnet/errors.hpp"
#include "dyadnet/model.hpp"

namespace dyadnet {

/// Static arithmetic cost, counted per single application of every weight
/// structure (each kernel, pooling window and neuron applied once):
///  - multiplications: one per weight entry (exact models only)
///  - additions: the accumulations inside each dot product, size - 1 per
///    kernel / neuron row; bias applications and window sums are not part of
///    this column, which is why it is identical across exact and approximate
///    variants of one architecture
///  - csd_additions / bit_shifts: csd_cost summed over every CSD constant of
///    an approximate model (integer weight entries, one combined expansion
///    factor per matrix, pooling coefficients, biases)
struct CostLine {
    std::string label;
    std::uint64_t multiplications = 0;
    std::uint64_t additions = 0;
    std::uint64_t csd_additions = 0;
    std::uint64_t bit_shifts = 0;
};

struct CostReport {
    bool approximate = false;
    std::uint64_t multiplications = 0;
    std::uint64_t additions = 0;
    std::uint64_t csd_additions = 0;
    std::uint64_t bit_shifts = 0;
    std::vector<CostLine> per_layer;
};

inline CostReport static_cost(const NetworkModel& model) {
    model.validate();
    CostReport report;
    report.approximate = model.is_approximate();
    const bool ap = report.approximate;

    int index = 0;
    for (const auto& l : model.layers) {
        CostLine line;
        line.label = std::string(to_string(l.kind)) + "[" + std::to_string(index++) + "]";

        auto add_code = [&line](const CsdCode& code) {
            CsdCost c = csd_cost(code);
            line.csd_additions += static_cast<std::uint64_t>(c.additions);
            line.bit_shifts += static_cast<std::uint64_t>(c.shifts);
        };
        auto add_weight_matrix = [&](const ApproximateWeight& w) {
            for (const auto& code : w.z_csd) add_code(code);
            add_code(w.combined_factor());
        };

        switch (l.kind) {
            case LayerKind::Convolution: {
                std::uint64_t size = static_cast<std::uint64_t>(l.kernel_rows) * l.kernel_cols;
                std::uint64_t count = static_cast<std::uint64_t>(ap ? l.approx_kernels.size()
                                                                    : l.kernels.size());
                line.additions = count * (size - 1);
                if (ap)
                    for (const auto& w : l.approx_kernels) add_weight_matrix(w);
                else
                    line.multiplications = count * size;
                break;
            }
            case LayerKind::AveragePooling: {
                if (ap)
                    for (const auto& c : l.approx_coefficients) add_code(c.csd);
                break;
            }
            case LayerKind::FullyConnected: {
                std::uint64_t rows = ap ? l.approx_rows.size() : static_cast<std::uint64_t>(l.weights.rows);
                std::uint64_t cols = ap ? (l.approx_rows.empty() ? 0 : static_cast<std::uint64_t>(l.approx_rows.front().cols))
                                        : static_cast<std::uint64_t>(l.weights.cols);
                line.additions = rows * (cols - 1);
                if (ap)
                    for (const auto& w : l.approx_rows) add_weight_matrix(w);
                else
                    line.multiplications = rows * cols;
                break;
            }
        }
        if (ap)
            for (const auto& b : l.approx_biases) add_code(b.csd);

        report.multiplications += line.multiplications;
        report.additions += line.additions;
        report.csd_additions += line.csd_additions;
        report.bit_shifts += line.bit_shifts;
        report.per_layer.push_back(std::move(line));
    }
    return report;
}

namespace detail {

inline std::string cost_cell(const CostReport& r, std::uint64_t v) {
    if (!r.approximate) return "-"; // exact models have no CSD expansion
    return std::to_string(v);
}

} // namespace detail

/// One row per model, columns "Mult., Add., CSD Add., Bit-shifting".
inline std::string cost_table_csv(const std::vector<std::pair<std::string, CostReport>>& rows) {
    if (rows.empty()) throw ConfigError("cost table needs at least one model");
    std::ostringstream out;
    out << "Model,Mult.,Add.,CSD Add.,Bit-shifting\n";
    for (const auto& [label, r] : rows)
        out << label << ',' << r.multiplications << ',' << r.additions << ','
            << detail::cost_cell(r, r.csd_additions) << ','
            << detail::cost_cell(r, r.bit_shifts) << '\n';
    return out.str();
}

inline std::string cost_table_markdown(const std::vector<std::pair<std::string, CostReport>>& rows) {
    if (rows.empty()) throw ConfigError("cost table needs at least one model");
    std::ostringstream out;
    out << "| Model | Mult. | Add. | CSD Add. | Bit-shifting |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& [label, r] : rows)
        out << "| " << label << " | " << r.multiplications << " | " << r.additions << " | "
            << detail::cost_cell(r, r.csd_additions) << " | "
            << detail::cost_cell(r, r.bit_shifts) << " |\n";
    return out.str();
}

} // namespace dyadnet
