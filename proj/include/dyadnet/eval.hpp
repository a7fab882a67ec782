#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadnet/dataset.hpp"
#include "dyadnet/engine.hpp"
#include "dyadnet/errors.hpp"
#include "dyadnet/model.hpp"
#include "dyadnet/pipeline.hpp"

namespace dyadnet {

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct EvalReport {
    std::string model_name;
    std::string scheme;     // "A7", "A7,3,3,3", empty for exact models
    std::string activation; // activation tag of the evaluated model
    int sample_count = 0;
    int class_count = 0;
    std::uint64_t dataset_digest = 0;
    int top_k = 1;
    double accuracy = 0.0;
    double top_k_accuracy = 0.0;
    std::vector<std::vector<RocPoint>> roc; // per class, ascending threshold
};

enum class EngineChoice { Reference, Multiplierless };

inline EngineChoice engine_from_string(const std::string& s) {
    if (s == "reference") return EngineChoice::Reference;
    if (s == "multiplierless") return EngineChoice::Multiplierless;
    throw ConfigError("unknown engine \"" + s + "\" (reference or multiplierless)");
}

/// Argmax with ties broken toward the lower class index.
inline int predict_class(const std::vector<double>& scores) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(scores.size()); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

/// Metrics from raw per-sample score vectors; the evaluation path on real
/// models feeds inference outputs through here.
inline EvalReport metrics_from_scores(const std::vector<std::vector<double>>& scores,
                                      const std::vector<int>& labels, int class_count, int k,
                                      std::uint64_t dataset_digest = 0) {
    if (scores.size() != labels.size() || scores.empty())
        throw DataError("metrics: scores and labels must be non-empty and equal length");
    if (k < 1) throw ConfigError("metrics: top-k needs k >= 1");

    EvalReport r;
    r.sample_count = static_cast<int>(scores.size());
    r.class_count = class_count;
    r.dataset_digest = dataset_digest;
    r.top_k = k;

    std::int64_t correct = 0, topk_hits = 0;
    for (std::size_t s = 0; s < scores.size(); ++s) {
        const auto& v = scores[s];
        if (static_cast<int>(v.size()) != class_count)
            throw DataError("metrics: score vector size does not match class count");
        int label = labels[s];
        if (predict_class(v) == label) ++correct;
        // rank of the label under (score desc, index asc)
        int rank = 1;
        for (int j = 0; j < class_count; ++j) {
            if (j == label) continue;
            if (v[j] > v[label] || (v[j] == v[label] && j < label)) ++rank;
        }
        if (rank <= k) ++topk_hits;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.sample_count);
    r.top_k_accuracy = static_cast<double>(topk_hits) / static_cast<double>(r.sample_count);

    // one-vs-rest ROC per class over the observed score thresholds
    r.roc.resize(static_cast<std::size_t>(class_count));
    for (int c = 0; c < class_count; ++c) {
        std::vector<double> thresholds;
        thresholds.reserve(scores.size());
        for (const auto& v : scores) thresholds.push_back(v[c]);
        std::sort(thresholds.begin(), thresholds.end());
        thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
        std::int64_t pos = 0, neg = 0;
        for (int lab : labels) (lab == c ? pos : neg)++;
        for (double th : thresholds) {
            std::int64_t tp = 0, fp = 0;
            for (std::size_t s = 0; s < scores.size(); ++s) {
                if (scores[s][c] >= th) (labels[s] == c ? tp : fp)++;
            }
            RocPoint p;
            p.threshold = th;
            p.tpr = pos ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0;
            p.fpr = neg ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0;
            r.roc[static_cast<std::size_t>(c)].push_back(p);
        }
    }
    return r;
}

/// Run the model over the dataset (images adapted to the model input shape)
/// and compute classification metrics.
inline EvalReport evaluate(const NetworkModel& model, const LabeledDataset& dataset, int k = 1,
                           EngineChoice engine = EngineChoice::Reference,
                           const FixedPointFormat& fmt = {}) {
    model.validate();
    if (dataset.samples.empty()) throw DataError("evaluate: empty dataset");
    Shape out = model.output_shape();
    int out_size = out.maps * out.height * out.width;
    if (out_size != dataset.class_count)
        throw DataError("evaluate: model outputs " + std::to_string(out_size) + " values but the dataset has " +
                        std::to_string(dataset.class_count) + " classes");

    std::vector<std::vector<double>> scores;
    std::vector<int> labels;
    scores.reserve(dataset.samples.size());
    labels.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) {
        Image img = adapt_to_shape(s.image, model.input.height, model.input.width);
        if (img.channels != model.input.maps)
            throw DataError("evaluate: sample channel count does not match the model");
        scores.push_back(engine == EngineChoice::Reference
                             ? infer_reference(model, img)
                             : infer_multiplierless(model, img, fmt));
        labels.push_back(s.label);
    }
    EvalReport r = metrics_from_scores(scores, labels, dataset.class_count, k, dataset.digest);
    r.model_name = model.name;
    r.scheme = scheme_label(model);
    r.activation = model.layers.empty() ? "" : to_string(model.layers.back().activation);
    return r;
}

struct RelativeRow {
    std::string label;
    std::string scheme;
    std::string activation;
    double relative_accuracy = 0.0;
    double relative_top_k = 0.0;
};

/// Relative metrics against a baseline report from the same dataset.
inline std::vector<RelativeRow> compare(const EvalReport& exact,
                                        const std::vector<EvalReport>& reports) {
    std::vector<RelativeRow> rows;
    for (const auto& r : reports) {
        if (r.dataset_digest != exact.dataset_digest)
            throw DataError("compare: reports come from different datasets");
        RelativeRow row;
        row.label = r.model_name.empty() ? r.scheme : r.model_name;
        if (!r.scheme.empty()) row.label += " (" + r.scheme + ")";
        row.scheme = r.scheme.empty() ? "Exact" : r.scheme;
        row.activation = r.activation;
        row.relative_accuracy = r.accuracy / exact.accuracy;
        row.relative_top_k = exact.top_k_accuracy > 0 ? r.top_k_accuracy / exact.top_k_accuracy : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string relative_table_csv(const std::vector<RelativeRow>& rows) {
    std::ostringstream out;
    out << "Model,Relative accuracy,Relative top-k\n";
    out.precision(4);
    out << std::fixed;
    for (const auto& r : rows)
        out << r.label << ',' << r.relative_accuracy << ',' << r.relative_top_k << '\n';
    return out.str();
}

/// Scheme-by-activation grid of relative accuracies (rows: schemes in first
/// appearance order; columns: activations in first appearance order).
inline std::string relative_grid_csv(const std::vector<RelativeRow>& rows) {
    std::vector<std::string> schemes, acts;
    std::map<std::pair<std::string, std::string>, double> cells;
    for (const auto& r : rows) {
        if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end())
            schemes.push_back(r.scheme);
        if (std::find(acts.begin(), acts.end(), r.activation) == acts.end())
            acts.push_back(r.activation);
        cells[{r.scheme, r.activation}] = r.relative_accuracy;
    }
    std::ostringstream out;
    out << "Scheme";
    for (const auto& a : acts) out << ',' << a;
    out << '\n';
    out.precision(4);
    out << std::fixed;
    for (const auto& s : schemes) {
        out << s;
        for (const auto& a : acts) {
            out << ',';
            auto it = cells.find({s, a});
            if (it != cells.end()) out << it->second;
        }
        out << '\n';
    }
    return out.str();
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["model"] = r.model_name;
    j["scheme"] = r.scheme;
    j["activation"] = r.activation;
    j["samples"] = r.sample_count;
    j["classes"] = r.class_count;
    j["dataset_digest"] = r.dataset_digest;
    j["accuracy"] = r.accuracy;
    j["top_k"] = r.top_k;
    j["top_k_accuracy"] = r.top_k_accuracy;
    return j;
}

/// CSV with columns threshold, fpr, tpr for one class.
inline std::string roc_csv(const EvalReport& r, int cls) {
    if (cls < 0 || cls >= static_cast<int>(r.roc.size()))
        throw ConfigError("roc_csv: class out of range");
    std::ostringstream out;
    out << "threshold,fpr,tpr\n";
    for (const auto& p : r.roc[static_cast<std::size_t>(cls)])
        out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
    return out.str();
}

} // namespace dyadnet
