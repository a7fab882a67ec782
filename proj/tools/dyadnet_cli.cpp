// dyadnet command line: approximate trained models, inspect sweep curves,
// run both inference engines, and emit cost / accuracy reports.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyadnet/activation.hpp"
#include "dyadnet/approx.hpp"
#include "dyadnet/cost.hpp"
#include "dyadnet/dataset.hpp"
#include "dyadnet/engine.hpp"
#include "dyadnet/eval.hpp"
#include "dyadnet/matrix.hpp"
#include "dyadnet/model_io.hpp"
#include "dyadnet/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

using dyadnet::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dyadnet::DataError("cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dyadnet::DataError("cannot open \"" + path + "\" for writing");
    out << text;
    if (!out) throw dyadnet::DataError("failed writing \"" + path + "\"");
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

struct SweepFlags {
    double alpha_min = 0.25;
    double alpha_max = 1.0;
    double alpha_step = 1e-3;
    bool refine = true;

    dyadnet::SweepConfig config() const {
        dyadnet::SweepConfig cfg;
        cfg.alpha_min = alpha_min;
        cfg.alpha_max = alpha_max;
        cfg.alpha_step = alpha_step;
        cfg.refine = refine;
        cfg.validate();
        return cfg;
    }
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& f) {
    cmd->add_option("--alpha-min", f.alpha_min, "lower end of the expansion-factor grid");
    cmd->add_option("--alpha-max", f.alpha_max, "upper end of the expansion-factor grid");
    cmd->add_option("--alpha-step", f.alpha_step, "expansion-factor grid step");
    cmd->add_flag("--refine,!--no-refine", f.refine, "closed-form refinement of the winning factor");
}

std::string curve_csv(const std::vector<std::pair<double, double>>& curve) {
    std::ostringstream out;
    out << "alpha,error\n";
    for (const auto& [a, e] : curve)
        out << dyadnet::detail::double_to_string(a) << ',' << dyadnet::detail::double_to_string(e)
            << '\n';
    return out.str();
}

int cmd_approximate(const std::string& model_path, const std::string& sets,
                    const std::string& activation, const SweepFlags& flags, int fraction_bits,
                    const std::string& out_path) {
    dyadnet::NetworkModel model = dyadnet::load_model(model_path);
    auto scheme = dyadnet::SchemeAssignment::parse(sets, model.weight_layer_count());
    auto kind = dyadnet::activation_from_string(activation);
    dyadnet::NetworkModel approx = dyadnet::approximate_network(
        model, scheme, kind, flags.config(), dyadnet::kAlphaFractionBits, fraction_bits);
    dyadnet::save_model(approx, out_path);

    int layer_index = 0;
    for (const auto& l : approx.layers) {
        if (l.has_weights()) {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& w : l.approx_kernels) sum += w.frobenius_error, ++n;
            for (const auto& w : l.approx_rows) sum += w.frobenius_error, ++n;
            std::cout << "layer " << layer_index << " (" << l.set_name << "): mean frobenius error "
                      << (n ? sum / static_cast<double>(n) : 0.0) << " over " << n << " matrices\n";
        }
        ++layer_index;
    }
    std::vector<std::pair<std::string, dyadnet::CostReport>> rows;
    rows.emplace_back("exact", dyadnet::static_cost(model));
    rows.emplace_back(scheme.label(), dyadnet::static_cost(approx));
    std::cout << dyadnet::cost_table_csv(rows);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_sweep_curve(const std::string& matrix_path, const std::string& sets,
                    const SweepFlags& flags, const std::string& out_path) {
    dyadnet::RealMatrix m = dyadnet::RealMatrix::parse_text(read_file(matrix_path));
    auto scheme = dyadnet::SchemeAssignment::parse(sets, 1);
    dyadnet::DyadicSet set = dyadnet::DyadicSet::builtin(scheme.set_names.front());
    dyadnet::ApproximationResult res = dyadnet::sweep(m, set, flags.config());

    emit(out_path, curve_csv(res.curve));

    dyadnet::CsdCode alpha_csd = dyadnet::csd_encode(res.alpha_star, dyadnet::kAlphaFractionBits);
    std::cout << "alpha_star " << dyadnet::detail::double_to_string(res.alpha_star) << "\n";
    std::cout << "alpha_csd " << alpha_csd.to_string() << "\n";
    std::cout << "error " << dyadnet::detail::double_to_string(res.error_star) << "\n";
    int scale = set.scale_log2();
    std::cout << "t_star (x 2^-" << scale << "):\n";
    for (int r = 0; r < res.t_star.rows; ++r) {
        for (int c = 0; c < res.t_star.cols; ++c) {
            const auto& d = res.t_star.at(r, c);
            std::cout << (c ? " " : "") << (d.num << (scale - d.log2_den));
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_infer(const std::string& model_path, const std::string& image_path,
              const std::string& engine, int fraction_bits, const std::string& out_path) {
    dyadnet::NetworkModel model = dyadnet::load_model(model_path);
    dyadnet::Image img = dyadnet::load_pgm(image_path);
    img = dyadnet::adapt_to_shape(img, model.input.height, model.input.width);
    if (img.channels != model.input.maps)
        throw dyadnet::DataError("image channels do not match the model");

    dyadnet::InstructionTrace trace;
    std::vector<double> out;
    if (dyadnet::engine_from_string(engine) == dyadnet::EngineChoice::Reference) {
        out = dyadnet::infer_reference(model, img, &trace);
    } else {
        dyadnet::FixedPointFormat fmt;
        fmt.fraction_bits = fraction_bits;
        out = dyadnet::infer_multiplierless(model, img, fmt, &trace);
    }
    ordered_json j;
    j["model"] = model.name;
    j["engine"] = engine;
    ordered_json vals = ordered_json::array();
    for (double v : out) vals.push_back(dyadnet::detail::double_to_string(v));
    j["output"] = vals;
    j["trace"] = trace.to_json();
    emit(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_evaluate(const std::vector<std::string>& model_paths, const std::string& images,
                 const std::string& labels, int topk, const std::string& engine,
                 int fraction_bits, bool markdown, bool grid, const std::string& out_path,
                 const std::string& roc_prefix) {
    dyadnet::LabeledDataset ds = dyadnet::load_idx(images, labels);
    dyadnet::EngineChoice choice = dyadnet::engine_from_string(engine);
    dyadnet::FixedPointFormat fmt;
    fmt.fraction_bits = fraction_bits;

    std::vector<dyadnet::EvalReport> reports;
    for (const auto& p : model_paths)
        reports.push_back(dyadnet::evaluate(dyadnet::load_model(p), ds, topk, choice, fmt));

    if (!roc_prefix.empty()) {
        for (int c = 0; c < reports.front().class_count; ++c)
            write_file(roc_prefix + "_class" + std::to_string(c) + ".csv",
                       dyadnet::roc_csv(reports.front(), c));
    }

    if (reports.size() == 1) {
        emit(out_path, dyadnet::report_to_json(reports.front()).dump(2) + "\n");
        return 0;
    }
    auto rows = dyadnet::compare(reports.front(), reports);
    std::string table = grid ? dyadnet::relative_grid_csv(rows) : dyadnet::relative_table_csv(rows);
    if (markdown && !grid) {
        std::ostringstream md;
        md << "| Model | Relative accuracy | Relative top-k |\n|---|---|---|\n";
        md.precision(4);
        md << std::fixed;
        for (const auto& r : rows)
            md << "| " << r.label << " | " << r.relative_accuracy << " | " << r.relative_top_k
               << " |\n";
        table = md.str();
    }
    emit(out_path, table);
    return 0;
}

int cmd_cost(const std::vector<std::string>& model_paths, bool markdown,
             const std::string& out_path) {
    std::vector<std::pair<std::string, dyadnet::CostReport>> rows;
    for (const auto& p : model_paths) {
        dyadnet::NetworkModel m = dyadnet::load_model(p);
        std::string label = m.is_approximate() ? dyadnet::scheme_label(m) : "Exact";
        if (!m.name.empty()) label = m.name + " " + label;
        rows.emplace_back(label, dyadnet::static_cost(m));
    }
    emit(out_path, markdown ? dyadnet::cost_table_markdown(rows) : dyadnet::cost_table_csv(rows));
    return 0;
}

int cmd_activation_report(double lo, double hi, int samples, const std::string& out_path) {
    using dyadnet::ActivationKind;
    std::ostringstream out;
    out << "kind,lo,hi,max_deviation\n";
    for (ActivationKind k :
         {ActivationKind::Asg, ActivationKind::Plan, ActivationKind::LinearI,
          ActivationKind::LinearII, ActivationKind::QuadraticI, ActivationKind::QuadraticII}) {
        double d = dyadnet::max_deviation(k, lo, hi, samples);
        out << dyadnet::to_string(k) << ',' << lo << ',' << hi << ','
            << dyadnet::detail::double_to_string(d) << '\n';
    }
    emit(out_path, out.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiplierless approximation toolkit for convolutional networks"};
    app.require_subcommand(1);

    // approximate
    std::string ap_model, ap_sets, ap_activation = "exact", ap_out;
    SweepFlags ap_flags;
    int ap_fraction_bits = dyadnet::kScalarFractionBits;
    auto* ap = app.add_subcommand("approximate", "replace a model's parameters with dyadic versions");
    ap->add_option("model", ap_model, "exact model file")->required();
    ap->add_option("--sets", ap_sets, "dyadic scheme, e.g. 7 or 7,3,3,3")->required();
    ap->add_option("--activation", ap_activation, "replacement activation tag");
    ap->add_option("--fraction-bits", ap_fraction_bits, "CSD fraction bits for coefficients/biases");
    ap->add_option("--out", ap_out, "output model file")->required();
    add_sweep_flags(ap, ap_flags);

    // sweep-curve
    std::string sc_matrix, sc_sets = "8", sc_out;
    SweepFlags sc_flags;
    auto* sc = app.add_subcommand("sweep-curve", "emit the expansion-factor error curve for a matrix");
    sc->add_option("matrix", sc_matrix, "text file, one matrix row per line")->required();
    sc->add_option("--sets", sc_sets, "dyadic set index");
    sc->add_option("--out", sc_out, "curve CSV path (stdout if omitted)");
    add_sweep_flags(sc, sc_flags);

    // infer
    std::string in_model, in_image, in_engine = "reference", in_out;
    int in_fraction_bits = 16;
    auto* inf = app.add_subcommand("infer", "run one image through an engine");
    inf->add_option("model", in_model, "model file")->required();
    inf->add_option("image", in_image, "PGM image")->required();
    inf->add_option("--engine", in_engine, "reference or multiplierless");
    inf->add_option("--fraction-bits", in_fraction_bits, "fixed-point fraction bits");
    inf->add_option("--out", in_out, "result JSON path (stdout if omitted)");

    // evaluate
    std::vector<std::string> ev_models;
    std::string ev_images, ev_labels, ev_engine = "reference", ev_out, ev_roc;
    int ev_topk = 1, ev_fraction_bits = 16;
    bool ev_markdown = false, ev_grid = false;
    auto* ev = app.add_subcommand("evaluate",
                                  "classification metrics; extra models are reported relative to the first");
    ev->add_option("models", ev_models, "model files (first is the baseline)")->required();
    ev->add_option("--images", ev_images, "IDX image file")->required();
    ev->add_option("--labels", ev_labels, "IDX label file")->required();
    ev->add_option("--topk", ev_topk, "top-k accuracy rank");
    ev->add_option("--engine", ev_engine, "reference or multiplierless");
    ev->add_option("--fraction-bits", ev_fraction_bits, "fixed-point fraction bits");
    ev->add_flag("--markdown", ev_markdown, "render tables as Markdown");
    ev->add_flag("--grid", ev_grid, "pivot relative accuracies by scheme x activation");
    ev->add_option("--out", ev_out, "output path (stdout if omitted)");
    ev->add_option("--roc-out", ev_roc, "prefix for per-class ROC CSV files");

    // cost
    std::vector<std::string> co_models;
    std::string co_out;
    bool co_markdown = false;
    auto* co = app.add_subcommand("cost", "static arithmetic cost table");
    co->add_option("models", co_models, "model files")->required();
    co->add_flag("--markdown", co_markdown, "render as Markdown");
    co->add_option("--out", co_out, "output path (stdout if omitted)");

    // activation-report
    double ar_lo = -8.0, ar_hi = 8.0;
    int ar_samples = 100000;
    std::string ar_out;
    auto* ar = app.add_subcommand("activation-report", "sup deviation of each activation approximation");
    ar->add_option("--lo", ar_lo, "domain lower bound");
    ar->add_option("--hi", ar_hi, "domain upper bound");
    ar->add_option("--samples", ar_samples, "sample count");
    ar->add_option("--out", ar_out, "output path (stdout if omitted)");

    try {
        app.parse(argc, argv);
        if (ap->parsed())
            return cmd_approximate(ap_model, ap_sets, ap_activation, ap_flags, ap_fraction_bits, ap_out);
        if (sc->parsed()) return cmd_sweep_curve(sc_matrix, sc_sets, sc_flags, sc_out);
        if (inf->parsed()) return cmd_infer(in_model, in_image, in_engine, in_fraction_bits, in_out);
        if (ev->parsed())
            return cmd_evaluate(ev_models, ev_images, ev_labels, ev_topk, ev_engine,
                                ev_fraction_bits, ev_markdown, ev_grid, ev_out, ev_roc);
        if (co->parsed()) return cmd_cost(co_models, co_markdown, co_out);
        if (ar->parsed()) return cmd_activation_report(ar_lo, ar_hi, ar_samples, ar_out);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    } catch (const dyadnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const dyadnet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
