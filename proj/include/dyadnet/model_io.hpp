#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>

#include <json.hpp>

#include "dyadnet/errors.hpp"
#include "dyadnet/model.hpp"

namespace dyadnet {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kModelFormat = "dyadnet-model";
inline constexpr int kModelVersion = 1;

namespace detail {

// Shortest decimal string that round-trips the double exactly.
inline std::string double_to_string(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double double_from_string(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError(where + ": bad number \"" + s + "\"");
    return v;
}

inline ordered_json csd_to_json(const CsdCode& c) {
    ordered_json digits = ordered_json::array();
    for (const auto& d : c.digits) digits.push_back(ordered_json{{"sign", d.sign}, {"exp", d.exponent}});
    return digits;
}

inline CsdCode csd_from_json(const ordered_json& j, const std::string& where) {
    CsdCode code;
    if (!j.is_array()) throw DataError(where + ": csd digits must be an array");
    for (const auto& d : j) {
        int sign = d.at("sign").get<int>();
        if (sign != 1 && sign != -1) throw DataError(where + ": csd sign must be +-1");
        code.digits.push_back({sign, d.at("exp").get<int>()});
    }
    code.value = code.decode();
    return code;
}

inline ordered_json matrix_to_json(const RealMatrix& m) {
    ordered_json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    ordered_json data = ordered_json::array();
    for (double v : m.data) data.push_back(double_to_string(v));
    j["data"] = data;
    return j;
}

inline RealMatrix matrix_from_json(const ordered_json& j, const std::string& where) {
    int rows = j.at("rows").get<int>();
    int cols = j.at("cols").get<int>();
    std::vector<double> data;
    for (const auto& s : j.at("data")) data.push_back(double_from_string(s.get<std::string>(), where));
    if (rows <= 0 || cols <= 0 || data.size() != static_cast<std::size_t>(rows) * cols)
        throw DataError(where + ": matrix dimensions do not match data");
    return RealMatrix(rows, cols, std::move(data));
}

inline ordered_json approx_weight_to_json(const ApproximateWeight& w) {
    ordered_json j;
    j["rows"] = w.rows;
    j["cols"] = w.cols;
    j["alpha"] = double_to_string(w.alpha);
    j["alpha_csd"] = csd_to_json(w.alpha_csd);
    j["scale_log2"] = w.scale_log2;
    j["z"] = w.z;
    ordered_json zc = ordered_json::array();
    for (const auto& c : w.z_csd) zc.push_back(csd_to_json(c));
    j["z_csd"] = zc;
    j["frobenius_error"] = double_to_string(w.frobenius_error);
    return j;
}

inline ApproximateWeight approx_weight_from_json(const ordered_json& j, const std::string& where) {
    ApproximateWeight w;
    w.rows = j.at("rows").get<int>();
    w.cols = j.at("cols").get<int>();
    w.alpha = double_from_string(j.at("alpha").get<std::string>(), where);
    w.alpha_csd = csd_from_json(j.at("alpha_csd"), where);
    w.scale_log2 = j.at("scale_log2").get<int>();
    w.z = j.at("z").get<std::vector<std::int64_t>>();
    for (const auto& c : j.at("z_csd")) w.z_csd.push_back(csd_from_json(c, where));
    w.frobenius_error = double_from_string(j.at("frobenius_error").get<std::string>(), where);
    if (w.rows <= 0 || w.cols <= 0 || w.z.size() != static_cast<std::size_t>(w.rows) * w.cols ||
        w.z_csd.size() != w.z.size())
        throw DataError(where + ": approximate weight dimensions do not match data");
    return w;
}

inline ordered_json csd_scalar_to_json(const CsdScalar& s) {
    ordered_json j;
    j["num"] = s.value.num;
    j["log2_den"] = s.value.log2_den;
    j["csd"] = csd_to_json(s.csd);
    return j;
}

inline CsdScalar csd_scalar_from_json(const ordered_json& j, const std::string& where) {
    CsdScalar s;
    s.value = DyadicRational(j.at("num").get<std::int64_t>(), j.at("log2_den").get<int>());
    s.csd = csd_from_json(j.at("csd"), where);
    return s;
}

} // namespace detail

inline ordered_json model_to_json(const NetworkModel& model) {
    using namespace detail;
    ordered_json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["name"] = model.name;
    j["precision"] = model.is_approximate() ? "approximate" : "exact";
    j["input_shape"] = ordered_json{
        {"channels", model.input.maps}, {"height", model.input.height}, {"width", model.input.width}};
    ordered_json layers = ordered_json::array();
    const bool ap = model.is_approximate();
    for (const auto& l : model.layers) {
        ordered_json lj;
        lj["kind"] = to_string(l.kind);
        lj["activation"] = to_string(l.activation);
        lj["input_maps"] = l.input_maps;
        lj["output_maps"] = l.output_maps;
        if (!l.set_name.empty()) lj["set"] = l.set_name;
        switch (l.kind) {
            case LayerKind::Convolution: {
                lj["kernel"] = ordered_json{{"rows", l.kernel_rows}, {"cols", l.kernel_cols}};
                ordered_json conns = ordered_json::array();
                for (const auto& c : l.connections)
                    conns.push_back(ordered_json{{"from", c.from}, {"to", c.to}});
                lj["connections"] = conns;
                ordered_json ks = ordered_json::array();
                if (ap)
                    for (const auto& k : l.approx_kernels) ks.push_back(approx_weight_to_json(k));
                else
                    for (const auto& k : l.kernels) ks.push_back(matrix_to_json(k));
                lj["kernels"] = ks;
                break;
            }
            case LayerKind::AveragePooling: {
                lj["window"] = ordered_json{{"rows", l.pool_rows}, {"cols", l.pool_cols}};
                ordered_json cs = ordered_json::array();
                if (ap)
                    for (const auto& c : l.approx_coefficients) cs.push_back(csd_scalar_to_json(c));
                else
                    for (double c : l.coefficients) cs.push_back(double_to_string(c));
                lj["coefficients"] = cs;
                break;
            }
            case LayerKind::FullyConnected: {
                if (ap) {
                    ordered_json rows = ordered_json::array();
                    for (const auto& r : l.approx_rows) rows.push_back(approx_weight_to_json(r));
                    lj["weights"] = rows;
                } else {
                    lj["weights"] = matrix_to_json(l.weights);
                }
                break;
            }
        }
        ordered_json bs = ordered_json::array();
        if (ap)
            for (const auto& b : l.approx_biases) bs.push_back(csd_scalar_to_json(b));
        else
            for (double b : l.biases) bs.push_back(double_to_string(b));
        lj["biases"] = bs;
        layers.push_back(std::move(lj));
    }
    j["layers"] = layers;
    return j;
}

inline NetworkModel model_from_json(const ordered_json& j) {
    using namespace detail;
    NetworkModel model;
    if (!j.is_object() || !j.contains("format") || j.at("format") != kModelFormat)
        throw DataError("model file: missing or wrong format tag");
    if (!j.contains("version")) throw DataError("model file: missing version");
    if (j.at("version").get<int>() != kModelVersion)
        throw DataError("model file: unsupported version");
    model.name = j.value("name", "");
    std::string prec = j.at("precision").get<std::string>();
    if (prec == "exact")
        model.precision = NetworkModel::Precision::Exact;
    else if (prec == "approximate")
        model.precision = NetworkModel::Precision::Approximate;
    else
        throw DataError("model file: precision must be exact or approximate");
    const auto& shape = j.at("input_shape");
    model.input = {shape.at("channels").get<int>(), shape.at("height").get<int>(),
                   shape.at("width").get<int>()};
    if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").empty())
        throw DataError("model file: needs at least one layer");

    const bool ap = model.is_approximate();
    int index = 0;
    for (const auto& lj : j.at("layers")) {
        const std::string where = "layer " + std::to_string(index);
        try {
            Layer l;
            l.kind = layer_kind_from_string(lj.at("kind").get<std::string>());
            l.activation = activation_from_string(lj.at("activation").get<std::string>());
            l.input_maps = lj.at("input_maps").get<int>();
            l.output_maps = lj.at("output_maps").get<int>();
            l.set_name = lj.value("set", "");
            switch (l.kind) {
                case LayerKind::Convolution: {
                    l.kernel_rows = lj.at("kernel").at("rows").get<int>();
                    l.kernel_cols = lj.at("kernel").at("cols").get<int>();
                    for (const auto& c : lj.at("connections"))
                        l.connections.push_back({c.at("from").get<int>(), c.at("to").get<int>()});
                    for (const auto& k : lj.at("kernels")) {
                        if (ap)
                            l.approx_kernels.push_back(approx_weight_from_json(k, where));
                        else
                            l.kernels.push_back(matrix_from_json(k, where));
                    }
                    break;
                }
                case LayerKind::AveragePooling: {
                    l.pool_rows = lj.at("window").at("rows").get<int>();
                    l.pool_cols = lj.at("window").at("cols").get<int>();
                    for (const auto& c : lj.at("coefficients")) {
                        if (ap)
                            l.approx_coefficients.push_back(csd_scalar_from_json(c, where));
                        else
                            l.coefficients.push_back(double_from_string(c.get<std::string>(), where));
                    }
                    break;
                }
                case LayerKind::FullyConnected: {
                    if (ap) {
                        for (const auto& r : lj.at("weights"))
                            l.approx_rows.push_back(approx_weight_from_json(r, where));
                    } else {
                        l.weights = matrix_from_json(lj.at("weights"), where);
                    }
                    l.connections = complete_bipartite(l.input_maps, l.output_maps);
                    break;
                }
            }
            for (const auto& b : lj.at("biases")) {
                if (ap)
                    l.approx_biases.push_back(csd_scalar_from_json(b, where));
                else
                    l.biases.push_back(double_from_string(b.get<std::string>(), where));
            }
            model.layers.push_back(std::move(l));
        } catch (const ordered_json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        ++index;
    }
    model.validate();
    return model;
}

inline std::string save_model_string(const NetworkModel& model) {
    return model_to_json(model).dump(2) + "\n";
}

inline void save_model(const NetworkModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open \"" + path + "\" for writing");
    out << save_model_string(model);
    if (!out) throw DataError("failed writing \"" + path + "\"");
}

inline NetworkModel load_model_string(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw DataError(std::string("model file: invalid JSON: ") + e.what());
    }
    return model_from_json(j);
}

inline NetworkModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file \"" + path + "\"");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_model_string(text);
}

} // namespace dyadnet
