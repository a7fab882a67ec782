#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <random>

#include "dyadnet/engine.hpp"
#include "dyadnet/model_io.hpp"
#include "dyadnet/pipeline.hpp"
#include "dyadnet/zoo.hpp"

using namespace dyadnet;

TEST_CASE("scheme strings parse and broadcast") {
    auto a7 = SchemeAssignment::parse("7", 4);
    REQUIRE(a7.set_names == std::vector<std::string>{"D7", "D7", "D7", "D7"});
    CHECK(a7.label() == "A7");

    auto mixed = SchemeAssignment::parse("7,3,3,3", 4);
    REQUIRE(mixed.set_names == std::vector<std::string>{"D7", "D3", "D3", "D3"});
    CHECK(mixed.label() == "A7,3,3,3");

    CHECK_THROWS_AS(SchemeAssignment::parse("7,3,3", 4), ConfigError);
    CHECK_THROWS_AS(SchemeAssignment::parse("", 4), ConfigError);
    CHECK_THROWS_AS(SchemeAssignment::parse("11", 4), ConfigError);
    CHECK_THROWS_AS(SchemeAssignment::parse("7,,3,3", 4), ConfigError);
}

TEST_CASE("uniform scheme tags every weight layer with the same set") {
    NetworkModel cff = make_cff_skeleton();
    randomize_weights(cff, 21);
    NetworkModel a = approximate_network(cff, SchemeAssignment::parse("7", 4),
                                         ActivationKind::LinearII);
    CHECK(a.is_approximate());
    int weight_layers = 0;
    for (const auto& l : a.layers)
        if (l.has_weights()) {
            CHECK(l.set_name == "D7");
            ++weight_layers;
        }
    CHECK(weight_layers == 4);
    CHECK(scheme_label(a) == "A7");
}

TEST_CASE("mixed scheme assigns sets per layer in order") {
    NetworkModel cff = make_cff_skeleton();
    randomize_weights(cff, 22);
    NetworkModel a = approximate_network(cff, SchemeAssignment::parse("7,3,3,3", 4),
                                         ActivationKind::Exact);
    std::vector<std::string> seen;
    for (const auto& l : a.layers)
        if (l.has_weights()) seen.push_back(l.set_name);
    CHECK(seen == std::vector<std::string>{"D7", "D3", "D3", "D3"});
    CHECK(scheme_label(a) == "A7,3,3,3");

    // every t entry lies in its layer's set, and alpha carries a CSD form
    for (const auto& l : a.layers) {
        if (!l.has_weights()) continue;
        DyadicSet set = DyadicSet::builtin(l.set_name);
        for (const auto& w : l.approx_kernels) {
            CHECK(!w.alpha_csd.digits.empty());
            for (int r = 0; r < w.rows; ++r)
                for (int c = 0; c < w.cols; ++c) CHECK(set.contains(w.entry(r, c)));
        }
    }
}

TEST_CASE("activation replacement leaves relu and identity untouched") {
    NetworkModel m = make_cff_skeleton();
    randomize_weights(m, 23);
    m.layers[1].activation = ActivationKind::Relu;
    m.layers[5].activation = ActivationKind::Identity;
    NetworkModel a = approximate_network(m, SchemeAssignment::parse("6", 4), ActivationKind::Plan);
    CHECK(a.layers[0].activation == ActivationKind::Plan);
    CHECK(a.layers[1].activation == ActivationKind::Relu);
    CHECK(a.layers[2].activation == ActivationKind::Plan);
    CHECK(a.layers[5].activation == ActivationKind::Identity);
}

TEST_CASE("pooling coefficients and biases become 8-bit csd scalars") {
    NetworkModel m = make_cff_skeleton();
    randomize_weights(m, 24);
    NetworkModel a = approximate_network(m, SchemeAssignment::parse("2", 4), ActivationKind::Asg);
    const Layer& pool = a.layers[1];
    REQUIRE(pool.approx_coefficients.size() == 4);
    for (std::size_t i = 0; i < pool.approx_coefficients.size(); ++i) {
        const auto& s = pool.approx_coefficients[i];
        double original = 0.0;
        // reconstruct: nearest multiple of 2^-7
        original = m.layers[1].coefficients[i];
        double rounded = std::ldexp(std::llround(std::ldexp(original, 7)), -7);
        CHECK(s.value.value() == rounded);
        CHECK(s.csd.decode() == rounded);
        CHECK(s.value.log2_den <= 7);
    }
    for (const auto& b : a.layers[0].approx_biases) CHECK(b.csd.decode() == b.value.value());
}

TEST_CASE("an all-zero model approximates to an all-zero model with identical outputs") {
    NetworkModel m = make_cff_skeleton(); // zero weights by construction
    NetworkModel a = approximate_network(m, SchemeAssignment::parse("8", 4),
                                         ActivationKind::LinearII);
    for (const auto& l : a.layers)
        for (const auto& w : l.approx_kernels)
            for (std::int64_t z : w.z) CHECK(z == 0);

    std::mt19937 rng(30);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Image in(1, 36, 32);
    for (auto& v : in.data) v = dist(rng);
    auto exact_out = infer_reference(m, in);
    auto approx_out = infer_reference(a, in);
    REQUIRE(exact_out.size() == approx_out.size());
    for (std::size_t i = 0; i < exact_out.size(); ++i) CHECK(exact_out[i] == approx_out[i]);
}

TEST_CASE("approximating an approximate model is rejected") {
    NetworkModel m = make_cff_skeleton();
    NetworkModel a = approximate_network(m, SchemeAssignment::parse("1", 4), ActivationKind::Exact);
    CHECK_THROWS_AS(approximate_network(a, SchemeAssignment::parse("1", 4), ActivationKind::Exact),
                    ConfigError);
}

TEST_CASE("scheme length must match the model") {
    NetworkModel m = make_cff_skeleton();
    SchemeAssignment three;
    three.set_names = {"D7", "D3", "D3"};
    CHECK_THROWS_AS(approximate_network(m, three, ActivationKind::Exact), ConfigError);
}

TEST_CASE("parallel approximation is deterministic") {
    NetworkModel m = make_cff_skeleton();
    randomize_weights(m, 77);

    setenv("DYADNET_THREADS", "1", 1);
    NetworkModel serial = approximate_network(m, SchemeAssignment::parse("7,3,3,3", 4),
                                              ActivationKind::LinearII);
    setenv("DYADNET_THREADS", "4", 1);
    NetworkModel parallel = approximate_network(m, SchemeAssignment::parse("7,3,3,3", 4),
                                                ActivationKind::LinearII);
    unsetenv("DYADNET_THREADS");
    CHECK(save_model_string(serial) == save_model_string(parallel));
}

TEST_CASE("per-row expansion factors on fully-connected layers") {
    NetworkModel m;
    m.input = {2, 1, 1};
    Layer fc;
    fc.kind = LayerKind::FullyConnected;
    fc.input_maps = 2;
    fc.output_maps = 2;
    fc.weights = RealMatrix(2, 2, {3.0, 1.5, 0.2, 0.1});
    fc.connections = complete_bipartite(2, 2);
    fc.biases = {0.0, 0.0};
    fc.activation = ActivationKind::Identity;
    m.layers.push_back(std::move(fc));
    m.validate();

    NetworkModel a = approximate_network(m, SchemeAssignment::parse("2", 1),
                                         ActivationKind::Identity);
    REQUIRE(a.layers[0].approx_rows.size() == 2);
    // rows with very different magnitudes get their own factors
    CHECK(a.layers[0].approx_rows[0].alpha != a.layers[0].approx_rows[1].alpha);
}
