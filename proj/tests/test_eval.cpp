#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>

#include "dyadnet/dataset.hpp"
#include "dyadnet/eval.hpp"
#include "dyadnet/model_io.hpp"

using namespace dyadnet;
using Catch::Matchers::WithinAbs;

namespace {

void put_u32_be(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

struct IdxPair {
    std::string images;
    std::string labels;
};

IdxPair write_idx(const std::string& stem, int count, int rows, int cols,
                  const std::vector<unsigned char>& pixels, const std::vector<unsigned char>& labels,
                  bool truncate_images = false) {
    IdxPair p{stem + "-images-idx3-ubyte", stem + "-labels-idx1-ubyte"};
    {
        std::ofstream out(p.images, std::ios::binary);
        put_u32_be(out, 2051);
        put_u32_be(out, static_cast<std::uint32_t>(count));
        put_u32_be(out, static_cast<std::uint32_t>(rows));
        put_u32_be(out, static_cast<std::uint32_t>(cols));
        std::size_t n = pixels.size();
        if (truncate_images && n > 10) n -= 10;
        out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(n));
    }
    {
        std::ofstream out(p.labels, std::ios::binary);
        put_u32_be(out, 2049);
        put_u32_be(out, static_cast<std::uint32_t>(labels.size()));
        out.write(reinterpret_cast<const char*>(labels.data()),
                  static_cast<std::streamsize>(labels.size()));
    }
    return p;
}

} // namespace

TEST_CASE("idx loader reads container metadata") {
    const int n = 10000, r = 28, c = 28;
    std::vector<unsigned char> pixels(static_cast<std::size_t>(n) * r * c, 0);
    std::vector<unsigned char> labels(n);
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<unsigned char>(i % 10);
    auto p = write_idx("/tmp/dyadnet_idx_meta", n, r, c, pixels, labels);

    LabeledDataset ds = load_idx(p.images, p.labels);
    CHECK(ds.samples.size() == 10000);
    CHECK(ds.class_count == 10);
    CHECK(ds.samples[0].image.height == 28);
    CHECK(ds.samples[0].image.width == 28);
    CHECK(ds.samples[3].label == 3);
    // zero pixels normalize to -1
    CHECK(ds.samples[0].image.data[0] == -1.0);
    std::remove(p.images.c_str());
    std::remove(p.labels.c_str());
}

TEST_CASE("idx loader rejects bad magics, mismatches and truncation") {
    std::vector<unsigned char> pixels(4 * 4 * 3, 128);
    std::vector<unsigned char> labels = {0, 1, 2};
    auto p = write_idx("/tmp/dyadnet_idx_bad", 3, 4, 4, pixels, labels);

    SECTION("swapped files have the wrong magic") {
        CHECK_THROWS_WITH(load_idx(p.labels, p.images),
                          Catch::Matchers::ContainsSubstring("bad magic"));
    }
    SECTION("image/label count mismatch") {
        auto q = write_idx("/tmp/dyadnet_idx_short", 3, 4, 4, pixels, {0, 1});
        CHECK_THROWS_WITH(load_idx(q.images, q.labels),
                          Catch::Matchers::ContainsSubstring("mismatch"));
        std::remove(q.images.c_str());
        std::remove(q.labels.c_str());
    }
    SECTION("truncated image payload reports the byte offset") {
        auto q = write_idx("/tmp/dyadnet_idx_trunc", 3, 4, 4, pixels, labels, true);
        CHECK_THROWS_WITH(load_idx(q.images, q.labels),
                          Catch::Matchers::ContainsSubstring("end of file at byte"));
        std::remove(q.images.c_str());
        std::remove(q.labels.c_str());
    }
    std::remove(p.images.c_str());
    std::remove(p.labels.c_str());
}

TEST_CASE("28x28 inputs pad to 32x32 with a centered zero border") {
    Image img(1, 28, 28);
    for (auto& v : img.data) v = 0.5;
    Image padded = adapt_to_shape(img, 32, 32);
    CHECK(padded.height == 32);
    CHECK(padded.width == 32);
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            bool border = r < 2 || r >= 30 || c < 2 || c >= 30;
            CHECK(padded.at(0, r, c) == (border ? 0.0 : 0.5));
        }
    // cropping is centered too
    Image back = adapt_to_shape(padded, 28, 28);
    for (double v : back.data) CHECK(v == 0.5);
}

TEST_CASE("metrics on oracle scores") {
    SECTION("a perfect scorer has accuracy 1") {
        std::vector<std::vector<double>> scores;
        std::vector<int> labels;
        for (int i = 0; i < 40; ++i) {
            std::vector<double> s(10, -1.0);
            s[static_cast<std::size_t>(i % 10)] = 1.0;
            scores.push_back(s);
            labels.push_back(i % 10);
        }
        EvalReport r = metrics_from_scores(scores, labels, 10, 5);
        CHECK(r.accuracy == 1.0);
        CHECK(r.top_k_accuracy == 1.0);
    }
    SECTION("a constant scorer scores chance on a balanced set") {
        std::vector<std::vector<double>> scores(100, std::vector<double>(10, 0.25));
        std::vector<int> labels;
        for (int i = 0; i < 100; ++i) labels.push_back(i % 10);
        EvalReport r = metrics_from_scores(scores, labels, 10, 1);
        CHECK_THAT(r.accuracy, WithinAbs(0.1, 1e-12));
    }
    SECTION("top-1 never exceeds top-k") {
        std::mt19937 rng(6);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<std::vector<double>> scores;
        std::vector<int> labels;
        for (int i = 0; i < 300; ++i) {
            std::vector<double> s(7);
            for (auto& v : s) v = dist(rng);
            scores.push_back(s);
            labels.push_back(i % 7);
        }
        EvalReport top1 = metrics_from_scores(scores, labels, 7, 1);
        EvalReport top3 = metrics_from_scores(scores, labels, 7, 3);
        CHECK(top1.accuracy == top1.top_k_accuracy);
        CHECK(top1.accuracy <= top3.top_k_accuracy);
    }
    SECTION("evaluation is order independent") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<std::vector<double>> scores;
        std::vector<int> labels;
        for (int i = 0; i < 200; ++i) {
            std::vector<double> s(5);
            for (auto& v : s) v = dist(rng);
            scores.push_back(s);
            labels.push_back(i % 5);
        }
        EvalReport a = metrics_from_scores(scores, labels, 5, 2);
        std::vector<std::size_t> perm(scores.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::vector<double>> ps;
        std::vector<int> pl;
        for (std::size_t i : perm) {
            ps.push_back(scores[i]);
            pl.push_back(labels[i]);
        }
        EvalReport b = metrics_from_scores(ps, pl, 5, 2);
        CHECK(a.accuracy == b.accuracy);
        CHECK(a.top_k_accuracy == b.top_k_accuracy);
    }
}

TEST_CASE("roc points are monotone in the threshold") {
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<std::vector<double>> scores;
    std::vector<int> labels;
    for (int i = 0; i < 250; ++i) {
        std::vector<double> s(4);
        for (auto& v : s) v = dist(rng);
        scores.push_back(s);
        labels.push_back(i % 4);
    }
    EvalReport r = metrics_from_scores(scores, labels, 4, 1);
    REQUIRE(r.roc.size() == 4);
    for (const auto& points : r.roc) {
        for (std::size_t i = 1; i < points.size(); ++i) {
            REQUIRE(points[i].threshold > points[i - 1].threshold);
            REQUIRE(points[i].tpr <= points[i - 1].tpr);
            REQUIRE(points[i].fpr <= points[i - 1].fpr);
        }
    }
    std::string csv = roc_csv(r, 0);
    CHECK(csv.rfind("threshold,fpr,tpr\n", 0) == 0);
}

TEST_CASE("relative comparison") {
    std::vector<std::vector<double>> scores;
    std::vector<int> labels;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> s(5);
        for (auto& v : s) v = dist(rng);
        s[static_cast<std::size_t>(i % 5)] += (i % 3 == 0) ? 0.0 : 2.0;
        scores.push_back(s);
        labels.push_back(i % 5);
    }
    EvalReport exact = metrics_from_scores(scores, labels, 5, 1, 42);
    SECTION("a report against itself is exactly 1") {
        auto rows = compare(exact, {exact});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].relative_accuracy == 1.0);
    }
    SECTION("plain ratio arithmetic") {
        EvalReport approx = exact;
        approx.accuracy = 0.931;
        EvalReport base = exact;
        base.accuracy = 0.98;
        auto rows = compare(base, {approx});
        CHECK_THAT(rows[0].relative_accuracy, WithinAbs(0.95, 1e-12));
    }
    SECTION("dataset digests must match") {
        EvalReport other = exact;
        other.dataset_digest = 43;
        CHECK_THROWS_AS(compare(exact, {other}), DataError);
    }
}

TEST_CASE("the relative grid renders schemes by activations") {
    std::vector<RelativeRow> rows;
    const char* schemes[6] = {"A3", "A4", "A5", "A6", "A7", "A8"};
    const char* acts[7] = {"exact", "asg", "plan", "linear1", "linear2", "quadratic1", "quadratic2"};
    for (const char* s : schemes)
        for (const char* a : acts)
            rows.push_back({std::string(s) + "/" + a, s, a, 0.99, 0.99});
    std::string grid = relative_grid_csv(rows);
    // 1 header + 6 scheme rows
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 7);
    std::string header = grid.substr(0, grid.find('\n'));
    CHECK(std::count(header.begin(), header.end(), ',') == 7);
    CHECK(header == "Scheme,exact,asg,plan,linear1,linear2,quadratic1,quadratic2");
}

TEST_CASE("evaluate runs a real model over a dataset") {
    NetworkModel fix = load_model(std::string(DYADNET_FIXTURE_DIR) + "/digits_exact.json");
    LabeledDataset ds = load_idx(std::string(DYADNET_FIXTURE_DIR) + "/digits-test-images-idx3-ubyte",
                                 std::string(DYADNET_FIXTURE_DIR) + "/digits-test-labels-idx1-ubyte");
    REQUIRE(ds.samples.size() == 1000);
    REQUIRE(ds.class_count == 10);

    // a 100-sample slice keeps the unit test quick; the acceptance suite runs all 1000
    LabeledDataset slice;
    slice.class_count = ds.class_count;
    slice.digest = ds.digest;
    slice.samples.assign(ds.samples.begin(), ds.samples.begin() + 100);

    EvalReport r = evaluate(fix, slice, 5);
    CHECK(r.sample_count == 100);
    CHECK(r.accuracy > 0.6);
    CHECK(r.top_k_accuracy >= r.accuracy);
    CHECK(r.dataset_digest == ds.digest);

    // class-count mismatch is rejected
    LabeledDataset bad = slice;
    bad.class_count = 7;
    CHECK_THROWS_AS(evaluate(fix, bad, 1), DataError);
}
