#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "srland/density.hpp"
#include "srland/errors.hpp"
#include "srland/graph.hpp"
#include "srland/matrix.hpp"
#include "srland/modes.hpp"
#include "srland/reference.hpp"
#include "srland/rng.hpp"
#include "srland/sampling.hpp"
#include "srland/spectral.hpp"
#include "srland/synth.hpp"

using namespace srland;

namespace {

GroundTruth truth_of(std::vector<std::int32_t> labels, std::int64_t rows, std::int64_t cols) {
    GroundTruth gt;
    gt.rows = rows;
    gt.cols = cols;
    gt.labels = std::move(labels);
    return gt;
}

ModeSet ranking(std::vector<std::int32_t> order) {
    ModeSet m;
    m.modes = std::move(order);
    return m;
}

RowMatrix embedding_rows(const std::vector<std::vector<double>>& rows) {
    RowMatrix e;
    e.rows = static_cast<std::int64_t>(rows.size());
    e.cols = static_cast<std::int64_t>(rows[0].size());
    for (const auto& r : rows) e.data.insert(e.data.end(), r.begin(), r.end());
    return e;
}

// modes / density / embedding for a scene, shared by the sampler tests
struct Prepared {
    SyntheticScene scene;
    DiffusionModel model;
    DensityProfile density;
    ModeSet modes;
};

Prepared prepare(std::uint64_t seed, std::int64_t m_modes, std::int64_t t = 60) {
    Prepared out{synthesize_scene(16, 16, 3, 2, 10.0, 1, seed), {}, {}, {}};
    MarkovChain chain = to_markov(build_spatial_affinity(out.scene.cube, 3.0));
    out.model = top_eigenpairs(chain, 16);
    embed(out.model, t);
    NeighborTable spec_nn = spectral_knn(out.scene.cube, 50);
    out.density = kde(out.scene.cube, spec_nn, adaptive_bandwidth(spec_nn));
    NeighborTable table = dt_neighbor_table(out.model.embedding);
    RhoResult rho = compute_rho(out.model.embedding, out.density, &table);
    out.modes = detect_modes(out.density, rho, m_modes);
    return out;
}

}  // namespace

TEST_CASE("oracle answers labeled pixels and logs every query") {
    GroundTruth gt = truth_of({1, 0, 2, 2}, 2, 2);
    Oracle oracle(gt);
    CHECK(oracle.answerable(0));
    CHECK(!oracle.answerable(1));
    CHECK(oracle.query(0) == 1);
    CHECK(oracle.query(2) == 2);
    CHECK(oracle.log().size() == 2);
    CHECK(oracle.log()[1] == std::pair<std::int32_t, std::int32_t>{2, 2});
    CHECK_THROWS_AS(oracle.query(1), usage_error);
}

TEST_CASE("sample_core labels both blobs at L=2") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Prepared p = prepare(seed, 6);
        Oracle oracle(p.scene.truth);
        LabeledSet set = sample_core(p.modes, 2, oracle, true);
        REQUIRE(set.size() >= 2);
        std::set<std::int32_t> classes(set.labels.begin(), set.labels.end());
        REQUIRE(classes == std::set<std::int32_t>{1, 2});
    }
}

TEST_CASE("sample_core on a full ranking with L=n queries everything once") {
    GroundTruth gt = truth_of({1, 2, 1, 2, 1, 2}, 2, 3);
    std::vector<std::int32_t> order = {3, 1, 5, 0, 2, 4};
    Oracle oracle(gt);
    LabeledSet set = sample_core(ranking(order), 6, oracle, true);
    CHECK(set.size() == 6);
    CHECK(set.indices == order);
    CHECK(oracle.log().size() == 6);
    std::set<std::int32_t> distinct(set.indices.begin(), set.indices.end());
    CHECK(distinct.size() == 6);
}

TEST_CASE("unanswerable modes are skipped, not counted") {
    GroundTruth gt = truth_of({0, 1, 0, 2}, 2, 2);
    Oracle oracle(gt);
    LabeledSet set = sample_core(ranking({0, 3, 2, 1}), 2, oracle, false);
    CHECK(set.indices == std::vector<std::int32_t>{3, 1});  // 0 and 2 skipped
    CHECK(set.labels == std::vector<std::int32_t>{2, 1});
}

TEST_CASE("sample_core requires enough answerable modes") {
    GroundTruth gt = truth_of({0, 1, 0, 2}, 2, 2);
    Oracle oracle(gt);
    CHECK_THROWS_AS(sample_core(ranking({0, 2, 1}), 2, oracle, false), usage_error);
    CHECK_THROWS_AS(sample_core(ranking({1, 3}), 0, oracle, false), usage_error);
}

TEST_CASE("coverage augmentation extends the budget down the ranking") {
    GroundTruth gt = truth_of({1, 1, 1, 1, 2, 2}, 2, 3);
    // top modes are all class 1; class 2 appears only at rank 4
    std::vector<std::int32_t> order = {0, 1, 2, 3, 4, 5};

    Oracle plain(gt);
    LabeledSet no_cov = sample_core(ranking(order), 2, plain, false);
    CHECK(no_cov.size() == 2);
    CHECK(no_cov.labels == std::vector<std::int32_t>{1, 1});
    CHECK(!no_cov.coverage_warning);

    Oracle covered(gt);
    LabeledSet cov = sample_core(ranking(order), 2, covered, true);
    CHECK(cov.size() == 5);  // walked until the first class-2 mode
    CHECK(cov.indices.back() == 4);
    CHECK(cov.budget_used == 5);
    CHECK(cov.budget_requested == 2);
    CHECK(!cov.coverage_warning);
}

TEST_CASE("coverage augmentation is a no-op when the top-L already covers") {
    GroundTruth gt = truth_of({1, 2, 1, 2}, 2, 2);
    Oracle oracle(gt);
    LabeledSet set = sample_core(ranking({1, 0, 2, 3}), 2, oracle, true);
    CHECK(set.size() == 2);
    CHECK(set.indices == std::vector<std::int32_t>{1, 0});
}

TEST_CASE("exhausting the ranking with a class missing is a warning") {
    GroundTruth gt = truth_of({1, 1, 1, 2}, 2, 2);
    Oracle oracle(gt);
    // ranking never reaches the only class-2 pixel
    LabeledSet set = sample_core(ranking({0, 1, 2}), 2, oracle, true);
    CHECK(set.size() == 3);
    CHECK(set.coverage_warning);
    CHECK(set.labels == std::vector<std::int32_t>{1, 1, 1});
}

TEST_CASE("boundary_scores: plug-in identities") {
    RowMatrix e = embedding_rows({{0.0}, {1.0}, {4.0}, {2.5}});
    ModeSet modes = ranking({0, 2});
    std::vector<double> b = boundary_scores(e, modes);
    CHECK(b[0] == doctest::Approx(4.0).epsilon(1e-15));  // a mode: distance to the other mode
    CHECK(b[2] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(b[3] == doctest::Approx(1.0).epsilon(1e-15));  // |2.5 - 1.5|
    CHECK(b[1] == doctest::Approx(2.0).epsilon(1e-15));
    RowMatrix mid = embedding_rows({{0.0}, {2.0}, {4.0}});
    CHECK(boundary_scores(mid, ranking({0, 2}))[1] == 0.0);  // equidistant
}

TEST_CASE("boundary_scores needs at least two modes") {
    RowMatrix e = embedding_rows({{0.0}, {1.0}});
    CHECK_THROWS_AS(boundary_scores(e, ranking({0})), usage_error);
}

TEST_CASE("boundary_scores matches the brute-force mode table") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(derive_seed(seed, 12));
        std::int64_t n = 40 + static_cast<std::int64_t>(rng.below(200));
        RowMatrix e;
        e.rows = n;
        e.cols = 3;
        e.data.resize(static_cast<std::size_t>(3 * n));
        for (double& v : e.data) v = rng.uniform01();
        std::vector<std::int32_t> mode_idx;
        int m_count = 2 + static_cast<int>(rng.below(6));
        for (int j = 0; j < m_count; ++j) {
            mode_idx.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n))));
        }
        std::sort(mode_idx.begin(), mode_idx.end());
        mode_idx.erase(std::unique(mode_idx.begin(), mode_idx.end()), mode_idx.end());
        if (mode_idx.size() < 2) continue;
        ModeSet modes = ranking(mode_idx);
        std::vector<double> fast = boundary_scores(e, modes);
        std::vector<double> brute = ref::brute_boundary(e, mode_idx);
        for (std::int64_t i = 0; i < n; ++i) {
            REQUIRE(fast[static_cast<std::size_t>(i)] ==
                    doctest::Approx(brute[static_cast<std::size_t>(i)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("sample_boundary with coincident modes degenerates to lowest indices") {
    RowMatrix e = embedding_rows({{5.0}, {1.0}, {2.0}, {5.0}, {3.0}});
    ModeSet modes = ranking({0, 3});  // identical embedding rows
    GroundTruth gt = truth_of({1, 1, 0, 1, 1}, 1, 5);
    Oracle oracle(gt);
    LabeledSet set = sample_boundary(e, modes, 3, oracle);
    CHECK(set.indices == std::vector<std::int32_t>{0, 1, 3});  // 2 is unanswerable
}

TEST_CASE("sample_boundary rejects L = 0 and insufficient answerable points") {
    RowMatrix e = embedding_rows({{0.0}, {1.0}, {2.0}});
    ModeSet modes = ranking({0, 2});
    GroundTruth gt = truth_of({1, 0, 1}, 1, 3);
    Oracle oracle(gt);
    CHECK_THROWS_AS(sample_boundary(e, modes, 0, oracle), usage_error);
    CHECK_THROWS_AS(sample_boundary(e, modes, 3, oracle), usage_error);
}

TEST_CASE("boundary queries sit spectrally between the blobs") {
    // moderate separation so the noise produces genuinely intermediate pixels
    SyntheticScene scene = synthesize_scene(16, 16, 4, 2, 3.0, 1, 5);
    MarkovChain chain = to_markov(build_spatial_affinity(scene.cube, 3.0));
    DiffusionModel model = top_eigenpairs(chain, 16);
    embed(model, 60);
    NeighborTable spec_nn = spectral_knn(scene.cube, 50);
    DensityProfile density = kde(scene.cube, spec_nn, adaptive_bandwidth(spec_nn));
    NeighborTable table = dt_neighbor_table(model.embedding);
    RhoResult rho = compute_rho(model.embedding, density, &table);
    ModeSet modes = detect_modes(density, rho, 2);
    Oracle oracle(scene.truth);
    LabeledSet set = sample_boundary(model.embedding, modes, 8, oracle);

    // class means and their midpoint in the spectral domain
    std::int64_t n = scene.cube.points(), bands = scene.cube.bands;
    std::vector<double> mean1(static_cast<std::size_t>(bands), 0.0), mean2 = mean1;
    std::int64_t c1 = 0, c2 = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double* s = scene.cube.spectrum(i);
        if (scene.truth.labels[static_cast<std::size_t>(i)] == 1) {
            ++c1;
            for (std::int64_t b = 0; b < bands; ++b) mean1[static_cast<std::size_t>(b)] += s[b];
        } else {
            ++c2;
            for (std::int64_t b = 0; b < bands; ++b) mean2[static_cast<std::size_t>(b)] += s[b];
        }
    }
    std::vector<double> midpoint(static_cast<std::size_t>(bands));
    for (std::int64_t b = 0; b < bands; ++b) {
        midpoint[static_cast<std::size_t>(b)] = 0.5 * (mean1[static_cast<std::size_t>(b)] / static_cast<double>(c1) +
                                                       mean2[static_cast<std::size_t>(b)] / static_cast<double>(c2));
    }
    auto dist_to_mid = [&](std::int64_t i) {
        return std::sqrt(row_distance2(scene.cube.spectrum(i), midpoint.data(), bands));
    };
    std::vector<double> all;
    for (std::int64_t i = 0; i < n; ++i) all.push_back(dist_to_mid(i));
    std::sort(all.begin(), all.end());
    double median = all[static_cast<std::size_t>(n / 2)];
    double mean_selected = 0;
    for (std::int32_t i : set.indices) mean_selected += dist_to_mid(i);
    mean_selected /= static_cast<double>(set.size());
    CHECK(mean_selected < median);
}

TEST_CASE("sample_random is deterministic in the seed and exhausts correctly") {
    GroundTruth gt = truth_of({1, 0, 2, 1, 0, 2, 1, 2}, 2, 4);
    Oracle a(gt), b(gt), c(gt);
    LabeledSet sa = sample_random(8, 3, a, 99);
    LabeledSet sb = sample_random(8, 3, b, 99);
    CHECK(sa.indices == sb.indices);
    LabeledSet sc = sample_random(8, 6, c, 1);
    std::set<std::int32_t> got(sc.indices.begin(), sc.indices.end());
    CHECK(got == std::set<std::int32_t>{0, 2, 3, 5, 6, 7});  // the full answerable pool
    Oracle d(gt);
    CHECK_THROWS_AS(sample_random(8, 7, d, 1), usage_error);
}

TEST_CASE("random sampling matches ground-truth class proportions") {
    // 3 classes with proportions 1/2, 1/3, 1/6 on 600 answerable pixels
    std::vector<std::int32_t> labels;
    for (int i = 0; i < 300; ++i) labels.push_back(1);
    for (int i = 0; i < 200; ++i) labels.push_back(2);
    for (int i = 0; i < 100; ++i) labels.push_back(3);
    GroundTruth gt = truth_of(std::move(labels), 20, 30);

    const int draws = 200, per_draw = 30;
    std::map<std::int32_t, std::int64_t> counts;
    for (int rep = 0; rep < draws; ++rep) {
        Oracle oracle(gt);
        LabeledSet set = sample_random(600, per_draw, oracle, 1000 + static_cast<std::uint64_t>(rep));
        for (std::int32_t lab : set.labels) counts[lab]++;
    }
    double total = static_cast<double>(draws) * per_draw;
    for (auto [cls, expect_p] : std::vector<std::pair<std::int32_t, double>>{
             {1, 0.5}, {2, 1.0 / 3.0}, {3, 1.0 / 6.0}}) {
        double freq = static_cast<double>(counts[cls]) / total;
        double sigma = std::sqrt(expect_p * (1 - expect_p) / total);
        INFO("class ", cls, " freq ", freq);
        CHECK(std::abs(freq - expect_p) < 3 * sigma);
    }
}

TEST_CASE("no sampler ever returns an unlabeled pixel") {
    Rng rng(314);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Prepared p = prepare(seed + 20, 10);
        // erase a random third of the ground truth
        GroundTruth holey = p.scene.truth;
        for (auto& lab : holey.labels) {
            if (rng.below(3) == 0) lab = 0;
        }
        Oracle o1(holey), o2(holey), o3(holey);
        for (const LabeledSet& set :
             {sample_core(p.modes, 4, o1, true),
              sample_boundary(p.model.embedding, p.modes, 4, o2),
              sample_random(p.scene.cube.points(), 4, o3, seed)}) {
            for (std::int32_t idx : set.indices) {
                REQUIRE(holey.labels[static_cast<std::size_t>(idx)] > 0);
            }
            REQUIRE(static_cast<std::int64_t>(set.labels.size()) == set.size());
        }
    }
}
