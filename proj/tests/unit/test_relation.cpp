#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "frozen.hpp"
#include "kgroot/error.hpp"
#include "kgroot/knowledge.hpp"
#include "kgroot/simulator.hpp"

using namespace kgroot;
using kgtest::ev;

namespace {

SvmModel axis_model(std::size_t dim) {
    SvmModel m;
    m.feature_dim = dim;
    m.weights.assign(dim, 0.0);
    m.weights[0] = 1.0;
    return m;
}

std::vector<double> axis_point(std::size_t dim, double v0) {
    std::vector<double> x(dim, 0.0);
    x[0] = v0;
    return x;
}

// Two overlapping Gaussian-ish blobs in 4 dimensions, 200 points.
std::vector<SvmExample> fixture_200() {
    std::mt19937_64 rng(2024);
    std::vector<SvmExample> out;
    for (int i = 0; i < 200; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        std::vector<double> x(4);
        for (auto& v : x) v = (kgtest::unit_draw(rng) + kgtest::unit_draw(rng) - 1.0) * 1.5;
        x[0] += 0.8 * label;
        x[1] -= 0.4 * label;
        out.push_back({x, label});
    }
    return out;
}

}  // namespace

TEST_CASE("featurize fields") {
    const auto table = kgtest::tiny_table({"A", "B"});
    const auto stats = build_stats({kgtest::sequence("f", {ev("a", "A", 0), ev("b", "B", 1500)})}, 10);
    const Topology topo({"svc-00", "svc-01", "svc-02"}, {{"svc-00", "svc-01"}, {"svc-01", "svc-02"}});
    const RelationContext ctx{&stats, &table, &topo};

    SUBCASE("duplicate at the same time and entity") {
        const auto f = featurize(ev("a", "A", 100), ev("a2", "A", 100), ctx);
        CHECK(f.delta_t == 0.0);
        CHECK(f.same_entity == 1.0);
        CHECK(f.entity_distance == 0.0);
    }
    SUBCASE("later source is rejected") {
        CHECK_THROWS_AS(featurize(ev("b", "B", 2000), ev("a", "A", 100), ctx), PreconditionViolated);
    }
    SUBCASE("topology distance and pmi") {
        const auto f = featurize(ev("a", "A", 0, "svc-00"), ev("b", "B", 1500, "svc-02"), ctx);
        CHECK(f.delta_t == 1.5);
        CHECK(f.same_entity == 0.0);
        CHECK(f.entity_distance == 2.0);
        // n = 2, P(A) = P(B) = P(A,B) = 1/2.
        CHECK(f.cooccurrence == doctest::Approx(std::log(0.5 / 0.25)).epsilon(1e-15));
        CHECK(f.to_vector().size() == PairFeatures::dim_for(2));
    }
    SUBCASE("unknown entity and unseen pair fall back to sentinels") {
        const auto f = featurize(ev("b", "B", 0, "elsewhere"), ev("a", "A", 10, "svc-00"), ctx);
        CHECK(f.entity_distance == kDistanceSentinel);
        CHECK(f.cooccurrence == kNoCooccurrence);
    }
}

TEST_CASE("simulator pair cooccurrence equals the hand formula") {
    DatasetConfig cfg;
    cfg.n_classes = 5;
    cfg.n_failures = 20;
    const Dataset ds = simulate(cfg);
    const auto seqs = ds.sequences();
    const auto stats = build_stats(seqs, 60.0);
    const auto table = kgtest::tiny_table({});
    const RelationContext ctx{&stats, &table, &ds.topology};
    const auto& s = seqs.front();
    const Event& a = s.events[0];
    const Event& b = s.events[1];
    const double n = static_cast<double>(stats.total_events);
    const double expected = std::log((stats.pair_count(a.event_type, b.event_type) / n) /
                                     ((stats.type_count(a.event_type) / n) * (stats.type_count(b.event_type) / n)));
    REQUIRE(stats.pair_count(a.event_type, b.event_type) > 0);
    CHECK(featurize(a, b, ctx).cooccurrence == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("relation_exists and classify_kind on an axis model") {
    const auto m = axis_model(3);
    CHECK(relation_exists(m, axis_point(3, 5.0)));
    CHECK_FALSE(relation_exists(m, axis_point(3, -5.0)));
    CHECK_FALSE(relation_exists(m, axis_point(3, 0.0)));
    CHECK(classify_kind(m, axis_point(3, 2.0)) == RelationKind::Causal);
    CHECK(classify_kind(m, axis_point(3, -2.0)) == RelationKind::Sequential);
    CHECK(classify_kind(m, axis_point(3, 0.0)) == RelationKind::Sequential);
    CHECK_THROWS_AS(relation_exists(m, axis_point(4, 1.0)), DimensionMismatch);
}

TEST_CASE("decisions are invariant under a common positive rescale") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        SvmModel m;
        m.feature_dim = 5;
        std::vector<double> x(5);
        for (int i = 0; i < 5; ++i) {
            m.weights.push_back(kgtest::unit_draw(rng) - 0.5);
            x[i] = kgtest::unit_draw(rng) - 0.5;
        }
        m.bias = kgtest::unit_draw(rng) - 0.5;
        SvmModel scaled = m;
        for (auto& w : scaled.weights) w *= 3.0;
        scaled.bias *= 3.0;
        CHECK(relation_exists(m, x) == relation_exists(scaled, x));
    }
}

TEST_CASE("train_svm separates two clusters on axis 0") {
    std::vector<SvmExample> data;
    for (int i = 0; i < 20; ++i) {
        const double jitter = 0.1 * (i % 5);
        data.push_back({{1.0 + jitter, 0.3 * (i % 3)}, 1});
        data.push_back({{-1.0 - jitter, 0.3 * (i % 4)}, -1});
    }
    const auto m = train_svm(data, SvmConfig{});
    for (const auto& ex : data) CHECK(relation_exists(m, ex.x) == (ex.label == 1));
}

TEST_CASE("train_svm rejects single-label data") {
    std::vector<SvmExample> data{{{1.0}, 1}, {{2.0}, 1}};
    CHECK_THROWS_AS(train_svm(data, SvmConfig{}), DegenerateData);
    CHECK_THROWS_AS(train_svm({}, SvmConfig{}), DegenerateData);
}

TEST_CASE("train_svm is deterministic and its 200-point loss curve is frozen") {
    const auto data = fixture_200();
    SvmConfig cfg;
    cfg.seed = 7;
    std::vector<double> curve, again;
    const auto m1 = train_svm(data, cfg, &curve);
    const auto m2 = train_svm(data, cfg, &again);
    CHECK(m1 == m2);
    CHECK(curve == again);
    REQUIRE(curve.size() == cfg.epochs);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1]);

    const auto frozen = kgtest::frozen_curve("svm_loss_curve.json", curve);
    REQUIRE(frozen.size() == curve.size());
    // SIMD reassociation moves the last few bits only.
    for (std::size_t i = 0; i < curve.size(); ++i) CHECK(curve[i] == doctest::Approx(frozen[i]).epsilon(1e-9));
}

TEST_CASE("trained kind classifier recovers simulator causal links") {
    DatasetConfig cfg;
    cfg.n_classes = 10;
    cfg.n_failures = 80;
    const Dataset ds = simulate(cfg);
    const auto seqs = ds.sequences();
    const auto truths = ds.truths();
    std::vector<EventSequence> train(seqs.begin(), seqs.begin() + 40);
    std::vector<EventSequence> held(seqs.begin() + 40, seqs.end());

    auto stats = build_stats(train, 60.0);
    record_link_labels(stats, train, truths);
    SkipGramConfig sg;
    sg.dim = 16;
    const auto table = train_embeddings(train, sg);
    const RelationContext ctx{&stats, &table, &ds.topology};
    const auto rel = relation_examples(train, truths, ctx);
    const auto kind = train_svm(rel.kind, SvmConfig{});

    std::size_t total = 0, causal = 0;
    for (const auto& s : held) {
        for (const auto& [src, dst] : truths.at(s.failure_id).causal_links) {
            const Event* a = s.find(src);
            const Event* b = s.find(dst);
            ++total;
            if (classify_kind(kind, featurize(*a, *b, ctx)) == RelationKind::Causal) ++causal;
        }
    }
    REQUIRE(total > 0);
    const double rate = static_cast<double>(causal) / static_cast<double>(total);
    MESSAGE("held-out causal links classified causal: " << rate);
    CHECK(rate >= 0.9);
}
