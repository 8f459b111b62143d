#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "kgroot/error.hpp"
#include "rgcn_fixtures.hpp"

using namespace kgroot;
using kgtest::ev;

TEST_CASE("to_multigraph shapes") {
    const auto table = kgtest::tiny_table({"A", "B"}, 3);
    SUBCASE("one node") {
        Fpg g;
        g.nodes = {ev("a", "A", 0)};
        const auto mg = to_multigraph(g, table);
        CHECK(mg.num_nodes() == 1);
        CHECK(mg.features.cols() == 3);
        for (const auto& r : mg.edges) CHECK(r.empty());
    }
    SUBCASE("a causal edge gets its inverse twin") {
        Fpg g;
        g.nodes = {ev("a", "A", 0), ev("b", "B", 1)};
        g.edges = {{"a", RelationKind::Causal, "b"}};
        const auto mg = to_multigraph(g, table);
        using P = std::pair<std::size_t, std::size_t>;
        CHECK(mg.edges[static_cast<std::size_t>(Relation::Causal)] == std::vector<P>{{0, 1}});
        CHECK(mg.edges[static_cast<std::size_t>(Relation::CausalInv)] == std::vector<P>{{1, 0}});
        CHECK(mg.edges[static_cast<std::size_t>(Relation::Sequential)].empty());
        CHECK(check_invariants(mg).empty());
    }
    SUBCASE("cap keeps the latest events") {
        Fpg g;
        for (int i = 0; i < 150; ++i) g.nodes.push_back(ev("e" + std::to_string(1000 + i), "T" + std::to_string(1000 + i), i));
        const auto mg = to_multigraph(g, table, 100);
        REQUIRE(mg.num_nodes() == 100);
        std::set<std::string> kept(mg.node_types.begin(), mg.node_types.end());
        for (int i = 50; i < 150; ++i) CHECK(kept.contains("T" + std::to_string(1000 + i)));
    }
}

TEST_CASE("three-node forward fixture") {
    const auto m = kgtest::fixture_model();
    const Matrix h = rgcn_forward(kgtest::three_node_graph(), m);
    REQUIRE(h.rows() == 3);
    REQUIRE(h.cols() == 2);
    CHECK(kgtest::max_abs_diff(h, kgtest::three_node_expected()) <= 1e-10);
}

TEST_CASE("four-node head fixture") {
    const auto m = kgtest::fixture_model();
    const auto p = similarity(kgtest::head_online_graph(), kgtest::head_kg_graph(), m);
    const auto expected = kgtest::head_expected();
    CHECK(std::abs(p.dissimilar() - expected[0]) <= 1e-10);
    CHECK(std::abs(p.similar() - expected[1]) <= 1e-10);
    // The readouts feeding the head.
    const auto g_on = graph_embedding(kgtest::head_online_graph(), m);
    const auto g_kg = graph_embedding(kgtest::head_kg_graph(), m);
    CHECK(g_on == std::vector<double>{11.0, 11.0});
    CHECK(g_kg == std::vector<double>{6.75, 7.5});
}

TEST_CASE("zero-edge graphs factor into independent nodes") {
    std::mt19937_64 rng(4);
    const auto m = kgtest::random_model(kgtest::small_shape(3), rng);
    const MultiGraph g = kgtest::random_multigraph(rng, 4, 3, 0);
    const Matrix h = rgcn_forward(g, m);
    for (std::size_t i = 0; i < 4; ++i) {
        Matrix xi(1, 3);
        for (std::size_t c = 0; c < 3; ++c) xi(0, c) = g.features(i, c);
        const Matrix hi = rgcn_forward(make_multigraph({"x"}, xi, {}), m);
        for (std::size_t c = 0; c < h.cols(); ++c) CHECK(h(i, c) == hi(0, c));
    }
    // Self-loop only: relu(relu(x W_self0) W_self1) row by row.
    const Matrix x = g.features;
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<double> h0(m.layers[0].self.cols(), 0.0);
        for (std::size_t j = 0; j < h0.size(); ++j) {
            for (std::size_t c = 0; c < 3; ++c) h0[j] += x(i, c) * m.layers[0].self(c, j);
            h0[j] = std::max(0.0, h0[j]);
        }
        for (std::size_t j = 0; j < h.cols(); ++j) {
            double v = 0.0;
            for (std::size_t c = 0; c < h0.size(); ++c) v += h0[c] * m.layers[1].self(c, j);
            CHECK(h(i, j) == doctest::Approx(std::max(0.0, v)).epsilon(1e-14));
        }
    }
}

TEST_CASE("all-zero features give all-zero node states") {
    std::mt19937_64 rng(6);
    const auto m = kgtest::random_model(kgtest::small_shape(3), rng);
    MultiGraph g = kgtest::random_multigraph(rng, 5, 3, 7);
    g.features.fill(0.0);
    const Matrix h = rgcn_forward(g, m);
    for (double v : h.values()) CHECK(v == 0.0);
}

TEST_CASE("graph readout") {
    CHECK(graph_readout(Matrix{{1, 0}, {0, 2}}, 2) == std::vector<double>{1, 2});
    CHECK(graph_readout(Matrix{{3, -1}}, 2) == std::vector<double>{3, -1});
    CHECK(graph_readout(Matrix(0, 4), 4) == std::vector<double>(4, 0.0));
}

TEST_CASE("prediction is a distribution") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        const auto m = kgtest::random_model(kgtest::small_shape(3), rng);
        const auto a = kgtest::random_multigraph(rng, 4, 3, 5);
        const auto b = kgtest::random_multigraph(rng, 6, 3, 8);
        const auto p = similarity(a, b, m);
        CHECK(std::abs(p.probs[0] + p.probs[1] - 1.0) <= 1e-9);
    }
}

TEST_CASE("the head reads its inputs in order") {
    const auto m = kgtest::fixture_model();
    const auto ab = similarity(kgtest::head_online_graph(), kgtest::head_kg_graph(), m);
    const auto ba = similarity(kgtest::head_kg_graph(), kgtest::head_online_graph(), m);
    CHECK(ab.similar() != ba.similar());
}

TEST_CASE("analytic gradients match central differences") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = kgtest::gradient_check(seed);
        CHECK_MESSAGE(r.max_rel_error <= 1e-4, "seed " << seed << " worst " << r.worst << " " << r.max_rel_error);
    }
}

TEST_CASE("node permutation leaves the prediction unchanged") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(kgtest::permutation_gap(100 + seed) <= 1e-10);
}

TEST_CASE("match ranks classes by their best graph") {
    std::mt19937_64 rng(10);
    const auto m = kgtest::random_model(kgtest::small_shape(3), rng);
    const auto online = kgtest::random_multigraph(rng, 5, 3, 6);
    std::vector<LabeledGraph> kgs;
    for (int i = 0; i < 8; ++i) {
        kgs.push_back({"g" + std::to_string(i), "C" + std::to_string(i % 3), kgtest::random_multigraph(rng, 4, 3, 5)});
    }
    const auto ranked = match(online, kgs, m);
    REQUIRE(ranked.size() == 3);
    // Brute-force argmax over individual calls.
    std::string best_class;
    double best = -1.0;
    for (const auto& kg : kgs) {
        const double p = similarity(online, kg.graph, m).similar();
        if (p > best || (p == best && kg.label < best_class)) {
            best = p;
            best_class = kg.label;
        }
    }
    CHECK(ranked.front().fault_class == best_class);
    CHECK(ranked.front().p_similar == best);
    CHECK(match(online, encode_knowledge(kgs, m), m).front().fault_class == best_class);

    CHECK(match(online, {kgs.front()}, m).front().fault_class == kgs.front().label);
    CHECK_THROWS_AS(match(online, std::vector<LabeledGraph>{}, m), EmptyKnowledgeBase);
}

TEST_CASE("equal scores tie-break by class name") {
    const auto ranked = rank_classes({{"b", 0.5}, {"a", 0.5}, {"c", 0.9}, {"a", 0.1}});
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].fault_class == "c");
    CHECK(ranked[1].fault_class == "a");
    CHECK(ranked[2].fault_class == "b");
}

TEST_CASE("training separates graphs that share a marker type") {
    // Positive graphs contain node type M (feature e0), negatives do not.
    const std::size_t d = 3;
    std::vector<MultiGraph> online, kg;
    auto marker_graph = [&](bool marked, double shift) {
        Matrix x(2, d);
        x(0, 0) = marked ? 1.0 : 0.0;
        x(0, 1) = marked ? 0.0 : 1.0;
        x(1, 2) = 0.5 + shift;
        return kgtest::fixture_graph(x, {{0, RelationKind::Causal, 1}});
    };
    for (int i = 0; i < 10; ++i) {
        online.push_back(marker_graph(i % 2 == 0, 0.05 * i));
        kg.push_back(marker_graph(true, 0.0));
    }
    std::vector<SimilarityPair> pairs;
    for (int i = 0; i < 10; ++i) pairs.push_back({&online[i], &kg[i], i % 2 == 0});

    SimilarityTrainConfig cfg;
    cfg.shape = kgtest::small_shape(d);
    cfg.epochs = 200;
    cfg.learning_rate = 1e-2;
    const auto m = train_similarity(pairs, cfg);
    for (const auto& p : pairs) CHECK((similarity(*p.online, *p.kg, m).similar() > 0.5) == p.similar);
}

TEST_CASE("training needs both labels") {
    const auto g = kgtest::three_node_graph();
    std::vector<SimilarityPair> pairs{{&g, &g, true}, {&g, &g, true}};
    SimilarityTrainConfig cfg;
    cfg.shape.input_dim = 2;
    CHECK_THROWS_AS(train_similarity(pairs, cfg), DegenerateData);
}

TEST_CASE("training is deterministic") {
    std::mt19937_64 rng(12);
    std::vector<MultiGraph> graphs;
    for (int i = 0; i < 6; ++i) graphs.push_back(kgtest::random_multigraph(rng, 4, 3, 4));
    std::vector<SimilarityPair> pairs;
    for (int i = 0; i < 6; ++i) pairs.push_back({&graphs[i], &graphs[(i + 1) % 6], i % 2 == 0});
    SimilarityTrainConfig cfg;
    cfg.shape = kgtest::small_shape(3);
    cfg.epochs = 5;
    CHECK(train_similarity(pairs, cfg) == train_similarity(pairs, cfg));
}

TEST_CASE("sampled pairs") {
    std::mt19937_64 rng(14);
    std::vector<LabeledGraph> online, kgs;
    for (int i = 0; i < 4; ++i) online.push_back({"o" + std::to_string(i), "C" + std::to_string(i % 2), kgtest::random_multigraph(rng, 3, 2, 2)});
    for (int i = 0; i < 4; ++i) kgs.push_back({"k" + std::to_string(i), "C" + std::to_string(i % 2), kgtest::random_multigraph(rng, 3, 2, 2)});
    const auto pairs = sample_similarity_pairs(online, kgs, 2, 1);
    std::size_t pos = 0, neg = 0;
    for (const auto& p : pairs) (p.similar ? pos : neg) += 1;
    // Each online graph pairs with both graphs of its class.
    CHECK(pos == 8);
    CHECK(neg == 16);
}
