#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "frozen.hpp"
#include "kgroot/error.hpp"

using namespace kgroot;

namespace {

// 500 tokens over 12 types drawn from a sticky random walk.
std::vector<std::vector<std::string>> corpus_500() {
    std::mt19937_64 rng(13);
    std::vector<std::vector<std::string>> out;
    std::size_t state = 0;
    for (int s = 0; s < 25; ++s) {
        std::vector<std::string> seq;
        for (int i = 0; i < 20; ++i) {
            if (kgtest::unit_draw(rng) < 0.4) state = static_cast<std::size_t>(kgtest::unit_draw(rng) * 12.0);
            else state = (state + 1) % 12;
            seq.push_back("T" + std::to_string(state));
        }
        out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace

TEST_CASE("a single event type is not enough vocabulary") {
    std::vector<std::vector<std::string>> corpus{{"A", "A", "A"}};
    CHECK_THROWS_AS(train_embeddings(corpus, SkipGramConfig{}), InsufficientVocabulary);
    CHECK_THROWS_AS(train_embeddings(std::vector<std::vector<std::string>>{}, SkipGramConfig{}),
                    InsufficientVocabulary);
}

TEST_CASE("shared contexts give closer vectors") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SkipGramConfig cfg;
        cfg.seed = seed;
        const auto t = train_embeddings(kgtest::shared_context_corpus(), cfg);
        const double xy = cosine_similarity(t.find("EX"), t.find("EY"));
        const double xu = cosine_similarity(t.find("EX"), t.find("EU"));
        CHECK_MESSAGE(xy > xu, "seed " << seed << ": " << xy << " vs " << xu);
    }
}

TEST_CASE("500-token corpus loss curve is reproducible and frozen") {
    SkipGramConfig cfg;
    cfg.seed = 13;
    std::vector<double> curve, again;
    const auto t1 = train_embeddings(corpus_500(), cfg, &curve);
    const auto t2 = train_embeddings(corpus_500(), cfg, &again);
    CHECK(t1 == t2);
    CHECK(curve == again);
    for (double v : t1.vectors().values()) CHECK(std::isfinite(v));

    const auto frozen = kgtest::frozen_curve("embedding_loss_curve.json", curve);
    REQUIRE(frozen.size() == curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) CHECK(curve[i] == doctest::Approx(frozen[i]).epsilon(1e-9));
}

TEST_CASE("embed_type lookups") {
    const auto t = kgtest::tiny_table({"A", "B"}, 3);
    bool oov = true;
    const auto a = embed_type("A", t, &oov);
    CHECK_FALSE(oov);
    CHECK(a == std::vector<double>(t.find("A").begin(), t.find("A").end()));
    const auto z = embed_type("NOPE", t, &oov);
    CHECK(oov);
    CHECK(z == std::vector<double>(3, 0.0));
    CHECK(t.find("NOPE").empty());
}

TEST_CASE("cosine similarity") {
    std::vector<double> a{1, 0}, b{0, 2}, c{3, 0}, z{0, 0};
    CHECK(cosine_similarity(a, b) == 0.0);
    CHECK(cosine_similarity(a, c) == doctest::Approx(1.0));
    CHECK(cosine_similarity(a, z) == 0.0);
}

TEST_CASE("config validation") {
    SkipGramConfig cfg;
    cfg.dim = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParams);
}
