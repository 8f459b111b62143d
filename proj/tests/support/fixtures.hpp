#pragma once

// Builders shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "kgroot/embedding.hpp"
#include "kgroot/event.hpp"
#include "kgroot/fpg.hpp"
#include "kgroot/relation.hpp"
#include "kgroot/rgcn.hpp"
#include "kgroot/stats.hpp"

namespace kgtest {

using namespace kgroot;

inline Event ev(std::string id, std::string type, std::int64_t ts, std::string entity = "svc-00") {
    Event e;
    e.event_id = std::move(id);
    e.event_type = std::move(type);
    e.entity = std::move(entity);
    e.timestamp_ms = ts;
    return e;
}

inline EventSequence sequence(std::string failure_id, std::vector<Event> events) {
    EventSequence s;
    s.failure_id = std::move(failure_id);
    s.events = std::move(events);
    sort_events(s);
    return s;
}

// Deterministic table with one-hot-ish rows so featurize has something to chew on.
inline EmbeddingTable tiny_table(const std::vector<std::string>& vocab, std::size_t dim = 2) {
    Matrix v(vocab.size(), dim);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        for (std::size_t c = 0; c < dim; ++c) v(i, c) = std::sin(1.0 + static_cast<double>(i * dim + c));
    }
    return EmbeddingTable(vocab, std::move(v));
}

// Random sequence over `n_types` types, `n_events` events within a few minutes.
inline EventSequence random_sequence(std::mt19937_64& rng, std::size_t n_events, std::size_t n_types,
                                     const std::string& failure_id = "f") {
    std::uniform_int_distribution<std::size_t> type(0, n_types - 1);
    std::uniform_int_distribution<std::int64_t> ts(0, 180'000);
    std::uniform_int_distribution<int> ent(0, 3);
    std::vector<Event> events;
    for (std::size_t i = 0; i < n_events; ++i) {
        events.push_back(ev(failure_id + "-" + std::to_string(i), "T" + std::to_string(type(rng)), ts(rng),
                            "svc-0" + std::to_string(ent(rng))));
    }
    return sequence(failure_id, std::move(events));
}

inline std::vector<std::string> type_vocab(std::size_t n_types) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n_types; ++i) out.push_back("T" + std::to_string(i));
    return out;
}

// Random multigraph over `n` nodes with `d` features and about `edges` canonical edges.
inline MultiGraph random_multigraph(std::mt19937_64& rng, std::size_t n, std::size_t d, std::size_t edges) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    std::bernoulli_distribution causal(0.5);
    std::vector<std::string> types;
    Matrix x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        types.push_back("N" + std::to_string(i));
        for (std::size_t c = 0; c < d; ++c) x(i, c) = u(rng);
    }
    std::vector<CanonicalEdge> canon;
    for (std::size_t k = 0; k < edges; ++k) {
        std::size_t a = node(rng), b = node(rng);
        if (a == b) continue;
        canon.push_back({a, causal(rng) ? RelationKind::Causal : RelationKind::Sequential, b});
    }
    return make_multigraph(std::move(types), std::move(x), canon);
}

inline RgcnShape small_shape(std::size_t d) {
    RgcnShape s;
    s.input_dim = d;
    s.hidden_dim = 5;
    s.output_dim = 4;
    s.mlp_hidden = 6;
    return s;
}

// Random model with every weight and bias drawn from [-1, 1], so the
// rectifiers sit at generic points.
inline RgcnSimilarityModel random_model(const RgcnShape& shape, std::mt19937_64& rng) {
    RgcnSimilarityModel m = init_model(shape, rng());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto p : m.parameters()) {
        for (double& v : p) v = u(rng);
    }
    return m;
}

// Two event types seen in identical contexts (E1 E2 E3 _ E4 E5) and one
// type seen only among its own neighbours.
inline std::vector<std::vector<std::string>> shared_context_corpus(std::size_t repeats = 40) {
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < repeats; ++i) {
        out.push_back({"E1", "E2", "E3", "EX", "E4", "E5"});
        out.push_back({"E1", "E2", "E3", "EY", "E4", "E5"});
        out.push_back({"F1", "F2", "F3", "EU", "F4", "F5"});
    }
    return out;
}

inline std::filesystem::path data_file(const std::string& name) {
    return std::filesystem::path(KGROOT_TEST_DATA_DIR) / name;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("kgroot-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace kgtest
