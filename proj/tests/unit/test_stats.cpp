#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "kgroot/simulator.hpp"

using namespace kgroot;
using kgtest::ev;
using kgtest::sequence;

namespace {

// Every ordered event pair inspected directly.
std::map<std::pair<std::string, std::string>, std::int64_t> brute_pair_counts(
    const std::vector<EventSequence>& seqs, std::int64_t window_ms) {
    std::map<std::pair<std::string, std::string>, std::set<std::string>> anchors, followers;
    for (const auto& s : seqs) {
        for (const auto& a : s.events) {
            for (const auto& b : s.events) {
                if (!event_before(a, b)) continue;
                if (b.timestamp_ms - a.timestamp_ms > window_ms) continue;
                anchors[{a.event_type, b.event_type}].insert(s.failure_id + "/" + a.event_id);
                followers[{a.event_type, b.event_type}].insert(s.failure_id + "/" + b.event_id);
            }
        }
    }
    std::map<std::pair<std::string, std::string>, std::int64_t> out;
    for (const auto& [k, a] : anchors) {
        out[k] = static_cast<std::int64_t>(std::min(a.size(), followers[k].size()));
    }
    return out;
}

}  // namespace

TEST_CASE("pair counts of two-event sequences") {
    CHECK(build_stats({sequence("f", {ev("a", "A", 0), ev("b", "B", 1000)})}, 10).pair_count("A", "B") == 1);
    CHECK(build_stats({sequence("f", {ev("a", "A", 0), ev("b", "B", 100000)})}, 10).pair_count("A", "B") == 0);
    CHECK(build_stats({}, 10).total_events == 0);
}

TEST_CASE("simulator corpus pair counts equal a brute-force window scan") {
    DatasetConfig cfg;
    cfg.n_classes = 6;
    cfg.n_failures = 30;
    const auto seqs = simulate(cfg).sequences();
    const auto stats = build_stats(seqs, 60.0);
    const auto brute = brute_pair_counts(seqs, 60'000);
    CHECK(stats.type_pair_counts == brute);

    std::map<std::string, std::int64_t> marginals;
    std::int64_t total = 0;
    for (const auto& s : seqs) {
        for (const auto& e : s.events) {
            ++marginals[e.event_type];
            ++total;
        }
    }
    CHECK(stats.type_counts == marginals);
    CHECK(stats.total_events == total);
    // A pair count never exceeds either marginal.
    for (const auto& [k, n] : stats.type_pair_counts) {
        CHECK(n <= stats.type_count(k.first));
        CHECK(n <= stats.type_count(k.second));
    }
}

TEST_CASE("pmi and correlation against hand computation") {
    // Three failures [A, B] plus one [A, C]; the windows never overlap across failures.
    std::vector<EventSequence> seqs;
    for (int i = 0; i < 3; ++i) seqs.push_back(sequence("f" + std::to_string(i), {ev("a", "A", 0), ev("b", "B", 500)}));
    seqs.push_back(sequence("g", {ev("a", "A", 0), ev("c", "C", 500)}));
    const auto stats = build_stats(seqs, 10);
    // n = 8, P(A) = 4/8, P(B) = 3/8, P(A,B) = 3/8.
    const double expected_pmi = std::log((3.0 / 8.0) / ((4.0 / 8.0) * (3.0 / 8.0)));
    CHECK(*pmi("A", "B", stats) == doctest::Approx(expected_pmi).epsilon(1e-15));
    const double npmi = expected_pmi / -std::log(3.0 / 8.0);
    CHECK(correlation("A", "B", stats) == doctest::Approx((npmi + 1.0) / 2.0).epsilon(1e-15));
    CHECK_FALSE(pmi("B", "A", stats).has_value());
    CHECK(correlation("B", "A", stats) == 0.0);
    CHECK(correlation("A", "UNSEEN", stats) == 0.0);
    CHECK(correlation("UNSEEN", "A", stats) == 0.0);
}

TEST_CASE("a type always and only followed by another correlates fully") {
    std::vector<EventSequence> seqs;
    for (int i = 0; i < 5; ++i) seqs.push_back(sequence("f" + std::to_string(i), {ev("a", "A", 0), ev("b", "B", 1000)}));
    const auto stats = build_stats(seqs, 10);
    // P(A,B) = P(A) = P(B) = 1/2 so npmi = log 2 / log 2 = 1.
    CHECK(correlation("A", "B", stats) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("correlation stays in the unit interval") {
    DatasetConfig cfg;
    cfg.n_classes = 5;
    cfg.n_failures = 20;
    const auto stats = build_stats(simulate(cfg).sequences(), 60.0);
    for (const auto& [a, na] : stats.type_counts) {
        for (const auto& [b, nb] : stats.type_counts) {
            const double c = correlation(a, b, stats);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
        }
    }
}
