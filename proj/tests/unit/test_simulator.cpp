#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "kgroot/error.hpp"
#include "kgroot/simulator.hpp"

using namespace kgroot;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

PropagationRule rule(std::string from, std::string to, std::int64_t delay, Locality loc = Locality::SameEntity) {
    PropagationRule r;
    r.trigger_type = std::move(from);
    r.produced_type = std::move(to);
    r.min_delay_ms = delay;
    r.max_delay_ms = delay;
    r.probability = 1.0;
    r.locality = loc;
    return r;
}

// ROOT -> S1 -> S2 and ROOT -> S3 -> S4 with fixed delays.
FaultTemplate fixed_tree(double noise_rate) {
    FaultTemplate t;
    t.class_id = "K";
    t.root_event_type = "ROOT";
    t.noise_rate = noise_rate;
    t.rules = {rule("ROOT", "S1", 2000), rule("S1", "S2", 3000), rule("ROOT", "S3", 1500), rule("S3", "S4", 1000)};
    return t;
}

}  // namespace

TEST_CASE("two-service topology has a single edge") {
    const auto t = generate_topology(2, 0.9, 3);
    CHECK(t.services() == std::vector<std::string>{"svc-00", "svc-01"});
    REQUIRE(t.edges().size() == 1);
    CHECK(t.edges()[0] == std::pair<std::string, std::string>{"svc-00", "svc-01"});
    CHECK_THROWS_AS(generate_topology(1, 0.1, 0), InvalidParams);
    CHECK_THROWS_AS(generate_topology(5, 1.5, 0), InvalidParams);
}

TEST_CASE("topology is deterministic and connected") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = generate_topology(20, 0.15, seed);
        CHECK(a == generate_topology(20, 0.15, seed));
        CHECK(a.services().size() == 20);
        // Traversal from the first service reaches every other one.
        std::set<std::string> seen{a.services()[0]};
        std::vector<std::string> stack{a.services()[0]};
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (const auto& [x, y] : a.edges()) {
                for (const auto& [from, to] : {std::pair{x, y}, std::pair{y, x}}) {
                    if (from == u && seen.insert(to).second) stack.push_back(to);
                }
            }
        }
        CHECK(seen.size() == 20);
        CHECK(a.weakly_connected());
    }
}

TEST_CASE("fixed-delay propagation hand trace") {
    // Root at t0: S1 at +2000 and S3 at +1500 (rule order), then S2 at
    // +5000 from S1 and S4 at +2500 from S3. The alarm is S2.
    const Topology topo({"svc-a"}, {});
    const auto cases = generate_dataset(topo, {fixed_tree(0.0)}, 4, 9);
    for (const auto& c : cases) {
        const auto& s = c.sequence;
        REQUIRE(s.events.size() == 5);
        const std::string f = s.failure_id;
        const auto t0 = s.events[0].timestamp_ms;
        const std::vector<std::tuple<std::string, std::string, std::int64_t>> expected{
            {f + "-e000", "ROOT", 0}, {f + "-e002", "S3", 1500}, {f + "-e001", "S1", 2000},
            {f + "-e004", "S4", 2500}, {f + "-e003", "S2", 5000}};
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(s.events[i].event_id == std::get<0>(expected[i]));
            CHECK(s.events[i].event_type == std::get<1>(expected[i]));
            CHECK(s.events[i].timestamp_ms - t0 == std::get<2>(expected[i]));
            CHECK(s.events[i].entity == "svc-a");
        }
        CHECK(s.alarm_event_id == f + "-e003");
        CHECK(c.truth.root_event_id == f + "-e000");
        CHECK(c.truth.propagation_path == std::vector<std::string>{"ROOT", "S1", "S2"});
        CHECK(c.truth.path_event_ids == std::vector<std::string>{f + "-e000", f + "-e001", f + "-e003"});
        const std::vector<std::pair<std::string, std::string>> links{
            {f + "-e000", f + "-e001"}, {f + "-e000", f + "-e002"}, {f + "-e001", f + "-e003"}, {f + "-e002", f + "-e004"}};
        CHECK(c.truth.causal_links == links);
        CHECK(c.raw_records.size() == 5);
    }
}

TEST_CASE("generator quota and validation") {
    const auto topo = generate_topology(16, 0.15, 1);
    const auto templates = default_templates(20, 2);
    CHECK_THROWS_AS(generate_dataset(topo, templates, 79, 3), InvalidParams);
    const auto cases = generate_dataset(topo, templates, 160, 3);
    std::map<std::string, int> per_class;
    for (const auto& c : cases) per_class[c.truth.fault_class]++;
    CHECK(per_class.size() == 20);
    for (const auto& [label, n] : per_class) CHECK(n >= 4);

    auto bad = fixed_tree(0.0);
    bad.rules[0].probability = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidParams);
    bad = fixed_tree(-1.0);
    CHECK_THROWS_AS(bad.validate(), InvalidParams);
    CHECK_THROWS_AS(default_templates(0, 1), InvalidParams);
}

TEST_CASE("templates have four to six symptoms under a known root") {
    const auto templates = default_templates(20, 5);
    std::set<std::string> roots;
    for (const auto& r : root_event_types()) roots.insert(r.id);
    for (const auto& t : templates) {
        CHECK(roots.contains(t.root_event_type));
        CHECK(t.rules.size() >= 4);
        CHECK(t.rules.size() <= 6);
        std::set<std::string> produced{t.root_event_type};
        for (const auto& r : t.rules) {
            CHECK(produced.contains(r.trigger_type));
            CHECK(produced.insert(r.produced_type).second);
        }
    }
}

TEST_CASE("without noise every event belongs to the fault") {
    DatasetConfig cfg;
    cfg.noise_rate = 0.0;
    const auto ds = simulate(cfg);
    for (const auto& c : ds.cases) {
        const std::set<std::string> fault(c.truth.fault_event_ids.begin(), c.truth.fault_event_ids.end());
        CHECK(fault.size() == c.sequence.events.size());
        for (const auto& e : c.sequence.events) CHECK(fault.contains(e.event_id));
    }
    // A chain template leaves nothing off the path.
    FaultTemplate chain;
    chain.class_id = "C";
    chain.root_event_type = "ROOT";
    chain.noise_rate = 0.0;
    chain.rules = {rule("ROOT", "A", 1000), rule("A", "B", 1000), rule("B", "C", 1000)};
    for (const auto& c : generate_dataset(ds.topology, {chain}, 4, 1)) {
        std::vector<std::string> ids;
        for (const auto& e : c.sequence.events) ids.push_back(e.event_id);
        CHECK(ids == c.truth.path_event_ids);
    }
}

TEST_CASE("ground truth invariants over the default corpus") {
    const auto ds = simulate(DatasetConfig{});
    const auto& topo = ds.topology;
    std::set<std::string> noise;
    for (const auto& t : noise_event_types()) noise.insert(t.id);
    for (const auto& c : ds.cases) {
        std::map<std::string, const Event*> by_id;
        for (const auto& e : c.sequence.events) by_id[e.event_id] = &e;
        const std::set<std::string> fault(c.truth.fault_event_ids.begin(), c.truth.fault_event_ids.end());

        // Root is the earliest fault event.
        const Event* root = by_id.at(c.truth.root_event_id);
        for (const auto& id : fault) {
            if (id != root->event_id) CHECK(event_before(*root, *by_id.at(id)));
        }
        for (const auto& e : c.sequence.events) CHECK(noise.contains(e.event_type) != fault.contains(e.event_id));

        // Produced events land on the trigger's entity or a direct neighbour.
        for (const auto& [a, b] : c.truth.causal_links) {
            const Event* trigger = by_id.at(a);
            const Event* produced = by_id.at(b);
            CHECK(trigger->timestamp_ms < produced->timestamp_ms);
            const auto hops = topo.hop_distance(trigger->entity, produced->entity);
            REQUIRE(hops.has_value());
            CHECK(*hops <= 1);
        }
        CHECK(c.truth.path_event_ids.front() == c.truth.root_event_id);
        CHECK(c.truth.path_event_ids.back() == c.truth.alarm_event_id);
        CHECK(c.sequence.alarm_event_id == c.truth.alarm_event_id);
        CHECK(c.truth.propagation_path.front() == by_id.at(c.truth.root_event_id)->event_type);
        CHECK(std::is_sorted(c.sequence.events.begin(), c.sequence.events.end(), event_before));
    }
}

TEST_CASE("simulate writes byte-identical files per seed") {
    DatasetConfig cfg;
    cfg.n_failures = 40;
    cfg.n_classes = 10;
    const auto a = kgtest::scratch_dir("sim-a");
    const auto b = kgtest::scratch_dir("sim-b");
    write_dataset(a, simulate(cfg));
    write_dataset(b, simulate(cfg));
    for (const char* f : {kEventsFile, kRawRecordsFile, kGroundTruthFile, kTopologyFile}) {
        const auto bytes = slurp(a / f);
        CHECK(!bytes.empty());
        CHECK(bytes == slurp(b / f));
    }

    const auto ds = simulate(cfg);
    const auto events = load_events(a / kEventsFile);
    REQUIRE(events.size() == ds.cases.size());
    for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i] == ds.cases[i].sequence);
    CHECK(load_ground_truth(a / kGroundTruthFile) == ds.truths());

    cfg.seed = 43;
    write_dataset(b, simulate(cfg));
    CHECK(slurp(a / kEventsFile) != slurp(b / kEventsFile));
}
