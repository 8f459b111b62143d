#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "kgroot/error.hpp"
#include "kgroot/simulator.hpp"

using namespace kgroot;
using kgtest::ev;

namespace {

TemplateCatalog cpu_catalog() {
    TemplateRule rule;
    rule.source = RecordSource::Metric;
    rule.pattern = "cpu_util";
    rule.event_type = "CPU_OVERLOAD";
    rule.condition = NumericCondition{"cpu_util", 0.9};
    rule.extract_keys = {"cpu_util"};
    return TemplateCatalog({rule});
}

}  // namespace

TEST_CASE("abstract_event applies the first matching rule") {
    RawRecord raw{RecordSource::Metric, "pod-7", 1000, "cpu_util=0.97"};
    const Event e = abstract_event(raw, cpu_catalog(), "e1");
    CHECK(e.event_type == "CPU_OVERLOAD");
    CHECK(e.entity == "pod-7");
    CHECK(e.timestamp_ms == 1000);
    CHECK(e.attributes.at("cpu_util") == "0.97");
}

TEST_CASE("abstract_event errors") {
    const auto catalog = cpu_catalog();
    CHECK_THROWS_AS(abstract_event({RecordSource::Metric, "pod-7", 1000, "mem_used=0.5"}, catalog, "e"),
                    NoMatchingTemplate);
    // Below the numeric guard.
    CHECK_THROWS_AS(abstract_event({RecordSource::Metric, "pod-7", 1000, "cpu_util=0.20"}, catalog, "e"),
                    NoMatchingTemplate);
    // Wrong source.
    CHECK_THROWS_AS(abstract_event({RecordSource::Log, "pod-7", 1000, "cpu_util=0.97"}, catalog, "e"),
                    NoMatchingTemplate);
    CHECK_THROWS_AS(abstract_event({RecordSource::Metric, "pod-7", 1000, ""}, catalog, "e"), InvalidArgument);
    CHECK_THROWS_AS(abstract_event({RecordSource::Metric, "pod-7", 1000, "x"}, TemplateCatalog({}), "e"),
                    InvalidArgument);
}

TEST_CASE("abstract_records drop and strict policies") {
    std::vector<RawRecord> raws{{RecordSource::Metric, "a", 1, "cpu_util=0.95"},
                                {RecordSource::Metric, "a", 2, "noise=1"},
                                {RecordSource::Metric, "b", 3, "cpu_util=0.99"}};
    auto out = abstract_records(raws, cpu_catalog(), "r");
    CHECK(out.dropped == 1);
    REQUIRE(out.events.size() == 2);
    CHECK(out.events[1].event_id == "r2");
    CHECK_THROWS_AS(abstract_records(raws, cpu_catalog(), "r", UnmatchedPolicy::Strict), NoMatchingTemplate);
}

TEST_CASE("simulator raw records abstract back to the injected types") {
    DatasetConfig cfg;
    cfg.n_classes = 5;
    cfg.n_failures = 20;
    const Dataset ds = simulate(cfg);
    const auto catalog = simulator_template_catalog();
    std::size_t checked = 0;
    for (const auto& c : ds.cases) {
        for (std::size_t i = 0; i < c.raw_records.size() && checked < 50; ++i, ++checked) {
            const Event e = abstract_event(c.raw_records[i], catalog, "x");
            CHECK(e.event_type == c.sequence.events[i].event_type);
            CHECK(e.entity == c.sequence.events[i].entity);
            CHECK(e.timestamp_ms == c.sequence.events[i].timestamp_ms);
        }
    }
    CHECK(checked == 50);
}

TEST_CASE("read_events grouping, ordering and errors") {
    SUBCASE("empty input") {
        std::istringstream in("");
        CHECK(read_events(in).empty());
    }
    SUBCASE("out of order records of one failure") {
        std::istringstream in(
            R"({"failure_id":"f","event_id":"c","event_type":"C","entity":"s","timestamp_ms":30,"attributes":{}})"
            "\n"
            R"({"failure_id":"f","event_id":"a","event_type":"A","entity":"s","timestamp_ms":10,"attributes":{}})"
            "\n"
            R"({"failure_id":"f","event_id":"b","event_type":"B","entity":"s","timestamp_ms":20,"attributes":{}})"
            "\n");
        auto seqs = read_events(in);
        REQUIRE(seqs.size() == 1);
        REQUIRE(seqs[0].events.size() == 3);
        CHECK(seqs[0].events[0].event_id == "a");
        CHECK(seqs[0].events[1].event_id == "b");
        CHECK(seqs[0].events[2].event_id == "c");
        CHECK(is_sorted(seqs[0]));
    }
    SUBCASE("duplicate event id") {
        std::istringstream in(
            R"({"failure_id":"f","event_id":"a","event_type":"A","entity":"s","timestamp_ms":10})"
            "\n"
            R"({"failure_id":"f","event_id":"a","event_type":"B","entity":"s","timestamp_ms":20})"
            "\n");
        CHECK_THROWS_AS(read_events(in), DuplicateEventId);
    }
    SUBCASE("malformed line reports its number") {
        std::istringstream in(
            R"({"failure_id":"f","event_id":"a","event_type":"A","entity":"s","timestamp_ms":10})"
            "\n{not json\n");
        try {
            read_events(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_events("/nonexistent/events.jsonl"), IoError);
    }
}

TEST_CASE("events round-trip through the file format") {
    auto s1 = kgtest::sequence("f1", {ev("a", "A", 5), ev("b", "B", 9, "svc-01")});
    s1.fault_class = "F00";
    s1.alarm_event_id = "b";
    s1.events[0].attributes["value"] = "0.5";
    auto s2 = kgtest::sequence("f2", {ev("c", "C", 1)});
    const auto dir = kgtest::scratch_dir("events");
    save_events(dir / "events.jsonl", {s1, s2});
    const auto back = load_events(dir / "events.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0] == s1);
    CHECK(back[1] == s2);
}

TEST_CASE("event order breaks timestamp ties by id") {
    CHECK(event_before(ev("a", "X", 5), ev("b", "X", 5)));
    CHECK_FALSE(event_before(ev("b", "X", 5), ev("a", "X", 5)));
    CHECK(event_before(ev("z", "X", 4), ev("a", "X", 5)));
}
