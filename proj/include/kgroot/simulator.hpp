#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kgroot/event.hpp"
#include "kgroot/topology.hpp"

namespace kgroot {

// Where a produced event lands relative to its trigger's entity. Upstream
// means a caller of that service, downstream a callee; both fall back to
// the same entity when the service has no such neighbour.
enum class Locality { SameEntity, Upstream, Downstream };

std::string to_string(Locality l);

struct PropagationRule {
    std::string trigger_type;
    std::string produced_type;
    std::int64_t min_delay_ms = 1000;
    std::int64_t max_delay_ms = 5000;
    double probability = 1.0;
    Locality locality = Locality::SameEntity;
};

struct FaultTemplate {
    std::string class_id;
    std::string root_event_type;
    std::vector<PropagationRule> rules;
    double noise_rate = 2.0;  // unrelated events per minute

    void validate() const;
};

// Ground truth of one generated failure.
struct CaseTruth {
    std::string failure_id;
    std::string fault_class;
    std::string root_event_id;
    std::string alarm_event_id;
    std::vector<std::string> propagation_path;  // types, root to alarm
    std::vector<std::string> path_event_ids;
    std::vector<std::pair<std::string, std::string>> causal_links;  // (trigger, produced)
    std::vector<std::string> fault_event_ids;                       // non-noise events

    bool operator==(const CaseTruth&) const = default;
};

struct GeneratedCase {
    EventSequence sequence;
    CaseTruth truth;
    std::vector<RawRecord> raw_records;  // parallel to sequence.events
};

const std::vector<EventType>& root_event_types();
const std::vector<EventType>& symptom_event_types();
const std::vector<EventType>& noise_event_types();

// Abstraction rules that turn the simulator's raw payloads back into types.
TemplateCatalog simulator_template_catalog();

// Random connected dependency graph: every service after the first calls
// into one earlier service, plus extra edges with probability edge_density.
Topology generate_topology(std::size_t n_services, double edge_density, std::uint64_t seed);

// Fault classes cycling over the five root types, each with a random
// propagation tree of 4-6 symptom types.
std::vector<FaultTemplate> default_templates(std::size_t n_classes, std::uint64_t seed, double noise_rate = 2.0);

// Every template receives at least four failures (InvalidParams otherwise).
std::vector<GeneratedCase> generate_dataset(const Topology& topo,
                                            const std::vector<FaultTemplate>& templates,
                                            std::size_t n_failures,
                                            std::uint64_t seed);

struct DatasetConfig {
    std::size_t n_services = 20;
    double edge_density = 0.15;
    std::size_t n_classes = 20;
    std::size_t n_failures = 160;
    double noise_rate = 2.0;
    std::uint64_t seed = 42;
};

struct Dataset {
    Topology topology;
    std::vector<FaultTemplate> templates;
    std::vector<GeneratedCase> cases;

    std::vector<EventSequence> sequences() const;
    std::map<std::string, CaseTruth> truths() const;
};

Dataset simulate(const DatasetConfig& cfg);

// File layout written by write_dataset.
inline constexpr const char* kEventsFile = "events.jsonl";
inline constexpr const char* kRawRecordsFile = "raw_records.jsonl";
inline constexpr const char* kGroundTruthFile = "ground_truth.json";
inline constexpr const char* kTopologyFile = "topology.json";

void write_dataset(const std::filesystem::path& dir, const Dataset& ds);
std::map<std::string, CaseTruth> load_ground_truth(const std::filesystem::path& path);

}  // namespace kgroot
