#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgroot/embedding.hpp"
#include "kgroot/fekg.hpp"
#include "kgroot/fpg.hpp"
#include "kgroot/relation.hpp"
#include "kgroot/rgcn.hpp"
#include "kgroot/stats.hpp"
#include "kgroot/topology.hpp"

namespace kgroot {

struct CandidateEvent {
    Event event;
    double time_interval_s = 0.0;  // |alarm - candidate|
    int distance_hops = 0;         // |V| + 1 when unreachable from the alarm
};

struct RankingWeights {
    double w_t = 0.5;
    double w_d = 0.5;
    std::size_t top_n = 5;

    void validate() const;
};

struct RankedEvent {
    CandidateEvent candidate;
    double n_t = 0.0;
    double n_d = 0.0;
    double score = 0.0;
};

// Candidates are the events of `root_type`. N_d grows as the hop distance
// to the alarm shrinks, N_t grows with the time interval; both are dense
// ranks mapped so the best value is |candidates|. Sorted by score desc,
// then distance asc, timestamp asc, event id asc; truncated to top_n.
// Throws AlarmNotInGraph.
std::vector<RankedEvent> rank_candidates(const Fpg& online, const Event& alarm, const std::string& root_type,
                                         const RankingWeights& w);

// Everything diagnose needs besides the knowledge graphs.
struct DiagnosisModels {
    HistoricalStats stats;
    EmbeddingTable table;
    std::optional<Topology> topology;
    RelationModels relations;
    RgcnSimilarityModel similarity;

    RelationContext context() const;
};

struct DiagnoseConfig {
    FpgConfig fpg;
    RankingWeights weights;
    std::size_t top_k = 3;  // classes whose candidate events are ranked
};

struct RankedClass {
    std::string fault_class;
    double p_similar = 0.0;
    std::string root_cause_type;
    std::vector<RankedEvent> events;  // filled for the top_k classes only
};

struct DiagnosisReport {
    std::string failure_id;
    std::string alarm_event_id;
    std::vector<RankedClass> classes;
    double latency_ms = 0.0;
    std::size_t online_nodes = 0;
    std::size_t online_edges = 0;
    std::size_t kb_graphs = 0;
    nlohmann::json config;
};

// The sequence's alarm, or its latest event when none is marked.
const Event& alarm_of(const EventSequence& seq);

// Non-empty subgraphs of every FEKG, ids "<class>#<index>".
std::vector<LabeledGraph> knowledge_graphs(const std::vector<Fekg>& kb, const EmbeddingTable& table,
                                           std::size_t window_cap);

// Online graph, class matching, candidate ranking for the top classes.
// Throws EmptyKnowledgeBase, AlarmNotInGraph.
DiagnosisReport diagnose(const EventSequence& online_events, const std::vector<Fekg>& kb,
                         const DiagnosisModels& models, const DiagnoseConfig& cfg);

nlohmann::json to_json(const DiagnosisReport& r);
std::string render_text(const DiagnosisReport& r);

}  // namespace kgroot
