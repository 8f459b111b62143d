#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgroot/event.hpp"
#include "kgroot/relation.hpp"
#include "kgroot/stats.hpp"

namespace kgroot {

struct EdgeTriple {
    std::string src;
    RelationKind kind = RelationKind::Sequential;
    std::string dst;

    auto operator<=>(const EdgeTriple&) const = default;
    bool operator==(const EdgeTriple&) const = default;
};

// Fault propagation graph over concrete events. Nodes are kept sorted by
// event_before; edges always point from the earlier to the later event.
struct Fpg {
    std::vector<Event> nodes;
    std::set<EdgeTriple> edges;

    bool empty() const noexcept { return nodes.empty(); }
    const Event* find(const std::string& event_id) const;
    bool operator==(const Fpg&) const = default;
};

// Empty string when the invariants hold, otherwise the first violation.
std::string check_invariants(const Fpg& g);

struct FpgConfig {
    std::size_t max_associated = 3;     // attachments per inserted event
    double correlation_threshold = 0.6; // minimum correlation of an attachment
    std::size_t window_cap = 100;       // online graphs keep the latest events only

    void validate() const;
};

// Historical graphs use the whole sequence; online graphs apply window_cap.
enum class FpgMode { Historical, Online };

// Attachments proposed for one inserted event, best first.
struct CandidateGraph {
    std::vector<std::string> new_edges;  // ids of existing events linked to the new one
    double score = 0.0;
};

// Bounded greedy candidate: existing events whose type correlation with the
// new event reaches the threshold and that the existence classifier accepts,
// ordered by (score desc, timestamp desc, event id asc), top max_associated.
// nullopt when no attachment survives.
std::optional<CandidateGraph> best_candidate_graph(const std::vector<Event>& existing,
                                                   const Event& incoming,
                                                   const FpgConfig& cfg,
                                                   const RelationModels& models,
                                                   const RelationContext& ctx);

// Builds the graph by inserting events earliest first. Events without a
// surviving attachment join as isolated nodes.
Fpg build_fpg(const EventSequence& q,
              const FpgConfig& cfg,
              const RelationModels& models,
              const RelationContext& ctx,
              FpgMode mode = FpgMode::Historical);

// Weakly connected components as event-id lists, each in event order;
// components ordered by their earliest event.
std::vector<std::vector<std::string>> connected_components(const Fpg& g);

// Undirected hop counts from `source` to every reachable node.
std::vector<std::pair<std::string, int>> hop_distances(const Fpg& g, const std::string& source);

}  // namespace kgroot
