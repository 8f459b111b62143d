#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "kgroot/fpg.hpp"

namespace kgroot {

struct TypeTriple {
    std::string src;
    RelationKind kind = RelationKind::Sequential;
    std::string dst;

    auto operator<=>(const TypeTriple&) const = default;
    bool operator==(const TypeTriple&) const = default;
};

// Type-level graph: concrete events replaced by their event types.
struct AbstractFpg {
    std::set<std::string> nodes;
    std::set<TypeTriple> edges;

    bool empty() const noexcept { return nodes.empty(); }
    bool operator==(const AbstractFpg&) const = default;
};

// True when every node and triple of `sub` is in `super`.
bool is_subgraph(const AbstractFpg& sub, const AbstractFpg& super);

enum class FekgPipeline { ClusterIntersect, RelationUnion };

std::string to_string(FekgPipeline p);
FekgPipeline fekg_pipeline_from_string(const std::string& s);

struct FekgProvenance {
    std::vector<std::string> instance_ids;
    FekgPipeline pipeline = FekgPipeline::ClusterIntersect;
    std::map<std::string, double> parameters;
    std::vector<std::size_t> empty_subgraphs;  // indices flagged as empty intersections

    bool operator==(const FekgProvenance&) const = default;
};

// Knowledge graph of one fault class.
struct Fekg {
    std::string fault_class;
    std::vector<AbstractFpg> subgraphs;
    std::string root_cause_type;
    std::vector<std::string> propagation_path;
    FekgProvenance provenance;

    bool operator==(const Fekg&) const = default;
};

// Labels supplied by operators (here: simulator ground truth).
struct RootInfo {
    std::string root_cause_type;
    std::vector<std::string> propagation_path;
};

struct ClusterConfig {
    double mu = 0.5;  // inter-cluster linkage threshold

    void validate() const;
};

AbstractFpg abstract(const Fpg& g);

// Jaccard of triple sets; node-set Jaccard when both have no edges; 1 when
// both graphs are empty.
double graph_similarity_jaccard(const AbstractFpg& a, const AbstractFpg& b);

// Average-linkage agglomerative clustering from singletons. Merges the pair
// of clusters with the largest linkage until that linkage drops below mu or
// one cluster remains. Clusters hold input indices in ascending order and
// are ordered by their smallest index. mu is not range checked here so that
// mu > 1 can be used to force singletons.
std::vector<std::vector<std::size_t>> graph_clustering(const std::vector<AbstractFpg>& graphs, double mu);
std::vector<std::vector<std::size_t>> graph_clustering(const std::vector<Fpg>& graphs, double mu);

// Abstraction of the first member intersected (nodes and triples) with the
// abstraction of every other member.
AbstractFpg intersect_cluster(const std::vector<const Fpg*>& cluster);
AbstractFpg intersect_cluster(const std::vector<Fpg>& cluster);

// Cluster, intersect each cluster and assemble the class FEKG.
// `instance_ids` (optional, parallel to `graphs`) is recorded as provenance.
Fekg build_fekg_cluster(const std::vector<Fpg>& graphs,
                        const ClusterConfig& cfg,
                        const std::string& fault_class,
                        const RootInfo& root,
                        const std::vector<std::string>& instance_ids = {});

struct UnionConfig {
    // Event types present in at least this fraction of instances are kept.
    double min_support = 0.5;
};

// Types whose instance frequency reaches min_support, sorted.
std::set<std::string> important_types(const std::vector<EventSequence>& instances, double min_support);

// Per-instance candidate relations between consecutive important events,
// filtered by the existence classifier and labelled with classify_kind.
std::set<TypeTriple> filtered_relations(const EventSequence& instance,
                                        const std::set<std::string>& important,
                                        const RelationModels& models,
                                        const RelationContext& ctx);

// Relation-union pipeline: the single subgraph holds the important types
// and the union of every instance's filtered relations.
Fekg build_fekg_union(const std::vector<EventSequence>& instances,
                      const RelationModels& models,
                      const RelationContext& ctx,
                      const UnionConfig& cfg,
                      const std::string& fault_class,
                      const RootInfo& root);

// Empty when the invariants hold, otherwise the first violation.
std::string check_invariants(const Fekg& kg);

}  // namespace kgroot
