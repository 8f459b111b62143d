#include "kgroot/fekg.hpp"

#include <algorithm>
#include <iterator>

#include "kgroot/error.hpp"

namespace kgroot {

bool is_subgraph(const AbstractFpg& sub, const AbstractFpg& super) {
    return std::includes(super.nodes.begin(), super.nodes.end(), sub.nodes.begin(), sub.nodes.end()) &&
           std::includes(super.edges.begin(), super.edges.end(), sub.edges.begin(), sub.edges.end());
}

std::string to_string(FekgPipeline p) {
    return p == FekgPipeline::ClusterIntersect ? "cluster_intersect" : "relation_union";
}

FekgPipeline fekg_pipeline_from_string(const std::string& s) {
    if (s == "cluster_intersect") return FekgPipeline::ClusterIntersect;
    if (s == "relation_union") return FekgPipeline::RelationUnion;
    throw InvalidArgument("unknown FEKG pipeline: " + s);
}

void ClusterConfig::validate() const {
    if (!(mu >= 0.0 && mu <= 1.0)) throw InvalidParams("linkage threshold mu must lie in [0, 1]");
}

AbstractFpg abstract(const Fpg& g) {
    AbstractFpg out;
    std::map<std::string, const std::string*> type_of;
    for (const auto& e : g.nodes) {
        out.nodes.insert(e.event_type);
        type_of[e.event_id] = &e.event_type;
    }
    for (const auto& edge : g.edges) {
        out.edges.insert({*type_of.at(edge.src), edge.kind, *type_of.at(edge.dst)});
    }
    return out;
}

namespace {

template <typename Set>
double jaccard(const Set& a, const Set& b) {
    std::size_t shared = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++shared;
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = a.size() + b.size() - shared;
    return uni == 0 ? 1.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

}  // namespace

double graph_similarity_jaccard(const AbstractFpg& a, const AbstractFpg& b) {
    if (a.edges.empty() && b.edges.empty()) return jaccard(a.nodes, b.nodes);
    return jaccard(a.edges, b.edges);
}

std::vector<std::vector<std::size_t>> graph_clustering(const std::vector<AbstractFpg>& graphs, double mu) {
    const std::size_t n = graphs.size();
    if (n == 0) throw InvalidArgument("graph_clustering: no graphs");
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) sim[i][j] = sim[j][i] = graph_similarity_jaccard(graphs[i], graphs[j]);
    }

    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});

    auto linkage = [&](const std::vector<std::size_t>& p, const std::vector<std::size_t>& q) {
        double total = 0.0;
        for (auto i : p) {
            for (auto j : q) total += sim[i][j];
        }
        return total / static_cast<double>(p.size() * q.size());
    };

    while (clusters.size() > 1) {
        std::size_t best_p = 0;
        std::size_t best_q = 1;
        double best = -1.0;
        for (std::size_t p = 0; p < clusters.size(); ++p) {
            for (std::size_t q = p + 1; q < clusters.size(); ++q) {
                const double l = linkage(clusters[p], clusters[q]);
                if (l > best) {
                    best = l;
                    best_p = p;
                    best_q = q;
                }
            }
        }
        if (best < mu) break;
        auto merged = clusters[best_p];
        merged.insert(merged.end(), clusters[best_q].begin(), clusters[best_q].end());
        std::sort(merged.begin(), merged.end());
        clusters[best_p] = std::move(merged);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_q));
    }
    std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return clusters;
}

std::vector<std::vector<std::size_t>> graph_clustering(const std::vector<Fpg>& graphs, double mu) {
    std::vector<AbstractFpg> abstracted;
    abstracted.reserve(graphs.size());
    for (const auto& g : graphs) abstracted.push_back(abstract(g));
    return graph_clustering(abstracted, mu);
}

namespace {

AbstractFpg intersect(const AbstractFpg& a, const AbstractFpg& b) {
    AbstractFpg out;
    std::set_intersection(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(),
                          std::inserter(out.nodes, out.nodes.end()));
    std::set_intersection(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
                          std::inserter(out.edges, out.edges.end()));
    return out;
}

}  // namespace

AbstractFpg intersect_cluster(const std::vector<const Fpg*>& cluster) {
    if (cluster.empty()) throw InvalidArgument("intersect_cluster: empty cluster");
    AbstractFpg sg = abstract(*cluster.front());
    for (std::size_t i = 1; i < cluster.size(); ++i) sg = intersect(sg, abstract(*cluster[i]));
    return sg;
}

AbstractFpg intersect_cluster(const std::vector<Fpg>& cluster) {
    std::vector<const Fpg*> ptrs;
    for (const auto& g : cluster) ptrs.push_back(&g);
    return intersect_cluster(ptrs);
}

Fekg build_fekg_cluster(const std::vector<Fpg>& graphs,
                        const ClusterConfig& cfg,
                        const std::string& fault_class,
                        const RootInfo& root,
                        const std::vector<std::string>& instance_ids) {
    cfg.validate();
    if (graphs.empty()) throw InvalidArgument("build_fekg_cluster: no graphs for class " + fault_class);
    Fekg kg;
    kg.fault_class = fault_class;
    kg.root_cause_type = root.root_cause_type;
    kg.propagation_path = root.propagation_path;
    kg.provenance.instance_ids = instance_ids;
    kg.provenance.pipeline = FekgPipeline::ClusterIntersect;
    kg.provenance.parameters["mu"] = cfg.mu;

    for (const auto& cluster : graph_clustering(graphs, cfg.mu)) {
        std::vector<const Fpg*> members;
        for (auto i : cluster) members.push_back(&graphs[i]);
        kg.subgraphs.push_back(intersect_cluster(members));
        if (kg.subgraphs.back().empty()) kg.provenance.empty_subgraphs.push_back(kg.subgraphs.size() - 1);
    }
    return kg;
}

std::set<std::string> important_types(const std::vector<EventSequence>& instances, double min_support) {
    std::map<std::string, std::size_t> support;
    for (const auto& inst : instances) {
        std::set<std::string> present;
        for (const auto& e : inst.events) present.insert(e.event_type);
        for (const auto& t : present) ++support[t];
    }
    std::set<std::string> out;
    const double needed = min_support * static_cast<double>(instances.size());
    for (const auto& [t, c] : support) {
        if (static_cast<double>(c) >= needed) out.insert(t);
    }
    return out;
}

std::set<TypeTriple> filtered_relations(const EventSequence& instance,
                                        const std::set<std::string>& important,
                                        const RelationModels& models,
                                        const RelationContext& ctx) {
    std::vector<const Event*> kept;
    for (const auto& e : instance.events) {
        if (important.contains(e.event_type)) kept.push_back(&e);
    }
    std::sort(kept.begin(), kept.end(), [](const Event* a, const Event* b) { return event_before(*a, *b); });
    std::set<TypeTriple> out;
    for (std::size_t i = 1; i < kept.size(); ++i) {
        const auto x = featurize(*kept[i - 1], *kept[i], ctx).to_vector();
        if (!relation_exists(models.existence, x)) continue;
        out.insert({kept[i - 1]->event_type, classify_kind(models.kind, x), kept[i]->event_type});
    }
    return out;
}

Fekg build_fekg_union(const std::vector<EventSequence>& instances,
                      const RelationModels& models,
                      const RelationContext& ctx,
                      const UnionConfig& cfg,
                      const std::string& fault_class,
                      const RootInfo& root) {
    if (instances.empty()) throw InvalidArgument("build_fekg_union: no instances for class " + fault_class);
    const auto important = important_types(instances, cfg.min_support);

    AbstractFpg sg;
    sg.nodes = important;
    Fekg kg;
    kg.fault_class = fault_class;
    kg.root_cause_type = root.root_cause_type;
    kg.propagation_path = root.propagation_path;
    kg.provenance.pipeline = FekgPipeline::RelationUnion;
    kg.provenance.parameters["min_support"] = cfg.min_support;
    for (const auto& inst : instances) {
        kg.provenance.instance_ids.push_back(inst.failure_id);
        auto rel = filtered_relations(inst, important, models, ctx);
        sg.edges.insert(rel.begin(), rel.end());
    }
    kg.subgraphs.push_back(std::move(sg));
    if (kg.subgraphs.back().empty()) kg.provenance.empty_subgraphs.push_back(0);
    return kg;
}

std::string check_invariants(const Fekg& kg) {
    if (kg.subgraphs.empty()) return "no subgraphs";
    for (const auto& sg : kg.subgraphs) {
        for (const auto& t : sg.edges) {
            if (!sg.nodes.contains(t.src) || !sg.nodes.contains(t.dst)) return "edge endpoint missing in subgraph";
        }
    }
    const bool root_present = std::any_of(kg.subgraphs.begin(), kg.subgraphs.end(), [&](const AbstractFpg& sg) {
        return sg.nodes.contains(kg.root_cause_type);
    });
    if (!root_present) return "root cause type " + kg.root_cause_type + " absent from every subgraph";
    for (std::size_t i = 1; i < kg.propagation_path.size(); ++i) {
        const auto& a = kg.propagation_path[i - 1];
        const auto& b = kg.propagation_path[i];
        const bool found = std::any_of(kg.subgraphs.begin(), kg.subgraphs.end(), [&](const AbstractFpg& sg) {
            return sg.edges.contains({a, RelationKind::Causal, b}) || sg.edges.contains({a, RelationKind::Sequential, b});
        });
        if (!found) return "propagation step " + a + "->" + b + " not in any subgraph";
    }
    return {};
}

}  // namespace kgroot
