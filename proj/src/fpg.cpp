#include "kgroot/fpg.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <unordered_map>

#include "kgroot/error.hpp"

namespace kgroot {

const Event* Fpg::find(const std::string& event_id) const {
    for (const auto& e : nodes) {
        if (e.event_id == event_id) return &e;
    }
    return nullptr;
}

std::string check_invariants(const Fpg& g) {
    std::unordered_map<std::string, const Event*> by_id;
    for (const auto& e : g.nodes) {
        if (!by_id.emplace(e.event_id, &e).second) return "duplicate node " + e.event_id;
    }
    if (!std::is_sorted(g.nodes.begin(), g.nodes.end(), event_before)) return "nodes not in event order";
    std::set<std::pair<std::string, std::string>> endpoints;
    for (const auto& edge : g.edges) {
        auto s = by_id.find(edge.src);
        auto d = by_id.find(edge.dst);
        if (s == by_id.end() || d == by_id.end()) return "edge endpoint missing: " + edge.src + "->" + edge.dst;
        if (edge.src == edge.dst) return "self-loop on " + edge.src;
        if (s->second->timestamp_ms > d->second->timestamp_ms) return "edge against time: " + edge.src + "->" + edge.dst;
        if (!event_before(*s->second, *d->second)) return "edge against event order: " + edge.src + "->" + edge.dst;
    }
    return {};
}

void FpgConfig::validate() const {
    if (max_associated < 1) throw InvalidParams("max_associated must be >= 1");
    if (!(correlation_threshold >= 0.0 && correlation_threshold <= 1.0)) {
        throw InvalidParams("correlation_threshold must lie in [0, 1]");
    }
    if (window_cap < 1) throw InvalidParams("window_cap must be >= 1");
}

std::optional<CandidateGraph> best_candidate_graph(const std::vector<Event>& existing,
                                                   const Event& incoming,
                                                   const FpgConfig& cfg,
                                                   const RelationModels& models,
                                                   const RelationContext& ctx) {
    struct Attachment {
        const Event* src;
        double score;
    };
    std::vector<Attachment> passing;
    for (const auto& e : existing) {
        const double score = correlation(e.event_type, incoming.event_type, *ctx.stats);
        if (score < cfg.correlation_threshold) continue;
        if (!relation_exists(models.existence, featurize(e, incoming, ctx))) continue;
        passing.push_back({&e, score});
    }
    if (passing.empty()) return std::nullopt;
    std::sort(passing.begin(), passing.end(), [](const Attachment& a, const Attachment& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.src->timestamp_ms != b.src->timestamp_ms) return a.src->timestamp_ms > b.src->timestamp_ms;
        return a.src->event_id < b.src->event_id;
    });
    if (passing.size() > cfg.max_associated) passing.resize(cfg.max_associated);
    CandidateGraph best;
    best.score = passing.front().score;
    for (const auto& a : passing) best.new_edges.push_back(a.src->event_id);
    return best;
}

Fpg build_fpg(const EventSequence& q,
              const FpgConfig& cfg,
              const RelationModels& models,
              const RelationContext& ctx,
              FpgMode mode) {
    cfg.validate();
    if (!ctx.stats) throw InvalidArgument("build_fpg: historical stats are required");
    std::vector<Event> queue = q.events;
    std::sort(queue.begin(), queue.end(), event_before);
    if (mode == FpgMode::Online && queue.size() > cfg.window_cap) {
        queue.erase(queue.begin(), queue.end() - static_cast<std::ptrdiff_t>(cfg.window_cap));
    }

    Fpg g;
    g.nodes.reserve(queue.size());
    std::unordered_map<std::string, std::size_t> position;
    for (auto& e0 : queue) {
        if (position.contains(e0.event_id)) throw DuplicateEventId("build_fpg: duplicate event " + e0.event_id);
        if (!g.nodes.empty()) {
            if (auto best = best_candidate_graph(g.nodes, e0, cfg, models, ctx)) {
                for (const auto& src_id : best->new_edges) {
                    const Event& src = g.nodes[position.at(src_id)];
                    const auto kind = classify_kind(models.kind, featurize(src, e0, ctx));
                    g.edges.insert({src_id, kind, e0.event_id});
                }
            }
        }
        position.emplace(e0.event_id, g.nodes.size());
        g.nodes.push_back(std::move(e0));
    }
    return g;
}

namespace {

std::unordered_map<std::string, std::vector<std::string>> undirected_adjacency(const Fpg& g) {
    std::unordered_map<std::string, std::vector<std::string>> adj;
    for (const auto& e : g.nodes) adj[e.event_id];
    for (const auto& edge : g.edges) {
        adj[edge.src].push_back(edge.dst);
        adj[edge.dst].push_back(edge.src);
    }
    return adj;
}

}  // namespace

std::vector<std::vector<std::string>> connected_components(const Fpg& g) {
    auto adj = undirected_adjacency(g);
    std::unordered_map<std::string, std::size_t> order;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) order[g.nodes[i].event_id] = i;

    std::vector<std::vector<std::string>> out;
    std::unordered_map<std::string, bool> seen;
    for (const auto& start : g.nodes) {
        if (seen[start.event_id]) continue;
        std::vector<std::string> comp;
        std::deque<std::string> queue{start.event_id};
        seen[start.event_id] = true;
        while (!queue.empty()) {
            auto u = queue.front();
            queue.pop_front();
            comp.push_back(u);
            for (const auto& v : adj[u]) {
                if (!seen[v]) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end(), [&](const auto& a, const auto& b) { return order[a] < order[b]; });
        out.push_back(std::move(comp));
    }
    return out;
}

std::vector<std::pair<std::string, int>> hop_distances(const Fpg& g, const std::string& source) {
    auto adj = undirected_adjacency(g);
    std::vector<std::pair<std::string, int>> out;
    if (!adj.contains(source)) return out;
    std::unordered_map<std::string, int> dist{{source, 0}};
    std::deque<std::string> queue{source};
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        out.emplace_back(u, dist[u]);
        for (const auto& v : adj[u]) {
            if (!dist.contains(v)) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return out;
}

}  // namespace kgroot
