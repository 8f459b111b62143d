#include "kgroot/ranking.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "kgroot/error.hpp"
#include "kgroot/serialize.hpp"

namespace kgroot {

void RankingWeights::validate() const {
    if (w_t < 0.0 || w_d < 0.0) throw InvalidParams("ranking weights must be non-negative");
    if (!(w_t + w_d > 0.0)) throw InvalidParams("ranking weights must not both be zero");
    if (top_n < 1) throw InvalidParams("top_n must be at least 1");
}

namespace {

// Dense rank of each value, best first, mapped to n, n-1, ...
template <typename T, typename Better>
std::vector<double> dense_rank_values(const std::vector<T>& values, Better better) {
    std::vector<T> distinct = values;
    std::sort(distinct.begin(), distinct.end(), better);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const auto n = static_cast<double>(values.size());
    std::vector<double> out;
    for (const auto& v : values) {
        const auto pos = std::lower_bound(distinct.begin(), distinct.end(), v, better) - distinct.begin();
        out.push_back(n - static_cast<double>(pos));
    }
    return out;
}

}  // namespace

std::vector<RankedEvent> rank_candidates(const Fpg& online, const Event& alarm, const std::string& root_type,
                                         const RankingWeights& w) {
    w.validate();
    if (!online.find(alarm.event_id)) throw AlarmNotInGraph("alarm " + alarm.event_id + " is not in the online graph");
    const int unreachable = static_cast<int>(online.nodes.size()) + 1;
    std::unordered_map<std::string, int> hops;
    for (const auto& [id, d] : hop_distances(online, alarm.event_id)) hops[id] = d;

    std::vector<CandidateEvent> cands;
    for (const auto& e : online.nodes) {
        if (e.event_type != root_type) continue;
        CandidateEvent c;
        c.event = e;
        c.time_interval_s = std::abs(static_cast<double>(alarm.timestamp_ms - e.timestamp_ms)) / 1000.0;
        auto it = hops.find(e.event_id);
        c.distance_hops = it == hops.end() ? unreachable : it->second;
        cands.push_back(std::move(c));
    }
    if (cands.empty()) return {};

    std::vector<int> dist;
    std::vector<double> gap;
    for (const auto& c : cands) {
        dist.push_back(c.distance_hops);
        gap.push_back(c.time_interval_s);
    }
    const auto nd = dense_rank_values(dist, std::less<int>());
    const auto nt = dense_rank_values(gap, std::greater<double>());

    std::vector<RankedEvent> out;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        out.push_back({cands[i], nt[i], nd[i], w.w_t * nt[i] + w.w_d * nd[i]});
    }
    std::sort(out.begin(), out.end(), [](const RankedEvent& a, const RankedEvent& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.candidate.distance_hops != b.candidate.distance_hops) {
            return a.candidate.distance_hops < b.candidate.distance_hops;
        }
        if (a.candidate.event.timestamp_ms != b.candidate.event.timestamp_ms) {
            return a.candidate.event.timestamp_ms < b.candidate.event.timestamp_ms;
        }
        return a.candidate.event.event_id < b.candidate.event.event_id;
    });
    if (out.size() > w.top_n) out.resize(w.top_n);
    return out;
}

RelationContext DiagnosisModels::context() const {
    return RelationContext{&stats, &table, topology ? &*topology : nullptr};
}

const Event& alarm_of(const EventSequence& seq) {
    if (seq.events.empty()) throw DataError("failure " + seq.failure_id + " has no events");
    if (seq.alarm_event_id) {
        if (const Event* e = seq.find(*seq.alarm_event_id)) return *e;
        throw AlarmNotInGraph("alarm " + *seq.alarm_event_id + " is not part of failure " + seq.failure_id);
    }
    return seq.events.back();
}

std::vector<LabeledGraph> knowledge_graphs(const std::vector<Fekg>& kb, const EmbeddingTable& table,
                                           std::size_t window_cap) {
    std::vector<LabeledGraph> out;
    for (const auto& kg : kb) {
        for (std::size_t i = 0; i < kg.subgraphs.size(); ++i) {
            if (kg.subgraphs[i].empty()) continue;
            out.push_back({kg.fault_class + "#" + std::to_string(i), kg.fault_class,
                           to_multigraph(kg.subgraphs[i], table, window_cap)});
        }
    }
    return out;
}

DiagnosisReport diagnose(const EventSequence& online_events, const std::vector<Fekg>& kb,
                         const DiagnosisModels& models, const DiagnoseConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    if (kb.empty()) throw EmptyKnowledgeBase("diagnose: empty knowledge base");
    cfg.fpg.validate();
    cfg.weights.validate();

    const Event& alarm = alarm_of(online_events);
    const Fpg online = build_fpg(online_events, cfg.fpg, models.relations, models.context(), FpgMode::Online);
    if (!online.find(alarm.event_id)) {
        throw AlarmNotInGraph("alarm " + alarm.event_id + " fell outside the online window");
    }
    const auto kgs = knowledge_graphs(kb, models.table, cfg.fpg.window_cap);
    const auto scores = match(to_multigraph(online, models.table, cfg.fpg.window_cap), kgs, models.similarity);

    std::map<std::string, std::string> root_types;
    for (const auto& kg : kb) root_types.try_emplace(kg.fault_class, kg.root_cause_type);

    DiagnosisReport r;
    r.failure_id = online_events.failure_id;
    r.alarm_event_id = alarm.event_id;
    r.online_nodes = online.nodes.size();
    r.online_edges = online.edges.size();
    r.kb_graphs = kgs.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        RankedClass rc;
        rc.fault_class = scores[i].fault_class;
        rc.p_similar = scores[i].p_similar;
        rc.root_cause_type = root_types.at(rc.fault_class);
        if (i < cfg.top_k) rc.events = rank_candidates(online, alarm, rc.root_cause_type, cfg.weights);
        r.classes.push_back(std::move(rc));
    }
    r.config = nlohmann::json{{"max_associated", cfg.fpg.max_associated},
                              {"correlation_threshold", cfg.fpg.correlation_threshold},
                              {"window_cap", cfg.fpg.window_cap},
                              {"w_t", cfg.weights.w_t},
                              {"w_d", cfg.weights.w_d},
                              {"top_n", cfg.weights.top_n},
                              {"top_k", cfg.top_k}};
    r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

nlohmann::json to_json(const DiagnosisReport& r) {
    Json classes = Json::array();
    for (const auto& c : r.classes) {
        Json events = Json::array();
        for (const auto& e : c.events) {
            events.push_back(Json{{"event", to_json(e.candidate.event)},
                                  {"time_interval_s", e.candidate.time_interval_s},
                                  {"distance_hops", e.candidate.distance_hops},
                                  {"n_t", e.n_t},
                                  {"n_d", e.n_d},
                                  {"score", e.score}});
        }
        classes.push_back(Json{{"fault_class", c.fault_class},
                               {"p_similar", c.p_similar},
                               {"root_cause_type", c.root_cause_type},
                               {"events", events}});
    }
    return Json{{"failure_id", r.failure_id},
                {"alarm_event_id", r.alarm_event_id},
                {"classes", classes},
                {"latency_ms", r.latency_ms},
                {"online_nodes", r.online_nodes},
                {"online_edges", r.online_edges},
                {"kb_graphs", r.kb_graphs},
                {"config", r.config}};
}

std::string render_text(const DiagnosisReport& r) {
    std::ostringstream out;
    out << "failure " << r.failure_id << "  alarm " << r.alarm_event_id << "\n";
    out << "online graph: " << r.online_nodes << " events, " << r.online_edges << " relations; "
        << r.kb_graphs << " knowledge graphs\n";
    out << std::fixed << std::setprecision(4);
    std::size_t rank = 1;
    for (const auto& c : r.classes) {
        if (c.events.empty() && rank > 5) break;
        out << std::setw(3) << rank++ << ". " << c.fault_class << "  p=" << c.p_similar << "  root type "
            << c.root_cause_type << "\n";
        for (const auto& e : c.events) {
            out << "       " << e.candidate.event.event_id << " @" << e.candidate.event.entity
                << "  dt=" << e.candidate.time_interval_s << "s hops=" << e.candidate.distance_hops
                << " score=" << e.score << "\n";
        }
    }
    out << std::setprecision(1) << "latency " << r.latency_ms << " ms\n";
    return out.str();
}

}  // namespace kgroot
