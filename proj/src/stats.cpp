#include "kgroot/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kgroot/error.hpp"

namespace kgroot {

std::int64_t HistoricalStats::pair_count(const std::string& a, const std::string& b) const {
    auto it = type_pair_counts.find({a, b});
    return it == type_pair_counts.end() ? 0 : it->second;
}

std::int64_t HistoricalStats::type_count(const std::string& t) const {
    auto it = type_counts.find(t);
    return it == type_counts.end() ? 0 : it->second;
}

HistoricalStats build_stats(const std::vector<EventSequence>& histories, double window_seconds) {
    if (window_seconds < 0.0) throw InvalidParams("window_seconds must be non-negative");
    HistoricalStats stats;
    stats.window_seconds = window_seconds;
    const auto window_ms = static_cast<std::int64_t>(std::llround(window_seconds * 1000.0));

    using Key = std::pair<std::string, std::string>;
    std::map<Key, std::int64_t> forward;   // a-anchors that see a b
    std::map<Key, std::int64_t> backward;  // b-events that see an a behind them

    for (const auto& seq : histories) {
        std::vector<const Event*> events;
        for (const auto& e : seq.events) events.push_back(&e);
        std::sort(events.begin(), events.end(), [](const Event* x, const Event* y) { return event_before(*x, *y); });
        const std::size_t n = events.size();
        for (std::size_t i = 0; i < n; ++i) {
            ++stats.type_counts[events[i]->event_type];
            ++stats.total_events;
            std::set<std::string> ahead;
            for (std::size_t j = i + 1; j < n && events[j]->timestamp_ms - events[i]->timestamp_ms <= window_ms; ++j) {
                ahead.insert(events[j]->event_type);
            }
            for (const auto& b : ahead) ++forward[{events[i]->event_type, b}];

            std::set<std::string> behind;
            for (std::size_t j = i; j-- > 0 && events[i]->timestamp_ms - events[j]->timestamp_ms <= window_ms;) {
                behind.insert(events[j]->event_type);
            }
            for (const auto& a : behind) ++backward[{a, events[i]->event_type}];
        }
    }
    for (const auto& [key, f] : forward) {
        auto it = backward.find(key);
        const std::int64_t b = it == backward.end() ? 0 : it->second;
        if (std::min(f, b) > 0) stats.type_pair_counts[key] = std::min(f, b);
    }
    return stats;
}

std::optional<double> pmi(const std::string& a, const std::string& b, const HistoricalStats& stats) {
    const auto pair = stats.pair_count(a, b);
    const auto na = stats.type_count(a);
    const auto nb = stats.type_count(b);
    if (pair <= 0 || na <= 0 || nb <= 0 || stats.total_events <= 0) return std::nullopt;
    const double n = static_cast<double>(stats.total_events);
    return std::log((static_cast<double>(pair) / n) / ((static_cast<double>(na) / n) * (static_cast<double>(nb) / n)));
}

void record_link_label(HistoricalStats& stats, const std::string& a, const std::string& b, bool causal) {
    ++stats.labelled_pair_counts[{a, b}];
    if (causal) ++stats.causal_pair_counts[{a, b}];
}

double causal_rate(const std::string& a, const std::string& b, const HistoricalStats& stats) {
    auto n = stats.labelled_pair_counts.find({a, b});
    if (n == stats.labelled_pair_counts.end()) return 0.0;
    auto c = stats.causal_pair_counts.find({a, b});
    const double causal = c == stats.causal_pair_counts.end() ? 0.0 : static_cast<double>(c->second);
    return causal / (static_cast<double>(n->second) + 1.0);
}

double correlation(const std::string& a, const std::string& b, const HistoricalStats& stats) {
    auto value = pmi(a, b, stats);
    if (!value) return 0.0;
    const double p_ab = static_cast<double>(stats.pair_count(a, b)) / static_cast<double>(stats.total_events);
    if (p_ab >= 1.0) return 1.0;
    const double npmi = *value / -std::log(p_ab);
    return std::clamp((npmi + 1.0) / 2.0, 0.0, 1.0);
}

}  // namespace kgroot
