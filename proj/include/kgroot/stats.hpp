#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgroot/event.hpp"

namespace kgroot {

// Type co-occurrence counts over historical failures.
//
// Every event anchors a forward window of `window_seconds`. For an ordered
// type pair (a, b):
//   pair count = min(#a-events whose window holds a later b-event,
//                    #b-events with an earlier a-event inside that window)
// so it never exceeds either marginal. Marginals are per-type event counts
// and `total_events` is the number of windows.
struct HistoricalStats {
    std::map<std::pair<std::string, std::string>, std::int64_t> type_pair_counts;
    std::map<std::string, std::int64_t> type_counts;
    std::int64_t total_events = 0;
    double window_seconds = 60.0;
    // Labelled fault pairs per ordered type pair and how many of them were
    // direct propagation links. Empty unless labels were recorded.
    std::map<std::pair<std::string, std::string>, std::int64_t> labelled_pair_counts;
    std::map<std::pair<std::string, std::string>, std::int64_t> causal_pair_counts;

    std::int64_t pair_count(const std::string& a, const std::string& b) const;
    std::int64_t type_count(const std::string& t) const;

    bool operator==(const HistoricalStats&) const = default;
};

// Empty histories give all-zero stats.
HistoricalStats build_stats(const std::vector<EventSequence>& histories, double window_seconds);

// log(P(a,b) / (P(a) P(b))); nullopt when the pair never co-occurs.
std::optional<double> pmi(const std::string& a, const std::string& b, const HistoricalStats& stats);

void record_link_label(HistoricalStats& stats, const std::string& a, const std::string& b, bool causal);

// Share of labelled (a, b) pairs that were direct links, shrunk towards 0
// by one pseudo-observation: causal / (labelled + 1).
double causal_rate(const std::string& a, const std::string& b, const HistoricalStats& stats);

// Normalized PMI mapped from [-1, 1] to [0, 1]. Never co-occurring pairs
// and unseen types give 0.
double correlation(const std::string& a, const std::string& b, const HistoricalStats& stats);

}  // namespace kgroot
