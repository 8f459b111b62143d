#include "kgroot/topology.hpp"

#include <algorithm>
#include <deque>

#include "kgroot/error.hpp"

namespace kgroot {

Topology::Topology(std::vector<std::string> services, std::vector<std::pair<std::string, std::string>> edges)
    : services_(std::move(services)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < services_.size(); ++i) {
        if (!index_.emplace(services_[i], static_cast<int>(i)).second) {
            throw InvalidArgument("duplicate service in topology: " + services_[i]);
        }
    }
    undirected_.assign(services_.size(), {});
    for (const auto& [a, b] : edges_) {
        auto ia = index_.find(a);
        auto ib = index_.find(b);
        if (ia == index_.end() || ib == index_.end()) throw InvalidArgument("topology edge references unknown service");
        if (ia->second == ib->second) throw InvalidArgument("topology self-loop on " + a);
        undirected_[ia->second].push_back(ib->second);
        undirected_[ib->second].push_back(ia->second);
    }
    const int n = static_cast<int>(services_.size());
    distance_.assign(n, std::vector<int>(n, -1));
    for (int s = 0; s < n; ++s) {
        auto& dist = distance_[s];
        std::deque<int> queue{s};
        dist[s] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v : undirected_[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
}

std::optional<int> Topology::hop_distance(const std::string& a, const std::string& b) const {
    auto ia = index_.find(a);
    auto ib = index_.find(b);
    if (ia == index_.end() || ib == index_.end()) return std::nullopt;
    int d = distance_[ia->second][ib->second];
    if (d < 0) return std::nullopt;
    return d;
}

std::vector<std::string> Topology::callers(const std::string& service) const {
    std::vector<std::string> out;
    for (const auto& [a, b] : edges_) {
        if (b == service) out.push_back(a);
    }
    return out;
}

std::vector<std::string> Topology::callees(const std::string& service) const {
    std::vector<std::string> out;
    for (const auto& [a, b] : edges_) {
        if (a == service) out.push_back(b);
    }
    return out;
}

std::vector<std::string> Topology::neighbors(const std::string& service) const {
    std::vector<std::string> out;
    auto it = index_.find(service);
    if (it == index_.end()) return out;
    for (int v : undirected_[it->second]) out.push_back(services_[v]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool Topology::weakly_connected() const {
    if (services_.empty()) return true;
    return std::all_of(distance_[0].begin(), distance_[0].end(), [](int d) { return d >= 0; });
}

}  // namespace kgroot
