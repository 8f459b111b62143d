#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kgroot {

// Service dependency graph; edges point caller -> callee.
class Topology {
public:
    Topology() = default;
    Topology(std::vector<std::string> services, std::vector<std::pair<std::string, std::string>> edges);

    const std::vector<std::string>& services() const noexcept { return services_; }
    const std::vector<std::pair<std::string, std::string>>& edges() const noexcept { return edges_; }

    bool contains(const std::string& service) const { return index_.contains(service); }

    // Undirected hop count, nullopt when either entity is unknown or unreachable.
    std::optional<int> hop_distance(const std::string& a, const std::string& b) const;

    std::vector<std::string> callers(const std::string& service) const;
    std::vector<std::string> callees(const std::string& service) const;
    std::vector<std::string> neighbors(const std::string& service) const;

    bool weakly_connected() const;

    bool operator==(const Topology& o) const { return services_ == o.services_ && edges_ == o.edges_; }

private:
    std::vector<std::string> services_;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<int>> undirected_;
    std::vector<std::vector<int>> distance_;
};

}  // namespace kgroot
