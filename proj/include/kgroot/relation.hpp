#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kgroot/embedding.hpp"
#include "kgroot/event.hpp"
#include "kgroot/stats.hpp"
#include "kgroot/topology.hpp"

namespace kgroot {

enum class RelationKind { Sequential, Causal };

std::string to_string(RelationKind k);
RelationKind relation_kind_from_string(const std::string& s);

// Entity distance used when the topology is missing or the entities are
// unknown or disconnected.
inline constexpr double kDistanceSentinel = 8.0;
// Co-occurrence value for type pairs that never share a window.
inline constexpr double kNoCooccurrence = -10.0;
inline constexpr int kFeatureSchemaVersion = 2;

struct PairFeatures {
    std::vector<double> src_type_vec;
    std::vector<double> dst_type_vec;
    double delta_t = 0.0;          // seconds, src earlier than dst
    double same_entity = 0.0;      // 0 or 1
    double entity_distance = kDistanceSentinel;
    double cooccurrence = kNoCooccurrence;  // PMI of (src type, dst type)
    double link_rate = 0.0;                 // causal_rate of (src type, dst type)

    // Model input: [src vec, dst vec, log1p(delta_t), same_entity,
    // entity_distance / sentinel, cooccurrence / 10, link_rate].
    std::vector<double> to_vector() const;
    static std::size_t dim_for(std::size_t embedding_dim) { return 2 * embedding_dim + 5; }
};

// Read-only inputs of featurize. `topology` may be null.
struct RelationContext {
    const HistoricalStats* stats = nullptr;
    const EmbeddingTable* table = nullptr;
    const Topology* topology = nullptr;
};

// Throws PreconditionViolated when a is later than b.
PairFeatures featurize(const Event& a, const Event& b, const RelationContext& ctx);

struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::size_t feature_dim = 0;
    int schema_version = kFeatureSchemaVersion;

    double margin(std::span<const double> x) const;
    bool operator==(const SvmModel&) const = default;

    // Constant model that accepts every pair (bias +1) or rejects every pair.
    static SvmModel constant(std::size_t feature_dim, bool positive);
};

struct SvmConfig {
    double lambda = 1e-3;
    std::size_t epochs = 50;
    std::uint64_t seed = 7;
    // Reweight the hinge loss so both labels carry equal total weight.
    bool balance_classes = true;
};

struct SvmExample {
    std::vector<double> x;
    int label = 1;  // +1 or -1
};

// Linear SVM via Pegasos-style stochastic subgradient descent on the
// regularized hinge loss. Throws DegenerateData when a label is absent.
// `loss_curve` receives the full objective after each epoch.
SvmModel train_svm(const std::vector<SvmExample>& examples,
                   const SvmConfig& cfg,
                   std::vector<double>* loss_curve = nullptr);

// Strict: a zero margin is "no relation". Throws DimensionMismatch.
bool relation_exists(const SvmModel& m, std::span<const double> x);
bool relation_exists(const SvmModel& m, const PairFeatures& f);

// Positive margin is Causal, otherwise Sequential.
RelationKind classify_kind(const SvmModel& m, std::span<const double> x);
RelationKind classify_kind(const SvmModel& m, const PairFeatures& f);

// The two classifiers used while building graphs.
struct RelationModels {
    SvmModel existence;
    SvmModel kind;

    static RelationModels accept_all(std::size_t feature_dim, RelationKind kind = RelationKind::Causal);
};

}  // namespace kgroot
