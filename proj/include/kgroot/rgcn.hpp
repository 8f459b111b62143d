#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kgroot/embedding.hpp"
#include "kgroot/fekg.hpp"
#include "kgroot/fpg.hpp"
#include "kgroot/matrix.hpp"

namespace kgroot {

// Canonical relations and their inverse twins.
enum class Relation : std::size_t { Sequential = 0, SequentialInv = 1, Causal = 2, CausalInv = 3 };
inline constexpr std::size_t kNumRelations = 4;

std::string to_string(Relation r);
Relation canonical_relation(RelationKind kind);
Relation inverse_relation(Relation r);

// Directed, labelled multigraph ready for message passing. An edge (u, v)
// in relation r carries a message from node u to node v.
struct MultiGraph {
    std::vector<std::string> node_types;
    Matrix features;  // |V| x d_in
    std::array<std::vector<std::pair<std::size_t, std::size_t>>, kNumRelations> edges;

    std::size_t num_nodes() const noexcept { return node_types.size(); }
};

struct CanonicalEdge {
    std::size_t src;
    RelationKind kind;
    std::size_t dst;
};

// Adds each canonical edge together with its inverse twin.
MultiGraph make_multigraph(std::vector<std::string> node_types, Matrix features,
                           const std::vector<CanonicalEdge>& canonical_edges);

// Concrete graphs are abstracted to event types first. Above the cap a
// concrete graph keeps the types seen most recently; an abstract graph
// keeps its highest-degree types.
MultiGraph to_multigraph(const Fpg& g, const EmbeddingTable& table, std::size_t window_cap = 100);
MultiGraph to_multigraph(const AbstractFpg& g, const EmbeddingTable& table, std::size_t window_cap = 100);

// Empty when every edge has its inverse twin and indices are in range.
std::string check_invariants(const MultiGraph& g);

// Same graph with nodes renumbered: node i moves to position perm[i].
MultiGraph permute_nodes(const MultiGraph& g, const std::vector<std::size_t>& perm);

struct RgcnShape {
    std::size_t input_dim = 32;
    std::size_t hidden_dim = 32;
    std::size_t output_dim = 32;
    std::size_t mlp_hidden = 32;
    std::size_t layers = 2;
};

struct RgcnLayer {
    std::array<Matrix, kNumRelations> relation;  // d_in x d_out each
    Matrix self;                                 // d_in x d_out

    bool operator==(const RgcnLayer&) const = default;
};

// Relational GCN encoder shared by both graphs, max-pool readout, and a
// two-stage MLP head over the concatenated readouts:
//   pred = softmax(relu(relu([g_online, g_kg] W0 + b0) W1 + b1))
// Index 1 of the prediction is "similar", index 0 "dissimilar".
struct RgcnSimilarityModel {
    std::vector<RgcnLayer> layers;
    Matrix w0;  // 2*d_out x mlp_hidden
    std::vector<double> b0;
    Matrix w1;  // mlp_hidden x 2
    std::vector<double> b1;
    std::string activation = "relu";
    std::uint64_t embedding_checksum = 0;

    std::size_t input_dim() const;
    std::size_t output_dim() const;

    // All parameter tensors in a fixed order, flattened.
    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;
    std::vector<std::string> parameter_names() const;

    // Throws ShapeMismatch when shapes are inconsistent.
    void validate() const;

    bool operator==(const RgcnSimilarityModel&) const = default;
};

// Glorot-uniform weights with the output layer shrunk tenfold, zero hidden
// bias and a positive output bias, so both output rectifiers start active.
RgcnSimilarityModel init_model(const RgcnShape& shape, std::uint64_t seed);

// Same shapes, all parameters zero.
RgcnSimilarityModel zeros_like(const RgcnSimilarityModel& m);

// Node representations after every layer: per relation, each node averages
// the incoming messages through W_r; plus a self-loop term through W_self;
// then the rectifier.
Matrix rgcn_forward(const MultiGraph& g, const RgcnSimilarityModel& m);

// Column-wise maximum; zero vector of length `width` for an empty graph.
std::vector<double> graph_readout(const Matrix& h, std::size_t width);

// rgcn_forward followed by graph_readout.
std::vector<double> graph_embedding(const MultiGraph& g, const RgcnSimilarityModel& m);

inline constexpr std::size_t kDissimilarIndex = 0;
inline constexpr std::size_t kSimilarIndex = 1;

struct SimilarityPrediction {
    std::array<double, 2> probs{0.5, 0.5};

    double similar() const noexcept { return probs[kSimilarIndex]; }
    double dissimilar() const noexcept { return probs[kDissimilarIndex]; }
};

SimilarityPrediction similarity(const MultiGraph& online, const MultiGraph& kg, const RgcnSimilarityModel& m);
SimilarityPrediction similarity_from_embeddings(std::span<const double> online,
                                                std::span<const double> kg,
                                                const RgcnSimilarityModel& m);

struct LabeledGraph {
    std::string id;
    std::string label;  // fault class
    MultiGraph graph;
};

struct ClassScore {
    std::string fault_class;
    double p_similar = 0.0;
};

// Scores the online graph against every knowledge graph. A class with
// several graphs scores the maximum over them. Sorted by p_similar desc,
// then class name asc. Throws EmptyKnowledgeBase.
std::vector<ClassScore> match(const MultiGraph& online, const std::vector<LabeledGraph>& kgs,
                              const RgcnSimilarityModel& m);

// Precomputed readouts of the knowledge graphs, keyed by class.
struct EncodedKnowledge {
    std::vector<std::pair<std::string, std::vector<double>>> entries;
};
EncodedKnowledge encode_knowledge(const std::vector<LabeledGraph>& kgs, const RgcnSimilarityModel& m);
std::vector<ClassScore> match(const MultiGraph& online, const EncodedKnowledge& kb, const RgcnSimilarityModel& m);

// Sorting rule shared by every matcher: score desc, class asc; one entry
// per class holding its best score.
std::vector<ClassScore> rank_classes(std::vector<ClassScore> scores);

// Cross-entropy of the prediction against the label.
double pair_loss(const MultiGraph& online, const MultiGraph& kg, bool similar, const RgcnSimilarityModel& m);

// Adds d(loss)/d(params) into `grad` (same shapes as m) and returns the loss.
double accumulate_gradient(const MultiGraph& online, const MultiGraph& kg, bool similar,
                           const RgcnSimilarityModel& m, RgcnSimilarityModel& grad);

struct SimilarityPair {
    const MultiGraph* online = nullptr;
    const MultiGraph* kg = nullptr;
    bool similar = false;
};

// Positives pair each online graph with every knowledge graph of its class
// (skipping identical ids); each positive draws `neg_ratio` negatives
// uniformly from graphs of other classes.
std::vector<SimilarityPair> sample_similarity_pairs(const std::vector<LabeledGraph>& online,
                                                    const std::vector<LabeledGraph>& kgs,
                                                    std::size_t neg_ratio,
                                                    std::uint64_t seed);

struct SimilarityTrainConfig {
    RgcnShape shape;
    double learning_rate = 2e-3;
    std::size_t epochs = 20;
    std::uint64_t seed = 11;
    std::size_t neg_ratio = 2;
    std::size_t validate_every = 1;  // epochs between validation checkpoints
    // Scale the loss of similar pairs so both labels carry equal weight.
    bool balance_classes = true;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainingReport {
    std::vector<double> epoch_loss;
    std::size_t best_epoch = 0;
    double best_validation = 0.0;
};

// Per-pair Adam updates on the cross-entropy loss. When `validation` is
// given, the parameters with the highest validation score seen at the
// checkpoints are returned. Throws DegenerateData when a label is absent.
RgcnSimilarityModel train_similarity(const std::vector<SimilarityPair>& pairs,
                                     const SimilarityTrainConfig& cfg,
                                     const std::function<double(const RgcnSimilarityModel&)>& validation = {},
                                     TrainingReport* report = nullptr);

}  // namespace kgroot
