#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgroot/fekg.hpp"
#include "kgroot/ranking.hpp"
#include "kgroot/simulator.hpp"

namespace kgroot {

struct BuildConfig {
    double window_seconds = 60.0;
    SkipGramConfig embedding;
    SvmConfig svm;
    FpgConfig fpg;
    FekgPipeline pipeline = FekgPipeline::ClusterIntersect;
    ClusterConfig cluster;
    UnionConfig union_cfg;
    SimilarityTrainConfig similarity;
    bool train_history_model = true;  // FPG-to-FPG model used by the no_kg variant
    // Extra online training graphs per failure, each dropping events at random.
    std::size_t augment_copies = 4;
    double augment_drop = 0.2;

    void validate() const;
    // Copy with every training seed offset by `seed`.
    BuildConfig reseeded(std::uint64_t seed) const;
};

// Type-level graph of one training failure, the library of the no_kg variant.
struct HistoricalGraph {
    std::string failure_id;
    std::string fault_class;
    AbstractFpg graph;
};

struct Knowledge {
    BuildConfig config;
    DiagnosisModels models;
    std::vector<Fekg> fekgs;
    std::vector<HistoricalGraph> history;
    RgcnSimilarityModel history_similarity;
    TrainingReport similarity_report;
    TrainingReport history_report;
};

// Records, for every pair of fault events inside the stats window, whether
// it was a direct propagation link.
void record_link_labels(HistoricalStats& stats, const std::vector<EventSequence>& train,
                        const std::map<std::string, CaseTruth>& truths);

// Labelled relation pairs of the training failures: every time-ordered
// pair inside the stats window. Existence is positive when both events
// belong to the fault; kind is Causal for direct propagation links.
struct RelationDataset {
    std::vector<SvmExample> existence;
    std::vector<SvmExample> kind;
};
RelationDataset relation_examples(const std::vector<EventSequence>& train,
                                  const std::map<std::string, CaseTruth>& truths,
                                  const RelationContext& ctx);

// Root type and most frequent propagation path of a class, trimmed to the
// prefix supported by the built subgraphs.
RootInfo root_info(const std::vector<const CaseTruth*>& cases, const std::vector<const EventSequence*>& seqs);

// Runs the whole offline pipeline on the training failures. `validation`
// failures (may be empty) select the similarity checkpoint.
Knowledge build_knowledge(const std::vector<EventSequence>& train,
                          const std::vector<EventSequence>& validation,
                          const std::map<std::string, CaseTruth>& truths,
                          const std::optional<Topology>& topology,
                          const BuildConfig& cfg);

enum class MatchVariant { Full, NoKg, NoGcn };

std::string to_string(MatchVariant v);
MatchVariant match_variant_from_string(const std::string& s);

// Class ranking of an online graph under one variant; knowledge graph
// readouts are computed once at construction.
class ClassMatcher {
public:
    ClassMatcher(const Knowledge& kb, MatchVariant variant);

    std::vector<ClassScore> rank(const Fpg& online) const;

private:
    const Knowledge* kb_;
    MatchVariant variant_;
    std::vector<std::pair<std::string, AbstractFpg>> abstract_;  // no_gcn library
    EncodedKnowledge encoded_;
    const RgcnSimilarityModel* model_ = nullptr;
};

// Artifact layout written by save_knowledge.
inline constexpr const char* kManifestFile = "manifest.json";

// Writes every artifact plus a manifest of checksums. Files are written to
// a staging directory first; the target only changes on success.
void save_knowledge(const std::filesystem::path& dir, const Knowledge& kb, const nlohmann::json& extra = {});
// Verifies the manifest checksums (ModelMismatch on mismatch).
Knowledge load_knowledge(const std::filesystem::path& dir);

nlohmann::json to_json(const BuildConfig& c);
BuildConfig build_config_from_json(const nlohmann::json& j, BuildConfig base = {});

}  // namespace kgroot
