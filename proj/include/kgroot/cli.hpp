#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgroot/evaluation.hpp"
#include "kgroot/knowledge.hpp"
#include "kgroot/ranking.hpp"
#include "kgroot/simulator.hpp"

namespace kgroot {

// One document configures every command; flags override single fields.
struct RunConfig {
    std::filesystem::path data_dir = "data";   // simulator output, input of build/diagnose/evaluate
    std::filesystem::path kb_dir = "kb";       // knowledge base written by build
    std::filesystem::path out_dir = "results"; // metrics and reports
    std::uint64_t seed = 0;                    // split seed and training seed offset of build
    DatasetConfig dataset;
    SplitConfig split;
    BuildConfig build;
    RankingWeights ranking;
    std::size_t top_k = 3;
    std::vector<std::uint64_t> eval_seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<MatchVariant> variants{MatchVariant::Full, MatchVariant::NoKg, MatchVariant::NoGcn};
    bool write_csv = true;

    void validate() const;
    DiagnoseConfig diagnose_config(const FpgConfig& fpg) const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

// Failures, truths and topology of a data directory.
struct LoadedData {
    std::vector<EventSequence> failures;
    std::map<std::string, CaseTruth> truths;
    std::optional<Topology> topology;
};
LoadedData load_data(const std::filesystem::path& dir);

// Writes the corpus to data_dir and prints per-class counts.
Dataset cmd_simulate(const RunConfig& cfg, std::ostream& out);
// Splits with cfg.seed, builds the knowledge base from the training part and
// writes it to kb_dir.
Knowledge cmd_build(const RunConfig& cfg, std::ostream& out);
// Throws UnknownFailureId. Writes <out_dir>/diagnosis-<id>.json when
// `write_report` is set.
DiagnosisReport cmd_diagnose(const RunConfig& cfg, const std::string& failure_id, std::ostream& out,
                             bool write_report = false);
// Full experiment over eval_seeds; writes metrics.json, metrics.txt and
// (optionally) metrics.csv to out_dir.
ExperimentResult cmd_evaluate(const RunConfig& cfg, std::ostream& out);

// Exit codes of run_cli.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitData = 3,
    kExitIo = 4,
    kExitModel = 5,
    kExitUnknownFailure = 6,
};

int run_cli(int argc, char** argv);

}  // namespace kgroot
