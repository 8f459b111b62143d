#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgroot/knowledge.hpp"

namespace kgroot {

// One evaluated failure. Class-level cases leave ground_truth_events empty
// and are scored against ground_truth_class; event-level cases are scored
// against the event ids.
struct EvalCase {
    std::string failure_id;
    std::string ground_truth_class;
    std::set<std::string> ground_truth_events;
    std::vector<std::string> predicted_ranking;

    std::vector<std::string> truths() const;
};

// Fraction of cases with a ground truth among the first k predictions.
// Throws EmptyCases, InvalidParams for k = 0.
double a_at_k(const std::vector<EvalCase>& cases, std::size_t k);

// Mean over cases of the average 1-based rank of their ground truths; a
// truth missing from the ranking counts as rank len + 1. Throws EmptyCases.
double mar(const std::vector<EvalCase>& cases);

struct Prf1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Micro-averaged over the rank-1 prediction of each case (a hit within the
// first k counts as correct). Cases with an empty ranking make no
// prediction and only cost recall. Throws EmptyCases.
Prf1 prf1(const std::vector<EvalCase>& cases, std::size_t k = 1);

struct SplitConfig {
    double train = 0.4;
    double validation = 0.2;
    double test = 0.4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Split {
    std::vector<EventSequence> train;
    std::vector<EventSequence> validation;
    std::vector<EventSequence> test;
};

// Stratified by fault class: members of each class are shuffled and spread
// evenly over one global order, which is cut at the rounded target sizes.
// Each part is within one failure of its target. Parts keep the input order.
Split split(const std::vector<EventSequence>& failures, const SplitConfig& cfg);

struct MetricBundle {
    std::size_t cases = 0;
    double a_at_1 = 0.0;
    double a_at_2 = 0.0;
    double a_at_3 = 0.0;
    double a_at_5 = 0.0;
    double mar = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Root-cause event ranking over the candidates of the top classes.
    double event_a_at_1 = 0.0;
    double event_a_at_3 = 0.0;
    double event_mar = 0.0;
};

MetricBundle metric_bundle(const std::vector<EvalCase>& class_cases, const std::vector<EvalCase>& event_cases);

// Diagnoses every test failure with the given variant.
MetricBundle run_ablation(const Knowledge& kb,
                          const std::vector<EventSequence>& test,
                          const std::map<std::string, CaseTruth>& truths,
                          MatchVariant variant,
                          const DiagnoseConfig& cfg);

struct ExperimentConfig {
    SplitConfig split;
    BuildConfig build;
    DiagnoseConfig diagnose;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<MatchVariant> variants{MatchVariant::Full, MatchVariant::NoKg, MatchVariant::NoGcn};
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
    std::map<std::string, MetricBundle> variants;
};

struct ExperimentResult {
    std::vector<SeedRun> runs;
    std::map<std::string, MetricBundle> mean;
};

// Per seed: split with that seed, build knowledge with training seeds
// offset by it, evaluate every variant on the test part.
ExperimentResult run_experiment(const std::vector<EventSequence>& failures,
                                const std::map<std::string, CaseTruth>& truths,
                                const std::optional<Topology>& topology,
                                const ExperimentConfig& cfg);

nlohmann::json to_json(const MetricBundle& m);
nlohmann::json to_json(const ExperimentResult& r);
std::string render_table(const ExperimentResult& r);
std::string render_csv(const ExperimentResult& r);

}  // namespace kgroot
