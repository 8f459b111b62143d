#include "kgroot/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "kgroot/error.hpp"
#include "kgroot/serialize.hpp"

namespace kgroot {

void RunConfig::validate() const {
    if (dataset.n_services < 2) throw InvalidParams("simulate.n_services must be at least 2");
    split.validate();
    build.validate();
    ranking.validate();
    if (top_k == 0) throw InvalidParams("ranking.top_k must be at least 1");
    if (eval_seeds.empty()) throw InvalidParams("evaluate.seeds must not be empty");
    if (variants.empty()) throw InvalidParams("evaluate.variants must not be empty");
}

DiagnoseConfig RunConfig::diagnose_config(const FpgConfig& fpg) const {
    DiagnoseConfig d;
    d.fpg = fpg;
    d.weights = ranking;
    d.top_k = top_k;
    return d;
}

namespace {

template <typename T>
void overlay(const Json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            if (p.contains("data")) c.data_dir = p.at("data").get<std::string>();
            if (p.contains("kb")) c.kb_dir = p.at("kb").get<std::string>();
            if (p.contains("out")) c.out_dir = p.at("out").get<std::string>();
        }
        overlay(j, "seed", c.seed);
        if (j.contains("simulate")) {
            const auto& s = j.at("simulate");
            overlay(s, "n_services", c.dataset.n_services);
            overlay(s, "edge_density", c.dataset.edge_density);
            overlay(s, "n_classes", c.dataset.n_classes);
            overlay(s, "n_failures", c.dataset.n_failures);
            overlay(s, "noise_rate", c.dataset.noise_rate);
            overlay(s, "seed", c.dataset.seed);
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            overlay(s, "train", c.split.train);
            overlay(s, "validation", c.split.validation);
            overlay(s, "test", c.split.test);
        }
        if (j.contains("build")) c.build = build_config_from_json(j.at("build"));
        if (j.contains("ranking")) {
            const auto& r = j.at("ranking");
            overlay(r, "w_t", c.ranking.w_t);
            overlay(r, "w_d", c.ranking.w_d);
            overlay(r, "top_n", c.ranking.top_n);
            overlay(r, "top_k", c.top_k);
        }
        if (j.contains("evaluate")) {
            const auto& e = j.at("evaluate");
            overlay(e, "seeds", c.eval_seeds);
            overlay(e, "csv", c.write_csv);
            if (e.contains("variants")) {
                c.variants.clear();
                for (const auto& v : e.at("variants")) c.variants.push_back(match_variant_from_string(v.get<std::string>()));
            }
        }
    } catch (const Json::exception& e) {
        throw InvalidParams(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return run_config_from_json(read_json(path));
}

nlohmann::json to_json(const RunConfig& c) {
    Json variants = Json::array();
    for (auto v : c.variants) variants.push_back(to_string(v));
    return Json{
        {"paths", {{"data", c.data_dir.string()}, {"kb", c.kb_dir.string()}, {"out", c.out_dir.string()}}},
        {"seed", c.seed},
        {"simulate", {{"n_services", c.dataset.n_services}, {"edge_density", c.dataset.edge_density},
                      {"n_classes", c.dataset.n_classes}, {"n_failures", c.dataset.n_failures},
                      {"noise_rate", c.dataset.noise_rate}, {"seed", c.dataset.seed}}},
        {"split", {{"train", c.split.train}, {"validation", c.split.validation}, {"test", c.split.test}}},
        {"build", to_json(c.build)},
        {"ranking", {{"w_t", c.ranking.w_t}, {"w_d", c.ranking.w_d}, {"top_n", c.ranking.top_n}, {"top_k", c.top_k}}},
        {"evaluate", {{"seeds", c.eval_seeds}, {"variants", variants}, {"csv", c.write_csv}}},
    };
}

LoadedData load_data(const std::filesystem::path& dir) {
    LoadedData d;
    if (!std::filesystem::exists(dir / kEventsFile)) throw IoError("missing " + (dir / kEventsFile).string());
    d.failures = load_events(dir / kEventsFile);
    if (std::filesystem::exists(dir / kGroundTruthFile)) d.truths = load_ground_truth(dir / kGroundTruthFile);
    if (std::filesystem::exists(dir / kTopologyFile)) d.topology = topology_from_json(read_json(dir / kTopologyFile));
    return d;
}

Dataset cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    Dataset ds = simulate(cfg.dataset);
    write_dataset(cfg.data_dir, ds);
    std::map<std::string, std::size_t> per_class;
    std::size_t events = 0;
    for (const auto& c : ds.cases) {
        ++per_class[c.truth.fault_class];
        events += c.sequence.events.size();
    }
    out << "simulated " << ds.cases.size() << " failures, " << events << " events, " << per_class.size()
        << " fault classes, " << ds.topology.services().size() << " services -> " << cfg.data_dir.string() << "\n";
    for (const auto& [label, n] : per_class) out << "  " << label << ": " << n << "\n";
    return ds;
}

Knowledge cmd_build(const RunConfig& cfg, std::ostream& out) {
    const LoadedData data = load_data(cfg.data_dir);
    SplitConfig sc = cfg.split;
    sc.seed = cfg.seed;
    const Split parts = split(data.failures, sc);
    Knowledge kb = build_knowledge(parts.train, parts.validation, data.truths, data.topology, cfg.build.reseeded(cfg.seed));

    auto ids = [](const std::vector<EventSequence>& xs) {
        Json a = Json::array();
        for (const auto& s : xs) a.push_back(s.failure_id);
        return a;
    };
    const Json extra{{"seed", cfg.seed},
                     {"split", {{"train", ids(parts.train)}, {"validation", ids(parts.validation)}, {"test", ids(parts.test)}}}};
    save_knowledge(cfg.kb_dir, kb, extra);
    out << "built " << kb.fekgs.size() << " FEKGs from " << parts.train.size() << " training failures ("
        << parts.validation.size() << " validation, " << parts.test.size() << " held out) -> " << cfg.kb_dir.string()
        << "\n";
    out << "similarity model: best epoch " << kb.similarity_report.best_epoch << ", validation "
        << kb.similarity_report.best_validation << "\n";
    return kb;
}

DiagnosisReport cmd_diagnose(const RunConfig& cfg, const std::string& failure_id, std::ostream& out,
                             bool write_report) {
    const Knowledge kb = load_knowledge(cfg.kb_dir);
    const LoadedData data = load_data(cfg.data_dir);
    const EventSequence* seq = nullptr;
    for (const auto& s : data.failures) {
        if (s.failure_id == failure_id) seq = &s;
    }
    if (!seq) throw UnknownFailureId("unknown failure id: " + failure_id);
    const auto report = diagnose(*seq, kb.fekgs, kb.models, cfg.diagnose_config(kb.config.fpg));
    out << render_text(report);
    if (write_report) {
        std::filesystem::create_directories(cfg.out_dir);
        write_json(cfg.out_dir / ("diagnosis-" + failure_id + ".json"), to_json(report));
    }
    return report;
}

ExperimentResult cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    const LoadedData data = load_data(cfg.data_dir);
    ExperimentConfig ec;
    ec.split = cfg.split;
    ec.build = cfg.build;
    ec.diagnose = cfg.diagnose_config(cfg.build.fpg);
    ec.seeds = cfg.eval_seeds;
    ec.variants = cfg.variants;
    const auto result = run_experiment(data.failures, data.truths, data.topology, ec);

    std::filesystem::create_directories(cfg.out_dir);
    write_json(cfg.out_dir / "metrics.json", to_json(result));
    const std::string table = render_table(result);
    {
        std::ofstream f(cfg.out_dir / "metrics.txt");
        if (!f) throw IoError("cannot write " + (cfg.out_dir / "metrics.txt").string());
        f << table;
    }
    if (cfg.write_csv) {
        std::ofstream f(cfg.out_dir / "metrics.csv");
        if (!f) throw IoError("cannot write " + (cfg.out_dir / "metrics.csv").string());
        f << render_csv(result);
    }
    out << table;
    return result;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Knowledge-graph root cause analysis"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "Configuration document (JSON)");
    app.add_option("--seed", seed, "Override the command's master seed");
    app.add_option("--out", out_dir, "Override the command's output directory");

    auto* sim = app.add_subcommand("simulate", "Generate a labelled failure corpus");
    auto* build = app.add_subcommand("build", "Build the knowledge base from the training split");
    auto* diag = app.add_subcommand("diagnose", "Diagnose one failure");
    std::string failure_id;
    bool as_json = false;
    diag->add_option("failure_id", failure_id, "Failure to diagnose")->required();
    diag->add_flag("--json", as_json, "Print the report as JSON");
    auto* eval = app.add_subcommand("evaluate", "Run the evaluation over all seeds and variants");
    for (auto* sub : {sim, build, diag, eval}) {
        sub->add_option("--config", config_path, "Configuration document (JSON)");
        sub->add_option("--seed", seed, "Override the command's master seed");
        sub->add_option("--out", out_dir, "Override the command's output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (sim->parsed()) {
            if (seed) cfg.dataset.seed = *seed;
            if (out_dir) cfg.data_dir = *out_dir;
            cmd_simulate(cfg, std::cout);
        } else if (build->parsed()) {
            if (seed) cfg.seed = *seed;
            if (out_dir) cfg.kb_dir = *out_dir;
            cmd_build(cfg, std::cout);
        } else if (diag->parsed()) {
            if (out_dir) cfg.out_dir = *out_dir;
            if (as_json) {
                std::ostringstream sink;
                auto report = cmd_diagnose(cfg, failure_id, sink, out_dir.has_value());
                std::cout << to_json(report).dump(2) << "\n";
            } else {
                cmd_diagnose(cfg, failure_id, std::cout, out_dir.has_value());
            }
        } else if (eval->parsed()) {
            if (seed) cfg.eval_seeds = {*seed};
            if (out_dir) cfg.out_dir = *out_dir;
            const auto start = std::chrono::steady_clock::now();
            cmd_evaluate(cfg, std::cout);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::cerr << "evaluation took " << secs << " s\n";
        }
    } catch (const UnknownFailureId& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnknownFailure;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ModelMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const EmptyKnowledgeBase& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace kgroot
