#include "kgroot/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "kgroot/checksum.hpp"
#include "kgroot/error.hpp"
#include "kgroot/serialize.hpp"

namespace kgroot {

void BuildConfig::validate() const {
    if (!(window_seconds > 0.0)) throw InvalidParams("window_seconds must be positive");
    embedding.validate();
    fpg.validate();
    cluster.validate();
    if (!(union_cfg.min_support > 0.0 && union_cfg.min_support <= 1.0)) {
        throw InvalidParams("min_support must lie in (0, 1]");
    }
    if (svm.lambda <= 0.0) throw InvalidParams("svm lambda must be positive");
    if (similarity.learning_rate <= 0.0) throw InvalidParams("similarity learning_rate must be positive");
    if (!(augment_drop >= 0.0 && augment_drop < 1.0)) throw InvalidParams("augment_drop must lie in [0, 1)");
    if (similarity.shape.input_dim != embedding.dim) {
        throw InvalidParams("similarity input_dim must equal the embedding dim");
    }
}

BuildConfig BuildConfig::reseeded(std::uint64_t seed) const {
    BuildConfig c = *this;
    c.embedding.seed += seed;
    c.svm.seed += seed;
    c.similarity.seed += seed;
    return c;
}

namespace {

// Calls fn(src, dst, related, causal) for every time-ordered pair of a
// labelled training failure that falls inside the window.
template <typename Fn>
void for_each_window_pair(const std::vector<EventSequence>& train, const std::map<std::string, CaseTruth>& truths,
                          double window_seconds, Fn&& fn) {
    const auto window_ms = static_cast<std::int64_t>(window_seconds * 1000.0);
    for (const auto& seq : train) {
        auto it = truths.find(seq.failure_id);
        if (it == truths.end()) continue;
        const std::set<std::string> fault(it->second.fault_event_ids.begin(), it->second.fault_event_ids.end());
        const std::set<std::pair<std::string, std::string>> links(it->second.causal_links.begin(),
                                                                  it->second.causal_links.end());
        const auto& ev = seq.events;
        for (std::size_t i = 0; i < ev.size(); ++i) {
            for (std::size_t j = i + 1; j < ev.size(); ++j) {
                if (ev[j].timestamp_ms - ev[i].timestamp_ms > window_ms) break;
                const bool related = fault.contains(ev[i].event_id) && fault.contains(ev[j].event_id);
                fn(ev[i], ev[j], related, related && links.contains({ev[i].event_id, ev[j].event_id}));
            }
        }
    }
}

}  // namespace

void record_link_labels(HistoricalStats& stats, const std::vector<EventSequence>& train,
                        const std::map<std::string, CaseTruth>& truths) {
    for_each_window_pair(train, truths, stats.window_seconds, [&](const Event& a, const Event& b, bool related, bool causal) {
        if (related) record_link_label(stats, a.event_type, b.event_type, causal);
    });
}

RelationDataset relation_examples(const std::vector<EventSequence>& train,
                                  const std::map<std::string, CaseTruth>& truths,
                                  const RelationContext& ctx) {
    RelationDataset out;
    for_each_window_pair(train, truths, ctx.stats->window_seconds,
                         [&](const Event& a, const Event& b, bool related, bool causal) {
                             auto x = featurize(a, b, ctx).to_vector();
                             if (related) out.kind.push_back({x, causal ? 1 : -1});
                             out.existence.push_back({std::move(x), related ? 1 : -1});
                         });
    return out;
}

RootInfo root_info(const std::vector<const CaseTruth*>& cases, const std::vector<const EventSequence*>& seqs) {
    RootInfo info;
    std::map<std::vector<std::string>, std::size_t> paths;
    for (const auto* t : cases) ++paths[t->propagation_path];
    std::size_t best = 0;
    for (const auto& [p, n] : paths) {
        if (n > best) {
            best = n;
            info.propagation_path = p;
        }
    }
    for (const auto* t : cases) {
        for (const auto* s : seqs) {
            if (s->failure_id != t->failure_id) continue;
            if (const Event* e = s->find(t->root_event_id)) {
                info.root_cause_type = e->event_type;
                return info;
            }
        }
    }
    if (!info.propagation_path.empty()) info.root_cause_type = info.propagation_path.front();
    return info;
}

namespace {

void trim_path(Fekg& kg) {
    for (std::size_t i = 1; i < kg.propagation_path.size(); ++i) {
        const auto& a = kg.propagation_path[i - 1];
        const auto& b = kg.propagation_path[i];
        const bool found = std::any_of(kg.subgraphs.begin(), kg.subgraphs.end(), [&](const AbstractFpg& sg) {
            return sg.edges.contains({a, RelationKind::Causal, b}) || sg.edges.contains({a, RelationKind::Sequential, b});
        });
        if (!found) {
            kg.propagation_path.resize(i);
            return;
        }
    }
}

double reciprocal_rank(const std::vector<ClassScore>& ranking, const std::string& truth) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (ranking[i].fault_class == truth) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

std::vector<LabeledGraph> labeled_online(const std::vector<EventSequence>& seqs, const FpgConfig& fpg,
                                         const DiagnosisModels& models) {
    std::vector<LabeledGraph> out;
    for (const auto& s : seqs) {
        if (!s.fault_class) continue;
        const Fpg g = build_fpg(s, fpg, models.relations, models.context(), FpgMode::Online);
        out.push_back({s.failure_id, *s.fault_class, to_multigraph(g, models.table, fpg.window_cap)});
    }
    return out;
}

RgcnSimilarityModel fit_similarity(const std::vector<LabeledGraph>& online, const std::vector<LabeledGraph>& library,
                                   const std::vector<LabeledGraph>& validation, const SimilarityTrainConfig& cfg,
                                   std::uint64_t checksum, TrainingReport& report) {
    const auto pairs = sample_similarity_pairs(online, library, cfg.neg_ratio, cfg.seed);
    std::function<double(const RgcnSimilarityModel&)> score;
    if (!validation.empty()) {
        score = [&](const RgcnSimilarityModel& m) {
            const auto encoded = encode_knowledge(library, m);
            double total = 0.0;
            for (const auto& v : validation) total += reciprocal_rank(match(v.graph, encoded, m), v.label);
            return total / static_cast<double>(validation.size());
        };
    }
    auto model = train_similarity(pairs, cfg, score, &report);
    model.embedding_checksum = checksum;
    return model;
}

}  // namespace

Knowledge build_knowledge(const std::vector<EventSequence>& train,
                          const std::vector<EventSequence>& validation,
                          const std::map<std::string, CaseTruth>& truths,
                          const std::optional<Topology>& topology,
                          const BuildConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw DataError("build_knowledge: no training failures");

    Knowledge kb;
    kb.config = cfg;
    auto& models = kb.models;
    models.topology = topology;
    models.stats = build_stats(train, cfg.window_seconds);
    record_link_labels(models.stats, train, truths);
    models.table = train_embeddings(train, cfg.embedding);
    const RelationContext ctx = models.context();
    const std::size_t dim = PairFeatures::dim_for(models.table.dim());

    const auto rel = relation_examples(train, truths, ctx);
    models.relations.existence = train_svm(rel.existence, cfg.svm);
    try {
        models.relations.kind = train_svm(rel.kind, cfg.svm);
    } catch (const DegenerateData&) {
        const bool all_causal = std::all_of(rel.kind.begin(), rel.kind.end(), [](const auto& e) { return e.label > 0; });
        models.relations.kind = SvmModel::constant(dim, all_causal && !rel.kind.empty());
    }

    std::map<std::string, std::vector<const EventSequence*>> by_class;
    for (const auto& s : train) {
        if (!s.fault_class) throw DataError("training failure " + s.failure_id + " has no fault class");
        by_class[*s.fault_class].push_back(&s);
    }
    for (const auto& [label, seqs] : by_class) {
        std::vector<const CaseTruth*> cases;
        std::vector<std::string> ids;
        for (const auto* s : seqs) {
            ids.push_back(s->failure_id);
            if (auto it = truths.find(s->failure_id); it != truths.end()) cases.push_back(&it->second);
        }
        const RootInfo root = root_info(cases, seqs);
        Fekg kg;
        if (cfg.pipeline == FekgPipeline::ClusterIntersect) {
            std::vector<Fpg> graphs;
            for (const auto* s : seqs) graphs.push_back(build_fpg(*s, cfg.fpg, models.relations, ctx, FpgMode::Historical));
            kg = build_fekg_cluster(graphs, cfg.cluster, label, root, ids);
        } else {
            std::vector<EventSequence> instances;
            for (const auto* s : seqs) instances.push_back(*s);
            kg = build_fekg_union(instances, models.relations, ctx, cfg.union_cfg, label, root);
            kg.provenance.instance_ids = ids;
        }
        trim_path(kg);
        kb.fekgs.push_back(std::move(kg));
    }

    std::vector<EventSequence> augmented = train;
    std::mt19937_64 rng(cfg.similarity.seed ^ 0x5bd1e995ULL);
    for (const auto& s : train) {
        const auto truth = truths.find(s.failure_id);
        // copies keep the failure id so no graph is paired with its own origin
        for (std::size_t k = 0; k < cfg.augment_copies; ++k) {
            EventSequence copy = s;
            std::erase_if(copy.events, [&](const Event& e) {
                const bool keep = truth != truths.end() && e.event_id == truth->second.root_event_id;
                return !keep && static_cast<double>(rng() >> 11) * 0x1.0p-53 < cfg.augment_drop;
            });
            if (!copy.events.empty()) augmented.push_back(std::move(copy));
        }
    }
    const auto online = labeled_online(augmented, cfg.fpg, models);
    const auto held_out = labeled_online(validation, cfg.fpg, models);
    const auto checksum = embedding_checksum(models.table);
    const auto library = knowledge_graphs(kb.fekgs, models.table, cfg.fpg.window_cap);
    models.similarity = fit_similarity(online, library, held_out, cfg.similarity, checksum, kb.similarity_report);

    std::vector<LabeledGraph> history_graphs;
    for (const auto& s : train) {
        const Fpg g = build_fpg(s, cfg.fpg, models.relations, ctx, FpgMode::Historical);
        kb.history.push_back({s.failure_id, *s.fault_class, abstract(g)});
        history_graphs.push_back({s.failure_id, *s.fault_class, to_multigraph(kb.history.back().graph, models.table,
                                                                              cfg.fpg.window_cap)});
    }
    if (cfg.train_history_model) {
        auto hcfg = cfg.similarity;
        hcfg.seed += 1;
        kb.history_similarity = fit_similarity(online, history_graphs, held_out, hcfg, checksum, kb.history_report);
    } else {
        kb.history_similarity = models.similarity;
    }
    return kb;
}

std::string to_string(MatchVariant v) {
    switch (v) {
        case MatchVariant::Full: return "full";
        case MatchVariant::NoKg: return "no_kg";
        case MatchVariant::NoGcn: return "no_gcn";
    }
    return "full";
}

MatchVariant match_variant_from_string(const std::string& s) {
    if (s == "full") return MatchVariant::Full;
    if (s == "no_kg") return MatchVariant::NoKg;
    if (s == "no_gcn") return MatchVariant::NoGcn;
    throw InvalidParams("unknown variant: " + s);
}

ClassMatcher::ClassMatcher(const Knowledge& kb, MatchVariant variant) : kb_(&kb), variant_(variant) {
    const auto cap = kb.config.fpg.window_cap;
    const auto& table = kb.models.table;
    switch (variant) {
        case MatchVariant::Full:
            model_ = &kb.models.similarity;
            encoded_ = encode_knowledge(knowledge_graphs(kb.fekgs, table, cap), *model_);
            break;
        case MatchVariant::NoKg: {
            model_ = &kb.history_similarity;
            std::vector<LabeledGraph> lib;
            for (const auto& h : kb.history) lib.push_back({h.failure_id, h.fault_class, to_multigraph(h.graph, table, cap)});
            encoded_ = encode_knowledge(lib, *model_);
            break;
        }
        case MatchVariant::NoGcn:
            for (const auto& kg : kb.fekgs) {
                for (const auto& sg : kg.subgraphs) {
                    if (!sg.empty()) abstract_.emplace_back(kg.fault_class, sg);
                }
            }
            break;
    }
    if (encoded_.entries.empty() && abstract_.empty()) throw EmptyKnowledgeBase("no knowledge graphs to match against");
}

std::vector<ClassScore> ClassMatcher::rank(const Fpg& online) const {
    if (variant_ == MatchVariant::NoGcn) {
        const AbstractFpg a = abstract(online);
        std::vector<ClassScore> scores;
        for (const auto& [label, sg] : abstract_) scores.push_back({label, graph_similarity_jaccard(a, sg)});
        return rank_classes(std::move(scores));
    }
    return match(to_multigraph(online, kb_->models.table, kb_->config.fpg.window_cap), encoded_, *model_);
}

// --- persistence ---

nlohmann::json to_json(const BuildConfig& c) {
    const auto& s = c.similarity;
    return Json{
        {"window_seconds", c.window_seconds},
        {"embedding", {{"dim", c.embedding.dim}, {"context_window", c.embedding.context_window},
                       {"negatives_per_positive", c.embedding.negatives_per_positive},
                       {"epochs", c.embedding.epochs}, {"learning_rate", c.embedding.learning_rate},
                       {"seed", c.embedding.seed}}},
        {"svm", {{"lambda", c.svm.lambda}, {"epochs", c.svm.epochs}, {"seed", c.svm.seed},
                 {"balance_classes", c.svm.balance_classes}}},
        {"fpg", {{"max_associated", c.fpg.max_associated}, {"correlation_threshold", c.fpg.correlation_threshold},
                 {"window_cap", c.fpg.window_cap}}},
        {"pipeline", to_string(c.pipeline)},
        {"mu", c.cluster.mu},
        {"min_support", c.union_cfg.min_support},
        {"similarity", {{"hidden_dim", s.shape.hidden_dim}, {"output_dim", s.shape.output_dim},
                        {"mlp_hidden", s.shape.mlp_hidden}, {"layers", s.shape.layers},
                        {"learning_rate", s.learning_rate}, {"epochs", s.epochs}, {"seed", s.seed},
                        {"neg_ratio", s.neg_ratio}, {"validate_every", s.validate_every},
                        {"balance_classes", s.balance_classes}}},
        {"train_history_model", c.train_history_model},
        {"augment", {{"copies", c.augment_copies}, {"drop", c.augment_drop}}},
    };
}

namespace {

template <typename T>
void overlay(const Json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

BuildConfig build_config_from_json(const nlohmann::json& j, BuildConfig c) {
    try {
        overlay(j, "window_seconds", c.window_seconds);
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            overlay(e, "dim", c.embedding.dim);
            overlay(e, "context_window", c.embedding.context_window);
            overlay(e, "negatives_per_positive", c.embedding.negatives_per_positive);
            overlay(e, "epochs", c.embedding.epochs);
            overlay(e, "learning_rate", c.embedding.learning_rate);
            overlay(e, "seed", c.embedding.seed);
        }
        if (j.contains("svm")) {
            const auto& s = j.at("svm");
            overlay(s, "lambda", c.svm.lambda);
            overlay(s, "epochs", c.svm.epochs);
            overlay(s, "seed", c.svm.seed);
            overlay(s, "balance_classes", c.svm.balance_classes);
        }
        if (j.contains("fpg")) {
            const auto& f = j.at("fpg");
            overlay(f, "max_associated", c.fpg.max_associated);
            overlay(f, "correlation_threshold", c.fpg.correlation_threshold);
            overlay(f, "window_cap", c.fpg.window_cap);
        }
        if (j.contains("pipeline")) c.pipeline = fekg_pipeline_from_string(j.at("pipeline").get<std::string>());
        overlay(j, "mu", c.cluster.mu);
        overlay(j, "min_support", c.union_cfg.min_support);
        if (j.contains("similarity")) {
            const auto& s = j.at("similarity");
            overlay(s, "hidden_dim", c.similarity.shape.hidden_dim);
            overlay(s, "output_dim", c.similarity.shape.output_dim);
            overlay(s, "mlp_hidden", c.similarity.shape.mlp_hidden);
            overlay(s, "layers", c.similarity.shape.layers);
            overlay(s, "learning_rate", c.similarity.learning_rate);
            overlay(s, "epochs", c.similarity.epochs);
            overlay(s, "seed", c.similarity.seed);
            overlay(s, "neg_ratio", c.similarity.neg_ratio);
            overlay(s, "validate_every", c.similarity.validate_every);
            overlay(s, "balance_classes", c.similarity.balance_classes);
        }
        overlay(j, "train_history_model", c.train_history_model);
        if (j.contains("augment")) {
            overlay(j.at("augment"), "copies", c.augment_copies);
            overlay(j.at("augment"), "drop", c.augment_drop);
        }
    } catch (const Json::exception& e) {
        throw InvalidParams(std::string("build config: ") + e.what());
    }
    c.similarity.shape.input_dim = c.embedding.dim;
    return c;
}

namespace {

Json report_json(const TrainingReport& r) {
    return Json{{"epoch_loss", r.epoch_loss}, {"best_epoch", r.best_epoch}, {"best_validation", r.best_validation}};
}

TrainingReport report_from_json(const Json& j) {
    TrainingReport r;
    r.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.best_validation = j.at("best_validation").get<double>();
    return r;
}

std::string fekg_file(const std::string& label) { return "fekg/" + label + ".json"; }

}  // namespace

void save_knowledge(const std::filesystem::path& dir, const Knowledge& kb, const nlohmann::json& extra) {
    namespace fs = std::filesystem;
    const fs::path staging = dir.string() + ".partial";
    fs::remove_all(staging);
    try {
        fs::create_directories(staging / "fekg");
        std::map<std::string, Json> files;
        files["stats.json"] = to_json(kb.models.stats);
        files["embeddings.json"] = to_json(kb.models.table);
        if (kb.models.topology) files["topology.json"] = to_json(*kb.models.topology);
        files["svm_existence.json"] = to_json(kb.models.relations.existence);
        files["svm_kind.json"] = to_json(kb.models.relations.kind);
        files["similarity_model.json"] = to_json(kb.models.similarity);
        files["history_model.json"] = to_json(kb.history_similarity);
        Json hist = Json::array();
        for (const auto& h : kb.history) {
            hist.push_back(Json{{"failure_id", h.failure_id}, {"fault_class", h.fault_class}, {"graph", to_json(h.graph)}});
        }
        files["history.json"] = hist;
        files["training.json"] = Json{{"similarity", report_json(kb.similarity_report)},
                                      {"history", report_json(kb.history_report)}};
        for (const auto& kg : kb.fekgs) files[fekg_file(kg.fault_class)] = to_json(kg);

        Json checks = Json::object();
        for (const auto& [name, j] : files) {
            write_json(staging / name, j);
            checks[name] = hex64(file_checksum(staging / name));
        }
        Json classes = Json::array();
        for (const auto& kg : kb.fekgs) classes.push_back(kg.fault_class);
        write_json(staging / kManifestFile, Json{{"files", checks},
                                                 {"build_config", to_json(kb.config)},
                                                 {"fault_classes", classes},
                                                 {"extra", extra.is_null() ? Json::object() : extra}});
        fs::remove_all(dir);
        fs::rename(staging, dir);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
}

Knowledge load_knowledge(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / kManifestFile)) {
        throw IoError("no knowledge base at " + dir.string() + " (missing " + kManifestFile + ")");
    }
    const Json manifest = read_json(dir / kManifestFile);
    for (const auto& [name, sum] : manifest.at("files").items()) {
        if (hex64(file_checksum(dir / name)) != sum.get<std::string>()) {
            throw ModelMismatch("checksum mismatch for " + (dir / name).string());
        }
    }
    Knowledge kb;
    try {
        kb.config = build_config_from_json(manifest.at("build_config"));
        kb.models.stats = stats_from_json(read_json(dir / "stats.json"));
        kb.models.table = embedding_from_json(read_json(dir / "embeddings.json"));
        if (manifest.at("files").contains("topology.json")) {
            kb.models.topology = topology_from_json(read_json(dir / "topology.json"));
        }
        kb.models.relations.existence = svm_from_json(read_json(dir / "svm_existence.json"));
        kb.models.relations.kind = svm_from_json(read_json(dir / "svm_kind.json"));
        kb.models.similarity = rgcn_from_json(read_json(dir / "similarity_model.json"), kb.models.table);
        kb.history_similarity = rgcn_from_json(read_json(dir / "history_model.json"), kb.models.table);
        for (const auto& h : read_json(dir / "history.json")) {
            kb.history.push_back({h.at("failure_id").get<std::string>(), h.at("fault_class").get<std::string>(),
                                  abstract_fpg_from_json(h.at("graph"))});
        }
        const Json training = read_json(dir / "training.json");
        kb.similarity_report = report_from_json(training.at("similarity"));
        kb.history_report = report_from_json(training.at("history"));
        for (const auto& c : manifest.at("fault_classes")) {
            kb.fekgs.push_back(fekg_from_json(read_json(dir / fekg_file(c.get<std::string>()))));
        }
    } catch (const Json::exception& e) {
        throw DataError("malformed knowledge base: " + std::string(e.what()));
    }
    return kb;
}

}  // namespace kgroot
