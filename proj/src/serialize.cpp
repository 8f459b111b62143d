#include "kgroot/serialize.hpp"

#include <fstream>

#include "kgroot/checksum.hpp"
#include "kgroot/error.hpp"

namespace kgroot {

namespace {

Json matrix_to_json(const Matrix& m) {
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from_json(const Json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.size()) throw ShapeMismatch("matrix data length does not match its shape");
    std::copy(data.begin(), data.end(), m.values().begin());
    return m;
}

template <typename F>
auto wrap_errors(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

Json to_json(const Event& e) {
    return Json{{"event_id", e.event_id}, {"event_type", e.event_type}, {"entity", e.entity},
                {"timestamp_ms", e.timestamp_ms}, {"attributes", Json(e.attributes)}};
}

Event event_from_json(const Json& j) {
    return wrap_errors("event", [&] {
        Event e;
        e.event_id = j.at("event_id").get<std::string>();
        e.event_type = j.at("event_type").get<std::string>();
        e.entity = j.at("entity").get<std::string>();
        e.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
        if (j.contains("attributes")) e.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
        return e;
    });
}

Json to_json(const Fpg& g) {
    Json nodes = Json::array();
    for (const auto& e : g.nodes) nodes.push_back(to_json(e));
    Json edges = Json::array();
    for (const auto& t : g.edges) edges.push_back(Json{{"src", t.src}, {"kind", to_string(t.kind)}, {"dst", t.dst}});
    return Json{{"nodes", nodes}, {"edges", edges}};
}

Fpg fpg_from_json(const Json& j) {
    return wrap_errors("fpg", [&] {
        Fpg g;
        for (const auto& n : j.at("nodes")) g.nodes.push_back(event_from_json(n));
        for (const auto& e : j.at("edges")) {
            g.edges.insert({e.at("src").get<std::string>(), relation_kind_from_string(e.at("kind").get<std::string>()),
                            e.at("dst").get<std::string>()});
        }
        return g;
    });
}

Json to_json(const AbstractFpg& g) {
    Json edges = Json::array();
    for (const auto& t : g.edges) edges.push_back(Json{{"src", t.src}, {"kind", to_string(t.kind)}, {"dst", t.dst}});
    return Json{{"nodes", Json(g.nodes)}, {"edges", edges}};
}

AbstractFpg abstract_fpg_from_json(const Json& j) {
    return wrap_errors("abstract graph", [&] {
        AbstractFpg g;
        g.nodes = j.at("nodes").get<std::set<std::string>>();
        for (const auto& e : j.at("edges")) {
            g.edges.insert({e.at("src").get<std::string>(), relation_kind_from_string(e.at("kind").get<std::string>()),
                            e.at("dst").get<std::string>()});
        }
        return g;
    });
}

Json to_json(const Fekg& kg) {
    Json subgraphs = Json::array();
    for (const auto& sg : kg.subgraphs) subgraphs.push_back(to_json(sg));
    Json provenance{{"instance_ids", kg.provenance.instance_ids},
                    {"pipeline", to_string(kg.provenance.pipeline)},
                    {"parameters", Json(kg.provenance.parameters)},
                    {"empty_subgraphs", kg.provenance.empty_subgraphs}};
    return Json{{"label", kg.fault_class},
                {"subgraphs", subgraphs},
                {"root_cause_type", kg.root_cause_type},
                {"propagation_path", kg.propagation_path},
                {"provenance", provenance}};
}

Fekg fekg_from_json(const Json& j) {
    return wrap_errors("fekg", [&] {
        Fekg kg;
        kg.fault_class = j.at("label").get<std::string>();
        for (const auto& sg : j.at("subgraphs")) kg.subgraphs.push_back(abstract_fpg_from_json(sg));
        kg.root_cause_type = j.at("root_cause_type").get<std::string>();
        kg.propagation_path = j.at("propagation_path").get<std::vector<std::string>>();
        const auto& p = j.at("provenance");
        kg.provenance.instance_ids = p.at("instance_ids").get<std::vector<std::string>>();
        kg.provenance.pipeline = fekg_pipeline_from_string(p.at("pipeline").get<std::string>());
        kg.provenance.parameters = p.at("parameters").get<std::map<std::string, double>>();
        kg.provenance.empty_subgraphs = p.at("empty_subgraphs").get<std::vector<std::size_t>>();
        return kg;
    });
}

Json to_json(const EmbeddingTable& t) {
    return Json{{"dim", t.dim()},
                {"vocab", t.vocab()},
                {"vectors", std::vector<double>(t.vectors().values().begin(), t.vectors().values().end())}};
}

EmbeddingTable embedding_from_json(const Json& j) {
    return wrap_errors("embedding table", [&] {
        const auto dim = j.at("dim").get<std::size_t>();
        auto vocab = j.at("vocab").get<std::vector<std::string>>();
        const auto data = j.at("vectors").get<std::vector<double>>();
        if (data.size() != vocab.size() * dim) throw ShapeMismatch("embedding vectors do not match dim * vocab");
        Matrix m(vocab.size(), dim);
        std::copy(data.begin(), data.end(), m.values().begin());
        return EmbeddingTable(std::move(vocab), std::move(m));
    });
}

Json to_json(const SvmModel& m) {
    return Json{{"feature_dim", m.feature_dim}, {"weights", m.weights}, {"bias", m.bias},
                {"schema_version", m.schema_version}};
}

SvmModel svm_from_json(const Json& j) {
    return wrap_errors("svm model", [&] {
        SvmModel m;
        m.feature_dim = j.at("feature_dim").get<std::size_t>();
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.schema_version = j.at("schema_version").get<int>();
        if (m.weights.size() != m.feature_dim) throw DimensionMismatch("svm weights length != feature_dim");
        if (m.schema_version != kFeatureSchemaVersion) throw ModelMismatch("unsupported svm feature schema");
        return m;
    });
}

Json to_json(const HistoricalStats& s) {
    Json pairs = Json::array();
    for (const auto& [k, v] : s.type_pair_counts) pairs.push_back(Json{{"a", k.first}, {"b", k.second}, {"count", v}});
    Json links = Json::array();
    for (const auto& [k, v] : s.labelled_pair_counts) {
        auto c = s.causal_pair_counts.find(k);
        links.push_back(Json{{"a", k.first}, {"b", k.second}, {"labelled", v},
                             {"causal", c == s.causal_pair_counts.end() ? 0 : c->second}});
    }
    return Json{{"window_seconds", s.window_seconds}, {"total_events", s.total_events},
                {"type_counts", Json(s.type_counts)}, {"pair_counts", pairs}, {"link_counts", links}};
}

HistoricalStats stats_from_json(const Json& j) {
    return wrap_errors("stats", [&] {
        HistoricalStats s;
        s.window_seconds = j.at("window_seconds").get<double>();
        s.total_events = j.at("total_events").get<std::int64_t>();
        s.type_counts = j.at("type_counts").get<std::map<std::string, std::int64_t>>();
        for (const auto& p : j.at("pair_counts")) {
            s.type_pair_counts[{p.at("a").get<std::string>(), p.at("b").get<std::string>()}] =
                p.at("count").get<std::int64_t>();
        }
        for (const auto& p : j.at("link_counts")) {
            const std::pair<std::string, std::string> key{p.at("a").get<std::string>(), p.at("b").get<std::string>()};
            s.labelled_pair_counts[key] = p.at("labelled").get<std::int64_t>();
            if (const auto c = p.at("causal").get<std::int64_t>(); c > 0) s.causal_pair_counts[key] = c;
        }
        return s;
    });
}

Json to_json(const Topology& t) {
    Json edges = Json::array();
    for (const auto& [a, b] : t.edges()) edges.push_back(Json{{"caller", a}, {"callee", b}});
    return Json{{"services", t.services()}, {"edges", edges}};
}

Topology topology_from_json(const Json& j) {
    return wrap_errors("topology", [&] {
        std::vector<std::pair<std::string, std::string>> edges;
        for (const auto& e : j.at("edges")) edges.emplace_back(e.at("caller").get<std::string>(), e.at("callee").get<std::string>());
        return Topology(j.at("services").get<std::vector<std::string>>(), std::move(edges));
    });
}

Json to_json(const RgcnSimilarityModel& m) {
    Json layers = Json::array();
    for (const auto& layer : m.layers) {
        Json rel = Json::object();
        for (std::size_t r = 0; r < kNumRelations; ++r) rel[to_string(static_cast<Relation>(r))] = matrix_to_json(layer.relation[r]);
        layers.push_back(Json{{"relations", rel}, {"self", matrix_to_json(layer.self)}});
    }
    return Json{{"activation", m.activation},
                {"embedding_checksum", hex64(m.embedding_checksum)},
                {"input_dim", m.input_dim()},
                {"output_dim", m.output_dim()},
                {"layers", layers},
                {"w0", matrix_to_json(m.w0)},
                {"b0", m.b0},
                {"w1", matrix_to_json(m.w1)},
                {"b1", m.b1}};
}

RgcnSimilarityModel rgcn_from_json(const Json& j) {
    return wrap_errors("rgcn model", [&] {
        RgcnSimilarityModel m;
        m.activation = j.at("activation").get<std::string>();
        m.embedding_checksum = std::stoull(j.at("embedding_checksum").get<std::string>(), nullptr, 16);
        for (const auto& l : j.at("layers")) {
            RgcnLayer layer;
            for (std::size_t r = 0; r < kNumRelations; ++r) {
                layer.relation[r] = matrix_from_json(l.at("relations").at(to_string(static_cast<Relation>(r))));
            }
            layer.self = matrix_from_json(l.at("self"));
            m.layers.push_back(std::move(layer));
        }
        m.w0 = matrix_from_json(j.at("w0"));
        m.b0 = j.at("b0").get<std::vector<double>>();
        m.w1 = matrix_from_json(j.at("w1"));
        m.b1 = j.at("b1").get<std::vector<double>>();
        m.validate();
        return m;
    });
}

RgcnSimilarityModel rgcn_from_json(const Json& j, const EmbeddingTable& table) {
    auto m = rgcn_from_json(j);
    if (m.embedding_checksum != embedding_checksum(table)) {
        throw ModelMismatch("similarity model was trained with a different embedding table");
    }
    if (m.input_dim() != table.dim()) throw ModelMismatch("model input width differs from the embedding dim");
    return m;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kgroot
