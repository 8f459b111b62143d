#include "kgroot/rgcn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "kgroot/error.hpp"
#include "kgroot/simd.hpp"

namespace kgroot {

std::string to_string(Relation r) {
    switch (r) {
        case Relation::Sequential: return "sequential";
        case Relation::SequentialInv: return "sequential_inv";
        case Relation::Causal: return "causal";
        case Relation::CausalInv: return "causal_inv";
    }
    return "unknown";
}

Relation canonical_relation(RelationKind kind) {
    return kind == RelationKind::Causal ? Relation::Causal : Relation::Sequential;
}

Relation inverse_relation(Relation r) {
    switch (r) {
        case Relation::Sequential: return Relation::SequentialInv;
        case Relation::SequentialInv: return Relation::Sequential;
        case Relation::Causal: return Relation::CausalInv;
        case Relation::CausalInv: return Relation::Causal;
    }
    return r;
}

MultiGraph make_multigraph(std::vector<std::string> node_types, Matrix features,
                           const std::vector<CanonicalEdge>& canonical_edges) {
    if (features.rows() != node_types.size()) throw ShapeMismatch("multigraph: one feature row per node required");
    MultiGraph g;
    g.node_types = std::move(node_types);
    g.features = std::move(features);
    for (const auto& e : canonical_edges) {
        if (e.src >= g.num_nodes() || e.dst >= g.num_nodes()) throw InvalidArgument("multigraph: edge out of range");
        const auto r = canonical_relation(e.kind);
        g.edges[static_cast<std::size_t>(r)].emplace_back(e.src, e.dst);
        g.edges[static_cast<std::size_t>(inverse_relation(r))].emplace_back(e.dst, e.src);
    }
    return g;
}

namespace {

MultiGraph assemble(const std::vector<std::string>& kept, const std::set<TypeTriple>& triples,
                    const EmbeddingTable& table) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < kept.size(); ++i) index[kept[i]] = i;
    Matrix features(kept.size(), table.dim());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        auto v = embed_type(kept[i], table);
        std::copy(v.begin(), v.end(), features.row(i).begin());
    }
    std::vector<CanonicalEdge> edges;
    for (const auto& t : triples) {
        auto s = index.find(t.src);
        auto d = index.find(t.dst);
        if (s == index.end() || d == index.end()) continue;
        edges.push_back({s->second, t.kind, d->second});
    }
    return make_multigraph(kept, std::move(features), edges);
}

}  // namespace

MultiGraph to_multigraph(const Fpg& g, const EmbeddingTable& table, std::size_t window_cap) {
    const AbstractFpg abs = abstract(g);
    std::vector<std::string> kept(abs.nodes.begin(), abs.nodes.end());
    if (kept.size() > window_cap) {
        std::map<std::string, std::pair<std::int64_t, std::string>> latest;
        for (const auto& e : g.nodes) {
            auto key = std::make_pair(e.timestamp_ms, e.event_id);
            auto [it, inserted] = latest.try_emplace(e.event_type, key);
            if (!inserted && it->second < key) it->second = key;
        }
        std::sort(kept.begin(), kept.end(), [&](const std::string& a, const std::string& b) {
            const auto& la = latest.at(a);
            const auto& lb = latest.at(b);
            if (la != lb) return la > lb;
            return a < b;
        });
        kept.resize(window_cap);
        std::sort(kept.begin(), kept.end());
    }
    return assemble(kept, abs.edges, table);
}

MultiGraph to_multigraph(const AbstractFpg& g, const EmbeddingTable& table, std::size_t window_cap) {
    std::vector<std::string> kept(g.nodes.begin(), g.nodes.end());
    if (kept.size() > window_cap) {
        std::map<std::string, std::size_t> degree;
        for (const auto& t : g.edges) {
            ++degree[t.src];
            ++degree[t.dst];
        }
        std::sort(kept.begin(), kept.end(), [&](const std::string& a, const std::string& b) {
            const auto da = degree[a];
            const auto db = degree[b];
            if (da != db) return da > db;
            return a < b;
        });
        kept.resize(window_cap);
        std::sort(kept.begin(), kept.end());
    }
    return assemble(kept, g.edges, table);
}

std::string check_invariants(const MultiGraph& g) {
    if (g.features.rows() != g.num_nodes()) return "feature rows != node count";
    for (std::size_t r = 0; r < kNumRelations; ++r) {
        const auto inv = static_cast<std::size_t>(inverse_relation(static_cast<Relation>(r)));
        for (const auto& [u, v] : g.edges[r]) {
            if (u >= g.num_nodes() || v >= g.num_nodes()) return "edge index out of range";
            const auto& twins = g.edges[inv];
            if (std::count(twins.begin(), twins.end(), std::make_pair(v, u)) !=
                std::count(g.edges[r].begin(), g.edges[r].end(), std::make_pair(u, v))) {
                return "missing inverse twin for edge in relation " + to_string(static_cast<Relation>(r));
            }
        }
    }
    return {};
}

MultiGraph permute_nodes(const MultiGraph& g, const std::vector<std::size_t>& perm) {
    const std::size_t n = g.num_nodes();
    if (perm.size() != n) throw InvalidArgument("permute_nodes: permutation size mismatch");
    MultiGraph out;
    out.node_types.resize(n);
    out.features = Matrix(n, g.features.cols());
    for (std::size_t i = 0; i < n; ++i) {
        out.node_types[perm[i]] = g.node_types[i];
        std::copy(g.features.row(i).begin(), g.features.row(i).end(), out.features.row(perm[i]).begin());
    }
    for (std::size_t r = 0; r < kNumRelations; ++r) {
        for (const auto& [u, v] : g.edges[r]) out.edges[r].emplace_back(perm[u], perm[v]);
        // edge order also changes under a real reordering
        std::reverse(out.edges[r].begin(), out.edges[r].end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model

std::size_t RgcnSimilarityModel::input_dim() const { return layers.empty() ? 0 : layers.front().self.rows(); }
std::size_t RgcnSimilarityModel::output_dim() const { return layers.empty() ? 0 : layers.back().self.cols(); }

std::vector<std::span<double>> RgcnSimilarityModel::parameters() {
    std::vector<std::span<double>> out;
    for (auto& layer : layers) {
        for (auto& w : layer.relation) out.push_back(w.values());
        out.push_back(layer.self.values());
    }
    out.push_back(w0.values());
    out.push_back(b0);
    out.push_back(w1.values());
    out.push_back(b1);
    return out;
}

std::vector<std::span<const double>> RgcnSimilarityModel::parameters() const {
    std::vector<std::span<const double>> out;
    for (const auto& layer : layers) {
        for (const auto& w : layer.relation) out.push_back(w.values());
        out.push_back(layer.self.values());
    }
    out.push_back(w0.values());
    out.push_back(b0);
    out.push_back(w1.values());
    out.push_back(b1);
    return out;
}

std::vector<std::string> RgcnSimilarityModel::parameter_names() const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t r = 0; r < kNumRelations; ++r) {
            out.push_back("layer" + std::to_string(l) + "." + to_string(static_cast<Relation>(r)));
        }
        out.push_back("layer" + std::to_string(l) + ".self");
    }
    out.insert(out.end(), {"mlp.w0", "mlp.b0", "mlp.w1", "mlp.b1"});
    return out;
}

void RgcnSimilarityModel::validate() const {
    if (layers.empty()) throw ShapeMismatch("model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        const std::size_t in = layer.self.rows();
        const std::size_t out = layer.self.cols();
        if (l > 0 && in != layers[l - 1].self.cols()) throw ShapeMismatch("layer dims do not chain");
        for (const auto& w : layer.relation) {
            if (w.rows() != in || w.cols() != out) throw ShapeMismatch("relation weight shape mismatch");
        }
    }
    if (w0.rows() != 2 * output_dim()) throw ShapeMismatch("W0 must have 2*d_out rows");
    if (b0.size() != w0.cols() || w1.rows() != w0.cols()) throw ShapeMismatch("MLP hidden width mismatch");
    if (w1.cols() != 2 || b1.size() != 2) throw ShapeMismatch("similarity head must output 2 values");
    if (activation != "relu") throw ShapeMismatch("unsupported activation " + activation);
}

namespace {

void glorot(Matrix& w, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (double& v : w.values()) v = (static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * limit;
}

}  // namespace

RgcnSimilarityModel init_model(const RgcnShape& shape, std::uint64_t seed) {
    if (shape.layers == 0 || shape.input_dim == 0 || shape.output_dim == 0 || shape.mlp_hidden == 0) {
        throw InvalidParams("RGCN shape dimensions must be positive");
    }
    std::mt19937_64 rng(seed);
    RgcnSimilarityModel m;
    for (std::size_t l = 0; l < shape.layers; ++l) {
        const std::size_t in = l == 0 ? shape.input_dim : shape.hidden_dim;
        const std::size_t out = l + 1 == shape.layers ? shape.output_dim : shape.hidden_dim;
        RgcnLayer layer;
        for (auto& w : layer.relation) {
            w = Matrix(in, out);
            glorot(w, rng);
        }
        layer.self = Matrix(in, out);
        glorot(layer.self, rng);
        m.layers.push_back(std::move(layer));
    }
    m.w0 = Matrix(2 * shape.output_dim, shape.mlp_hidden);
    glorot(m.w0, rng);
    m.b0.assign(shape.mlp_hidden, 0.0);
    m.w1 = Matrix(shape.mlp_hidden, 2);
    glorot(m.w1, rng);
    for (double& v : m.w1.values()) v *= 0.1;
    m.b1.assign(2, 1.0);
    return m;
}

RgcnSimilarityModel zeros_like(const RgcnSimilarityModel& m) {
    RgcnSimilarityModel z = m;
    for (auto p : z.parameters()) std::fill(p.begin(), p.end(), 0.0);
    return z;
}

namespace {

using Incoming = std::array<std::vector<std::vector<std::size_t>>, kNumRelations>;

Incoming incoming_lists(const MultiGraph& g) {
    Incoming in;
    for (std::size_t r = 0; r < kNumRelations; ++r) {
        in[r].assign(g.num_nodes(), {});
        for (const auto& [u, v] : g.edges[r]) in[r][v].push_back(u);
    }
    return in;
}

struct LayerCache {
    Matrix input;
    std::array<Matrix, kNumRelations> aggregated;
    Matrix pre;
};

struct GraphCache {
    Incoming incoming;
    std::vector<LayerCache> layers;
    Matrix output;
};

void relu_inplace(Matrix& m) {
    for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

void forward_graph(const MultiGraph& g, const RgcnSimilarityModel& m, GraphCache& cache) {
    if (g.features.rows() != g.num_nodes()) throw ShapeMismatch("multigraph feature rows != node count");
    if (g.num_nodes() > 0 && g.features.cols() != m.input_dim()) {
        throw ShapeMismatch("node feature width " + std::to_string(g.features.cols()) + " != model input " +
                            std::to_string(m.input_dim()));
    }
    const std::size_t n = g.num_nodes();
    cache.incoming = incoming_lists(g);
    cache.layers.clear();
    Matrix h = n > 0 ? g.features : Matrix(0, m.input_dim());
    const auto& k = simd::kernels(simd::active_isa());
    for (const auto& layer : m.layers) {
        LayerCache lc;
        const std::size_t d_in = layer.self.rows();
        lc.pre = Matrix(n, layer.self.cols());
        matmul_acc(h, layer.self, lc.pre);
        for (std::size_t r = 0; r < kNumRelations; ++r) {
            Matrix agg(n, d_in);
            bool any = false;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& src = cache.incoming[r][i];
                if (src.empty()) continue;
                any = true;
                const double c = 1.0 / static_cast<double>(src.size());
                for (auto j : src) k.axpy(c, h.row(j).data(), agg.row(i).data(), d_in);
            }
            if (any) matmul_acc(agg, layer.relation[r], lc.pre);
            lc.aggregated[r] = std::move(agg);
        }
        lc.input = std::move(h);
        h = lc.pre;
        relu_inplace(h);
        cache.layers.push_back(std::move(lc));
    }
    cache.output = std::move(h);
}

// Returns d(loss)/d(input of layer 0) is not needed; gradients go to `grad`.
void backward_graph(const RgcnSimilarityModel& m, const GraphCache& cache, std::span<const double> d_readout,
                    RgcnSimilarityModel& grad) {
    const std::size_t n = cache.output.rows();
    if (n == 0) return;
    const std::size_t width = cache.output.cols();
    Matrix dh(n, width);
    for (std::size_t c = 0; c < width; ++c) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (cache.output(i, c) > cache.output(best, c)) best = i;
        }
        dh(best, c) += d_readout[c];
    }
    const auto& k = simd::kernels(simd::active_isa());
    for (std::size_t l = m.layers.size(); l-- > 0;) {
        const auto& layer = m.layers[l];
        const auto& lc = cache.layers[l];
        Matrix dz = std::move(dh);
        for (std::size_t i = 0; i < dz.size(); ++i) {
            if (!(lc.pre.values()[i] > 0.0)) dz.values()[i] = 0.0;
        }
        matmul_tn_acc(lc.input, dz, grad.layers[l].self);
        for (std::size_t r = 0; r < kNumRelations; ++r) {
            matmul_tn_acc(lc.aggregated[r], dz, grad.layers[l].relation[r]);
        }
        if (l == 0) break;
        const std::size_t d_in = layer.self.rows();
        dh = Matrix(n, d_in);
        matmul_nt_acc(dz, layer.self, dh);
        for (std::size_t r = 0; r < kNumRelations; ++r) {
            Matrix t(n, d_in);
            bool any = false;
            for (std::size_t i = 0; i < n; ++i) any = any || !cache.incoming[r][i].empty();
            if (!any) continue;
            matmul_nt_acc(dz, layer.relation[r], t);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& src = cache.incoming[r][i];
                if (src.empty()) continue;
                const double c = 1.0 / static_cast<double>(src.size());
                for (auto j : src) k.axpy(c, t.row(i).data(), dh.row(j).data(), d_in);
            }
        }
    }
}

struct HeadCache {
    std::vector<double> x;
    std::vector<double> z0;
    std::vector<double> a0;
    std::vector<double> z1;
    std::array<double, 2> probs{};
};

void forward_head(std::span<const double> g_online, std::span<const double> g_kg, const RgcnSimilarityModel& m,
                  HeadCache& hc) {
    if (g_online.size() != m.output_dim() || g_kg.size() != m.output_dim()) {
        throw ShapeMismatch("graph readout width does not match the model");
    }
    hc.x.assign(g_online.begin(), g_online.end());
    hc.x.insert(hc.x.end(), g_kg.begin(), g_kg.end());
    hc.z0 = m.b0;
    vecmat_acc(hc.x, m.w0, hc.z0);
    hc.a0 = hc.z0;
    for (double& v : hc.a0) v = v > 0.0 ? v : 0.0;
    hc.z1 = m.b1;
    vecmat_acc(hc.a0, m.w1, hc.z1);
    const double a = hc.z1[0] > 0.0 ? hc.z1[0] : 0.0;
    const double b = hc.z1[1] > 0.0 ? hc.z1[1] : 0.0;
    const double top = std::max(a, b);
    const double ea = std::exp(a - top);
    const double eb = std::exp(b - top);
    hc.probs = {ea / (ea + eb), eb / (ea + eb)};
}

}  // namespace

Matrix rgcn_forward(const MultiGraph& g, const RgcnSimilarityModel& m) {
    m.validate();
    GraphCache cache;
    forward_graph(g, m, cache);
    return std::move(cache.output);
}

std::vector<double> graph_readout(const Matrix& h, std::size_t width) {
    if (h.rows() == 0) return std::vector<double>(width, 0.0);
    if (h.cols() != width) throw ShapeMismatch("graph_readout: width mismatch");
    std::vector<double> out(h.row(0).begin(), h.row(0).end());
    for (std::size_t i = 1; i < h.rows(); ++i) simd::max_into(h.row(i), out);
    return out;
}

std::vector<double> graph_embedding(const MultiGraph& g, const RgcnSimilarityModel& m) {
    return graph_readout(rgcn_forward(g, m), m.output_dim());
}

SimilarityPrediction similarity_from_embeddings(std::span<const double> online, std::span<const double> kg,
                                                const RgcnSimilarityModel& m) {
    HeadCache hc;
    forward_head(online, kg, m, hc);
    return SimilarityPrediction{hc.probs};
}

SimilarityPrediction similarity(const MultiGraph& online, const MultiGraph& kg, const RgcnSimilarityModel& m) {
    const auto a = graph_embedding(online, m);
    const auto b = graph_embedding(kg, m);
    return similarity_from_embeddings(a, b, m);
}

std::vector<ClassScore> rank_classes(std::vector<ClassScore> scores) {
    std::map<std::string, double> best;
    for (const auto& s : scores) {
        auto [it, inserted] = best.try_emplace(s.fault_class, s.p_similar);
        if (!inserted) it->second = std::max(it->second, s.p_similar);
    }
    std::vector<ClassScore> out;
    for (const auto& [c, p] : best) out.push_back({c, p});
    std::stable_sort(out.begin(), out.end(), [](const ClassScore& a, const ClassScore& b) {
        if (a.p_similar != b.p_similar) return a.p_similar > b.p_similar;
        return a.fault_class < b.fault_class;
    });
    return out;
}

EncodedKnowledge encode_knowledge(const std::vector<LabeledGraph>& kgs, const RgcnSimilarityModel& m) {
    EncodedKnowledge out;
    for (const auto& kg : kgs) out.entries.emplace_back(kg.label, graph_embedding(kg.graph, m));
    return out;
}

std::vector<ClassScore> match(const MultiGraph& online, const EncodedKnowledge& kb, const RgcnSimilarityModel& m) {
    if (kb.entries.empty()) throw EmptyKnowledgeBase("no knowledge graphs to match against");
    const auto g = graph_embedding(online, m);
    std::vector<ClassScore> scores;
    for (const auto& [label, emb] : kb.entries) {
        scores.push_back({label, similarity_from_embeddings(g, emb, m).similar()});
    }
    return rank_classes(std::move(scores));
}

std::vector<ClassScore> match(const MultiGraph& online, const std::vector<LabeledGraph>& kgs,
                              const RgcnSimilarityModel& m) {
    if (kgs.empty()) throw EmptyKnowledgeBase("no knowledge graphs to match against");
    m.validate();
    return match(online, encode_knowledge(kgs, m), m);
}

double pair_loss(const MultiGraph& online, const MultiGraph& kg, bool similar, const RgcnSimilarityModel& m) {
    const auto p = similarity(online, kg, m);
    return -std::log(std::max(p.probs[similar ? kSimilarIndex : kDissimilarIndex], 1e-300));
}

double accumulate_gradient(const MultiGraph& online, const MultiGraph& kg, bool similar,
                           const RgcnSimilarityModel& m, RgcnSimilarityModel& grad) {
    GraphCache c_on;
    GraphCache c_kg;
    forward_graph(online, m, c_on);
    forward_graph(kg, m, c_kg);
    const std::size_t d = m.output_dim();
    const auto g_on = graph_readout(c_on.output, d);
    const auto g_kg = graph_readout(c_kg.output, d);
    HeadCache hc;
    forward_head(g_on, g_kg, m, hc);
    const std::size_t target = similar ? kSimilarIndex : kDissimilarIndex;
    const double loss = -std::log(std::max(hc.probs[target], 1e-300));

    // softmax + cross-entropy, then the output rectifier
    std::array<double, 2> dz1{hc.probs[0], hc.probs[1]};
    dz1[target] -= 1.0;
    for (std::size_t j = 0; j < 2; ++j) {
        if (!(hc.z1[j] > 0.0)) dz1[j] = 0.0;
    }
    const std::size_t h = m.b0.size();
    std::vector<double> dz0(h, 0.0);
    for (std::size_t j = 0; j < 2; ++j) {
        grad.b1[j] += dz1[j];
        for (std::size_t i = 0; i < h; ++i) grad.w1(i, j) += hc.a0[i] * dz1[j];
    }
    for (std::size_t i = 0; i < h; ++i) {
        if (hc.z0[i] > 0.0) dz0[i] = m.w1(i, 0) * dz1[0] + m.w1(i, 1) * dz1[1];
    }
    const auto& k = simd::kernels(simd::active_isa());
    std::vector<double> dx(2 * d, 0.0);
    for (std::size_t i = 0; i < h; ++i) grad.b0[i] += dz0[i];
    for (std::size_t r = 0; r < 2 * d; ++r) {
        if (hc.x[r] != 0.0) k.axpy(hc.x[r], dz0.data(), grad.w0.row(r).data(), h);
        dx[r] = k.dot(m.w0.row(r).data(), dz0.data(), h);
    }
    backward_graph(m, c_on, std::span<const double>(dx).first(d), grad);
    backward_graph(m, c_kg, std::span<const double>(dx).subspan(d), grad);
    return loss;
}

std::vector<SimilarityPair> sample_similarity_pairs(const std::vector<LabeledGraph>& online,
                                                    const std::vector<LabeledGraph>& kgs,
                                                    std::size_t neg_ratio,
                                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SimilarityPair> pairs;
    for (const auto& o : online) {
        std::vector<const LabeledGraph*> others;
        for (const auto& kg : kgs) {
            if (kg.label != o.label) others.push_back(&kg);
        }
        for (const auto& kg : kgs) {
            if (kg.label != o.label || kg.id == o.id) continue;
            pairs.push_back({&o.graph, &kg.graph, true});
            for (std::size_t s = 0; s < neg_ratio && !others.empty(); ++s) {
                const auto pick = static_cast<std::size_t>(rng() % others.size());
                pairs.push_back({&o.graph, &others[pick]->graph, false});
            }
        }
    }
    return pairs;
}

constexpr double kMomentFloor = 1e-150;

RgcnSimilarityModel train_similarity(const std::vector<SimilarityPair>& pairs,
                                     const SimilarityTrainConfig& cfg,
                                     const std::function<double(const RgcnSimilarityModel&)>& validation,
                                     TrainingReport* report) {
    const bool has_pos = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.similar; });
    const bool has_neg = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return !p.similar; });
    if (!has_pos || !has_neg) throw DegenerateData("similarity training needs similar and dissimilar pairs");
    if (cfg.learning_rate <= 0.0) throw InvalidParams("learning_rate must be positive");

    const auto n_pos = static_cast<double>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.similar; }));
    const double pos_weight = cfg.balance_classes ? (static_cast<double>(pairs.size()) - n_pos) / n_pos : 1.0;

    RgcnSimilarityModel m = init_model(cfg.shape, cfg.seed);
    RgcnSimilarityModel grad = zeros_like(m);
    RgcnSimilarityModel first = zeros_like(m);
    RgcnSimilarityModel second = zeros_like(m);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);

    TrainingReport local;
    TrainingReport& rep = report ? *report : local;
    rep = {};
    RgcnSimilarityModel best = m;
    bool have_best = false;
    double step = 0.0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (auto idx : order) {
            const auto& p = pairs[idx];
            for (auto g : grad.parameters()) std::fill(g.begin(), g.end(), 0.0);
            total += accumulate_gradient(*p.online, *p.kg, p.similar, m, grad);
            if (p.similar && pos_weight != 1.0) {
                for (auto g : grad.parameters()) simd::scale(pos_weight, g);
            }
            step += 1.0;
            const double c1 = 1.0 - std::pow(cfg.beta1, step);
            const double c2 = 1.0 - std::pow(cfg.beta2, step);
            auto params = m.parameters();
            auto grads = grad.parameters();
            auto m1 = first.parameters();
            auto m2 = second.parameters();
            for (std::size_t t = 0; t < params.size(); ++t) {
                for (std::size_t i = 0; i < params[t].size(); ++i) {
                    const double g = grads[t][i];
                    m1[t][i] = cfg.beta1 * m1[t][i] + (1.0 - cfg.beta1) * g;
                    m2[t][i] = cfg.beta2 * m2[t][i] + (1.0 - cfg.beta2) * g * g;
                    // decayed moments of dead units would otherwise sink into subnormals
                    if (std::abs(m1[t][i]) < kMomentFloor) m1[t][i] = 0.0;
                    if (m2[t][i] < kMomentFloor) m2[t][i] = 0.0;
                    params[t][i] -= cfg.learning_rate * (m1[t][i] / c1) / (std::sqrt(m2[t][i] / c2) + cfg.epsilon);
                }
            }
        }
        rep.epoch_loss.push_back(total / static_cast<double>(pairs.size()));
        const bool checkpoint = validation && cfg.validate_every > 0 &&
                                (epoch % cfg.validate_every == 0 || epoch == cfg.epochs);
        if (checkpoint) {
            const double score = validation(m);
            if (!have_best || score > rep.best_validation) {
                have_best = true;
                rep.best_validation = score;
                rep.best_epoch = epoch;
                best = m;
            }
        }
    }
    if (!have_best) {
        rep.best_epoch = cfg.epochs;
        return m;
    }
    return best;
}

}  // namespace kgroot
