#include "kgroot/relation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kgroot/error.hpp"
#include "kgroot/simd.hpp"

namespace kgroot {

std::string to_string(RelationKind k) { return k == RelationKind::Causal ? "causal" : "sequential"; }

RelationKind relation_kind_from_string(const std::string& s) {
    if (s == "causal") return RelationKind::Causal;
    if (s == "sequential") return RelationKind::Sequential;
    throw InvalidArgument("unknown relation kind: " + s);
}

std::vector<double> PairFeatures::to_vector() const {
    std::vector<double> x;
    x.reserve(src_type_vec.size() + dst_type_vec.size() + 5);
    x.insert(x.end(), src_type_vec.begin(), src_type_vec.end());
    x.insert(x.end(), dst_type_vec.begin(), dst_type_vec.end());
    x.push_back(std::log1p(delta_t));
    x.push_back(same_entity);
    x.push_back(entity_distance / kDistanceSentinel);
    x.push_back(cooccurrence / 10.0);
    x.push_back(link_rate);
    return x;
}

PairFeatures featurize(const Event& a, const Event& b, const RelationContext& ctx) {
    if (a.timestamp_ms > b.timestamp_ms) {
        throw PreconditionViolated("featurize: '" + a.event_id + "' is later than '" + b.event_id + "'");
    }
    if (!ctx.stats || !ctx.table) throw InvalidArgument("featurize: stats and embedding table are required");
    PairFeatures f;
    f.src_type_vec = embed_type(a.event_type, *ctx.table);
    f.dst_type_vec = embed_type(b.event_type, *ctx.table);
    f.delta_t = static_cast<double>(b.timestamp_ms - a.timestamp_ms) / 1000.0;
    f.same_entity = a.entity == b.entity ? 1.0 : 0.0;
    if (a.entity == b.entity) {
        f.entity_distance = 0.0;
    } else if (ctx.topology) {
        if (auto d = ctx.topology->hop_distance(a.entity, b.entity)) {
            f.entity_distance = std::min<double>(*d, kDistanceSentinel);
        }
    }
    if (auto v = pmi(a.event_type, b.event_type, *ctx.stats)) f.cooccurrence = *v;
    f.link_rate = causal_rate(a.event_type, b.event_type, *ctx.stats);
    return f;
}

double SvmModel::margin(std::span<const double> x) const {
    if (x.size() != feature_dim || weights.size() != feature_dim) {
        throw DimensionMismatch("svm: expected " + std::to_string(feature_dim) + " features, got " +
                                std::to_string(x.size()));
    }
    return simd::dot(weights, x) + bias;
}

SvmModel SvmModel::constant(std::size_t feature_dim, bool positive) {
    SvmModel m;
    m.feature_dim = feature_dim;
    m.weights.assign(feature_dim, 0.0);
    m.bias = positive ? 1.0 : -1.0;
    return m;
}

RelationModels RelationModels::accept_all(std::size_t feature_dim, RelationKind kind) {
    return {SvmModel::constant(feature_dim, true), SvmModel::constant(feature_dim, kind == RelationKind::Causal)};
}

namespace {

double objective(const SvmModel& m, const std::vector<SvmExample>& examples, const std::vector<double>& weight,
                 double lambda) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const double z = examples[i].label * m.margin(examples[i].x);
        hinge += weight[i] * std::max(0.0, 1.0 - z);
    }
    return 0.5 * lambda * (simd::dot(m.weights, m.weights) + m.bias * m.bias) +
           hinge / static_cast<double>(examples.size());
}

}  // namespace

SvmModel train_svm(const std::vector<SvmExample>& examples, const SvmConfig& cfg, std::vector<double>* loss_curve) {
    if (cfg.lambda <= 0.0) throw InvalidParams("svm lambda must be positive");
    if (examples.empty()) throw DegenerateData("svm: no training examples");
    const std::size_t dim = examples.front().x.size();
    std::size_t n_pos = 0;
    for (const auto& ex : examples) {
        if (ex.x.size() != dim) throw DimensionMismatch("svm: inconsistent feature dimensions");
        if (ex.label != 1 && ex.label != -1) throw InvalidArgument("svm labels must be +1 or -1");
        if (ex.label == 1) ++n_pos;
    }
    const std::size_t n_neg = examples.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DegenerateData("svm: training data contains a single label");

    std::vector<double> weight(examples.size(), 1.0);
    if (cfg.balance_classes) {
        const double n = static_cast<double>(examples.size());
        for (std::size_t i = 0; i < examples.size(); ++i) {
            weight[i] = examples[i].label == 1 ? n / (2.0 * n_pos) : n / (2.0 * n_neg);
        }
    }

    SvmModel m;
    m.feature_dim = dim;
    m.weights.assign(dim, 0.0);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    const auto& k = simd::kernels(simd::active_isa());

    // Pegasos schedule eta_t = 1 / (lambda t). The bias is handled as the
    // weight of a constant feature, so it is shrunk and projected too.
    // The weighted objective at w = 0 averages to 1, so the optimum lies
    // in the ball of radius sqrt(2 / lambda).
    const double radius2 = 2.0 / cfg.lambda;
    double t = 0.0;
    // Running average of all iterates; this is the returned model.
    SvmModel avg = m;
    if (loss_curve) loss_curve->clear();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const auto& ex = examples[idx];
            t += 1.0;
            const double eta = 1.0 / (cfg.lambda * t);
            const double z = ex.label * (k.dot(m.weights.data(), ex.x.data(), dim) + m.bias);
            const double shrink = 1.0 - eta * cfg.lambda;
            k.scale(shrink, m.weights.data(), dim);
            m.bias *= shrink;
            if (z < 1.0) {
                const double step = eta * weight[idx] * ex.label;
                k.axpy(step, ex.x.data(), m.weights.data(), dim);
                m.bias += step;
            }
            const double norm2 = k.dot(m.weights.data(), m.weights.data(), dim) + m.bias * m.bias;
            if (norm2 > radius2) {
                const double f = std::sqrt(radius2 / norm2);
                k.scale(f, m.weights.data(), dim);
                m.bias *= f;
            }
            const double mix = 1.0 / t;
            for (std::size_t j = 0; j < dim; ++j) avg.weights[j] += mix * (m.weights[j] - avg.weights[j]);
            avg.bias += mix * (m.bias - avg.bias);
        }
        if (loss_curve) loss_curve->push_back(objective(avg, examples, weight, cfg.lambda));
    }
    return avg;
}

bool relation_exists(const SvmModel& m, std::span<const double> x) { return m.margin(x) > 0.0; }

bool relation_exists(const SvmModel& m, const PairFeatures& f) { return relation_exists(m, f.to_vector()); }

RelationKind classify_kind(const SvmModel& m, std::span<const double> x) {
    return m.margin(x) > 0.0 ? RelationKind::Causal : RelationKind::Sequential;
}

RelationKind classify_kind(const SvmModel& m, const PairFeatures& f) { return classify_kind(m, f.to_vector()); }

}  // namespace kgroot
