#include "kgroot/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "kgroot/error.hpp"
#include "kgroot/simd.hpp"

namespace kgroot {

void SkipGramConfig::validate() const {
    if (dim < 2) throw InvalidParams("embedding dim must be >= 2");
    if (context_window < 1) throw InvalidParams("context_window must be >= 1");
    if (learning_rate <= 0.0) throw InvalidParams("learning_rate must be positive");
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> vocab, Matrix vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
    if (vocab_.size() != vectors_.rows()) throw ShapeMismatch("embedding vocab/vector count mismatch");
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        if (!index_.emplace(vocab_[i], i).second) throw InvalidArgument("duplicate vocab entry " + vocab_[i]);
    }
    for (double v : vectors_.values()) {
        if (!std::isfinite(v)) throw DataError("embedding contains non-finite values");
    }
}

std::span<const double> EmbeddingTable::find(const std::string& type) const {
    auto it = index_.find(type);
    if (it == index_.end()) return {};
    return vectors_.row(it->second);
}

std::vector<double> embed_type(const std::string& type, const EmbeddingTable& table, bool* oov) {
    auto row = table.find(type);
    if (oov) *oov = row.empty();
    if (row.empty()) return std::vector<double>(table.dim(), 0.0);
    return {row.begin(), row.end()};
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(simd::dot(a, a));
    const double nb = std::sqrt(simd::dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return simd::dot(a, b) / (na * nb);
}

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

EmbeddingTable train_embeddings(const std::vector<std::vector<std::string>>& sequences,
                                const SkipGramConfig& cfg,
                                std::vector<double>* loss_curve) {
    cfg.validate();
    std::map<std::string, std::size_t> counts;
    for (const auto& seq : sequences) {
        for (const auto& t : seq) ++counts[t];
    }
    if (counts.size() < 2) {
        throw InsufficientVocabulary("embedding training needs at least two distinct event types");
    }

    std::vector<std::string> vocab;
    std::vector<double> noise_cdf;
    double total = 0.0;
    for (const auto& [t, c] : counts) {
        vocab.push_back(t);
        total += std::pow(static_cast<double>(c), 0.75);
        noise_cdf.push_back(total);
    }
    for (auto& v : noise_cdf) v /= total;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < vocab.size(); ++i) index[vocab[i]] = i;

    std::vector<std::vector<std::size_t>> corpus;
    std::size_t n_tokens = 0;
    for (const auto& seq : sequences) {
        auto& ids = corpus.emplace_back();
        for (const auto& t : seq) ids.push_back(index[t]);
        n_tokens += ids.size();
    }

    const std::size_t dim = cfg.dim;
    std::mt19937_64 rng(cfg.seed);
    Matrix input(vocab.size(), dim);
    Matrix output(vocab.size(), dim, 0.0);
    for (double& v : input.values()) v = (uniform01(rng) - 0.5) / static_cast<double>(dim);

    auto draw_negative = [&]() {
        const double u = uniform01(rng);
        auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - noise_cdf.begin(), vocab.size() - 1));
    };

    const auto& k = simd::kernels(simd::active_isa());
    std::vector<double> grad_in(dim);
    const double total_steps = static_cast<double>(cfg.epochs * n_tokens);
    std::size_t step = 0;
    if (loss_curve) loss_curve->clear();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t epoch_pairs = 0;
        for (const auto& ids : corpus) {
            for (std::size_t pos = 0; pos < ids.size(); ++pos, ++step) {
                const double lr =
                    cfg.learning_rate * std::max(1e-4, 1.0 - static_cast<double>(step) / std::max(1.0, total_steps));
                const std::size_t center = ids[pos];
                const std::size_t lo = pos >= cfg.context_window ? pos - cfg.context_window : 0;
                const std::size_t hi = std::min(ids.size() - 1, pos + cfg.context_window);
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    const std::size_t target = ids[c];
                    double* in = input.row(center).data();
                    std::fill(grad_in.begin(), grad_in.end(), 0.0);
                    for (std::size_t s = 0; s <= cfg.negatives_per_positive; ++s) {
                        std::size_t word = target;
                        double label = 1.0;
                        if (s > 0) {
                            word = draw_negative();
                            if (word == target) continue;
                            label = 0.0;
                        }
                        double* out = output.row(word).data();
                        const double score = k.dot(in, out, dim);
                        epoch_loss -= label > 0 ? log_sigmoid(score) : log_sigmoid(-score);
                        const double g = (label - sigmoid(score)) * lr;
                        k.axpy(g, out, grad_in.data(), dim);
                        k.axpy(g, in, out, dim);
                    }
                    k.axpy(1.0, grad_in.data(), in, dim);
                    ++epoch_pairs;
                }
            }
        }
        if (loss_curve) loss_curve->push_back(epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
    }
    return EmbeddingTable(std::move(vocab), std::move(input));
}

EmbeddingTable train_embeddings(const std::vector<EventSequence>& histories,
                                const SkipGramConfig& cfg,
                                std::vector<double>* loss_curve) {
    std::vector<std::vector<std::string>> sequences;
    sequences.reserve(histories.size());
    for (const auto& h : histories) {
        auto& s = sequences.emplace_back();
        for (const auto& e : h.events) s.push_back(e.event_type);
    }
    return train_embeddings(sequences, cfg, loss_curve);
}

}  // namespace kgroot
