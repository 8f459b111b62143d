#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgroot/event.hpp"
#include "kgroot/matrix.hpp"

namespace kgroot {

struct SkipGramConfig {
    std::size_t dim = 32;
    std::size_t context_window = 5;         // events on each side
    std::size_t negatives_per_positive = 5;
    std::size_t epochs = 30;
    double learning_rate = 0.025;
    std::uint64_t seed = 13;

    void validate() const;
};

// Event-type vectors learned from type sequences.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::vector<std::string> vocab, Matrix vectors);

    std::size_t dim() const noexcept { return vectors_.cols(); }
    const std::vector<std::string>& vocab() const noexcept { return vocab_; }
    const Matrix& vectors() const noexcept { return vectors_; }

    bool contains(const std::string& type) const { return index_.contains(type); }
    // Row of a known type; empty span for out-of-vocabulary types.
    std::span<const double> find(const std::string& type) const;

    bool operator==(const EmbeddingTable& o) const { return vocab_ == o.vocab_ && vectors_ == o.vectors_; }

private:
    std::vector<std::string> vocab_;
    Matrix vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Out-of-vocabulary types map to the zero vector; `oov` (if given) is set
// accordingly so callers can count warnings.
std::vector<double> embed_type(const std::string& type, const EmbeddingTable& table, bool* oov = nullptr);

// Skip-gram with negative sampling (unigram^0.75 noise) over the event-type
// sequences of the histories. Throws InsufficientVocabulary with fewer than
// two distinct types. `loss_curve`, when given, receives the mean loss per
// epoch.
EmbeddingTable train_embeddings(const std::vector<EventSequence>& histories,
                                const SkipGramConfig& cfg,
                                std::vector<double>* loss_curve = nullptr);

// Same trainer over plain token sequences.
EmbeddingTable train_embeddings(const std::vector<std::vector<std::string>>& sequences,
                                const SkipGramConfig& cfg,
                                std::vector<double>* loss_curve = nullptr);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace kgroot
