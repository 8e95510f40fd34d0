#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dsel/corpus.hpp"

namespace dsel {

// Interpolated modified Kneser-Ney n-gram model with a padded vocabulary.
//
// Model conventions (shared with the brute-force reference in the tests):
//
//   * Events are the observed surface types plus the end marker </s>; the
//     begin marker <s> is context only and never predicted.
//   * Each sentence w_1..w_L contributes, for every scored position i
//     (the L real tokens and the end marker), the k-grams ending at i for
//     k = 1..order, over the padded sequence <s>^(order-1) w_1..w_L </s>.
//   * Adjusted counts: the top order keeps raw counts; below it, a k-gram
//     keeps its raw count when it starts with <s> and otherwise uses the
//     continuation count (number of distinct left extensions).
//   * Three discounts per order (counts 1, 2, >=3) from count-of-counts
//     per Chen & Goodman. Degenerate count-of-counts (any of n1..n4 zero,
//     or a discount outside its valid range) fall back to a flat 0.75
//     discount for that order, with a warning.
//   * The padded vocabulary has `padded_vocab_size` uniform slots: one per
//     observed event plus (padded_vocab_size - types - 1) phantom slots
//     aggregated by the unknown symbol. Unigrams interpolate with this
//     uniform base, so a single OOV occurrence scores one phantom slot
//     while the unknown symbol as a class carries the aggregate phantom
//     mass. Requested sizes too small to leave one phantom slot are
//     clamped up with a warning.
//   * All probabilities are natural-log internally; scoring prepends
//     (order-1) begin markers, scores one end marker, and normalizes by
//     (tokens + 1). A zero-length sentence scores the end marker alone.
//
// A trained model is immutable; scoring is pure and thread-safe.
class NGramModel {
  public:
    using WordId = std::uint32_t;
    static constexpr WordId kBos = 0;
    static constexpr WordId kEos = 1;
    static constexpr WordId kUnk = 2;

    struct Entry {
        double logp = 0.0;       // ln P(w | history)
        double logbow = 0.0;     // ln backoff weight when used as a history
        bool has_bow = false;
    };

    int order() const { return order_; }
    std::uint64_t padded_vocab_size() const { return padded_size_; }

    // Observed surface types (no markers, no unknown symbol).
    const std::unordered_set<std::string>& vocab() const { return vocab_; }

    // ln P(token | context tokens), OOV tokens scored as one phantom slot.
    double log_prob(const std::vector<std::string>& context,
                    const std::string& token) const;

    // Per-word cross-entropy in nats: -(1/(L+1)) sum ln P over the L tokens
    // plus the end marker.
    double sentence_cross_entropy(const std::vector<std::string>& sentence) const;

    // Sum of ln P over the scored positions of one sentence (L+1 terms).
    double sentence_log_prob(const std::vector<std::string>& sentence) const;

    // Sum over all events of P(w|context) plus the aggregate phantom mass;
    // 1.0 up to float error for any context. Only valid for trained models
    // (imported ARPA models lack the phantom bookkeeping).
    double normalization_sum(const std::vector<std::string>& context) const;

    // ln P of a single OOV occurrence given the context (one phantom slot).
    double log_prob_oov(const std::vector<std::string>& context) const;

    std::uint64_t phantom_slots() const { return phantom_slots_; }
    bool is_trained() const { return phantom_slots_ > 0; }

    // Standard ARPA backoff text format, log10 probabilities. Import
    // produces a scorer-only model (no normalization_sum support).
    std::string to_arpa() const;
    static NGramModel from_arpa(const std::string& text);

    // Test support: builds a model directly from explicit unigram
    // probabilities (natural log), bypassing training.
    static NGramModel from_unigram_table(
        const std::vector<std::pair<std::string, double>>& logprobs,
        double unk_logp);

  private:
    friend NGramModel train_kn(const TokenizedCorpus&, int, std::uint64_t);

    WordId id_of(const std::string& token) const;
    double log_prob_ids(const std::vector<WordId>& context, WordId word) const;

    int order_ = 0;
    std::uint64_t padded_size_ = 0;
    std::uint64_t phantom_slots_ = 0;
    std::unordered_set<std::string> vocab_;
    std::unordered_map<std::string, WordId> word_ids_;
    std::vector<std::string> id_words_;
    // tables_[k-1]: k-gram id string (4 bytes per id) -> entry
    std::vector<std::unordered_map<std::string, Entry>> tables_;
};

// Trains the model described above. Throws on an empty corpus or order < 1.
NGramModel train_kn(const TokenizedCorpus& corpus, int order,
                    std::uint64_t padded_vocab_size);

// exp of the token-weighted mean per-word cross-entropy over the corpus,
// weights (tokens + 1) per sentence. Throws on an empty corpus.
double corpus_perplexity(const NGramModel& model, const TokenizedCorpus& corpus);

// Token occurrences in `corpus` whose type is absent from `model_vocab`.
std::uint64_t oov_tokens(const std::unordered_set<std::string>& model_vocab,
                         const TokenizedCorpus& corpus);

}  // namespace dsel
