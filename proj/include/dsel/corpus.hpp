#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace dsel {

// A corpus of pre-tokenized sentences. Tokens are opaque, case-sensitive
// strings; tokenization and normalization happen upstream. Sentence i keeps
// its file position in line_index[i] (identity after loading, a permutation
// after extraction). Immutable after construction and safe to share across
// readers.
struct TokenizedCorpus {
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::size_t> line_index;
    std::uint64_t token_count = 0;
    std::uint64_t type_count = 0;

    std::size_t size() const { return sentences.size(); }
    bool empty() const { return sentences.empty(); }

    // One sentence per line, tokens joined by single spaces, trailing
    // newline after the last sentence. Inverse of load_corpus.
    std::string serialize() const;
};

// Sentence-aligned pair of corpora; sentence i of each side forms one pair.
struct ParallelCorpus {
    TokenizedCorpus source;
    TokenizedCorpus target;
};

// Token occurrence counts over a corpus. Probabilities are derived as
// count/total; callers must check total > 0 before asking for them.
struct VocabStats {
    std::unordered_map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;

    std::uint64_t count(const std::string& token) const {
        auto it = counts.find(token);
        return it == counts.end() ? 0 : it->second;
    }
    double prob(const std::string& token) const {
        return total == 0 ? 0.0 : static_cast<double>(count(token)) /
                                      static_cast<double>(total);
    }
};

// Loads a UTF-8, newline-delimited, space-tokenized file. Empty lines are
// kept as zero-length sentences. Rejects invalid UTF-8 and malformed
// spacing with the offending line number.
TokenizedCorpus load_corpus(const std::string& path);

// Builds a corpus from already-tokenized sentences (line_index = identity).
TokenizedCorpus make_corpus(std::vector<std::vector<std::string>> sentences);

TokenizedCorpus parse_corpus(const std::string& text,
                             const std::string& origin = "<string>");

// Loads two aligned files; fails unless line counts match.
ParallelCorpus load_parallel(const std::string& src_path,
                             const std::string& tgt_path);

VocabStats count_vocab(const TokenizedCorpus& corpus);

// Corpus with the sentences of `a` followed by the sentences of `b`;
// line_index is re-densified to [0, |a|+|b|).
TokenizedCorpus concat(const TokenizedCorpus& a, const TokenizedCorpus& b);

}  // namespace dsel
