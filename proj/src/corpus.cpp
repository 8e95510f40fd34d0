#include "dsel/corpus.hpp"

#include <stdexcept>
#include <unordered_set>

#include "dsel/util.hpp"

namespace dsel {

std::string TokenizedCorpus::serialize() const {
    std::string out;
    for (const auto& sentence : sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (i) out.push_back(' ');
            out += sentence[i];
        }
        out.push_back('\n');
    }
    return out;
}

static void finalize_counts(TokenizedCorpus& corpus) {
    std::unordered_set<std::string_view> types;
    std::uint64_t tokens = 0;
    for (const auto& sentence : corpus.sentences) {
        tokens += sentence.size();
        for (const auto& tok : sentence) types.insert(tok);
    }
    corpus.token_count = tokens;
    corpus.type_count = types.size();
}

TokenizedCorpus make_corpus(std::vector<std::vector<std::string>> sentences) {
    TokenizedCorpus corpus;
    corpus.sentences = std::move(sentences);
    corpus.line_index.resize(corpus.sentences.size());
    for (std::size_t i = 0; i < corpus.line_index.size(); ++i)
        corpus.line_index[i] = i;
    finalize_counts(corpus);
    return corpus;
}

TokenizedCorpus parse_corpus(const std::string& text,
                             const std::string& origin) {
    TokenizedCorpus corpus;
    std::size_t start = 0, line_no = 0;
    std::vector<std::string> tokens;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        std::size_t end = (nl == std::string::npos) ? text.size() : nl;
        ++line_no;
        std::string_view line(text.data() + start, end - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (!valid_utf8(line))
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": invalid UTF-8");
        if (!split_tokens(line, tokens))
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": malformed spacing (empty token)");
        corpus.sentences.push_back(tokens);
        start = (nl == std::string::npos) ? text.size() : nl + 1;
    }
    corpus.line_index.resize(corpus.sentences.size());
    for (std::size_t i = 0; i < corpus.line_index.size(); ++i)
        corpus.line_index[i] = i;
    finalize_counts(corpus);
    return corpus;
}

TokenizedCorpus load_corpus(const std::string& path) {
    return parse_corpus(read_file(path), path);
}

ParallelCorpus load_parallel(const std::string& src_path,
                             const std::string& tgt_path) {
    ParallelCorpus pc;
    pc.source = load_corpus(src_path);
    pc.target = load_corpus(tgt_path);
    if (pc.source.size() != pc.target.size())
        throw std::runtime_error(
            "parallel corpus length mismatch: " + src_path + " has " +
            std::to_string(pc.source.size()) + " sentences, " + tgt_path +
            " has " + std::to_string(pc.target.size()));
    return pc;
}

VocabStats count_vocab(const TokenizedCorpus& corpus) {
    VocabStats stats;
    stats.counts.reserve(corpus.type_count * 2 + 16);
    for (const auto& sentence : corpus.sentences)
        for (const auto& tok : sentence) ++stats.counts[tok];
    stats.total = corpus.token_count;
    return stats;
}

TokenizedCorpus concat(const TokenizedCorpus& a, const TokenizedCorpus& b) {
    std::vector<std::vector<std::string>> sentences;
    sentences.reserve(a.size() + b.size());
    sentences.insert(sentences.end(), a.sentences.begin(), a.sentences.end());
    sentences.insert(sentences.end(), b.sentences.begin(), b.sentences.end());
    return make_corpus(std::move(sentences));
}

}  // namespace dsel
