#include "dsel/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "dsel/util.hpp"

namespace dsel {

namespace {

constexpr double kLn10 = 2.302585092994045684;
// ARPA-style placeholder for context-only entries (<s> and <s>-run
// histories), which are never looked up as events.
constexpr double kSentinelLogp = -99.0 * kLn10;

using WordId = NGramModel::WordId;

void pack_append(std::string& key, WordId id) {
    char buf[4];
    std::memcpy(buf, &id, 4);
    key.append(buf, 4);
}

std::string pack(const WordId* ids, std::size_t n) {
    std::string key;
    key.reserve(n * 4);
    for (std::size_t i = 0; i < n; ++i) pack_append(key, ids[i]);
    return key;
}

WordId unpack_at(const std::string& key, std::size_t i) {
    WordId id;
    std::memcpy(&id, key.data() + i * 4, 4);
    return id;
}

struct Discounts {
    double d1 = 0.75, d2 = 0.75, d3 = 0.75;
    double of(std::uint64_t count) const {
        if (count == 0) return 0.0;
        if (count == 1) return d1;
        if (count == 2) return d2;
        return d3;
    }
};

Discounts estimate_discounts(const std::unordered_map<std::string, std::uint64_t>& grams,
                             int order_k) {
    std::uint64_t n[5] = {0, 0, 0, 0, 0};
    for (const auto& [key, count] : grams) {
        (void)key;
        if (count >= 1 && count <= 4) ++n[count];
    }
    Discounts d;
    if (n[1] == 0 || n[2] == 0 || n[3] == 0 || n[4] == 0) {
        warn("order " + std::to_string(order_k) +
             ": degenerate count-of-counts, falling back to flat 0.75 discount");
        return d;
    }
    double y = static_cast<double>(n[1]) / (n[1] + 2.0 * n[2]);
    double d1 = 1.0 - 2.0 * y * n[2] / n[1];
    double d2 = 2.0 - 3.0 * y * n[3] / n[2];
    double d3 = 3.0 - 4.0 * y * n[4] / n[3];
    if (!(d1 > 0.0 && d1 <= 1.0) || !(d2 > 0.0 && d2 <= 2.0) ||
        !(d3 > 0.0 && d3 <= 3.0)) {
        warn("order " + std::to_string(order_k) +
             ": discount estimate out of range, falling back to flat 0.75");
        return d;
    }
    d.d1 = d1;
    d.d2 = d2;
    d.d3 = d3;
    return d;
}

struct HistStats {
    std::uint64_t denom = 0;  // sum of adjusted counts over continuations
    std::uint64_t n1 = 0, n2 = 0, n3p = 0;
    double gamma = 0.0;
};

}  // namespace

WordId NGramModel::id_of(const std::string& token) const {
    auto it = word_ids_.find(token);
    return it == word_ids_.end() ? kUnk : it->second;
}

double NGramModel::log_prob_ids(const std::vector<WordId>& context,
                                WordId word) const {
    std::size_t m = std::min(context.size(),
                             static_cast<std::size_t>(order_ - 1));
    const WordId* ctx = context.data() + (context.size() - m);
    double bow_acc = 0.0;
    for (std::size_t len = m;; --len) {
        std::string gram = pack(ctx + (m - len), len);
        pack_append(gram, word);
        auto it = tables_[len].find(gram);
        if (it != tables_[len].end()) return bow_acc + it->second.logp;
        if (len == 0) break;
        gram.resize(gram.size() - 4);  // the history of the missing gram
        auto hit = tables_[len - 1].find(gram);
        if (hit != tables_[len - 1].end() && hit->second.has_bow)
            bow_acc += hit->second.logbow;
    }
    // not an event: one phantom (unknown) slot
    std::string unk_key;
    pack_append(unk_key, kUnk);
    auto it = tables_[0].find(unk_key);
    return bow_acc + (it != tables_[0].end() ? it->second.logp : kSentinelLogp);
}

double NGramModel::log_prob(const std::vector<std::string>& context,
                            const std::string& token) const {
    std::vector<WordId> ctx;
    ctx.reserve(context.size());
    for (const auto& t : context)
        ctx.push_back(t == "<s>" ? kBos : id_of(t));
    return log_prob_ids(ctx, token == "</s>" ? kEos : id_of(token));
}

double NGramModel::sentence_log_prob(
    const std::vector<std::string>& sentence) const {
    std::vector<WordId> ctx(static_cast<std::size_t>(order_ - 1), kBos);
    double lp = 0.0;
    for (const auto& tok : sentence) {
        WordId id = id_of(tok);
        lp += log_prob_ids(ctx, id);
        if (order_ > 1) {
            ctx.erase(ctx.begin());
            ctx.push_back(id);
        }
    }
    lp += log_prob_ids(ctx, kEos);
    return lp;
}

double NGramModel::sentence_cross_entropy(
    const std::vector<std::string>& sentence) const {
    return -sentence_log_prob(sentence) /
           static_cast<double>(sentence.size() + 1);
}

double NGramModel::log_prob_oov(const std::vector<std::string>& context) const {
    std::vector<WordId> ctx;
    ctx.reserve(context.size());
    for (const auto& t : context)
        ctx.push_back(t == "<s>" ? kBos : id_of(t));
    return log_prob_ids(ctx, kUnk);
}

double NGramModel::normalization_sum(
    const std::vector<std::string>& context) const {
    if (!is_trained())
        throw std::logic_error("normalization_sum requires a trained model");
    std::vector<WordId> ctx;
    for (const auto& t : context)
        ctx.push_back(t == "<s>" ? kBos : id_of(t));
    double sum = 0.0;
    for (const auto& w : vocab_) sum += std::exp(log_prob_ids(ctx, id_of(w)));
    sum += std::exp(log_prob_ids(ctx, kEos));
    sum += static_cast<double>(phantom_slots_) *
           std::exp(log_prob_ids(ctx, kUnk));
    return sum;
}

NGramModel train_kn(const TokenizedCorpus& corpus, int order,
                    std::uint64_t padded_vocab_size) {
    if (corpus.empty())
        throw std::invalid_argument("train_kn: empty corpus");
    if (order < 1)
        throw std::invalid_argument("train_kn: order must be >= 1");

    NGramModel model;
    model.order_ = order;
    model.id_words_ = {"<s>", "</s>", "<unk>"};
    model.word_ids_.reserve(corpus.type_count * 2 + 16);
    for (const auto& sentence : corpus.sentences) {
        for (const auto& tok : sentence) {
            if (model.word_ids_.emplace(tok, static_cast<WordId>(model.id_words_.size()))
                    .second)
                model.id_words_.push_back(tok);
        }
    }
    for (std::size_t i = 3; i < model.id_words_.size(); ++i)
        model.vocab_.insert(model.id_words_[i]);

    const std::uint64_t types = model.vocab_.size();
    std::uint64_t padded = padded_vocab_size;
    if (padded < types + 2) {
        warn("padded vocabulary " + std::to_string(padded_vocab_size) +
             " below observed " + std::to_string(types) +
             " types + markers; clamping to " + std::to_string(types + 2));
        padded = types + 2;
    }
    model.padded_size_ = padded;
    model.phantom_slots_ = padded - types - 1;

    const std::size_t n = static_cast<std::size_t>(order);

    // Raw counts: all windows at the top order, begin-marker-headed windows
    // below it (everything else is replaced by continuation counts).
    std::vector<std::unordered_map<std::string, std::uint64_t>> raw(n);
    std::vector<WordId> ids;
    for (const auto& sentence : corpus.sentences) {
        ids.assign(n - 1, NGramModel::kBos);
        for (const auto& tok : sentence) ids.push_back(model.word_ids_[tok]);
        ids.push_back(NGramModel::kEos);
        for (std::size_t p = n - 1; p < ids.size(); ++p) {
            std::string window = pack(ids.data() + (p + 1 - n), n);
            ++raw[n - 1][window];
            for (std::size_t k = n - 1; k >= 1; --k) {
                if (p + 3 > n + k)  // k-gram at p starts after the <s> run
                    break;
                ++raw[k - 1][window.substr((n - k) * 4)];
            }
        }
    }

    // Adjusted counts per order.
    std::vector<std::unordered_map<std::string, std::uint64_t>> adj(n);
    adj[n - 1] = std::move(raw[n - 1]);
    for (std::size_t k = n - 1; k >= 1; --k) {
        auto& lower = adj[k - 1];
        for (const auto& [key, count] : adj[k]) {
            (void)count;
            if (unpack_at(key, 1) == NGramModel::kBos) continue;
            ++lower[key.substr(4)];
        }
        for (const auto& [key, count] : raw[k - 1]) lower[key] = count;
    }

    std::vector<Discounts> discounts(n);
    for (std::size_t k = 0; k < n; ++k)
        discounts[k] = estimate_discounts(adj[k], static_cast<int>(k) + 1);

    // Per-history denominators, continuation-type counts, backoff mass.
    std::vector<std::unordered_map<std::string, HistStats>> hists(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (const auto& [key, count] : adj[k]) {
            HistStats& h = hists[k][key.substr(0, key.size() - 4)];
            h.denom += count;
            if (count == 1)
                ++h.n1;
            else if (count == 2)
                ++h.n2;
            else
                ++h.n3p;
        }
        for (auto& [key, h] : hists[k]) {
            (void)key;
            h.gamma = (discounts[k].d1 * h.n1 + discounts[k].d2 * h.n2 +
                       discounts[k].d3 * h.n3p) /
                      static_cast<double>(h.denom);
        }
    }

    model.tables_.resize(n);
    const HistStats& root = hists[0].at(std::string());
    const double base_slot = 1.0 / static_cast<double>(padded);

    for (std::size_t k = 0; k < n; ++k) {
        auto& table = model.tables_[k];
        table.reserve(adj[k].size() * 2 + 4);
        for (const auto& [key, count] : adj[k]) {
            const std::string hist = key.substr(0, key.size() - 4);
            const HistStats& h = hists[k].at(hist);
            double disc =
                (static_cast<double>(count) - discounts[k].of(count)) /
                static_cast<double>(h.denom);
            double lower;
            if (k == 0) {
                lower = base_slot;
            } else {
                std::vector<WordId> ctx;
                for (std::size_t i = 1; i * 4 < key.size() - 4; ++i)
                    ctx.push_back(unpack_at(key, i));
                lower = std::exp(model.log_prob_ids(
                    ctx, unpack_at(key, key.size() / 4 - 1)));
            }
            table[key].logp = std::log(disc + h.gamma * lower);
        }
        if (k == 0) {
            std::string unk_key;
            pack_append(unk_key, NGramModel::kUnk);
            table[unk_key].logp = std::log(root.gamma * base_slot);
        }
        // attach backoff weights for the next order's histories
        if (k + 1 < n) {
            for (const auto& [hist, h] : hists[k + 1]) {
                auto [it, inserted] = table.try_emplace(hist);
                if (inserted) it->second.logp = kSentinelLogp;
                it->second.logbow = std::log(h.gamma);
                it->second.has_bow = true;
            }
        }
    }
    return model;
}

double corpus_perplexity(const NGramModel& model,
                         const TokenizedCorpus& corpus) {
    if (corpus.empty())
        throw std::invalid_argument("corpus_perplexity: empty corpus");
    double lp = 0.0;
    std::uint64_t positions = 0;
    for (const auto& sentence : corpus.sentences) {
        lp += model.sentence_log_prob(sentence);
        positions += sentence.size() + 1;
    }
    return std::exp(-lp / static_cast<double>(positions));
}

std::uint64_t oov_tokens(const std::unordered_set<std::string>& model_vocab,
                         const TokenizedCorpus& corpus) {
    std::uint64_t count = 0;
    for (const auto& sentence : corpus.sentences)
        for (const auto& tok : sentence)
            if (!model_vocab.count(tok)) ++count;
    return count;
}

// ---------------------------------------------------------------------------
// ARPA import/export

std::string NGramModel::to_arpa() const {
    for (const char* reserved : {"<s>", "</s>", "<unk>"})
        if (vocab_.count(reserved))
            throw std::runtime_error(
                std::string("to_arpa: corpus vocabulary contains reserved "
                            "token ") +
                reserved);

    std::ostringstream out;
    out << "\\data\\\n";
    for (std::size_t k = 0; k < tables_.size(); ++k)
        out << "ngram " << (k + 1) << "=" << tables_[k].size() << "\n";
    char buf[64];
    for (std::size_t k = 0; k < tables_.size(); ++k) {
        out << "\n\\" << (k + 1) << "-grams:\n";
        std::vector<std::pair<std::string, const Entry*>> rows;
        rows.reserve(tables_[k].size());
        for (const auto& [key, entry] : tables_[k]) {
            std::string words;
            for (std::size_t i = 0; i * 4 < key.size(); ++i) {
                if (i) words.push_back(' ');
                words += id_words_[unpack_at(key, i)];
            }
            rows.emplace_back(std::move(words), &entry);
        }
        std::sort(rows.begin(), rows.end());
        for (const auto& [words, entry] : rows) {
            if (entry->logp == kSentinelLogp) {
                out << "-99";
            } else {
                std::snprintf(buf, sizeof buf, "%.12g", entry->logp / kLn10);
                out << buf;
            }
            out << "\t" << words;
            if (entry->has_bow) {
                std::snprintf(buf, sizeof buf, "%.12g", entry->logbow / kLn10);
                out << "\t" << buf;
            }
            out << "\n";
        }
    }
    out << "\n\\end\\\n";
    return out.str();
}

NGramModel NGramModel::from_arpa(const std::string& text) {
    NGramModel model;
    model.id_words_ = {"<s>", "</s>", "<unk>"};
    model.word_ids_ = {{"<s>", kBos}, {"</s>", kEos}, {"<unk>", kUnk}};

    auto intern = [&model](const std::string& w) -> WordId {
        auto [it, inserted] =
            model.word_ids_.emplace(w, static_cast<WordId>(model.id_words_.size()));
        if (inserted) {
            model.id_words_.push_back(w);
            model.vocab_.insert(w);
        }
        return it->second;
    };

    std::istringstream in(text);
    std::string line;
    int current_order = 0;
    bool in_data = false;
    std::vector<std::size_t> declared;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line == "\\data\\") {
            in_data = true;
            continue;
        }
        if (line == "\\end\\") break;
        if (line.size() > 2 && line[0] == '\\' &&
            line.find("-grams:") != std::string::npos) {
            current_order = std::stoi(line.substr(1));
            if (static_cast<std::size_t>(current_order) > model.tables_.size())
                model.tables_.resize(current_order);
            continue;
        }
        if (in_data && line.rfind("ngram ", 0) == 0) {
            declared.push_back(1);  // counts are informational only
            continue;
        }
        if (current_order == 0) continue;
        auto fields = split_on(line, '\t');
        if (fields.size() < 2)
            throw std::runtime_error("from_arpa: malformed line: " + line);
        double log10p = std::stod(fields[0]);
        auto words = split_on(fields[1], ' ');
        if (static_cast<int>(words.size()) != current_order)
            throw std::runtime_error("from_arpa: gram arity mismatch: " + line);
        std::string key;
        for (const auto& w : words) pack_append(key, intern(w));
        Entry& e = model.tables_[current_order - 1][key];
        e.logp = (log10p == -99.0) ? kSentinelLogp : log10p * kLn10;
        if (fields.size() >= 3) {
            e.logbow = std::stod(fields[2]) * kLn10;
            e.has_bow = true;
        }
    }
    if (model.tables_.empty())
        throw std::runtime_error("from_arpa: no n-gram sections found");
    model.order_ = static_cast<int>(model.tables_.size());
    std::string unk_key;
    pack_append(unk_key, kUnk);
    if (!model.tables_[0].count(unk_key)) {
        warn("from_arpa: model lacks <unk>; OOV tokens get the placeholder "
             "probability");
        model.tables_[0][unk_key].logp = kSentinelLogp;
    }
    model.phantom_slots_ = 0;  // scorer-only model
    model.padded_size_ = 0;
    return model;
}

NGramModel NGramModel::from_unigram_table(
    const std::vector<std::pair<std::string, double>>& logprobs,
    double unk_logp) {
    NGramModel model;
    model.order_ = 1;
    model.id_words_ = {"<s>", "</s>", "<unk>"};
    model.word_ids_ = {{"<s>", kBos}, {"</s>", kEos}, {"<unk>", kUnk}};
    model.tables_.resize(1);
    for (const auto& [word, lp] : logprobs) {
        WordId id;
        if (word == "</s>") {
            id = kEos;
        } else {
            auto [it, inserted] = model.word_ids_.emplace(
                word, static_cast<WordId>(model.id_words_.size()));
            if (inserted) {
                model.id_words_.push_back(word);
                model.vocab_.insert(word);
            }
            id = it->second;
        }
        std::string key;
        pack_append(key, id);
        model.tables_[0][key].logp = lp;
    }
    std::string unk_key;
    pack_append(unk_key, kUnk);
    model.tables_[0][unk_key].logp = unk_logp;
    model.phantom_slots_ = 1;
    model.padded_size_ = model.vocab_.size() + 2;
    return model;
}

}  // namespace dsel
