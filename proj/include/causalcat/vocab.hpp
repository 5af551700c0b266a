#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "causalcat/corpus.hpp"
#include "causalcat/error.hpp"
#include "causalcat/text.hpp"

namespace causalcat {

/// Word vocabulary with fixed special ids. Unseen tokens map to UNK.
class Vocabulary {
public:
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kUnk = 1;
    static constexpr std::int32_t kCls = 2;

    Vocabulary() : tokens_{"[PAD]", "[UNK]", "[CLS]"} { reindex(); }

    explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
        if (tokens_.size() < 3 || tokens_[0] != "[PAD]" || tokens_[1] != "[UNK]" || tokens_[2] != "[CLS]")
            throw MalformedCheckpoint("vocabulary must start with [PAD], [UNK], [CLS]");
        reindex();
        if (index_.size() != tokens_.size()) throw MalformedCheckpoint("vocabulary contains duplicate tokens");
    }

    std::int32_t id(std::string_view token) const {
        auto it = index_.find(std::string(token));
        return it == index_.end() ? kUnk : it->second;
    }

    const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    void reindex() {
        index_.clear();
        for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::int32_t>(i));
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> index_;
};

/// Lowercased word/punctuation tokens of cleaned text.
inline std::vector<std::string> model_tokens(std::string_view raw) {
    auto tokens = text::word_tokens(text::clean_for_model(raw));
    for (auto& t : tokens) t = text::ascii_lower(t);
    return tokens;
}

/// Tokens with frequency >= min_freq after the specials, ordered by
/// (frequency desc, token asc).
inline Vocabulary build_vocab(const Corpus& corpus, int min_freq = 1) {
    if (min_freq < 1) throw InvalidConfig("min_freq must be >= 1");
    if (corpus.empty()) throw EmptyCorpus("cannot build a vocabulary from an empty corpus");
    std::map<std::string, std::size_t> freq;
    for (const auto& p : corpus.posts)
        for (auto& t : model_tokens(p.text)) ++freq[std::move(t)];
    std::vector<std::pair<std::string, std::size_t>> items;
    for (auto& [tok, n] : freq)
        if (n >= static_cast<std::size_t>(min_freq) && tok != "[PAD]" && tok != "[UNK]" && tok != "[CLS]")
            items.emplace_back(tok, n);
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]"};
    for (auto& [tok, n] : items) tokens.push_back(std::move(tok));
    return Vocabulary(std::move(tokens));
}

struct TokenSequence {
    std::vector<std::int32_t> ids;  // ids[0] is CLS; padded tail is PAD
    int length = 0;                 // positions before padding
};

/// [CLS] followed by token ids, truncated to `max_len`. With `pad` the
/// sequence is filled with PAD up to `max_len`.
inline TokenSequence tokenize(std::string_view text, const Vocabulary& vocab, int max_len, bool pad = true) {
    if (max_len < 2) throw InvalidConfig("max_len must be >= 2");
    TokenSequence seq;
    seq.ids.reserve(static_cast<std::size_t>(max_len));
    seq.ids.push_back(Vocabulary::kCls);
    for (const auto& t : model_tokens(text)) {
        if (seq.ids.size() >= static_cast<std::size_t>(max_len)) break;
        seq.ids.push_back(vocab.id(t));
    }
    seq.length = static_cast<int>(seq.ids.size());
    if (pad) seq.ids.resize(static_cast<std::size_t>(max_len), Vocabulary::kPad);
    return seq;
}

}  // namespace causalcat
