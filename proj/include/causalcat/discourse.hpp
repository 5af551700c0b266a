#pragma once

// Rule-based discourse analysis (RDA): sentences are cut into segments at
// discourse connectives, and a sentence survives only if some connective
// joins two segments that both describe an activity (contain a verb).
// B-RDA applies the same filter to long posts only.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "causalcat/error.hpp"
#include "causalcat/tagger.hpp"
#include "causalcat/text.hpp"

namespace causalcat {

inline constexpr std::size_t kMaxConnectiveTokens = 5;
inline constexpr std::size_t kBiasedRdaThreshold = 200;

/// Connective phrases, lowercased and whitespace-normalized. Lookups are
/// case-insensitive.
class ConnectiveLexicon {
public:
    ConnectiveLexicon() = default;

    template <class Range>
    static ConnectiveLexicon from_phrases(const Range& phrases) {
        ConnectiveLexicon lex;
        for (const auto& p : phrases) lex.add(p);
        return lex;
    }

    /// Returns false (and ignores the phrase) when it is blank.
    bool add(std::string_view phrase) {
        const auto tokens = text::word_tokens(text::ascii_lower(phrase));
        if (tokens.empty()) return false;
        if (tokens.size() > kMaxConnectiveTokens)
            throw InvalidConfig("connective phrase longer than " + std::to_string(kMaxConnectiveTokens) +
                                " tokens: '" + std::string(phrase) + "'");
        std::string key = join(tokens);
        entries_.insert(key);
        token_keys_.insert(std::move(key));
        max_tokens_ = std::max(max_tokens_, tokens.size());
        return true;
    }

    bool contains(std::string_view phrase) const {
        return token_keys_.count(join(text::word_tokens(text::ascii_lower(phrase)))) > 0;
    }

    /// Lookup by already-tokenized, lowercased phrase joined with spaces.
    bool contains_key(const std::string& key) const { return token_keys_.count(key) > 0; }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t max_tokens() const { return max_tokens_; }
    const std::set<std::string>& entries() const { return entries_; }

private:
    static std::string join(const std::vector<std::string>& tokens) {
        std::string out;
        for (const auto& t : tokens) {
            if (!out.empty()) out.push_back(' ');
            out += t;
        }
        return out;
    }

    std::set<std::string> entries_;
    std::unordered_set<std::string> token_keys_;
    std::size_t max_tokens_ = 0;
};

/// One connective phrase per line; blank lines and lines starting with `#`
/// are skipped.
inline ConnectiveLexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon: " + path);
    ConnectiveLexicon lex;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        lex.add(t);
    }
    if (lex.empty()) throw EmptyLexicon("lexicon has no entries: " + path);
    return lex;
}

// ---------------------------------------------------------------------------
// Sentences

inline const std::unordered_set<std::string>& abbreviation_guard() {
    static const std::unordered_set<std::string> guard = {"mr.", "mrs.", "dr.", "e.g.", "i.e.", "etc.", "vs."};
    return guard;
}

/// Splits on runs of `.`, `!` or `?` that are followed by whitespace or the
/// end of the text, except after a guarded abbreviation.
inline std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    auto is_term = [](char c) { return c == '.' || c == '!' || c == '?'; };
    while (i < s.size()) {
        if (!is_term(s[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < s.size() && is_term(s[end])) ++end;
        const bool at_boundary = end == s.size() || text::whitespace_at(s, end) > 0;
        if (at_boundary) {
            // The whitespace-delimited word that ends here.
            std::size_t w = i;
            while (w > start && text::whitespace_at(s, w - 1) == 0) --w;
            std::string word = text::ascii_lower(s.substr(w, end - w));
            const auto first = word.find_first_not_of("\"'([{");
            word = first == std::string::npos ? std::string() : word.substr(first);
            if (!abbreviation_guard().count(word)) {
                std::string sentence = text::trim(s.substr(start, end - start));
                if (!sentence.empty()) out.push_back(std::move(sentence));
                start = end;
            }
        }
        i = end;
    }
    std::string tail = text::trim(s.substr(start));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

// ---------------------------------------------------------------------------
// Segments

struct Segment {
    std::vector<TaggedToken> tokens;
    std::size_t source_sentence_index = 0;
    std::optional<std::string> boundary_connective;  // connective that opened this segment

    /// A leftover with no tokens, e.g. before a sentence-initial connective.
    bool empty() const { return tokens.empty(); }

    bool has_verb() const {
        return std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return t.tag == PosTag::Verb; });
    }
};

/// Longest-match, left-to-right scan for connectives over the token stream.
/// Each match closes the current segment; the connective becomes the
/// boundary of the next segment and belongs to neither.
inline std::vector<Segment> segment_tokens(const std::vector<TaggedToken>& tokens, const ConnectiveLexicon& lexicon,
                                           std::size_t sentence_index = 0) {
    std::vector<Segment> segments;
    Segment current;
    current.source_sentence_index = sentence_index;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t matched = 0;
        std::string matched_key;
        const std::size_t longest = std::min(lexicon.max_tokens(), tokens.size() - i);
        for (std::size_t len = longest; len >= 1; --len) {
            std::string key;
            for (std::size_t k = 0; k < len; ++k) {
                if (k) key.push_back(' ');
                key += text::ascii_lower(tokens[i + k].surface);
            }
            if (lexicon.contains_key(key)) {
                matched = len;
                matched_key = std::move(key);
                break;
            }
        }
        if (matched == 0) {
            current.tokens.push_back(tokens[i]);
            ++i;
            continue;
        }
        segments.push_back(std::move(current));
        current = Segment{};
        current.source_sentence_index = sentence_index;
        current.boundary_connective = std::move(matched_key);
        i += matched;
    }
    segments.push_back(std::move(current));
    return segments;
}

inline std::vector<Segment> segment_on_connectives(std::string_view sentence, const ConnectiveLexicon& lexicon,
                                                   std::size_t sentence_index = 0,
                                                   const TagFn& tagger = default_tagger()) {
    return segment_tokens(pos_tag(sentence, tagger), lexicon, sentence_index);
}

/// Both sides of a connective boundary carry an activity (a VERB token).
inline bool is_activity_link(const Segment& left, const Segment& right) {
    return left.has_verb() && right.has_verb();
}

/// A sentence qualifies when at least one connective boundary joins two
/// activity segments. A connective with nothing before it has no left
/// activity, so a sentence-initial connective alone never qualifies.
inline bool has_activity_link(const std::vector<Segment>& segments) {
    for (std::size_t j = 1; j < segments.size(); ++j)
        if (segments[j].boundary_connective && is_activity_link(segments[j - 1], segments[j])) return true;
    return false;
}

struct RdaResult {
    std::string text;
    std::size_t sentences = 0;
    std::size_t kept_sentences = 0;
};

inline RdaResult rda_detail(std::string_view text, const ConnectiveLexicon& lexicon,
                            const TagFn& tagger = default_tagger()) {
    RdaResult result;
    const auto sentences = split_sentences(text);
    result.sentences = sentences.size();
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (!has_activity_link(segment_on_connectives(sentences[i], lexicon, i, tagger))) continue;
        if (!result.text.empty()) result.text.push_back(' ');
        result.text += sentences[i];
        ++result.kept_sentences;
    }
    return result;
}

/// Keeps the activity-linked sentences, in order, joined by single spaces.
/// The result is empty when no sentence qualifies.
inline std::string rda(std::string_view text, const ConnectiveLexicon& lexicon,
                       const TagFn& tagger = default_tagger()) {
    return rda_detail(text, lexicon, tagger).text;
}

/// RDA for posts longer than 200 words; shorter posts are returned unchanged.
inline std::string b_rda(std::string_view text, const ConnectiveLexicon& lexicon,
                         const TagFn& tagger = default_tagger()) {
    if (text::word_length(text) > kBiasedRdaThreshold) return rda(text, lexicon, tagger);
    return std::string(text);
}

enum class PreprocessMode { None, Rda, BRda };

inline std::string_view mode_name(PreprocessMode m) {
    switch (m) {
        case PreprocessMode::None: return "none";
        case PreprocessMode::Rda: return "rda";
        case PreprocessMode::BRda: return "b-rda";
    }
    return "none";
}

inline PreprocessMode parse_mode(std::string_view s) {
    const std::string m = text::ascii_lower(s);
    if (m == "none") return PreprocessMode::None;
    if (m == "rda") return PreprocessMode::Rda;
    if (m == "b-rda" || m == "brda" || m == "b_rda") return PreprocessMode::BRda;
    throw InvalidConfig("unknown preprocessing mode '" + std::string(s) + "' (expected none, rda or b-rda)");
}

/// Applies a preprocessing mode; `lexicon` may be null only for mode none.
inline RdaResult preprocess_text(std::string_view text, PreprocessMode mode, const ConnectiveLexicon* lexicon,
                                 const TagFn& tagger = default_tagger()) {
    if (mode == PreprocessMode::None) return {std::string(text), 0, 0};
    if (!lexicon) throw InvalidConfig("preprocessing mode '" + std::string(mode_name(mode)) + "' needs a lexicon");
    if (mode == PreprocessMode::BRda && text::word_length(text) <= kBiasedRdaThreshold) {
        const auto n = split_sentences(text).size();
        return {std::string(text), n, n};
    }
    return rda_detail(text, *lexicon, tagger);
}

}  // namespace causalcat
