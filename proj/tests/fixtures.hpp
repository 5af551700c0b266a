#pragma once

// Synthetic corpora shared by tests and the acceptance binary.

#include <array>
#include <string>
#include <vector>

#include "causalcat/corpus.hpp"
#include "causalcat/random.hpp"

namespace causalcat::fixtures {

inline constexpr std::array<const char*, 5> kClassKeywords = {"zorblat", "quenfid", "mirtaph", "velquor", "snarbex"};

inline const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "the",   "day",  "was", "long", "and",    "quiet", "people", "walked", "past",  "a",
        "small", "shop", "on",  "the",  "corner", "rain",  "fell",   "softly", "every", "evening",
        "tea",   "cup",  "old", "blue", "window", "paper", "lamp",   "chair",  "table", "garden"};
    return words;
}

/// Posts whose category is marked by exactly one class keyword among
/// class-neutral filler; a perfect classifier exists by construction.
inline Corpus separable_corpus(std::size_t n, std::uint64_t seed, const std::string& id_prefix = "s") {
    Rng rng(seed);
    Corpus corpus;
    const auto& filler = filler_words();
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = static_cast<int>(i % kNumClasses);
        const std::size_t len = 8 + static_cast<std::size_t>(rng.below(12));
        const std::size_t at = static_cast<std::size_t>(rng.below(len));
        std::string text;
        for (std::size_t w = 0; w < len; ++w) {
            if (!text.empty()) text.push_back(' ');
            text += w == at ? kClassKeywords[static_cast<std::size_t>(cls)] : filler[rng.below(filler.size())];
        }
        text += ".";
        Post p;
        p.id = id_prefix + std::to_string(i);
        p.text = std::move(text);
        p.cause_detected = true;
        p.category = category_from_index(cls);
        corpus.posts.push_back(std::move(p));
    }
    return corpus;
}

inline const std::vector<std::string>& ablation_connectives() {
    static const std::vector<std::string> phrases = {"because", "but", "so"};
    return phrases;
}

/// Separable posts followed by one class-neutral sentence in which a
/// connective joins two verb phrases. RDA keeps only that sentence, so the
/// class keyword is always removed.
inline Corpus ablation_corpus(std::size_t n, std::uint64_t seed, const std::string& id_prefix = "a") {
    static const std::vector<std::string> linked = {
        "I cried because they left.", "We tried but it failed.", "She yelled so I quit.",
        "They laughed because he fell.", "I waited but nobody came.", "He lied so we argued."};
    Corpus corpus = separable_corpus(n, seed, id_prefix);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (auto& p : corpus.posts) p.text += " " + linked[rng.below(linked.size())];
    return corpus;
}

}  // namespace causalcat::fixtures
