#pragma once

// Built-in part-of-speech tagger: closed-class word lists, a list of common
// verb stems and nouns, and suffix rules. Only coarse tags are produced.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "causalcat/text.hpp"

namespace causalcat {

enum class PosTag { Verb, Noun, Pron, Adj, Adv, Other };

inline std::string_view tag_name(PosTag t) {
    switch (t) {
        case PosTag::Verb: return "VERB";
        case PosTag::Noun: return "NOUN";
        case PosTag::Pron: return "PRON";
        case PosTag::Adj: return "ADJ";
        case PosTag::Adv: return "ADV";
        case PosTag::Other: return "OTHER";
    }
    return "OTHER";
}

struct TaggedToken {
    std::string surface;
    PosTag tag = PosTag::Other;
};

/// A tagging backend maps a token sequence to one tag per token.
using TagFn = std::function<std::vector<PosTag>(std::span<const std::string>)>;

namespace detail {

// clang-format off
inline constexpr std::array kPronouns = {
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "yourselves", "he", "him", "his",
    "himself", "she", "her", "hers", "herself", "it", "its", "itself", "we", "us", "our", "ours", "ourselves",
    "they", "them", "their", "theirs", "themselves", "someone", "somebody", "anyone", "anybody", "everyone",
    "everybody", "nobody", "noone", "something", "anything", "everything", "nothing", "who", "whom", "whose",
    "u", "ur", "ya", "y'all", "one", "oneself",
};

inline constexpr std::array kFunctionWords = {
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "every", "each", "no", "all", "both",
    "either", "neither", "much", "many", "few", "several", "such", "other", "another", "what", "which",
    "of", "in", "on", "at", "to", "for", "from", "with", "without", "by", "about", "into", "onto", "over",
    "under", "between", "among", "through", "during", "before", "after", "above", "below", "up", "down",
    "out", "off", "around", "against", "along", "across", "behind", "beyond", "near", "within", "upon",
    "toward", "towards", "per", "via", "since", "until", "till", "than", "as", "and", "or", "but", "nor",
    "if", "because", "so", "though", "although", "while", "whereas", "unless", "whether", "when", "where",
    "why", "how", "then", "not", "n't", "yet", "also", "cuz", "cause", "bc", "like",
};

// Inflected, irregular and auxiliary forms tagged VERB as-is.
inline constexpr std::array kVerbForms = {
    "am", "is", "are", "was", "were", "be", "been", "being", "'m", "'s", "'re", "'ve", "'ll", "'d",
    "have", "has", "had", "having", "do", "does", "did", "done", "doing",
    "can", "could", "will", "would", "shall", "should", "may", "might", "must", "wo", "ca",
    "don't", "doesn't", "didn't", "can't", "cannot", "won't", "wouldn't", "couldn't", "shouldn't", "isn't",
    "aren't", "wasn't", "weren't", "haven't", "hasn't", "hadn't", "ain't", "dont", "doesnt", "didnt", "cant",
    "wont", "wouldnt", "couldnt", "shouldnt", "isnt", "arent", "wasnt", "werent", "havent", "hasnt",
    "i'm", "im", "i've", "ive", "i'll", "i'd", "you're", "youre", "you've", "he's", "she's", "it's", "we're",
    "we've", "they're", "they've", "that's", "there's", "what's", "gonna", "wanna", "gotta",
    "went", "gone", "got", "gotten", "made", "said", "saw", "seen", "took", "taken", "came", "knew", "known",
    "thought", "felt", "left", "lost", "kept", "told", "found", "gave", "given", "began", "begun", "became",
    "brought", "bought", "caught", "taught", "fought", "sought", "ran", "sat", "stood", "understood", "wrote",
    "written", "spoke", "spoken", "broke", "broken", "chose", "chosen", "fell", "fallen", "forgot",
    "forgotten", "forgave", "forgiven", "hid", "hidden", "held", "hurt", "meant", "met", "paid", "put",
    "quit", "read", "sent", "slept", "spent", "stole", "stolen", "threw", "thrown", "woke", "woken", "wore",
    "worn", "won", "ate", "eaten", "drank", "drunk", "drove", "driven", "flew", "flown", "grew", "grown",
    "heard", "led", "lay", "lain", "lied", "shot", "shut", "sang", "sung", "swore", "sworn", "tore", "torn",
    "cried", "tried", "died", "dying", "lying", "let",
};

// Base forms; -s, -ed and -ing of these are also VERB.
inline constexpr std::array kVerbStems = {
    "go", "get", "make", "say", "see", "take", "come", "know", "think", "feel", "leave", "lose", "keep",
    "tell", "find", "give", "begin", "become", "bring", "buy", "catch", "teach", "fight", "seek", "run",
    "sit", "stand", "understand", "write", "speak", "break", "choose", "fall", "forget", "forgive", "hide",
    "hold", "mean", "meet", "pay", "send", "sleep", "spend", "steal", "throw", "wake", "wear", "win", "eat",
    "drink", "drive", "fly", "grow", "hear", "lead", "lie", "shoot", "sing", "swear", "tear",
    "want", "need", "try", "cry", "die", "fail", "hate", "love", "like", "live", "work", "help", "start",
    "stop", "quit", "move", "talk", "call", "ask", "look", "seem", "turn", "play", "use", "learn", "change",
    "happen", "care", "believe", "hope", "wish", "wait", "worry", "miss", "kill", "end", "hurt", "cut",
    "apply", "show", "study", "pass", "fire", "hire", "earn", "lose", "abuse", "bully", "hit", "yell",
    "scream", "insult", "mock", "judge", "blame", "ignore", "leave", "cheat", "lie", "fight", "argue",
    "divorce", "marry", "date", "break", "respond", "reply", "text", "trust", "betray", "abandon", "reject",
    "isolate", "struggle", "suffer", "survive", "recover", "heal", "take", "prescribe", "overdose", "relapse",
    "drink", "smoke", "sleep", "wake", "rest", "stay", "return", "remember", "forget", "realize", "notice",
    "decide", "plan", "manage", "handle", "deal", "cope", "face", "accept", "deserve", "matter", "improve",
    "prove", "fix", "save", "open", "close", "watch", "read", "listen", "walk", "push", "pull", "carry",
    "send", "share", "post", "read", "enjoy", "laugh", "smile", "scare", "fear", "panic", "attack", "harm",
    "cause", "force", "let", "allow", "expect", "promise", "owe", "belong", "exist", "continue", "keep",
    "graduate", "drop", "flunk", "attend", "finish", "complete", "lack", "afford", "own", "rent", "sell",
    "spend", "waste", "feed", "raise", "visit", "call", "join", "invite", "include", "exclude", "treat",
    "tolerate", "stand", "bother", "annoy", "embarrass", "shame", "humiliate", "reach", "touch", "kiss", "hug",
    "relate", "connect", "bore", "tire", "pretend", "fake", "hate", "wonder", "question",
};

inline constexpr std::array kNouns = {
    "job", "jobs", "career", "work", "school", "college", "university", "class", "grade", "exam", "test",
    "boss", "coworker", "employer", "money", "rent", "debt", "bill", "family", "friend", "mom", "mother",
    "dad", "father", "parent", "brother", "sister", "son", "daughter", "child", "kid", "wife", "husband",
    "girlfriend", "boyfriend", "partner", "ex", "relationship", "marriage", "life", "time", "day", "year",
    "week", "month", "night", "morning", "home", "house", "room", "bed", "car", "phone", "text", "call",
    "doctor", "therapist", "therapy", "hospital", "medication", "meds", "pill", "drug", "dose", "pain",
    "illness", "disease", "depression", "anxiety", "suicide", "scar", "body", "head", "heart", "mind",
    "people", "person", "man", "woman", "girl", "boy", "guy", "world", "society", "rain", "sky", "sun",
    "cold", "weather", "literature", "book", "issue", "problem", "thing", "stuff", "way", "reason", "effort",
    "step", "skill", "place", "group", "team", "party", "pub", "abuse", "bully", "trauma", "accident",
    "weight", "food", "sleep", "dream", "hope", "fear", "love", "hate", "feeling", "emotion", "thought",
};

inline constexpr std::array kAdjectives = {
    "good", "bad", "sad", "happy", "alone", "lonely", "empty", "tired", "bored", "boring", "lazy", "ugly",
    "fat", "unattractive", "worthless", "useless", "hopeless", "depressed", "anxious", "afraid", "scared",
    "angry", "mad", "upset", "hard", "easy", "big", "small", "new", "old", "young", "little", "long", "short",
    "great", "fine", "okay", "ok", "real", "whole", "same", "different", "blue", "red", "dark", "cold",
    "hot", "sick", "ill", "dead", "alive", "able", "unable", "sure", "close", "closest", "best", "worst",
    "better", "worse", "high", "low", "free", "broke", "stupid", "dumb", "weird", "normal", "true",
};

inline constexpr std::array kAdverbs = {
    "very", "really", "just", "too", "even", "still", "already", "always", "never", "ever", "often",
    "sometimes", "again", "now", "here", "there", "today", "tomorrow", "yesterday", "soon", "later", "ago",
    "anymore", "only", "almost", "quite", "rather", "maybe", "perhaps", "probably", "basically", "literally",
    "actually", "apparently", "away", "back", "together", "else", "enough", "all", "rn",
};
// clang-format on

class DefaultLexicon {
public:
    static const DefaultLexicon& instance() {
        static const DefaultLexicon lex;
        return lex;
    }

    const std::unordered_map<std::string, PosTag>& exact() const { return exact_; }
    bool is_verb_stem(const std::string& w) const { return verb_stems_.count(w) > 0; }
    bool is_noun(const std::string& w) const { return nouns_.count(w) > 0; }

private:
    DefaultLexicon() {
        // Later insertions never override earlier ones: closed classes win.
        for (const auto* w : kPronouns) exact_.emplace(w, PosTag::Pron);
        for (const auto* w : kFunctionWords) exact_.emplace(w, PosTag::Other);
        for (const auto* w : kVerbForms) exact_.emplace(w, PosTag::Verb);
        for (const auto* w : kVerbStems) {
            exact_.emplace(w, PosTag::Verb);
            verb_stems_.emplace(w, PosTag::Verb);
        }
        for (const auto* w : kNouns) {
            exact_.emplace(w, PosTag::Noun);
            nouns_.emplace(w, PosTag::Noun);
        }
        for (const auto* w : kAdjectives) exact_.emplace(w, PosTag::Adj);
        for (const auto* w : kAdverbs) exact_.emplace(w, PosTag::Adv);
    }

    std::unordered_map<std::string, PosTag> exact_;
    std::unordered_map<std::string, PosTag> verb_stems_;
    std::unordered_map<std::string, PosTag> nouns_;
};

inline bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

/// Candidate stems after removing an inflectional suffix: the bare
/// remainder, with a silent "e" restored, with a doubled final consonant
/// undone, and "i" -> "y".
inline std::vector<std::string> stem_candidates(std::string_view word, std::string_view suffix) {
    std::vector<std::string> out;
    if (!ends_with(word, suffix) || word.size() <= suffix.size() + 1) return out;
    std::string stem(word.substr(0, word.size() - suffix.size()));
    out.push_back(stem);
    out.push_back(stem + "e");
    const std::size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2]) out.push_back(stem.substr(0, n - 1));
    if (stem.back() == 'i') out.push_back(stem.substr(0, n - 1) + "y");
    return out;
}

inline PosTag tag_word(std::string_view surface) {
    if (text::is_punctuation(surface)) return PosTag::Other;
    std::string w = text::ascii_lower(surface);
    // Typographic apostrophe (U+2019) -> ASCII.
    for (std::size_t p = w.find("\xE2\x80\x99"); p != std::string::npos; p = w.find("\xE2\x80\x99"))
        w.replace(p, 3, "'");

    const auto& lex = DefaultLexicon::instance();
    if (auto it = lex.exact().find(w); it != lex.exact().end()) return it->second;

    for (const std::string_view suffix : {"ing", "ed", "ied", "es", "s"}) {
        for (const auto& stem : stem_candidates(w, suffix))
            if (lex.is_verb_stem(stem)) return PosTag::Verb;
    }
    for (const std::string_view suffix : {"es", "s"}) {
        for (const auto& stem : stem_candidates(w, suffix))
            if (lex.is_noun(stem)) return PosTag::Noun;
    }
    if (w.size() > 4 && ends_with(w, "ly")) return PosTag::Adv;
    for (const std::string_view suffix : {"ness", "tion", "sion", "ment", "ity"})
        if (w.size() > suffix.size() + 2 && ends_with(w, suffix)) return PosTag::Noun;
    for (const std::string_view suffix : {"ful", "ous", "less", "able", "ive"})
        if (w.size() > suffix.size() + 2 && ends_with(w, suffix)) return PosTag::Adj;
    return PosTag::Other;
}

}  // namespace detail

/// The default backend: context-free lookup plus suffix rules.
inline TagFn default_tagger() {
    return [](std::span<const std::string> tokens) {
        std::vector<PosTag> tags;
        tags.reserve(tokens.size());
        for (const auto& t : tokens) tags.push_back(detail::tag_word(t));
        return tags;
    };
}

/// One tagged token per word or punctuation token of `sentence`.
inline std::vector<TaggedToken> pos_tag(std::string_view sentence, const TagFn& tagger = default_tagger()) {
    auto tokens = text::word_tokens(sentence);
    const auto tags = tagger(std::span<const std::string>(tokens));
    std::vector<TaggedToken> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i)
        out.push_back({std::move(tokens[i]), i < tags.size() ? tags[i] : PosTag::Other});
    return out;
}

}  // namespace causalcat
