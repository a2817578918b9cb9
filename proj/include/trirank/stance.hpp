#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trirank/common.hpp"
#include "trirank/corpus.hpp"
#include "trirank/porter.hpp"
#include "trirank/stopwords.hpp"
#include "trirank/text.hpp"

namespace trirank {

/// Stance distribution over labels 0 = disagree, 1 = agree, 2 = neutral.
struct StanceProbabilities {
    std::array<double, 3> p = {0.0, 0.0, 0.0};

    double disagree() const { return p[0]; }
    double agree() const { return p[1]; }
    double neutral() const { return p[2]; }

    bool valid(double tolerance = 1e-6) const {
        double sum = 0.0;
        for (double v : p) {
            if (!(v >= 0.0 && v <= 1.0)) return false;
            sum += v;
        }
        return std::abs(sum - 1.0) <= tolerance;
    }

    void renormalize() {
        double sum = p[0] + p[1] + p[2];
        if (sum > 0.0)
            for (double& v : p) v /= sum;
    }
};

struct TrimmedDocument {
    std::string doc_id;
    int topic_id = 0;
    std::string text;     // suffix of the document's sentences
    std::string trigger;  // matched keyword, or "none"
};

struct MisinfoScore {
    int topic_id = 0;
    std::string doc_id;
    double s = 0.0;  // in [-1, 1]
};

namespace stance_detail {

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    auto lower = [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    };
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < needle.size() && match; ++k)
            match = lower(haystack[i + k]) == lower(needle[k]);
        if (match) return true;
    }
    return false;
}

/// Lowercase word split that glues contractions together ("don't" -> "dont").
inline std::vector<std::string> cue_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (c == '\'') continue;
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(c);
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace stance_detail

/// Drop everything before the first sentence containing the topic keyword
/// (the title), case-insensitively. No match keeps the full text.
inline TrimmedDocument trim_to_claim(const ParsedDocument& parsed, const Topic& topic) {
    TrimmedDocument out;
    out.doc_id = parsed.doc_id;
    out.topic_id = topic.topic_id;
    std::size_t start = 0;
    out.trigger = "none";
    if (!topic.title.empty()) {
        for (std::size_t i = 0; i < parsed.sentences.size(); ++i) {
            if (stance_detail::contains_ci(parsed.sentences[i], topic.title)) {
                start = i;
                out.trigger = to_lower_ascii(topic.title);
                break;
            }
        }
    }
    if (out.trigger == "none") {
        out.text = parsed.text;
        return out;
    }
    for (std::size_t i = start; i < parsed.sentences.size(); ++i) {
        if (i > start) out.text.push_back(' ');
        out.text += parsed.sentences[i];
    }
    return out;
}

struct StanceLoadStats {
    std::size_t loaded = 0;
    std::size_t rejected = 0;    // non-normalized triples
    std::size_t duplicates = 0;  // last record wins
};

using StanceKey = std::pair<int, std::string>;
using StanceMap = std::map<StanceKey, StanceProbabilities>;

/// Stance interchange JSONL:
/// {"topic_id":int,"doc_id":str,"p_disagree":f,"p_agree":f,"p_neutral":f}.
/// Triples farther than 1e-3 from summing to one are rejected; accepted
/// triples are renormalized to machine precision.
inline StanceMap load_external_stance(const std::string& path, StanceLoadStats* stats_out = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open stance file: " + path);
    StanceMap map;
    StanceLoadStats stats;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("topic_id") || !j.contains("doc_id") ||
            !j.contains("p_disagree") || !j.contains("p_agree") || !j.contains("p_neutral")) {
            ++stats.rejected;
            continue;
        }
        StanceProbabilities probs;
        probs.p[0] = j["p_disagree"].get<double>();
        probs.p[1] = j["p_agree"].get<double>();
        probs.p[2] = j["p_neutral"].get<double>();
        if (!probs.valid(1e-3)) {
            ++stats.rejected;
            continue;
        }
        probs.renormalize();
        StanceKey key{j["topic_id"].get<int>(), j["doc_id"].get<std::string>()};
        if (map.count(key) > 0) ++stats.duplicates;
        map[key] = probs;
        ++stats.loaded;
    }
    if (stats_out) *stats_out = stats;
    return map;
}

/// Deterministic lexical stance baseline: counts agreement and disagreement
/// cues in the trimmed text and smooths the counts into a distribution
///   p_agree = (n_agree + 1) / (n_agree + n_disagree + 3)
/// (p_disagree analogous, p_neutral the remainder). Disagreement also counts
/// negation tokens within a three-token window of a claim content word.
class LexicalStanceScorer {
  public:
    LexicalStanceScorer()
        : LexicalStanceScorer(default_agree_cues(), default_disagree_cues()) {}

    LexicalStanceScorer(std::vector<std::string> agree_cues,
                        std::vector<std::string> disagree_cues) {
        for (std::string& cue : agree_cues) add_cue(agree_words_, agree_phrases_, cue);
        for (std::string& cue : disagree_cues) add_cue(disagree_words_, disagree_phrases_, cue);
    }

    static LexicalStanceScorer from_files(const std::string& agree_path,
                                          const std::string& disagree_path) {
        return LexicalStanceScorer(read_cue_file(agree_path), read_cue_file(disagree_path));
    }

    static std::vector<std::string> default_agree_cues() {
        return {"confirmed", "confirms", "shows", "shown", "proves", "proven",
                "helps", "effective", "beneficial", "supports", "supported",
                "demonstrates", "demonstrated", "cures", "works", "recommended"};
    }

    static std::vector<std::string> default_disagree_cues() {
        return {"myth", "false", "falsely", "debunked", "hoax", "misleading",
                "untrue", "discredited", "disproven", "disproved", "baseless",
                "no evidence", "not true", "lack of evidence", "without evidence"};
    }

    StanceProbabilities score(const TrimmedDocument& trimmed, const Topic& topic) const {
        std::vector<std::string> tokens = stance_detail::cue_tokens(trimmed.text);
        std::size_t n_agree = count_cues(tokens, agree_words_, agree_phrases_);
        std::size_t n_disagree = count_cues(tokens, disagree_words_, disagree_phrases_);
        n_disagree += count_negated_claim_words(tokens, topic);

        double denom = static_cast<double>(n_agree + n_disagree + 3);
        StanceProbabilities probs;
        probs.p[1] = static_cast<double>(n_agree + 1) / denom;
        probs.p[0] = static_cast<double>(n_disagree + 1) / denom;
        probs.p[2] = 1.0 - probs.p[0] - probs.p[1];
        return probs;
    }

  private:
    static std::vector<std::string> read_cue_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw error("cannot open cue list: " + path);
        std::vector<std::string> cues;
        std::string line;
        while (std::getline(in, line)) {
            std::string cue = trim(line);
            if (!cue.empty() && cue[0] != '#') cues.push_back(std::move(cue));
        }
        return cues;
    }

    static void add_cue(std::set<std::string>& words,
                        std::vector<std::vector<std::string>>& phrases, const std::string& cue) {
        std::vector<std::string> tokens = stance_detail::cue_tokens(cue);
        if (tokens.empty()) return;
        if (tokens.size() == 1)
            words.insert(tokens[0]);
        else
            phrases.push_back(std::move(tokens));
    }

    static std::size_t count_cues(const std::vector<std::string>& tokens,
                                  const std::set<std::string>& words,
                                  const std::vector<std::vector<std::string>>& phrases) {
        std::size_t count = 0;
        for (const std::string& t : tokens)
            if (words.count(t) > 0) ++count;
        for (const auto& phrase : phrases) {
            if (phrase.size() > tokens.size()) continue;
            for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < phrase.size() && match; ++k)
                    match = tokens[i + k] == phrase[k];
                if (match) ++count;
            }
        }
        return count;
    }

    std::size_t count_negated_claim_words(const std::vector<std::string>& tokens,
                                          const Topic& topic) const {
        static const std::set<std::string> kNegations = {
            "not", "no", "never", "cannot", "cant", "dont", "doesnt", "didnt",
            "wont", "isnt", "arent", "wasnt", "werent", "nor"};
        std::set<std::string> claim_stems;
        for (const std::string& w : stance_detail::cue_tokens(topic.claim)) {
            if (is_stopword(w)) continue;
            claim_stems.insert(porter_stem(w));
        }
        if (claim_stems.empty()) return 0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (kNegations.count(tokens[i]) == 0) continue;
            std::size_t lo = i >= 3 ? i - 3 : 0;
            std::size_t hi = std::min(tokens.size(), i + 4);
            for (std::size_t k = lo; k < hi; ++k) {
                if (k == i) continue;
                if (claim_stems.count(porter_stem(tokens[k])) > 0) {
                    ++count;
                    break;
                }
            }
        }
        return count;
    }

    std::set<std::string> agree_words_, disagree_words_;
    std::vector<std::vector<std::string>> agree_phrases_, disagree_phrases_;
};

/// Subtractive misinformation score: the probability mass on the stance that
/// contradicts the topic's answer minus the mass that supports it. Documents
/// likely to disagree with the correct answer score high.
inline MisinfoScore misinformation_score(const StanceProbabilities& probs, int answer,
                                         int topic_id = 0, std::string doc_id = {}) {
    if (answer != 0 && answer != 1) throw error("answer must be 0 or 1");
    MisinfoScore out;
    out.topic_id = topic_id;
    out.doc_id = std::move(doc_id);
    out.s = probs.p[static_cast<std::size_t>(1 - answer)] - probs.p[static_cast<std::size_t>(answer)];
    return out;
}

}  // namespace trirank
