#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trirank/corpus.hpp"
#include "trirank/html.hpp"
#include "trirank/pagerank.hpp"
#include "trirank/url.hpp"

namespace trirank {

struct ContentFeatures {
    int css_definitions = 0;
    double text_readability = 0.0;
    bool degenerate_text = false;  // zero words or zero sentences
};

struct SocialFeatures {
    std::optional<long> pr_rank;
    std::optional<int> page_rank_integer;
    std::optional<double> page_rank_decimal;
    TldCategory toplevel_domain = TldCategory::other;
    bool url_invalid = false;
};

/// CSS definitions = rule blocks inside <style> elements (counted by their
/// opening braces) plus inline style="..." attributes.
inline int count_css_definitions(std::string_view html) {
    namespace hd = html_detail;
    int count = 0;
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            ++i;
            continue;
        }
        if (html.compare(i, 4, "<!--") == 0) {
            std::size_t end = html.find("-->", i + 4);
            i = end == std::string_view::npos ? html.size() : end + 3;
            continue;
        }
        hd::tag_info tag;
        if (!hd::scan_tag(html, i, tag)) {
            ++i;
            continue;
        }
        count += hd::count_attr(tag.attrs, "style");
        i = tag.end;
        if (!tag.closing && tag.name == "style") {
            std::size_t close = i;
            while (close < html.size()) {
                std::size_t cand = html.find('<', close);
                if (cand == std::string_view::npos) {
                    cand = html.size();
                    close = cand;
                    break;
                }
                bool match = true;
                static constexpr std::string_view kClose = "</style";
                for (std::size_t k = 0; k < kClose.size() && match; ++k)
                    if (cand + k >= html.size() || hd::lower(html[cand + k]) != kClose[k]) match = false;
                if (match) {
                    close = cand;
                    break;
                }
                close = cand + 1;
            }
            for (std::size_t p = i; p < close; ++p)
                if (html[p] == '{') ++count;
            i = close;
        }
    }
    return count;
}

/// Heuristic syllable count: runs of vowels (a e i o u y) count one each, a
/// final silent "e" is dropped unless the word ends in "le", minimum one.
inline int count_syllables(std::string_view word) {
    std::string letters;
    letters.reserve(word.size());
    for (char c : word) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c >= 'a' && c <= 'z') letters.push_back(c);
    }
    if (letters.empty()) return 0;
    auto is_vowel = [](char c) {
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    int groups = 0;
    bool in_group = false;
    for (char c : letters) {
        if (is_vowel(c)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    std::size_t n = letters.size();
    bool silent_e = n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) &&
                    !(n >= 2 && letters.compare(n - 2, 2, "le") == 0);
    if (silent_e && groups > 1) --groups;
    return groups < 1 ? 1 : groups;
}

struct TextCounts {
    std::size_t words = 0;
    std::size_t sentences = 0;
    std::size_t syllables = 0;
};

inline TextCounts count_text(const ParsedDocument& parsed) {
    TextCounts counts;
    counts.sentences = parsed.sentences.size();
    for (const std::string& word : split(parsed.text, ' ')) {
        if (word.empty()) continue;
        int syl = count_syllables(word);
        if (syl == 0) continue;  // no letters: not a word
        ++counts.words;
        counts.syllables += static_cast<std::size_t>(syl);
    }
    return counts;
}

/// Flesch-Kincaid grade level.
inline double fk_grade(double words, double sentences, double syllables) {
    return 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59;
}

inline ContentFeatures extract_content_features(const RawDocument& doc,
                                                const ParsedDocument& parsed) {
    ContentFeatures feats;
    feats.css_definitions = count_css_definitions(doc.html);
    TextCounts counts = count_text(parsed);
    if (counts.words == 0 || counts.sentences == 0) {
        feats.text_readability = 0.0;
        feats.degenerate_text = true;
    } else {
        feats.text_readability = fk_grade(static_cast<double>(counts.words),
                                          static_cast<double>(counts.sentences),
                                          static_cast<double>(counts.syllables));
    }
    return feats;
}

inline SocialFeatures extract_social_features(const RawDocument& doc,
                                              const PageRankCache& cache) {
    SocialFeatures feats;
    ParsedUrl url = parse_url(doc.url);
    if (!url.valid) {
        feats.url_invalid = true;
        return feats;
    }
    feats.toplevel_domain = tld_category(url.host);
    if (const PageRankRecord* rec = cache.find(registrable_domain(url.host))) {
        feats.pr_rank = rec->pr_rank;
        feats.page_rank_integer = rec->page_rank_integer;
        feats.page_rank_decimal = rec->page_rank_decimal;
        if (!feats.page_rank_integer && feats.page_rank_decimal)
            feats.page_rank_integer = round_half_up(*feats.page_rank_decimal);
    }
    return feats;
}

inline constexpr std::size_t kFeatureCount = 11;
inline constexpr double kUnknownSentinel = -1.0;

inline const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "css_definitions", "text_readability", "pr_rank", "page_rank_integer",
        "page_rank_decimal", "tld_gov", "tld_edu", "tld_org", "tld_com",
        "tld_net", "tld_other"};
    return names;
}

/// Fixed 11-dimensional feature vector; unknown PageRank fields use the -1
/// sentinel and the TLD category is one-hot over {gov,edu,org,com,net,other}.
inline std::array<double, kFeatureCount> make_feature_vector(const ContentFeatures& content,
                                                             const SocialFeatures& social) {
    std::array<double, kFeatureCount> x{};
    x[0] = static_cast<double>(content.css_definitions);
    x[1] = content.text_readability;
    x[2] = social.pr_rank ? static_cast<double>(*social.pr_rank) : kUnknownSentinel;
    x[3] = social.page_rank_integer ? static_cast<double>(*social.page_rank_integer) : kUnknownSentinel;
    x[4] = social.page_rank_decimal ? *social.page_rank_decimal : kUnknownSentinel;
    x[5 + static_cast<std::size_t>(social.toplevel_domain)] = 1.0;
    return x;
}

}  // namespace trirank
