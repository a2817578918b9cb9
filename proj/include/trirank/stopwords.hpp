#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_set>

namespace trirank {

/// Bundled English stopword list (the classic Lucene analyzer set).
inline constexpr std::array<std::string_view, 33> kEnglishStopwords = {
    "a",    "an",   "and",   "are",  "as",    "at",   "be",   "but",  "by",
    "for",  "if",   "in",    "into", "is",    "it",   "no",   "not",  "of",
    "on",   "or",   "such",  "that", "the",   "their", "then", "there",
    "these", "they", "this", "to",   "was",   "will", "with"};

inline bool is_stopword(std::string_view term) {
    static const std::unordered_set<std::string_view> set(
        kEnglishStopwords.begin(), kEnglishStopwords.end());
    return set.count(term) > 0;
}

}  // namespace trirank
