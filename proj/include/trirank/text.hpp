#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "trirank/porter.hpp"
#include "trirank/stopwords.hpp"

namespace trirank {

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline bool is_alnum_ascii(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Lowercase, split on non-alphanumerics, drop stopwords, Porter-stem.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (!is_stopword(current)) terms.push_back(porter_stem(std::move(current)));
        current.clear();
    };
    for (char c : text) {
        if (is_alnum_ascii(c)) {
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            current.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return terms;
}

}  // namespace trirank
