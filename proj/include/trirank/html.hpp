#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace trirank {
namespace html_detail {

inline char lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline const std::unordered_set<std::string>& block_tags() {
    static const std::unordered_set<std::string> tags = {
        "address", "article", "aside", "blockquote", "body", "br", "caption",
        "dd", "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer",
        "form", "h1", "h2", "h3", "h4", "h5", "h6", "head", "header", "hr",
        "html", "li", "main", "nav", "noscript", "ol", "p", "pre", "section",
        "table", "tbody", "td", "tfoot", "th", "thead", "title", "tr", "ul"};
    return tags;
}

inline const std::unordered_map<std::string, std::string>& named_entities() {
    static const std::unordered_map<std::string, std::string> ents = {
        {"amp", "&"},      {"lt", "<"},       {"gt", ">"},
        {"quot", "\""},    {"apos", "'"},     {"nbsp", "\xc2\xa0"},
        {"copy", "\xc2\xa9"}, {"reg", "\xc2\xae"}, {"deg", "\xc2\xb0"},
        {"ndash", "\xe2\x80\x93"}, {"mdash", "\xe2\x80\x94"},
        {"lsquo", "\xe2\x80\x98"}, {"rsquo", "\xe2\x80\x99"},
        {"ldquo", "\xe2\x80\x9c"}, {"rdquo", "\xe2\x80\x9d"},
        {"hellip", "\xe2\x80\xa6"}, {"middot", "\xc2\xb7"}};
    return ents;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp <= 0x7f) {
        out.push_back(static_cast<char>(cp));
    } else if (cp <= 0x7ff) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp <= 0xffff) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp <= 0x10ffff) {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

/// Decode one character reference starting at `pos` (which points at '&').
/// Returns true and advances pos past the reference on success.
inline bool decode_entity(std::string_view s, std::size_t& pos, std::string& out) {
    std::size_t i = pos + 1;
    if (i >= s.size()) return false;
    if (s[i] == '#') {
        ++i;
        bool hex = i < s.size() && (s[i] == 'x' || s[i] == 'X');
        if (hex) ++i;
        std::uint32_t cp = 0;
        std::size_t digits = 0;
        while (i < s.size() && digits < 8) {
            char c = s[i];
            std::uint32_t d;
            if (c >= '0' && c <= '9') d = static_cast<std::uint32_t>(c - '0');
            else if (hex && c >= 'a' && c <= 'f') d = static_cast<std::uint32_t>(c - 'a' + 10);
            else if (hex && c >= 'A' && c <= 'F') d = static_cast<std::uint32_t>(c - 'A' + 10);
            else break;
            cp = cp * (hex ? 16u : 10u) + d;
            ++i;
            ++digits;
        }
        if (digits == 0 || i >= s.size() || s[i] != ';') return false;
        if (cp == 0 || (cp >= 0xd800 && cp <= 0xdfff) || cp > 0x10ffff)
            cp = 0xfffd;  // NUL and surrogates decode to the replacement char
        append_utf8(out, cp);
        pos = i + 1;
        return true;
    }
    std::size_t start = i;
    while (i < s.size() && i - start < 10 &&
           ((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= 'A' && s[i] <= 'Z')))
        ++i;
    if (i >= s.size() || s[i] != ';' || i == start) return false;
    auto it = named_entities().find(std::string(s.substr(start, i - start)));
    if (it == named_entities().end()) return false;
    out += it->second;
    pos = i + 1;
    return true;
}

struct tag_info {
    std::string name;       // lowercase
    std::string attrs;      // raw text between name and '>'
    std::size_t end = 0;    // position just past '>'
    bool closing = false;
};

/// Scan a tag starting at `pos` (pointing at '<'). Quoted attribute values
/// may contain '>'. Returns false if this is not a well-formed tag opener.
inline bool scan_tag(std::string_view s, std::size_t pos, tag_info& out) {
    std::size_t i = pos + 1;
    if (i >= s.size()) return false;
    out.closing = s[i] == '/';
    if (out.closing) ++i;
    if (i >= s.size() || !((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= 'A' && s[i] <= 'Z')))
        return false;
    out.name.clear();
    while (i < s.size() && ((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= 'A' && s[i] <= 'Z') ||
                            (s[i] >= '0' && s[i] <= '9') || s[i] == '-')) {
        out.name.push_back(lower(s[i]));
        ++i;
    }
    std::size_t attrs_start = i;
    char quote = 0;
    while (i < s.size()) {
        char c = s[i];
        if (quote != 0) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            out.attrs = std::string(s.substr(attrs_start, i - attrs_start));
            out.end = i + 1;
            return true;
        }
        ++i;
    }
    return false;  // unterminated tag; caller treats '<' as text
}

/// Count attributes named `attr` (case-insensitive) that carry a value.
/// Attribute values (quoted or bare) are consumed so their content is never
/// mistaken for an attribute name.
inline int count_attr(std::string_view attrs, std::string_view attr) {
    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    int n = 0;
    std::size_t i = 0;
    while (i < attrs.size()) {
        char c = attrs[i];
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
            std::size_t start = i;
            while (i < attrs.size() &&
                   ((attrs[i] >= 'a' && attrs[i] <= 'z') || (attrs[i] >= 'A' && attrs[i] <= 'Z') ||
                    (attrs[i] >= '0' && attrs[i] <= '9') || attrs[i] == '-' || attrs[i] == '_'))
                ++i;
            std::size_t len = i - start;
            bool match = len == attr.size();
            for (std::size_t k = 0; match && k < len; ++k)
                match = lower(attrs[start + k]) == lower(attr[k]);
            while (i < attrs.size() && is_ws(attrs[i])) ++i;
            if (i >= attrs.size() || attrs[i] != '=') continue;  // bare attribute
            if (match) ++n;
            ++i;  // consume '='
            while (i < attrs.size() && is_ws(attrs[i])) ++i;
            if (i < attrs.size() && (attrs[i] == '"' || attrs[i] == '\'')) {
                char quote = attrs[i++];
                while (i < attrs.size() && attrs[i] != quote) ++i;
                if (i < attrs.size()) ++i;
            } else {
                while (i < attrs.size() && !is_ws(attrs[i])) ++i;  // bare value
            }
            continue;
        }
        ++i;
    }
    return n;
}

inline bool is_space_byte(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

/// Collapse ASCII whitespace runs and U+00A0 to single spaces; trim ends.
inline std::string normalize_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    std::size_t i = 0;
    while (i < s.size()) {
        bool ws = false;
        if (is_space_byte(s[i])) {
            ws = true;
            ++i;
        } else if (static_cast<unsigned char>(s[i]) == 0xc2 && i + 1 < s.size() &&
                   static_cast<unsigned char>(s[i + 1]) == 0xa0) {
            ws = true;
            i += 2;
        } else {
            if (pending && !out.empty()) out.push_back(' ');
            pending = false;
            out.push_back(s[i]);
            ++i;
        }
        if (ws) pending = true;
    }
    return out;
}

/// Replace bytes that do not form valid UTF-8 with U+FFFD.
inline std::string utf8_lossy(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k)
            ok = (static_cast<unsigned char>(s[i + k]) >> 6) == 0x2;
        if (ok) {
            out.append(s.substr(i, len));
            i += len;
        } else {
            out += "\xef\xbf\xbd";
            ++i;
        }
    }
    return out;
}

}  // namespace html_detail

/// Visible text of an HTML document, one string per block-level segment.
/// Script, style and comment content is dropped; character references are
/// decoded; whitespace is collapsed.
inline std::vector<std::string> html_to_segments(std::string_view html_raw) {
    namespace hd = html_detail;
    std::string html = hd::utf8_lossy(html_raw);
    std::vector<std::string> segments;
    std::string current;
    auto flush = [&] {
        std::string norm = hd::normalize_ws(current);
        if (!norm.empty()) segments.push_back(std::move(norm));
        current.clear();
    };
    std::size_t i = 0;
    std::string_view s(html);
    while (i < s.size()) {
        char c = s[i];
        if (c == '<') {
            if (s.compare(i, 4, "<!--") == 0) {
                std::size_t end = s.find("-->", i + 4);
                i = end == std::string_view::npos ? s.size() : end + 3;
                continue;
            }
            if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
                std::size_t end = s.find('>', i);
                i = end == std::string_view::npos ? s.size() : end + 1;
                continue;
            }
            hd::tag_info tag;
            if (!hd::scan_tag(s, i, tag)) {
                current.push_back(c);
                ++i;
                continue;
            }
            i = tag.end;
            if (!tag.closing && (tag.name == "script" || tag.name == "style")) {
                // skip raw content until the matching close tag
                std::string close = "</" + tag.name;
                std::size_t pos = i;
                while (pos < s.size()) {
                    std::size_t cand = s.find('<', pos);
                    if (cand == std::string_view::npos) {
                        pos = s.size();
                        break;
                    }
                    bool match = true;
                    for (std::size_t k = 0; k < close.size() && match; ++k) {
                        if (cand + k >= s.size() || hd::lower(s[cand + k]) != close[k]) match = false;
                    }
                    if (match) {
                        std::size_t end = s.find('>', cand);
                        pos = end == std::string_view::npos ? s.size() : end + 1;
                        break;
                    }
                    pos = cand + 1;
                }
                i = pos;
                flush();
                continue;
            }
            if (hd::block_tags().count(tag.name) > 0) flush();
            continue;
        }
        if (c == '&') {
            if (hd::decode_entity(s, i, current)) continue;
            current.push_back(c);
            ++i;
            continue;
        }
        current.push_back(c);
        ++i;
    }
    flush();
    return segments;
}

/// Split block segments into sentences: a boundary occurs after terminal
/// punctuation followed by whitespace and a capital letter, and at every
/// block boundary.
inline std::vector<std::string> segments_to_sentences(const std::vector<std::string>& segments) {
    std::vector<std::string> sentences;
    for (const std::string& seg : segments) {
        std::size_t start = 0;
        std::size_t i = 0;
        while (i < seg.size()) {
            char c = seg[i];
            if (c == '.' || c == '!' || c == '?') {
                std::size_t p = i + 1;
                while (p < seg.size() && (seg[p] == '.' || seg[p] == '!' || seg[p] == '?'))
                    ++p;
                std::size_t q = p;
                while (q < seg.size() && seg[q] == ' ') ++q;
                if (q > p && q < seg.size() && seg[q] >= 'A' && seg[q] <= 'Z') {
                    sentences.push_back(seg.substr(start, p - start));
                    start = q;
                    i = q;
                    continue;
                }
                i = p;
                continue;
            }
            ++i;
        }
        if (start < seg.size()) sentences.push_back(seg.substr(start));
    }
    return sentences;
}

}  // namespace trirank
