#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "trirank/common.hpp"
#include "trirank/text.hpp"

namespace trirank {

struct ParsedUrl {
    bool valid = false;
    std::string scheme;
    std::string host;  // lowercase, no port
};

/// Minimal absolute-URL parse: scheme "://" host [":" port] [/ ...].
inline ParsedUrl parse_url(std::string_view url) {
    ParsedUrl out;
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) return out;
    for (std::size_t i = 0; i < scheme_end; ++i) {
        char c = url[i];
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (i > 0 && ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.'))))
            return out;
    }
    std::size_t host_start = scheme_end + 3;
    std::size_t host_end = host_start;
    while (host_end < url.size() && url[host_end] != '/' && url[host_end] != '?' &&
           url[host_end] != '#' && url[host_end] != ':')
        ++host_end;
    if (host_end == host_start) return out;
    std::string host = to_lower_ascii(url.substr(host_start, host_end - host_start));
    for (char c : host) {
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.'))
            return out;
    }
    if (host.front() == '.' || host.back() == '.' || host.find("..") != std::string::npos)
        return out;
    out.valid = true;
    out.scheme = to_lower_ascii(url.substr(0, scheme_end));
    out.host = std::move(host);
    return out;
}

/// Registrable domain from a host, e.g. "www.cdc.gov" -> "cdc.gov".
/// Heuristic, not a public-suffix list: two labels, or three when the TLD is
/// a two-letter country code preceded by a common second-level label
/// (co.uk, com.au, gov.uk, ...).
inline std::string registrable_domain(std::string_view host) {
    std::vector<std::string> labels = split(host, '.');
    if (labels.size() <= 2) return std::string(host);
    static const std::unordered_set<std::string> second_level = {
        "co", "com", "org", "net", "ac", "gov", "edu"};
    const std::string& tld = labels.back();
    std::size_t take = 2;
    if (tld.size() == 2 && second_level.count(labels[labels.size() - 2]) > 0)
        take = 3;
    std::string out;
    for (std::size_t i = labels.size() - take; i < labels.size(); ++i) {
        if (!out.empty()) out.push_back('.');
        out += labels[i];
    }
    return out;
}

enum class TldCategory { gov, edu, org, com, net, other };

inline const char* tld_category_name(TldCategory c) {
    switch (c) {
        case TldCategory::gov: return "gov";
        case TldCategory::edu: return "edu";
        case TldCategory::org: return "org";
        case TldCategory::com: return "com";
        case TldCategory::net: return "net";
        default: return "other";
    }
}

inline TldCategory tld_category_from_name(std::string_view name) {
    if (name == "gov") return TldCategory::gov;
    if (name == "edu") return TldCategory::edu;
    if (name == "org") return TldCategory::org;
    if (name == "com") return TldCategory::com;
    if (name == "net") return TldCategory::net;
    return TldCategory::other;
}

/// Category of the host's suffix. The final label decides; a recognized
/// second-to-last label decides for country-code hosts like cdc.gov.uk.
inline TldCategory tld_category(std::string_view host) {
    std::vector<std::string> labels = split(host, '.');
    if (labels.empty()) return TldCategory::other;
    TldCategory last = tld_category_from_name(labels.back());
    if (last != TldCategory::other) return last;
    if (labels.size() >= 2 && labels.back().size() == 2)
        return tld_category_from_name(labels[labels.size() - 2]);
    return TldCategory::other;
}

}  // namespace trirank
