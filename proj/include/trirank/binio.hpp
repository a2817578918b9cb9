#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "trirank/common.hpp"

namespace trirank::binio {

template <typename T>
void put(std::string& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

inline void put_str(std::string& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

inline void put_f64s(std::string& out, const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    for (double d : v) put<double>(out, d);
}

template <typename T>
T get(std::string_view in, std::size_t& pos) {
    static_assert(std::is_trivially_copyable_v<T>);
    if (pos + sizeof(T) > in.size()) throw error("binary input truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

inline std::string get_str(std::string_view in, std::size_t& pos) {
    std::uint32_t len = get<std::uint32_t>(in, pos);
    if (pos + len > in.size()) throw error("binary input truncated");
    std::string s(in.substr(pos, len));
    pos += len;
    return s;
}

inline std::vector<double> get_f64s(std::string_view in, std::size_t& pos) {
    std::uint64_t n = get<std::uint64_t>(in, pos);
    std::vector<double> v;
    v.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(get<double>(in, pos));
    return v;
}

}  // namespace trirank::binio
