#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace trirank {

/// Fatal data or IO problem; the CLI maps this to exit code 1.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad invocation or configuration; the CLI maps this to exit code 2.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Write via a temp file + rename so failed stages leave no partial artifact.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline bool file_exists(const std::string& path) {
    return std::filesystem::exists(path);
}

/// Shortest faithful decimal rendering of a double (round-trips exactly).
inline std::string fmt_double(double v) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

/// FNV-1a 64-bit. Used for recipe hashes and input digests in manifests;
/// a stability fingerprint, not a cryptographic digest.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

/// Static-chunk parallel map over [0, n). Results land in caller-owned slots,
/// so the outcome is independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (n == 0) return;
    if (threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned t = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace trirank
