#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "trirank/common.hpp"

namespace trirank {

struct PageRankRecord {
    std::string domain;  // lowercase registrable domain, no scheme or path
    std::optional<long> pr_rank;
    std::optional<int> page_rank_integer;
    std::optional<double> page_rank_decimal;
    std::string fetched_at;  // ISO-8601 UTC
};

inline int round_half_up(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

/// Domain-keyed PageRank cache persisted as TSV:
/// domain \t pr_rank \t integer \t decimal \t fetched_at ("unknown" for absent).
class PageRankCache {
  public:
    PageRankCache() = default;

    static PageRankCache load(const std::string& path) {
        PageRankCache cache;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw error("cannot open pagerank cache: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            std::vector<std::string> cols = split(line, '\t');
            if (cols.size() != 5)
                throw error("pagerank cache line " + std::to_string(lineno) + ": expected 5 columns");
            PageRankRecord rec;
            rec.domain = cols[0];
            if (cols[1] != "unknown") rec.pr_rank = std::stol(cols[1]);
            if (cols[2] != "unknown") rec.page_rank_integer = std::stoi(cols[2]);
            if (cols[3] != "unknown") rec.page_rank_decimal = std::stod(cols[3]);
            rec.fetched_at = cols[4];
            cache.records_[rec.domain] = std::move(rec);
        }
        return cache;
    }

    void save(const std::string& path) const {
        std::string out;
        for (const auto& [domain, rec] : records_) {
            out += domain;
            out += '\t';
            out += rec.pr_rank ? std::to_string(*rec.pr_rank) : "unknown";
            out += '\t';
            out += rec.page_rank_integer ? std::to_string(*rec.page_rank_integer) : "unknown";
            out += '\t';
            out += rec.page_rank_decimal ? fmt_double(*rec.page_rank_decimal) : "unknown";
            out += '\t';
            out += rec.fetched_at;
            out += '\n';
        }
        write_file_atomic(path, out);
    }

    const PageRankRecord* find(const std::string& domain) const {
        auto it = records_.find(domain);
        return it == records_.end() ? nullptr : &it->second;
    }

    void upsert(PageRankRecord rec) { records_[rec.domain] = std::move(rec); }

    std::size_t size() const { return records_.size(); }

  private:
    std::map<std::string, PageRankRecord> records_;  // sorted, so saves are stable
};

struct FetchOptions {
    std::string base_url = "https://openpagerank.com";
    std::string endpoint = "/api/v1.0/getPageRank";
    int attempts = 3;
    int backoff_initial_ms = 500;  // doubles per retry
    std::size_t batch_size = 100;
};

inline std::string utc_now_iso8601() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

/// Query the OpenPageRank API in batches. Domains the service cannot resolve,
/// and whole batches that still fail after retries, come back with unknown
/// fields so the pipeline can continue offline.
inline std::vector<PageRankRecord> fetch_pagerank(const std::vector<std::string>& domains,
                                                  const std::string& api_key,
                                                  const FetchOptions& opts = {}) {
    std::vector<PageRankRecord> out;
    if (domains.empty()) return out;
    httplib::Client client(opts.base_url);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    for (std::size_t start = 0; start < domains.size(); start += opts.batch_size) {
        std::size_t end = std::min(domains.size(), start + opts.batch_size);
        httplib::Params params;
        for (std::size_t i = start; i < end; ++i)
            params.emplace("domains[]", domains[i]);
        httplib::Headers headers = {{"API-OPR", api_key}};

        nlohmann::json body;
        bool got = false;
        int backoff = opts.backoff_initial_ms;
        for (int attempt = 0; attempt < opts.attempts; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
            auto res = client.Get(opts.endpoint, params, headers);
            if (!res || res->status >= 500) continue;
            if (res->status == 429) break;  // quota exceeded; do not hammer
            if (res->status != 200) break;
            body = nlohmann::json::parse(res->body, nullptr, false);
            if (!body.is_discarded() && body.contains("response")) got = true;
            break;
        }

        std::string now = utc_now_iso8601();
        std::map<std::string, PageRankRecord> by_domain;
        if (got) {
            for (const auto& item : body["response"]) {
                if (!item.is_object() || !item.contains("domain")) continue;
                PageRankRecord rec;
                rec.domain = item["domain"].get<std::string>();
                rec.fetched_at = now;
                if (item.value("status_code", 0) == 200) {
                    if (item.contains("rank") && !item["rank"].is_null()) {
                        if (item["rank"].is_string())
                            rec.pr_rank = std::stol(item["rank"].get<std::string>());
                        else
                            rec.pr_rank = item["rank"].get<long>();
                    }
                    if (item.contains("page_rank_integer") && item["page_rank_integer"].is_number())
                        rec.page_rank_integer = item["page_rank_integer"].get<int>();
                    if (item.contains("page_rank_decimal") && item["page_rank_decimal"].is_number())
                        rec.page_rank_decimal = item["page_rank_decimal"].get<double>();
                }
                by_domain[rec.domain] = std::move(rec);
            }
        }
        for (std::size_t i = start; i < end; ++i) {
            auto it = by_domain.find(domains[i]);
            if (it != by_domain.end()) {
                out.push_back(it->second);
            } else {
                PageRankRecord rec;
                rec.domain = domains[i];
                rec.fetched_at = now;
                out.push_back(std::move(rec));
            }
        }
    }
    return out;
}

}  // namespace trirank
