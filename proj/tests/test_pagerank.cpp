#include <atomic>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "trirank/pagerank.hpp"

using namespace trirank;

namespace {

/// Local stand-in for the OpenPageRank endpoint.
class MockServer {
  public:
    explicit MockServer(int fail_first_n = 0, bool quota_exceeded = false)
        : fail_remaining_(fail_first_n), quota_exceeded_(quota_exceeded) {
        server_.Get("/api/v1.0/getPageRank", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            last_key_ = req.get_header_value("API-OPR");
            if (quota_exceeded_) {
                res.status = 429;
                return;
            }
            if (fail_remaining_ > 0) {
                --fail_remaining_;
                res.status = 500;
                return;
            }
            nlohmann::json response;
            response["status_code"] = 200;
            auto items = nlohmann::json::array();
            auto range = req.params.equal_range("domains[]");
            for (auto it = range.first; it != range.second; ++it) {
                nlohmann::json item;
                item["domain"] = it->second;
                if (it->second == "unresolvable.example") {
                    item["status_code"] = 404;
                    item["error"] = "domain not found";
                } else {
                    item["status_code"] = 200;
                    item["rank"] = "312";
                    item["page_rank_integer"] = 7;
                    item["page_rank_decimal"] = 7.49;
                }
                items.push_back(item);
            }
            response["response"] = items;
            res.set_content(response.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int requests() const { return requests_; }
    std::string last_key() const { return last_key_; }

  private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> fail_remaining_;
    bool quota_exceeded_ = false;
    std::atomic<int> requests_{0};
    std::string last_key_;
};

FetchOptions fast_options(const std::string& base_url) {
    FetchOptions opts;
    opts.base_url = base_url;
    opts.backoff_initial_ms = 1;
    return opts;
}

}  // namespace

TEST(Fetch, EmptyInputNoRequest) {
    MockServer server;
    std::vector<PageRankRecord> records = fetch_pagerank({}, "key", fast_options(server.base_url()));
    EXPECT_TRUE(records.empty());
    EXPECT_EQ(server.requests(), 0);
}

TEST(Fetch, ResolvableDomainGetsScores) {
    MockServer server;
    std::vector<PageRankRecord> records =
        fetch_pagerank({"cdc.gov"}, "secret-key", fast_options(server.base_url()));
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].domain, "cdc.gov");
    EXPECT_EQ(records[0].pr_rank.value(), 312);
    EXPECT_EQ(records[0].page_rank_integer.value(), 7);
    EXPECT_GE(records[0].page_rank_decimal.value(), 0.0);
    EXPECT_LE(records[0].page_rank_decimal.value(), 10.0);
    EXPECT_EQ(server.last_key(), "secret-key");
    EXPECT_FALSE(records[0].fetched_at.empty());
}

TEST(Fetch, UnresolvableDomainIsUnknown) {
    MockServer server;
    std::vector<PageRankRecord> records = fetch_pagerank({"unresolvable.example", "cdc.gov"}, "k",
                                                         fast_options(server.base_url()));
    ASSERT_EQ(records.size(), 2u);
    EXPECT_FALSE(records[0].pr_rank.has_value());
    EXPECT_TRUE(records[1].pr_rank.has_value());
}

TEST(Fetch, ServerErrorRetriedThenUnknown) {
    MockServer server(/*fail_first_n=*/10);  // more failures than attempts
    std::vector<PageRankRecord> records =
        fetch_pagerank({"cdc.gov"}, "k", fast_options(server.base_url()));
    ASSERT_EQ(records.size(), 1u);
    EXPECT_FALSE(records[0].pr_rank.has_value());  // marked unknown, pipeline continues
    EXPECT_EQ(server.requests(), 3);               // three attempts
}

TEST(Fetch, RecoversAfterTransientErrors) {
    MockServer server(/*fail_first_n=*/2);
    std::vector<PageRankRecord> records =
        fetch_pagerank({"cdc.gov"}, "k", fast_options(server.base_url()));
    ASSERT_EQ(records.size(), 1u);
    EXPECT_TRUE(records[0].pr_rank.has_value());
    EXPECT_EQ(server.requests(), 3);
}

TEST(Fetch, BatchesOfAtMostOneHundred) {
    MockServer server;
    std::vector<std::string> domains;
    for (int i = 0; i < 150; ++i) domains.push_back("site" + std::to_string(i) + ".com");
    std::vector<PageRankRecord> records = fetch_pagerank(domains, "k", fast_options(server.base_url()));
    EXPECT_EQ(records.size(), domains.size());
    EXPECT_EQ(server.requests(), 2);  // 100 + 50
    for (std::size_t i = 0; i < domains.size(); ++i) EXPECT_EQ(records[i].domain, domains[i]);
}

TEST(Fetch, QuotaExceededGivesPartialResultWithoutHammering) {
    MockServer server(0, /*quota_exceeded=*/true);
    std::vector<PageRankRecord> records =
        fetch_pagerank({"a.com", "b.com"}, "k", fast_options(server.base_url()));
    ASSERT_EQ(records.size(), 2u);  // batch comes back, fields unknown
    EXPECT_FALSE(records[0].pr_rank.has_value());
    EXPECT_EQ(server.requests(), 1);  // no retries against an exhausted quota
}

TEST(Fetch, MergesIntoCache) {
    MockServer server;
    PageRankCache cache;
    for (const PageRankRecord& rec :
         fetch_pagerank({"cdc.gov", "unresolvable.example"}, "k", fast_options(server.base_url())))
        cache.upsert(rec);
    EXPECT_EQ(cache.size(), 2u);
    EXPECT_TRUE(cache.find("cdc.gov")->page_rank_decimal.has_value());
    EXPECT_FALSE(cache.find("unresolvable.example")->page_rank_decimal.has_value());
}

#include "trirank/pipeline.hpp"

// The fetch stage is cache-first: domains already cached are not requested
// again, and new records merge into the cache file.
TEST(Fetch, StageIsCacheFirstAndPersists) {
    namespace fs = std::filesystem;
    MockServer server;
    fs::path dir = fs::temp_directory_path() / "trirank_fetch_stage";
    fs::remove_all(dir);
    fs::create_directories(dir);

    PipelineConfig config;
    config.pagerank_cache = (dir / "cache.tsv").string();
    {
        PageRankCache seed;
        seed.upsert({"already.com", 10, 9, 9.2, "2026-01-01T00:00:00Z"});
        seed.save(config.pagerank_cache);
    }
    std::ostringstream sink;
    EventLog log(&sink);
    stage_fetch_pagerank(config, "k", {"already.com", "cdc.gov"}, log,
                         fast_options(server.base_url()));
    EXPECT_EQ(server.requests(), 1);  // only the uncached domain was fetched

    PageRankCache cache = PageRankCache::load(config.pagerank_cache);
    EXPECT_EQ(cache.size(), 2u);
    EXPECT_EQ(cache.find("already.com")->pr_rank.value(), 10);
    EXPECT_EQ(cache.find("cdc.gov")->pr_rank.value(), 312);
}
