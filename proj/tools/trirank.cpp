// trirank: multi-aspect retrieval, re-ranking and evaluation.
//
// Subcommands: index, fetch-pagerank, features, train-cred, score, fuse,
// eval, pipeline. Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trirank/pipeline.hpp"
#include "trirank/url.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;

    std::string aspect;        // score
    std::string api_key;       // fetch-pagerank
    std::string domains_file;  // fetch-pagerank
    std::string base_url;      // fetch-pagerank (testing)
};

trirank::PipelineConfig load_config(const CliOptions& opts) {
    if (opts.config_path.empty()) throw trirank::usage_error("--config is required");
    if (!trirank::file_exists(opts.config_path))
        throw trirank::usage_error("config not found: " + opts.config_path);
    trirank::PipelineConfig config = trirank::PipelineConfig::load(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.threads) config.threads = *opts.threads;
    return config;
}

std::vector<std::string> domains_for_fetch(const trirank::PipelineConfig& config,
                                           const CliOptions& opts) {
    std::vector<std::string> domains;
    if (!opts.domains_file.empty()) {
        std::ifstream in(opts.domains_file);
        if (!in) throw trirank::usage_error("cannot open domains file: " + opts.domains_file);
        std::string line;
        while (std::getline(in, line)) {
            std::string domain = trirank::trim(line);
            if (!domain.empty()) domains.push_back(domain);
        }
        return domains;
    }
    // default: registrable domains of every corpus url
    trirank::pipeline_detail::require_file(config.corpus, "corpus");
    std::set<std::string> unique;
    trirank::ingest_corpus(config.corpus, [&](trirank::RawDocument&& doc) {
        trirank::ParsedUrl url = trirank::parse_url(doc.url);
        if (url.valid) unique.insert(trirank::registrable_domain(url.host));
    });
    return {unique.begin(), unique.end()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-aspect retrieval and re-ranking pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    CliOptions opts;
    app.add_option("--config", opts.config_path, "pipeline configuration (JSON)");
    app.add_option("--seed", opts.seed, "override the configured random seed");
    app.add_option("--threads", opts.threads, "override the configured thread count");

    CLI::App* cmd_index = app.add_subcommand("index", "build the inverted index from the corpus");
    CLI::App* cmd_fetch = app.add_subcommand("fetch-pagerank", "fetch PageRank data into the cache");
    cmd_fetch->add_option("--api-key", opts.api_key, "OpenPageRank API key (or OPR_API_KEY)");
    cmd_fetch->add_option("--domains-file", opts.domains_file,
                          "file with one domain per line (default: corpus domains)");
    cmd_fetch->add_option("--base-url", opts.base_url, "override the API endpoint");
    CLI::App* cmd_features = app.add_subcommand("features", "extract per-document features to CSV");
    CLI::App* cmd_train = app.add_subcommand("train-cred", "train the credibility ensemble");
    CLI::App* cmd_score = app.add_subcommand("score", "score one aspect over the initial run");
    cmd_score->add_option("--aspect", opts.aspect, "relevance | credibility | misinfo")->required();
    CLI::App* cmd_fuse = app.add_subcommand("fuse", "apply the fusion recipes and write run files");
    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate run files against qrels");
    CLI::App* cmd_pipeline = app.add_subcommand("pipeline", "run every stage end to end");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
        app.exit(e);
        return 2;
    }

    trirank::EventLog log(&std::cerr);
    try {
        trirank::PipelineConfig config = load_config(opts);
        if (cmd_index->parsed()) {
            trirank::stage_index(config, log);
        } else if (cmd_fetch->parsed()) {
            std::string api_key = opts.api_key;
            if (api_key.empty()) {
                const char* env = std::getenv("OPR_API_KEY");
                if (env) api_key = env;
            }
            if (api_key.empty())
                throw trirank::usage_error("an API key is required (--api-key or OPR_API_KEY)");
            trirank::FetchOptions fetch_opts;
            if (!opts.base_url.empty()) fetch_opts.base_url = opts.base_url;
            trirank::stage_fetch_pagerank(config, api_key, domains_for_fetch(config, opts), log,
                                          fetch_opts);
        } else if (cmd_features->parsed()) {
            trirank::stage_features(config, log);
        } else if (cmd_train->parsed()) {
            trirank::stage_train_cred(config, log);
        } else if (cmd_score->parsed()) {
            trirank::stage_score(config, opts.aspect, log);
        } else if (cmd_fuse->parsed()) {
            trirank::stage_fuse(config, log);
        } else if (cmd_eval->parsed()) {
            trirank::stage_evaluate(config, log);
        } else if (cmd_pipeline->parsed()) {
            trirank::stage_pipeline(config, log);
        }
    } catch (const trirank::usage_error& e) {
        log.emit("usage_error", {{"message", e.what()}});
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log.emit("error", {{"message", e.what()}});
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
