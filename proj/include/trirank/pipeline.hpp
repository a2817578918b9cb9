#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "trirank/common.hpp"
#include "trirank/corpus.hpp"
#include "trirank/credibility.hpp"
#include "trirank/eval.hpp"
#include "trirank/features.hpp"
#include "trirank/fusion.hpp"
#include "trirank/index.hpp"
#include "trirank/pagerank.hpp"
#include "trirank/search.hpp"
#include "trirank/stance.hpp"
#include "trirank/trec.hpp"

namespace trirank {

/// One JSON object per event. No timestamps, so identical inputs produce
/// identical logs and tests can assert on fallback rates and skip counts.
class EventLog {
  public:
    explicit EventLog(std::ostream* out = &std::cerr) : out_(out) {}

    void emit(const std::string& event, nlohmann::json fields = nlohmann::json::object()) {
        fields["event"] = event;
        if (out_) *out_ << fields.dump() << "\n";
    }

  private:
    std::ostream* out_;
};

struct PipelineConfig {
    std::string corpus;
    std::string topics;
    std::string index;
    std::string stance;
    std::string pagerank_cache;
    std::string credibility_model;
    std::vector<std::string> recipes;
    std::string qrels;
    std::string output_dir;
    std::string training_csv;
    std::string cues_agree;
    std::string cues_disagree;
    std::size_t depth = 1000;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    EvalOptions eval;

    static PipelineConfig load(const std::string& path) {
        nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw usage_error("config is not a JSON object: " + path);
        PipelineConfig c;
        c.corpus = j.value("corpus", "");
        c.topics = j.value("topics", "");
        c.index = j.value("index", "");
        c.stance = j.value("stance", "");
        c.pagerank_cache = j.value("pagerank_cache", "");
        c.credibility_model = j.value("credibility_model", "");
        if (j.contains("recipes")) {
            if (j["recipes"].is_string())
                c.recipes.push_back(j["recipes"].get<std::string>());
            else
                c.recipes = j["recipes"].get<std::vector<std::string>>();
        }
        c.qrels = j.value("qrels", "");
        c.output_dir = j.value("output_dir", "");
        c.training_csv = j.value("training_csv", "");
        c.cues_agree = j.value("cues_agree", "");
        c.cues_disagree = j.value("cues_disagree", "");
        c.depth = j.value("depth", std::size_t{1000});
        c.seed = j.value("seed", std::uint64_t{42});
        c.threads = j.value("threads", 1u);
        c.eval.ndcg_depth = j.value("ndcg_depth", std::size_t{1000});
        c.eval.compatibility.persistence = j.value("compatibility_persistence", 0.95);
        c.eval.compatibility.residual_tolerance = j.value("compatibility_tolerance", 1e-6);
        if (c.depth < 1) throw usage_error("depth must be at least 1");
        if (c.eval.compatibility.persistence <= 0.0 || c.eval.compatibility.persistence >= 1.0)
            throw usage_error("compatibility_persistence must lie in (0, 1)");
        return c;
    }

    std::string out(const std::string& rel) const {
        return (std::filesystem::path(output_dir) / rel).string();
    }
};

namespace pipeline_detail {

inline void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw usage_error(what + " path is not configured");
    if (!file_exists(path)) throw usage_error(what + " not found: " + path);
}

inline void require_output_dir(const PipelineConfig& config) {
    if (config.output_dir.empty()) throw usage_error("output_dir is not configured");
    std::filesystem::create_directories(config.output_dir);
}

inline std::string model_name(RetrievalModel m) {
    return m == RetrievalModel::bm25 ? "bm25" : "rm3";
}

inline std::string query_text(const Topic& topic, const std::vector<std::string>& fields) {
    std::string text;
    for (const std::string& field : fields) {
        std::string part;
        if (field == "title") part = topic.title;
        else if (field == "description") part = topic.description;
        else if (field == "claim") part = topic.claim;
        else if (field == "narrative") part = topic.narrative;
        else throw usage_error("unknown query field: " + field);
        if (part.empty()) continue;
        if (!text.empty()) text.push_back(' ');
        text += part;
    }
    return text;
}

/// The set of initial models the recipe files need, with their query fields.
inline std::map<RetrievalModel, std::vector<std::string>> required_models(
    const std::vector<FusionRecipe>& recipes) {
    std::map<RetrievalModel, std::vector<std::string>> models;
    for (const FusionRecipe& recipe : recipes) {
        if (!recipe.initial) continue;
        auto [it, inserted] = models.emplace(*recipe.initial, recipe.query_fields);
        if (!inserted && it->second != recipe.query_fields)
            throw usage_error("recipes disagree on query_fields for initial model " +
                              model_name(*recipe.initial));
    }
    return models;
}

inline std::vector<FusionRecipe> load_all_recipes(const PipelineConfig& config) {
    if (config.recipes.empty()) throw usage_error("no recipe files configured");
    std::vector<FusionRecipe> all;
    std::set<std::string> ids;
    for (const std::string& path : config.recipes) {
        require_file(path, "recipe file");
        for (FusionRecipe& recipe : load_recipes(path)) {
            if (!ids.insert(recipe.run_id).second)
                throw usage_error("duplicate run_id across recipe files: " + recipe.run_id);
            all.push_back(std::move(recipe));
        }
    }
    return all;
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// stages

struct IndexStats {
    std::size_t documents = 0;
    std::size_t vocabulary = 0;
    double avgdl = 0.0;
    std::size_t skipped_lines = 0;
};

inline IndexStats stage_index(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.corpus, "corpus");
    if (config.index.empty()) throw usage_error("index output path is not configured");

    std::vector<ParsedDocument> parsed;
    IngestStats ingest = ingest_corpus(config.corpus, [&](RawDocument&& doc) {
        parsed.push_back(extract_text(doc));
    });
    if (ingest.skipped > 0)
        log.emit("corpus_lines_skipped", {{"skipped", ingest.skipped}});
    IndexedCorpus index = build_index(parsed);
    save_index(index, config.index);
    IndexStats out;
    out.documents = index.doc_count();
    out.vocabulary = index.postings.size();
    out.avgdl = index.avgdl;
    out.skipped_lines = ingest.skipped;
    log.emit("index_built", {{"documents", out.documents},
                             {"vocabulary", out.vocabulary},
                             {"avgdl", out.avgdl},
                             {"path", config.index}});
    return out;
}

inline void stage_features(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.corpus, "corpus");
    pipeline_detail::require_output_dir(config);
    PageRankCache cache;
    if (!config.pagerank_cache.empty() && file_exists(config.pagerank_cache))
        cache = PageRankCache::load(config.pagerank_cache);

    auto csv_field = [](const std::string& value) {
        if (value.find_first_of(",\"\n") == std::string::npos) return value;
        std::string quoted = "\"";
        for (char c : value) {
            if (c == '"') quoted += "\"\"";
            else quoted.push_back(c);
        }
        quoted.push_back('"');
        return quoted;
    };
    std::string csv = "doc_id,url,css_definitions,text_readability,pr_rank,"
                      "page_rank_integer,page_rank_decimal,tld\n";
    std::size_t rows = 0;
    ingest_corpus(config.corpus, [&](RawDocument&& doc) {
        ParsedDocument parsed = extract_text(doc);
        ContentFeatures content = extract_content_features(doc, parsed);
        SocialFeatures social = extract_social_features(doc, cache);
        char buf[256];
        std::snprintf(buf, sizeof(buf), ",%d,%s,%ld,%d,%s,%s\n", content.css_definitions,
                      fmt_double(content.text_readability).c_str(),
                      social.pr_rank.value_or(-1),
                      social.page_rank_integer.value_or(-1),
                      social.page_rank_decimal ? fmt_double(*social.page_rank_decimal).c_str() : "-1",
                      tld_category_name(social.toplevel_domain));
        csv += csv_field(doc.doc_id);
        csv += ',';
        csv += csv_field(doc.url);
        csv += buf;
        ++rows;
    });
    write_file_atomic(config.out("features.csv"), csv);
    log.emit("features_written", {{"rows", rows}, {"path", config.out("features.csv")}});
}

inline void stage_train_cred(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.training_csv, "training csv");
    if (config.credibility_model.empty())
        throw usage_error("credibility_model output path is not configured");

    std::vector<TrainingRow> rows = load_training_csv(config.training_csv);
    if (rows.empty()) throw error("training csv has no rows");

    TrainingSet data;
    bool all_have_features = true;
    for (const TrainingRow& row : rows) all_have_features = all_have_features && row.features.has_value();

    if (all_have_features) {
        for (const TrainingRow& row : rows) {
            data.x.push_back(*row.features);
            data.y.push_back(map_labels(row.label_raw));
        }
    } else {
        // rows without feature columns need page snapshots in the corpus,
        // matched by url; rows that carry features keep them
        pipeline_detail::require_file(config.corpus, "corpus (needed for feature extraction)");
        PageRankCache cache;
        if (!config.pagerank_cache.empty() && file_exists(config.pagerank_cache))
            cache = PageRankCache::load(config.pagerank_cache);
        std::map<std::string, std::vector<double>> by_url;
        ingest_corpus(config.corpus, [&](RawDocument&& doc) {
            ParsedDocument parsed = extract_text(doc);
            auto x = make_feature_vector(extract_content_features(doc, parsed),
                                         extract_social_features(doc, cache));
            by_url[doc.url] = std::vector<double>(x.begin(), x.end());
        });
        std::vector<std::string> missing;
        for (const TrainingRow& row : rows) {
            if (row.features) {
                data.x.push_back(*row.features);
                data.y.push_back(map_labels(row.label_raw));
                continue;
            }
            auto it = by_url.find(row.url);
            if (it == by_url.end()) {
                missing.push_back(row.url);
                continue;
            }
            data.x.push_back(it->second);
            data.y.push_back(map_labels(row.label_raw));
        }
        if (!missing.empty())
            throw error("training urls missing from corpus (first: " + missing.front() + ", " +
                        std::to_string(missing.size()) + " total)");
    }

    EnsembleModel model = train_ensemble(data, config.seed);
    model.save(config.credibility_model);
    log.emit("credibility_model_trained",
             {{"examples", data.x.size()},
              {"cv_accuracy", model.cv_accuracy()},
              {"path", config.credibility_model}});
}

inline void stage_score_relevance(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.index, "index");
    pipeline_detail::require_file(config.topics, "topics");
    pipeline_detail::require_output_dir(config);
    std::vector<FusionRecipe> recipes = pipeline_detail::load_all_recipes(config);
    auto models = pipeline_detail::required_models(recipes);
    if (models.empty()) throw usage_error("no recipe references an initial model");

    IndexedCorpus index = load_index(config.index);
    std::vector<Topic> topics = load_topics(config.topics);

    for (const auto& [model_key, field_list] : models) {
        const RetrievalModel model = model_key;
        const std::vector<std::string> fields = field_list;
        std::string name = pipeline_detail::model_name(model);
        FusedRun initial;
        initial.run_id = "initial_" + name;
        std::vector<AspectScore> scores;
        std::vector<ScoredList> lists(topics.size());
        parallel_for(topics.size(), config.threads, [&](std::size_t i) {
            QuerySpec q;
            q.topic_id = topics[i].topic_id;
            q.text = pipeline_detail::query_text(topics[i], fields);
            q.model = model;
            q.k_docs = config.depth;
            lists[i] = run_query(index, q);
        });
        for (std::size_t i = 0; i < topics.size(); ++i) {
            if (lists[i].entries.empty())
                log.emit("empty_result", {{"topic_id", topics[i].topic_id}, {"model", name}});
            for (const ScoredEntry& e : lists[i].entries) {
                scores.push_back({topics[i].topic_id, e.doc_id, e.score});
            }
            initial.topics[topics[i].topic_id] = lists[i].entries;
        }
        write_run(initial, config.out("initial_" + name + ".run"));
        write_scores(scores, config.out("scores_relevance_" + name + ".jsonl"));
        log.emit("relevance_scored", {{"model", name}, {"pairs", scores.size()}});
    }
}

/// Union, per topic, of the documents appearing in any initial run.
inline std::map<int, std::set<std::string>> initial_run_docs(const PipelineConfig& config) {
    std::map<int, std::set<std::string>> docs;
    bool found = false;
    for (const char* name : {"bm25", "rm3"}) {
        std::string path = config.out("initial_" + std::string(name) + ".run");
        if (!file_exists(path)) continue;
        found = true;
        for (const auto& [topic_id, entries] : read_run(path))
            for (const RunFileEntry& e : entries) docs[topic_id].insert(e.doc_id);
    }
    if (!found)
        throw usage_error("no initial run files found in output_dir; run `score relevance` first");
    return docs;
}

inline void stage_score_credibility(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.corpus, "corpus");
    pipeline_detail::require_file(config.credibility_model, "credibility model");
    pipeline_detail::require_output_dir(config);
    auto needed = initial_run_docs(config);

    EnsembleModel model = EnsembleModel::load(config.credibility_model);
    PageRankCache cache;
    if (!config.pagerank_cache.empty() && file_exists(config.pagerank_cache))
        cache = PageRankCache::load(config.pagerank_cache);

    std::set<std::string> wanted;
    for (const auto& [topic_id, docs] : needed) wanted.insert(docs.begin(), docs.end());

    // topic-independent: score each document once
    std::map<std::string, double> doc_score;
    ingest_corpus(config.corpus, [&](RawDocument&& doc) {
        if (wanted.count(doc.doc_id) == 0) return;
        ParsedDocument parsed = extract_text(doc);
        auto x = make_feature_vector(extract_content_features(doc, parsed),
                                     extract_social_features(doc, cache));
        doc_score[doc.doc_id] = model.predict_proba(std::vector<double>(x.begin(), x.end()));
    });
    std::vector<std::string> missing;
    for (const std::string& doc : wanted)
        if (doc_score.count(doc) == 0) missing.push_back(doc);
    if (!missing.empty())
        throw error("documents in the initial run are missing from the corpus (first: " +
                    missing.front() + ", " + std::to_string(missing.size()) + " total)");

    std::vector<AspectScore> scores;
    for (const auto& [topic_id, docs] : needed)
        for (const std::string& doc : docs) scores.push_back({topic_id, doc, doc_score.at(doc)});
    write_scores(scores, config.out("scores_credibility.jsonl"));
    log.emit("credibility_scored", {{"pairs", scores.size()}, {"documents", doc_score.size()}});
}

inline void stage_score_misinfo(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.corpus, "corpus");
    pipeline_detail::require_file(config.topics, "topics");
    pipeline_detail::require_output_dir(config);
    auto needed = initial_run_docs(config);
    std::vector<Topic> topics = load_topics(config.topics);
    std::map<int, const Topic*> topic_by_id;
    for (const Topic& t : topics) topic_by_id[t.topic_id] = &t;

    StanceMap external;
    if (!config.stance.empty() && file_exists(config.stance)) {
        StanceLoadStats stats;
        external = load_external_stance(config.stance, &stats);
        log.emit("stance_loaded", {{"records", stats.loaded},
                                   {"rejected", stats.rejected},
                                   {"duplicates", stats.duplicates}});
    }

    LexicalStanceScorer lexical =
        (!config.cues_agree.empty() && !config.cues_disagree.empty())
            ? LexicalStanceScorer::from_files(config.cues_agree, config.cues_disagree)
            : LexicalStanceScorer();

    std::set<std::string> wanted;
    for (const auto& [topic_id, docs] : needed) wanted.insert(docs.begin(), docs.end());
    std::map<std::string, ParsedDocument> parsed_docs;
    ingest_corpus(config.corpus, [&](RawDocument&& doc) {
        if (wanted.count(doc.doc_id) > 0) parsed_docs[doc.doc_id] = extract_text(doc);
    });

    std::vector<AspectScore> scores;
    for (const auto& [topic_id, docs] : needed) {
        auto topic_it = topic_by_id.find(topic_id);
        if (topic_it == topic_by_id.end())
            throw error("initial run topic " + std::to_string(topic_id) + " is not in the topics file");
        const Topic& topic = *topic_it->second;
        std::size_t fallback = 0;
        for (const std::string& doc_id : docs) {
            StanceProbabilities probs;
            auto ext = external.find({topic_id, doc_id});
            if (ext != external.end()) {
                probs = ext->second;
            } else {
                auto parsed_it = parsed_docs.find(doc_id);
                if (parsed_it == parsed_docs.end())
                    throw error("document " + doc_id + " is missing from the corpus");
                probs = lexical.score(trim_to_claim(parsed_it->second, topic), topic);
                ++fallback;
            }
            scores.push_back({topic_id, doc_id, misinformation_score(probs, topic.answer).s});
        }
        if (fallback > 0)
            log.emit("stance_fallback",
                     {{"topic_id", topic_id}, {"fallback", fallback}, {"total", docs.size()}});
    }
    write_scores(scores, config.out("scores_misinfo.jsonl"));
    log.emit("misinfo_scored", {{"pairs", scores.size()}});
}

inline void stage_score(const PipelineConfig& config, const std::string& aspect, EventLog& log) {
    if (aspect == "relevance") stage_score_relevance(config, log);
    else if (aspect == "credibility") stage_score_credibility(config, log);
    else if (aspect == "misinfo") stage_score_misinfo(config, log);
    else throw usage_error("unknown aspect: " + aspect + " (expected relevance|credibility|misinfo)");
}

inline std::map<RetrievalModel, AspectScoreMatrix> build_matrices(
    const PipelineConfig& config, const std::vector<FusionRecipe>& recipes,
    std::map<RetrievalModel, std::map<int, std::vector<RunFileEntry>>>& initial_out) {
    auto models = pipeline_detail::required_models(recipes);

    bool needs_cred = false, needs_mis = false;
    std::vector<std::string> cred_runs, mis_runs;
    for (const FusionRecipe& r : recipes) {
        bool uses_cred = false, uses_mis = false;
        switch (r.strategy) {
            case FusionStrategy::weighted_average:
                uses_cred = r.weights[1] != 0.0;
                uses_mis = r.weights[2] != 0.0;
                break;
            case FusionStrategy::distance_best:
                uses_cred = uses_mis = true;
                break;
            case FusionStrategy::single_aspect:
                uses_cred = r.aspect == Aspect::credibility;
                uses_mis = r.aspect == Aspect::misinformation;
                break;
            default:
                break;
        }
        if (uses_cred) {
            needs_cred = true;
            cred_runs.push_back(r.run_id);
        }
        if (uses_mis) {
            needs_mis = true;
            mis_runs.push_back(r.run_id);
        }
    }
    auto join = [](const std::vector<std::string>& v) {
        std::string out;
        for (const std::string& s : v) {
            if (!out.empty()) out += ", ";
            out += s;
        }
        return out;
    };
    std::string cred_path = config.out("scores_credibility.jsonl");
    std::string mis_path = config.out("scores_misinfo.jsonl");
    if (needs_cred && !file_exists(cred_path))
        throw error("credibility scores missing (" + cred_path + "); needed by: " + join(cred_runs));
    if (needs_mis && !file_exists(mis_path))
        throw error("misinformation scores missing (" + mis_path + "); needed by: " + join(mis_runs));

    std::map<std::pair<int, std::string>, double> cred, mis;
    if (needs_cred) cred = read_scores(cred_path);
    if (needs_mis) mis = read_scores(mis_path);

    std::map<RetrievalModel, AspectScoreMatrix> matrices;
    for (const auto& [model, fields] : models) {
        std::string name = pipeline_detail::model_name(model);
        std::string run_path = config.out("initial_" + name + ".run");
        if (!file_exists(run_path))
            throw error("initial run missing (" + run_path + "); run `score relevance` first");
        auto run = read_run(run_path);
        initial_out[model] = run;
        AspectScoreMatrix matrix;
        for (const auto& [topic_id, entries] : run) {
            TopicMatrix topic;
            topic.topic_id = topic_id;
            for (const RunFileEntry& e : entries) {
                AspectRow row;
                row.doc_id = e.doc_id;
                row.x[0] = e.score;
                if (needs_cred) {
                    auto it = cred.find({topic_id, e.doc_id});
                    if (it == cred.end())
                        throw error("credibility score missing for topic " + std::to_string(topic_id) +
                                    " doc " + e.doc_id);
                    row.x[1] = it->second;
                }
                if (needs_mis) {
                    auto it = mis.find({topic_id, e.doc_id});
                    if (it == mis.end())
                        throw error("misinformation score missing for topic " +
                                    std::to_string(topic_id) + " doc " + e.doc_id);
                    row.x[2] = it->second;
                }
                topic.rows.push_back(std::move(row));
            }
            zscore_normalize(topic);
            matrix.emplace(topic_id, std::move(topic));
        }
        matrices.emplace(model, std::move(matrix));
    }
    return matrices;
}

inline void stage_fuse(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_output_dir(config);
    std::vector<FusionRecipe> recipes = pipeline_detail::load_all_recipes(config);
    {
        // validate everything up front so no partial output set is written
        std::set<std::string> produced;
        for (const FusionRecipe& recipe : recipes) {
            if (recipe.cutoff && *recipe.cutoff > config.depth)
                throw usage_error("recipe " + recipe.run_id + ": cutoff exceeds retrieval depth");
            for (const std::string& source : recipe.fuse_runs)
                if (produced.count(source) == 0)
                    throw usage_error("recipe " + recipe.run_id + ": input run " + source +
                                      " is not produced by an earlier recipe");
            produced.insert(recipe.run_id);
        }
    }

    std::map<RetrievalModel, std::map<int, std::vector<RunFileEntry>>> initial_files;
    std::map<RetrievalModel, AspectScoreMatrix> matrices = build_matrices(config, recipes, initial_files);

    std::map<RetrievalModel, std::map<int, ScoredList>> initial_lists;
    for (const auto& [model, run] : initial_files) {
        for (const auto& [topic_id, entries] : run) {
            ScoredList list;
            list.topic_id = topic_id;
            for (const RunFileEntry& e : entries) list.entries.push_back({e.doc_id, e.score});
            initial_lists[model].emplace(topic_id, std::move(list));
        }
    }

    std::filesystem::create_directories(config.out("runs"));
    std::map<std::string, FusedRun> outputs;
    std::map<std::string, const FusedRun*> prior;
    nlohmann::json manifest_runs = nlohmann::json::array();

    for (const FusionRecipe& recipe : recipes) {
        FusedRun fused;
        fused.run_id = recipe.run_id;
        fused.recipe_hash = recipe.hash();
        if (recipe.strategy == FusionStrategy::rrf) {
            std::set<int> topic_ids;
            for (const std::string& source : recipe.fuse_runs) {
                auto it = prior.find(source);
                if (it == prior.end())
                    throw error("recipe " + recipe.run_id + ": input run " + source +
                                " has not been produced (order recipes so inputs come first)");
                for (const auto& [topic_id, entries] : it->second->topics) topic_ids.insert(topic_id);
            }
            FusionInputs in{nullptr, nullptr, &prior};
            for (int topic_id : topic_ids)
                fused.topics[topic_id] = apply_recipe_topic(recipe, in, topic_id);
        } else {
            const auto& lists = initial_lists.at(*recipe.initial);
            const AspectScoreMatrix& matrix = matrices.at(*recipe.initial);
            for (const auto& [topic_id, list] : lists) {
                FusionInputs in{&list, &matrix.at(topic_id), &prior};
                fused.topics[topic_id] = apply_recipe_topic(recipe, in, topic_id);
            }
        }
        std::string path = config.out("runs/" + recipe.run_id + ".run");
        write_run(fused, path);
        auto [it, inserted] = outputs.emplace(recipe.run_id, std::move(fused));
        prior[recipe.run_id] = &it->second;
        manifest_runs.push_back({{"run_id", recipe.run_id},
                                 {"recipe_hash", it->second.recipe_hash},
                                 {"file", "runs/" + recipe.run_id + ".run"},
                                 {"digest", fnv1a64_hex(format_run(it->second))}});
        log.emit("run_written", {{"run_id", recipe.run_id}, {"path", path}});
    }

    nlohmann::json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["seed"] = config.seed;
    manifest["generated_at"] = utc_now_iso8601();
    nlohmann::json inputs = nlohmann::json::object();
    auto digest_if = [&](const std::string& path) {
        if (!path.empty() && file_exists(path)) inputs[path] = fnv1a64_hex(read_file(path));
    };
    digest_if(config.corpus);
    digest_if(config.topics);
    digest_if(config.index);
    digest_if(config.stance);
    digest_if(config.pagerank_cache);
    digest_if(config.credibility_model);
    for (const std::string& r : config.recipes) digest_if(r);
    manifest["inputs"] = inputs;
    manifest["runs"] = manifest_runs;
    write_file_atomic(config.out("manifest.json"), manifest.dump(1) + "\n");
    log.emit("manifest_written", {{"runs", manifest_runs.size()}});
}

inline void stage_evaluate(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.qrels, "qrels");
    pipeline_detail::require_output_dir(config);
    // a directory holds per-mapping files; a single file is the combined format
    MappingQrels qrels = std::filesystem::is_directory(config.qrels)
                             ? load_mapping_qrels_dir(config.qrels)
                             : expand_qrels(load_combined_qrels(config.qrels));
    if (qrels.empty()) throw error("qrels are empty: " + config.qrels);

    std::string runs_dir = config.out("runs");
    if (!file_exists(runs_dir)) throw usage_error("no runs directory under output_dir; run `fuse` first");

    std::map<std::string, std::vector<MeasureResult>> per_run;
    std::map<std::string, double> rprec_by_run;
    std::vector<std::filesystem::path> run_files;
    for (const auto& entry : std::filesystem::directory_iterator(runs_dir))
        if (entry.path().extension() == ".run") run_files.push_back(entry.path());
    std::sort(run_files.begin(), run_files.end());
    if (run_files.empty()) throw usage_error("no .run files under " + runs_dir);

    for (const auto& path : run_files) {
        std::string run_id = path.stem().string();
        auto run = read_run(path.string());
        per_run[run_id] = evaluate_run(run_id, run, qrels, config.eval);
        if (auto hr = harmful_rprec(run, qrels)) rprec_by_run[run_id] = *hr;
        log.emit("run_evaluated", {{"run_id", run_id}});
    }

    std::filesystem::create_directories(config.out("eval"));
    write_file_atomic(config.out("eval/measures.tsv"), format_measure_table_tsv(per_run));
    write_file_atomic(config.out("eval/measures.json"), format_measure_table_json(per_run));
    write_file_atomic(config.out("eval/rprec.tsv"), format_rprec_table_tsv(rprec_by_run));
    write_file_atomic(config.out("eval/harmful_helpful.csv"), format_harmful_helpful_csv(per_run));
    log.emit("evaluation_written", {{"runs", per_run.size()}});
}

inline void stage_fetch_pagerank(const PipelineConfig& config, const std::string& api_key,
                                 const std::vector<std::string>& domains, EventLog& log,
                                 const FetchOptions& opts = {}) {
    if (config.pagerank_cache.empty()) throw usage_error("pagerank_cache path is not configured");
    PageRankCache cache;
    if (file_exists(config.pagerank_cache)) cache = PageRankCache::load(config.pagerank_cache);
    std::vector<std::string> to_fetch;
    for (const std::string& domain : domains)
        if (!cache.find(domain)) to_fetch.push_back(domain);
    std::vector<PageRankRecord> records = fetch_pagerank(to_fetch, api_key, opts);
    std::size_t unknown = 0;
    for (PageRankRecord& rec : records) {
        if (!rec.page_rank_decimal) ++unknown;
        cache.upsert(std::move(rec));
    }
    cache.save(config.pagerank_cache);
    log.emit("pagerank_fetched", {{"requested", to_fetch.size()},
                                  {"unknown", unknown},
                                  {"cache_size", cache.size()},
                                  {"path", config.pagerank_cache}});
}

/// The full pipeline: index, train (when a training csv is configured and no
/// model exists yet), score all three aspects, fuse, and evaluate when qrels
/// are configured. Every referenced input is validated before any stage
/// writes anything.
inline void stage_pipeline(const PipelineConfig& config, EventLog& log) {
    pipeline_detail::require_file(config.corpus, "corpus");
    pipeline_detail::require_file(config.topics, "topics");
    pipeline_detail::require_output_dir(config);
    pipeline_detail::load_all_recipes(config);
    if (!config.stance.empty()) pipeline_detail::require_file(config.stance, "stance file");
    if (!config.pagerank_cache.empty() && !file_exists(config.pagerank_cache))
        throw usage_error("pagerank cache not found: " + config.pagerank_cache);
    if (!config.qrels.empty()) pipeline_detail::require_file(config.qrels, "qrels");
    if (config.credibility_model.empty())
        throw usage_error("credibility_model path is not configured");
    if (!file_exists(config.credibility_model))
        pipeline_detail::require_file(config.training_csv,
                                      "training csv (no credibility model exists yet)");

    stage_index(config, log);
    if (!config.credibility_model.empty() && !file_exists(config.credibility_model)) {
        if (config.training_csv.empty())
            throw usage_error("credibility model does not exist and no training_csv is configured");
        stage_train_cred(config, log);
    }
    stage_score_relevance(config, log);
    stage_score_credibility(config, log);
    stage_score_misinfo(config, log);
    stage_fuse(config, log);
    if (!config.qrels.empty()) stage_evaluate(config, log);
}

}  // namespace trirank
