#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "trirank/common.hpp"
#include "trirank/search.hpp"

namespace trirank {

enum class Aspect { relevance = 0, credibility = 1, misinformation = 2 };
inline constexpr std::size_t kAspects = 3;

inline const char* aspect_name(Aspect a) {
    switch (a) {
        case Aspect::relevance: return "relevance";
        case Aspect::credibility: return "credibility";
        default: return "misinformation";
    }
}

inline Aspect aspect_from_name(const std::string& name) {
    if (name == "relevance") return Aspect::relevance;
    if (name == "credibility") return Aspect::credibility;
    if (name == "misinformation") return Aspect::misinformation;
    throw error("unknown aspect: " + name);
}

using AspectVector = std::array<double, kAspects>;

struct AspectRow {
    std::string doc_id;
    AspectVector x{};  // raw scores
    AspectVector z{};  // per-topic standardized scores
};

/// Raw and standardized scores of every document retrieved for one topic.
struct TopicMatrix {
    int topic_id = 0;
    std::vector<AspectRow> rows;  // in initial-run order

    const AspectRow* find(const std::string& doc_id) const {
        for (const AspectRow& row : rows)
            if (row.doc_id == doc_id) return &row;
        return nullptr;
    }
};

using AspectScoreMatrix = std::map<int, TopicMatrix>;

/// Per-topic, per-aspect z-scores with population standard deviation.
/// A zero-deviation aspect gets z = 0 for every document.
inline void zscore_normalize(TopicMatrix& topic) {
    if (topic.rows.empty()) return;
    double n = static_cast<double>(topic.rows.size());
    for (std::size_t a = 0; a < kAspects; ++a) {
        double mean = 0.0;
        for (const AspectRow& row : topic.rows) mean += row.x[a];
        mean /= n;
        double var = 0.0;
        for (const AspectRow& row : topic.rows) {
            double d = row.x[a] - mean;
            var += d * d;
        }
        double sigma = std::sqrt(var / n);
        for (AspectRow& row : topic.rows)
            row.z[a] = sigma > 0.0 ? (row.x[a] - mean) / sigma : 0.0;
    }
}

inline void zscore_normalize(AspectScoreMatrix& matrix) {
    for (auto& [topic_id, topic] : matrix) zscore_normalize(topic);
}

inline double reverse_aspect(double z) { return -z; }

inline double weighted_average(const AspectVector& z, const AspectVector& weights) {
    double s = 0.0;
    for (std::size_t a = 0; a < kAspects; ++a) s += weights[a] * z[a];
    return s;
}

enum class Orientation { max, min };

/// Coordinate-wise extremum of the z-scores over all documents of a topic.
inline AspectVector best_score_vector(const TopicMatrix& topic,
                                      const std::array<Orientation, kAspects>& orientation) {
    AspectVector best{};
    for (std::size_t a = 0; a < kAspects; ++a) {
        double value = topic.rows.front().z[a];
        for (const AspectRow& row : topic.rows) {
            if (orientation[a] == Orientation::max)
                value = std::max(value, row.z[a]);
            else
                value = std::min(value, row.z[a]);
        }
        best[a] = value;
    }
    return best;
}

enum class DistanceMetric { euclidean, chebyshev };

inline double aspect_distance(const AspectVector& a, const AspectVector& b, DistanceMetric metric) {
    if (metric == DistanceMetric::euclidean) {
        double sum = 0.0;
        for (std::size_t i = 0; i < kAspects; ++i) {
            double d = a[i] - b[i];
            sum += d * d;
        }
        return std::sqrt(sum);
    }
    double mx = 0.0;
    for (std::size_t i = 0; i < kAspects; ++i) mx = std::max(mx, std::abs(a[i] - b[i]));
    return mx;
}

/// Reciprocal rank fusion of several rankings over (roughly) the same
/// documents: RRF(d) = sum over rankings of 1/(k + rank(d)), where a document
/// missing from a ranking is assigned rank (length + 1).
inline std::vector<ScoredEntry> rrf_fuse(const std::vector<std::vector<std::string>>& rankings,
                                         int k) {
    if (k <= 0) throw error("rrf k must be positive");
    if (rankings.size() < 2) throw error("rrf needs at least two rankings");
    std::map<std::string, double> scores;
    std::set<std::string> all_docs;
    for (const auto& ranking : rankings)
        for (const std::string& doc : ranking) all_docs.insert(doc);
    for (const auto& ranking : rankings) {
        std::map<std::string, std::size_t> rank_of;
        for (std::size_t i = 0; i < ranking.size(); ++i) rank_of[ranking[i]] = i + 1;
        std::size_t missing_rank = ranking.size() + 1;
        for (const std::string& doc : all_docs) {
            auto it = rank_of.find(doc);
            std::size_t rank = it == rank_of.end() ? missing_rank : it->second;
            scores[doc] += 1.0 / (static_cast<double>(k) + static_cast<double>(rank));
        }
    }
    std::vector<ScoredEntry> out;
    out.reserve(scores.size());
    for (const auto& [doc, score] : scores) out.push_back({doc, score});
    std::sort(out.begin(), out.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    return out;
}

enum class FusionStrategy { baseline, weighted_average, distance_best, single_aspect, rrf };

inline const char* strategy_name(FusionStrategy s) {
    switch (s) {
        case FusionStrategy::baseline: return "baseline";
        case FusionStrategy::weighted_average: return "weighted_average";
        case FusionStrategy::distance_best: return "distance_best";
        case FusionStrategy::single_aspect: return "single_aspect";
        default: return "rrf";
    }
}

/// Declarative description of one run.
struct FusionRecipe {
    std::string run_id;
    FusionStrategy strategy = FusionStrategy::baseline;
    std::optional<RetrievalModel> initial;       // absent for pure rank fusion
    std::vector<std::string> query_fields = {"title", "description"};
    std::optional<std::size_t> cutoff;           // re-rank the top-N head
    AspectVector weights{};                      // weighted_average
    Aspect aspect = Aspect::relevance;           // single_aspect
    std::array<bool, kAspects> reverse = {false, false, false};
    std::array<Orientation, kAspects> orientation = {Orientation::max, Orientation::max,
                                                     Orientation::max};
    DistanceMetric distance = DistanceMetric::euclidean;
    int rrf_k = 60;
    std::vector<std::string> fuse_runs;          // rrf inputs, by run_id

    std::string canonical_json() const;
    std::string hash() const { return fnv1a64_hex(canonical_json()); }
};

inline FusionRecipe recipe_from_json(const nlohmann::json& j) {
    FusionRecipe r;
    r.run_id = j.at("run_id").get<std::string>();
    std::string strategy = j.at("strategy").get<std::string>();
    if (strategy == "baseline") r.strategy = FusionStrategy::baseline;
    else if (strategy == "weighted_average") r.strategy = FusionStrategy::weighted_average;
    else if (strategy == "distance_best") r.strategy = FusionStrategy::distance_best;
    else if (strategy == "single_aspect") r.strategy = FusionStrategy::single_aspect;
    else if (strategy == "rrf") r.strategy = FusionStrategy::rrf;
    else throw error("recipe " + r.run_id + ": unknown strategy " + strategy);

    if (j.contains("initial") && !j["initial"].is_null()) {
        std::string model = j["initial"].get<std::string>();
        if (model == "bm25") r.initial = RetrievalModel::bm25;
        else if (model == "rm3") r.initial = RetrievalModel::rm3;
        else throw error("recipe " + r.run_id + ": unknown initial model " + model);
    }
    if (j.contains("query_fields")) r.query_fields = j["query_fields"].get<std::vector<std::string>>();
    if (j.contains("cutoff") && !j["cutoff"].is_null()) r.cutoff = j["cutoff"].get<std::size_t>();
    if (j.contains("weights"))
        for (const auto& [name, value] : j["weights"].items())
            r.weights[static_cast<std::size_t>(aspect_from_name(name))] = value.get<double>();
    if (j.contains("aspect")) r.aspect = aspect_from_name(j["aspect"].get<std::string>());
    if (j.contains("reverse"))
        for (const auto& [name, value] : j["reverse"].items())
            r.reverse[static_cast<std::size_t>(aspect_from_name(name))] = value.get<bool>();
    if (j.contains("orientation"))
        for (const auto& [name, value] : j["orientation"].items()) {
            std::string o = value.get<std::string>();
            if (o != "max" && o != "min")
                throw error("recipe " + r.run_id + ": orientation must be max or min");
            r.orientation[static_cast<std::size_t>(aspect_from_name(name))] =
                o == "max" ? Orientation::max : Orientation::min;
        }
    if (j.contains("distance")) {
        std::string d = j["distance"].get<std::string>();
        if (d == "euclidean") r.distance = DistanceMetric::euclidean;
        else if (d == "chebyshev") r.distance = DistanceMetric::chebyshev;
        else throw error("recipe " + r.run_id + ": unknown distance " + d);
    }
    if (j.contains("rrf_k")) r.rrf_k = j["rrf_k"].get<int>();
    if (j.contains("fuse_runs")) r.fuse_runs = j["fuse_runs"].get<std::vector<std::string>>();

    // strategy-specific completeness
    switch (r.strategy) {
        case FusionStrategy::rrf:
            if (r.fuse_runs.size() < 2)
                throw error("recipe " + r.run_id + ": rrf requires at least two fuse_runs");
            if (r.rrf_k <= 0) throw error("recipe " + r.run_id + ": rrf_k must be positive");
            break;
        case FusionStrategy::weighted_average:
            for (std::size_t a = 0; a < kAspects; ++a) {
                const char* name = aspect_name(static_cast<Aspect>(a));
                if (!j.contains("weights") || !j["weights"].contains(name))
                    throw error("recipe " + r.run_id + ": weighted_average requires a weight for " +
                                std::string(name) + " (zero is allowed)");
            }
            [[fallthrough]];
        case FusionStrategy::distance_best:
        case FusionStrategy::single_aspect:
            if (!r.cutoff) throw error("recipe " + r.run_id + ": re-ranking requires a cutoff");
            [[fallthrough]];
        case FusionStrategy::baseline:
            if (!r.initial)
                throw error("recipe " + r.run_id + ": an initial model is required");
            break;
    }
    if (r.strategy == FusionStrategy::single_aspect && !j.contains("aspect"))
        throw error("recipe " + r.run_id + ": single_aspect requires an aspect");
    if (r.strategy == FusionStrategy::distance_best && !j.contains("orientation"))
        throw error("recipe " + r.run_id + ": distance_best requires orientations");
    return r;
}

inline nlohmann::json recipe_to_json(const FusionRecipe& r) {
    nlohmann::json j;
    j["run_id"] = r.run_id;
    j["strategy"] = strategy_name(r.strategy);
    if (r.initial) j["initial"] = *r.initial == RetrievalModel::bm25 ? "bm25" : "rm3";
    j["query_fields"] = r.query_fields;
    if (r.cutoff) j["cutoff"] = *r.cutoff;
    if (r.strategy == FusionStrategy::weighted_average) {
        nlohmann::json w;
        for (std::size_t a = 0; a < kAspects; ++a)
            w[aspect_name(static_cast<Aspect>(a))] = r.weights[a];
        j["weights"] = w;
    }
    if (r.strategy == FusionStrategy::single_aspect) j["aspect"] = aspect_name(r.aspect);
    nlohmann::json rev;
    for (std::size_t a = 0; a < kAspects; ++a)
        if (r.reverse[a]) rev[aspect_name(static_cast<Aspect>(a))] = true;
    if (!rev.empty()) j["reverse"] = rev;
    if (r.strategy == FusionStrategy::distance_best) {
        nlohmann::json o;
        for (std::size_t a = 0; a < kAspects; ++a)
            o[aspect_name(static_cast<Aspect>(a))] =
                r.orientation[a] == Orientation::max ? "max" : "min";
        j["orientation"] = o;
        j["distance"] = r.distance == DistanceMetric::euclidean ? "euclidean" : "chebyshev";
    }
    if (r.strategy == FusionStrategy::rrf) {
        j["rrf_k"] = r.rrf_k;
        j["fuse_runs"] = r.fuse_runs;
    }
    return j;
}

inline std::string FusionRecipe::canonical_json() const { return recipe_to_json(*this).dump(); }

inline std::vector<FusionRecipe> load_recipes(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    if (!j.is_array()) throw error("recipe file must be a JSON array: " + path);
    std::vector<FusionRecipe> recipes;
    std::set<std::string> ids;
    for (const auto& item : j) {
        FusionRecipe r = recipe_from_json(item);
        if (!ids.insert(r.run_id).second)
            throw error("duplicate run_id in recipe file: " + r.run_id);
        recipes.push_back(std::move(r));
    }
    return recipes;
}

/// One final ranking per topic plus the recipe fingerprint it came from.
struct FusedRun {
    std::string run_id;
    std::string recipe_hash;
    std::map<int, std::vector<ScoredEntry>> topics;
};

namespace fusion_detail {

/// Cap scores so the emitted column strictly decreases while preserving the
/// already-decided order.
inline void enforce_strictly_decreasing(std::vector<ScoredEntry>& entries) {
    constexpr double kStep = 1e-6;
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].score >= entries[i - 1].score)
            entries[i].score = entries[i - 1].score - kStep;
}

inline void sort_desc_tied_by_doc(std::vector<ScoredEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

}  // namespace fusion_detail

struct FusionInputs {
    const ScoredList* initial = nullptr;                       // per topic
    const TopicMatrix* matrix = nullptr;                       // per topic
    const std::map<std::string, const FusedRun*>* prior_runs = nullptr;
};

/// Re-rank one topic of the initial run according to the recipe. The head of
/// size cutoff is reordered by the strategy; documents below the cut-off keep
/// their initial relative order behind it. The output is a permutation of the
/// input and its score column strictly decreases (the baseline strategy
/// passes the initial run through untouched).
inline std::vector<ScoredEntry> apply_recipe_topic(const FusionRecipe& recipe,
                                                   const FusionInputs& in, int topic_id) {
    using namespace fusion_detail;
    if (recipe.strategy == FusionStrategy::rrf) {
        std::vector<std::vector<std::string>> rankings;
        for (const std::string& source : recipe.fuse_runs) {
            auto it = in.prior_runs->find(source);
            if (it == in.prior_runs->end())
                throw error("recipe " + recipe.run_id + ": missing input run " + source);
            auto topic_it = it->second->topics.find(topic_id);
            if (topic_it == it->second->topics.end()) continue;
            std::vector<std::string> docs;
            docs.reserve(topic_it->second.size());
            for (const ScoredEntry& e : topic_it->second) docs.push_back(e.doc_id);
            rankings.push_back(std::move(docs));
        }
        if (rankings.size() < 2)
            throw error("recipe " + recipe.run_id + ": fewer than two input rankings for topic " +
                        std::to_string(topic_id));
        std::vector<ScoredEntry> fused = rrf_fuse(rankings, recipe.rrf_k);
        enforce_strictly_decreasing(fused);
        return fused;
    }

    const std::vector<ScoredEntry>& initial = in.initial->entries;
    if (recipe.strategy == FusionStrategy::baseline) return initial;

    const TopicMatrix& matrix = *in.matrix;
    std::size_t head_size = std::min(recipe.cutoff.value_or(initial.size()), initial.size());

    auto oriented = [&](const AspectRow& row) -> AspectVector {
        AspectVector z = row.z;
        for (std::size_t a = 0; a < kAspects; ++a)
            if (recipe.reverse[a]) z[a] = reverse_aspect(z[a]);
        return z;
    };
    auto z_of = [&](const std::string& doc_id) -> AspectVector {
        const AspectRow* row = matrix.find(doc_id);
        if (!row)
            throw error("recipe " + recipe.run_id + ": no aspect scores for doc " + doc_id +
                        " in topic " + std::to_string(topic_id));
        return oriented(*row);
    };

    std::vector<ScoredEntry> head;
    head.reserve(head_size);
    switch (recipe.strategy) {
        case FusionStrategy::weighted_average: {
            for (std::size_t i = 0; i < head_size; ++i)
                head.push_back({initial[i].doc_id, weighted_average(z_of(initial[i].doc_id), recipe.weights)});
            sort_desc_tied_by_doc(head);
            break;
        }
        case FusionStrategy::single_aspect: {
            std::size_t a = static_cast<std::size_t>(recipe.aspect);
            for (std::size_t i = 0; i < head_size; ++i)
                head.push_back({initial[i].doc_id, z_of(initial[i].doc_id)[a]});
            sort_desc_tied_by_doc(head);
            break;
        }
        case FusionStrategy::distance_best: {
            // best vector over every document of R, on the same (possibly
            // reversed) z coordinates the documents are measured in
            AspectVector best = oriented(matrix.rows.front());
            for (const AspectRow& row : matrix.rows) {
                AspectVector z = oriented(row);
                for (std::size_t a = 0; a < kAspects; ++a)
                    best[a] = recipe.orientation[a] == Orientation::max ? std::max(best[a], z[a])
                                                                        : std::min(best[a], z[a]);
            }
            for (std::size_t i = 0; i < head_size; ++i) {
                // negated distance: closer to the best vector ranks higher
                double dist = aspect_distance(best, z_of(initial[i].doc_id), recipe.distance);
                head.push_back({initial[i].doc_id, -dist});
            }
            sort_desc_tied_by_doc(head);
            break;
        }
        default:
            throw error("unhandled strategy");
    }
    std::vector<ScoredEntry> out = std::move(head);
    for (std::size_t i = head_size; i < initial.size(); ++i) out.push_back(initial[i]);
    enforce_strictly_decreasing(out);
    return out;
}

}  // namespace trirank
