#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "trirank/common.hpp"
#include "trirank/trec.hpp"

namespace trirank {

inline constexpr int kUnjudged = -1;

/// Judgments for one (topic, document) pair. Usefulness is always judged;
/// credibility and correctness may be unjudged (-1).
struct AspectJudgment {
    int usefulness = 0;
    int credibility = kUnjudged;
    int correctness = kUnjudged;
};

struct AspectQrels {
    std::map<int, std::map<std::string, AspectJudgment>> topics;

    bool empty() const { return topics.empty(); }
};

/// Combined qrels: `topic docid useful credible correct` with -1 = unjudged.
inline AspectQrels load_combined_qrels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open qrels file: " + path);
    AspectQrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int topic_id, useful, credible, correct;
        std::string doc_id;
        if (!(ss >> topic_id >> doc_id >> useful >> credible >> correct))
            throw error("malformed qrels line " + std::to_string(lineno) + " in " + path);
        AspectJudgment j;
        j.usefulness = useful;
        j.credibility = credible;
        j.correctness = correct;
        if (!qrels.topics[topic_id].emplace(doc_id, j).second)
            throw error("duplicate judgment for topic " + std::to_string(topic_id) + " doc " + doc_id);
    }
    return qrels;
}

/// TREC 4-column qrels: `topic 0 docid label` (graded labels allowed).
inline std::map<int, std::map<std::string, int>> load_binary_qrels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open qrels file: " + path);
    std::map<int, std::map<std::string, int>> qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int topic_id, label;
        std::string iteration, doc_id;
        if (!(ss >> topic_id >> iteration >> doc_id >> label))
            throw error("malformed qrels line " + std::to_string(lineno) + " in " + path);
        qrels[topic_id][doc_id] = label;
    }
    return qrels;
}

// ---------------------------------------------------------------------------
// measures (unjudged documents count as gain 0 everywhere)

/// AP = (1/R) * sum over relevant ranks of precision@rank.
inline std::optional<double> average_precision(const std::vector<std::string>& ranking,
                                               const std::map<std::string, int>& gains) {
    std::size_t relevant_total = 0;
    for (const auto& [doc, g] : gains)
        if (g > 0) ++relevant_total;
    if (relevant_total == 0) return std::nullopt;  // topic skipped
    double hits = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        auto it = gains.find(ranking[i]);
        if (it != gains.end() && it->second > 0) {
            hits += 1.0;
            sum += hits / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant_total);
}

/// Fraction of relevant documents within the first R positions; a run
/// shorter than R counts the missing positions as non-relevant.
inline std::optional<double> rprec(const std::vector<std::string>& ranking,
                                   const std::map<std::string, int>& gains) {
    std::size_t relevant_total = 0;
    for (const auto& [doc, g] : gains)
        if (g > 0) ++relevant_total;
    if (relevant_total == 0) return std::nullopt;
    double hits = 0.0;
    for (std::size_t i = 0; i < std::min(ranking.size(), relevant_total); ++i) {
        auto it = gains.find(ranking[i]);
        if (it != gains.end() && it->second > 0) hits += 1.0;
    }
    return hits / static_cast<double>(relevant_total);
}

/// nDCG with gain / log2(rank+1) discounting against the ideal ordering of
/// the judged gains, truncated at `depth`.
inline std::optional<double> ndcg(const std::vector<std::string>& ranking,
                                  const std::map<std::string, int>& gains, std::size_t depth = 1000) {
    std::vector<int> ideal;
    for (const auto& [doc, g] : gains)
        if (g > 0) ideal.push_back(g);
    if (ideal.empty()) return std::nullopt;
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());

    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(ranking.size(), depth); ++i) {
        auto it = gains.find(ranking[i]);
        if (it != gains.end() && it->second > 0)
            dcg += static_cast<double>(it->second) / std::log2(static_cast<double>(i + 2));
    }
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(ideal.size(), depth); ++i)
        idcg += static_cast<double>(ideal[i]) / std::log2(static_cast<double>(i + 2));
    return dcg / idcg;
}

/// Mean of per-aspect effectiveness values.
inline double cam(const std::vector<double>& per_aspect) {
    if (per_aspect.empty()) throw error("cam needs at least one aspect value");
    double sum = 0.0;
    for (double v : per_aspect) sum += v;
    return sum / static_cast<double>(per_aspect.size());
}

struct CompatibilityParams {
    double persistence = 0.95;
    double residual_tolerance = 1e-6;  // truncation depth = log(tol)/log(p)

    std::size_t depth() const {
        return static_cast<std::size_t>(
            std::ceil(std::log(residual_tolerance) / std::log(persistence)));
    }
};

/// RBP-style similarity of the run to an ideal ordering of the graded gains:
/// RBP(run) / RBP(ideal), both truncated where the geometric residual falls
/// under the tolerance.
inline std::optional<double> compatibility(const std::vector<std::string>& ranking,
                                           const std::map<std::string, int>& gains,
                                           const CompatibilityParams& params = {}) {
    std::vector<int> ideal;
    for (const auto& [doc, g] : gains)
        if (g > 0) ideal.push_back(g);
    if (ideal.empty()) return std::nullopt;
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());

    std::size_t depth = params.depth();
    double p = params.persistence;
    double run_rbp = 0.0, ideal_rbp = 0.0, decay = 1.0 - p, weight = 1.0;
    for (std::size_t i = 0; i < std::min(ranking.size(), depth); ++i) {
        auto it = gains.find(ranking[i]);
        if (it != gains.end() && it->second > 0)
            run_rbp += decay * weight * static_cast<double>(it->second);
        weight *= p;
    }
    weight = 1.0;
    for (std::size_t i = 0; i < std::min(ideal.size(), depth); ++i) {
        ideal_rbp += decay * weight * static_cast<double>(ideal[i]);
        weight *= p;
    }
    return ideal_rbp > 0.0 ? run_rbp / ideal_rbp : 0.0;
}

// ---------------------------------------------------------------------------
// the nine mapping/measure pairs

enum class MeasureKind { cam_map, cam_map_three, ndcg, compatibility };

struct LabelMapping {
    int id;
    std::string qrels_name;
    std::string measure_name;
    MeasureKind kind;
};

inline const std::vector<LabelMapping>& label_mappings() {
    static const std::vector<LabelMapping> mappings = {
        {0, "2aspects.correct-credible", "cam_map", MeasureKind::cam_map},
        {1, "2aspects.useful-credible", "cam_map", MeasureKind::cam_map},
        {2, "3aspects", "cam_map_three", MeasureKind::cam_map_three},
        {3, "binary.useful", "ndcg", MeasureKind::ndcg},
        {4, "binary.useful-correct", "ndcg", MeasureKind::ndcg},
        {5, "binary.useful-correct-credible", "ndcg", MeasureKind::ndcg},
        {6, "binary.useful-credible", "ndcg", MeasureKind::ndcg},
        {7, "graded.harmful-only", "compatibility", MeasureKind::compatibility},
        {8, "graded.helpful-only", "compatibility", MeasureKind::compatibility},
    };
    return mappings;
}

/// Binary gain for one judged document under a named aspect.
inline int aspect_gain(const AspectJudgment& j, const std::string& aspect) {
    if (aspect == "useful") return j.usefulness == 1 ? 1 : 0;
    if (aspect == "credible") return j.credibility == 1 ? 1 : 0;
    if (aspect == "correct") return j.correctness == 1 ? 1 : 0;
    throw error("unknown aspect name: " + aspect);
}

/// Gain of one judged document under a mapping id (ids 3..8; the cam
/// mappings 0..2 are evaluated per aspect instead).
inline int mapping_gain(const AspectJudgment& j, int mapping_id) {
    bool useful = j.usefulness == 1;
    bool credible = j.credibility == 1;
    bool correct = j.correctness == 1;
    bool incorrect = j.correctness == 0;  // judged incorrect, not merely unjudged
    switch (mapping_id) {
        case 3: return useful ? 1 : 0;
        case 4: return useful && correct ? 1 : 0;
        case 5: return useful && correct && credible ? 1 : 0;
        case 6: return useful && credible ? 1 : 0;
        case 7:  // harmful: useful but judged incorrect; credible-looking is worse
            if (useful && incorrect) return credible ? 2 : 1;
            return 0;
        case 8:  // helpful: useful and correct; fully helpful also credible
            if (useful && correct) return credible ? 2 : 1;
            return 0;
        default:
            throw error("mapping id has no single gain: " + std::to_string(mapping_id));
    }
}

/// Binary harmful gain (useful and judged incorrect), the Rprec target of the
/// Total Recall evaluation.
inline int harmful_binary_gain(const AspectJudgment& j) {
    return j.usefulness == 1 && j.correctness == 0 ? 1 : 0;
}

inline std::map<std::string, int> gains_for_mapping(
    const std::map<std::string, AspectJudgment>& topic_qrels, int mapping_id) {
    std::map<std::string, int> gains;
    for (const auto& [doc, j] : topic_qrels) gains[doc] = mapping_gain(j, mapping_id);
    return gains;
}

inline std::map<std::string, int> gains_for_aspect(
    const std::map<std::string, AspectJudgment>& topic_qrels, const std::string& aspect) {
    std::map<std::string, int> gains;
    for (const auto& [doc, j] : topic_qrels) gains[doc] = aspect_gain(j, aspect);
    return gains;
}

using GainsByTopic = std::map<int, std::map<std::string, int>>;

/// Mapping-level view of the judgments: gains per mapping id (3..8), binary
/// gains per aspect (for the cam mappings 0..2), and the binary harmful
/// gains behind the total-recall Rprec.
struct MappingQrels {
    std::map<int, GainsByTopic> mapping_gains;
    std::map<std::string, GainsByTopic> aspect_gains;  // useful / credible / correct
    GainsByTopic harmful;

    bool empty() const { return mapping_gains.empty() && aspect_gains.empty(); }

    std::set<int> topic_ids() const {
        std::set<int> ids;
        for (const auto& [m, by_topic] : mapping_gains)
            for (const auto& [topic_id, gains] : by_topic) ids.insert(topic_id);
        for (const auto& [a, by_topic] : aspect_gains)
            for (const auto& [topic_id, gains] : by_topic) ids.insert(topic_id);
        return ids;
    }
};

/// Expand combined three-aspect judgments into per-mapping gains.
inline MappingQrels expand_qrels(const AspectQrels& qrels) {
    MappingQrels out;
    for (const auto& [topic_id, topic_qrels] : qrels.topics) {
        for (const LabelMapping& mapping : label_mappings()) {
            if (mapping.kind == MeasureKind::cam_map || mapping.kind == MeasureKind::cam_map_three)
                continue;
            out.mapping_gains[mapping.id][topic_id] = gains_for_mapping(topic_qrels, mapping.id);
        }
        for (const char* aspect : {"useful", "credible", "correct"})
            out.aspect_gains[aspect][topic_id] = gains_for_aspect(topic_qrels, aspect);
        for (const auto& [doc, j] : topic_qrels) out.harmful[topic_id][doc] = harmful_binary_gain(j);
    }
    return out;
}

/// Per-mapping qrels directory:
/// `qrels.<mapping name>` (4-column TREC format, labels are gains) for the
/// ndcg and compatibility mappings, plus `qrels.aspect.<useful|credible|
/// correct>` for the cam mappings. Absent files leave their mappings out.
inline MappingQrels load_mapping_qrels_dir(const std::string& dir) {
    MappingQrels out;
    auto path_of = [&](const std::string& name) {
        return (std::filesystem::path(dir) / name).string();
    };
    for (const LabelMapping& mapping : label_mappings()) {
        if (mapping.kind == MeasureKind::cam_map || mapping.kind == MeasureKind::cam_map_three)
            continue;
        std::string path = path_of("qrels." + mapping.qrels_name);
        if (!file_exists(path)) continue;
        for (auto& [topic_id, gains] : load_binary_qrels(path))
            out.mapping_gains[mapping.id][topic_id] = std::move(gains);
    }
    for (const char* aspect : {"useful", "credible", "correct"}) {
        std::string path = path_of("qrels.aspect." + std::string(aspect));
        if (!file_exists(path)) continue;
        for (auto& [topic_id, gains] : load_binary_qrels(path))
            out.aspect_gains[aspect][topic_id] = std::move(gains);
    }
    // harmful binary gains follow from the graded harmful-only file
    auto harmful_it = out.mapping_gains.find(7);
    if (harmful_it != out.mapping_gains.end()) {
        for (const auto& [topic_id, gains] : harmful_it->second)
            for (const auto& [doc, g] : gains) out.harmful[topic_id][doc] = g > 0 ? 1 : 0;
    }
    if (out.empty()) throw error("no qrels files recognized under " + dir);
    return out;
}

struct MeasureResult {
    std::string run_id;
    int mapping_id = 0;
    std::string mapping_name;
    std::string measure_name;
    std::map<int, double> per_topic;  // evaluated topics only
    double mean = 0.0;
};

struct EvalOptions {
    std::size_t ndcg_depth = 1000;
    CompatibilityParams compatibility;
};

/// Evaluate one run for every mapping whose gains are available. Topics
/// without any positive gain under a mapping are skipped for that mapping;
/// the mean is over evaluated topics.
inline std::vector<MeasureResult> evaluate_run(
    const std::string& run_id, const std::map<int, std::vector<RunFileEntry>>& run,
    const MappingQrels& qrels, const EvalOptions& opts = {}) {
    if (qrels.empty()) throw error("qrels are empty");
    std::set<int> qrels_topics = qrels.topic_ids();
    bool overlap = false;
    for (const auto& [topic_id, entries] : run)
        if (qrels_topics.count(topic_id) > 0) overlap = true;
    if (!overlap) throw error("run and qrels share no topics");

    auto ranking_of = [&](int topic_id) {
        std::vector<std::string> ranking;
        auto it = run.find(topic_id);
        if (it == run.end()) return ranking;
        ranking.reserve(it->second.size());
        for (const RunFileEntry& e : it->second) ranking.push_back(e.doc_id);
        return ranking;
    };

    std::vector<MeasureResult> results;
    for (const LabelMapping& mapping : label_mappings()) {
        MeasureResult result;
        result.run_id = run_id;
        result.mapping_id = mapping.id;
        result.mapping_name = mapping.qrels_name;
        result.measure_name = mapping.measure_name;

        if (mapping.kind == MeasureKind::cam_map || mapping.kind == MeasureKind::cam_map_three) {
            std::vector<std::string> aspects =
                mapping.kind == MeasureKind::cam_map_three
                    ? std::vector<std::string>{"useful", "credible", "correct"}
                    : (mapping.id == 0 ? std::vector<std::string>{"correct", "credible"}
                                       : std::vector<std::string>{"useful", "credible"});
            bool available = true;
            for (const std::string& aspect : aspects)
                available = available && qrels.aspect_gains.count(aspect) > 0;
            if (!available) continue;  // aspect qrels not supplied
            for (int topic_id : qrels_topics) {
                if (run.count(topic_id) == 0) continue;
                std::vector<std::string> ranking = ranking_of(topic_id);
                std::vector<double> aps;
                for (const std::string& aspect : aspects) {
                    const GainsByTopic& by_topic = qrels.aspect_gains.at(aspect);
                    auto topic_it = by_topic.find(topic_id);
                    if (topic_it == by_topic.end()) continue;
                    if (auto ap = average_precision(ranking, topic_it->second)) aps.push_back(*ap);
                }
                if (!aps.empty()) result.per_topic[topic_id] = cam(aps);
            }
        } else {
            auto gains_it = qrels.mapping_gains.find(mapping.id);
            if (gains_it == qrels.mapping_gains.end()) continue;
            for (const auto& [topic_id, gains] : gains_it->second) {
                if (run.count(topic_id) == 0) continue;
                std::vector<std::string> ranking = ranking_of(topic_id);
                std::optional<double> value =
                    mapping.kind == MeasureKind::ndcg
                        ? ndcg(ranking, gains, opts.ndcg_depth)
                        : compatibility(ranking, gains, opts.compatibility);
                if (value) result.per_topic[topic_id] = *value;
            }
        }
        double sum = 0.0;
        for (const auto& [topic_id, v] : result.per_topic) sum += v;
        result.mean = result.per_topic.empty() ? 0.0 : sum / static_cast<double>(result.per_topic.size());
        results.push_back(std::move(result));
    }
    return results;
}

inline std::vector<MeasureResult> evaluate_run(
    const std::string& run_id, const std::map<int, std::vector<RunFileEntry>>& run,
    const AspectQrels& qrels, const EvalOptions& opts = {}) {
    if (qrels.empty()) throw error("qrels are empty");
    return evaluate_run(run_id, run, expand_qrels(qrels), opts);
}

/// Mean Rprec over topics, against the binary harmful gains.
inline std::optional<double> harmful_rprec(const std::map<int, std::vector<RunFileEntry>>& run,
                                           const MappingQrels& qrels) {
    double sum = 0.0;
    std::size_t evaluated = 0;
    for (const auto& [topic_id, gains] : qrels.harmful) {
        auto run_it = run.find(topic_id);
        if (run_it == run.end()) continue;
        std::vector<std::string> ranking;
        for (const RunFileEntry& e : run_it->second) ranking.push_back(e.doc_id);
        if (auto value = rprec(ranking, gains)) {
            sum += *value;
            ++evaluated;
        }
    }
    if (evaluated == 0) return std::nullopt;
    return sum / static_cast<double>(evaluated);
}

inline std::optional<double> harmful_rprec(const std::map<int, std::vector<RunFileEntry>>& run,
                                           const AspectQrels& qrels) {
    return harmful_rprec(run, expand_qrels(qrels));
}

// ---------------------------------------------------------------------------
// report writers

/// Ad-hoc table: one row per run (sorted by run id), one column per mapping.
/// Mappings that were not evaluable (missing per-mapping qrels) print "-".
inline std::string format_measure_table_tsv(
    const std::map<std::string, std::vector<MeasureResult>>& per_run) {
    std::string out = "run_id";
    for (const LabelMapping& m : label_mappings()) out += "\t" + std::to_string(m.id);
    out += '\n';
    for (const auto& [run_id, results] : per_run) {
        out += run_id;
        for (const LabelMapping& m : label_mappings()) {
            const MeasureResult* found = nullptr;
            for (const MeasureResult& r : results)
                if (r.mapping_id == m.id) found = &r;
            out += '\t';
            if (found) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f", found->mean);
                out += buf;
            } else {
                out += '-';
            }
        }
        out += '\n';
    }
    return out;
}

inline std::string format_measure_table_json(
    const std::map<std::string, std::vector<MeasureResult>>& per_run) {
    nlohmann::json table = nlohmann::json::array();
    for (const auto& [run_id, results] : per_run) {
        nlohmann::json row;
        row["run_id"] = run_id;
        for (const MeasureResult& r : results) {
            nlohmann::json cell;
            cell["mapping"] = r.mapping_name;
            cell["measure"] = r.measure_name;
            cell["mean"] = r.mean;
            nlohmann::json topics;
            for (const auto& [topic_id, v] : r.per_topic) topics[std::to_string(topic_id)] = v;
            cell["per_topic"] = topics;
            row["measures"][std::to_string(r.mapping_id)] = cell;
        }
        table.push_back(row);
    }
    return table.dump(1) + "\n";
}

/// Total-recall table: run_id and Rprec, ascending Rprec.
inline std::string format_rprec_table_tsv(const std::map<std::string, double>& rprec_by_run) {
    std::vector<std::pair<std::string, double>> rows(rprec_by_run.begin(), rprec_by_run.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first < b.first;
    });
    std::string out = "run_id\trprec\n";
    for (const auto& [run_id, value] : rows) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", value);
        out += run_id;
        out += '\t';
        out += buf;
        out += '\n';
    }
    return out;
}

/// Scatter data pairing the harmful (id 7, lower better) and helpful (id 8,
/// higher better) compatibility means per run.
inline std::string format_harmful_helpful_csv(
    const std::map<std::string, std::vector<MeasureResult>>& per_run) {
    std::string out = "run_id,harmful,helpful\n";
    for (const auto& [run_id, results] : per_run) {
        double harmful = 0.0, helpful = 0.0;
        for (const MeasureResult& r : results) {
            if (r.mapping_id == 7) harmful = r.mean;
            if (r.mapping_id == 8) helpful = r.mean;
        }
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f\n", run_id.c_str(), harmful, helpful);
        out += buf;
    }
    return out;
}

}  // namespace trirank
