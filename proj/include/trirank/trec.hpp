#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "trirank/common.hpp"
#include "trirank/fusion.hpp"
#include "trirank/search.hpp"

namespace trirank {

/// TREC run format: `topic_id Q0 doc_id rank score tag`, rank 1-based.
inline std::string format_run(const FusedRun& run) {
    std::string out;
    for (const auto& [topic_id, entries] : run.topics) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            out += std::to_string(topic_id);
            out += " Q0 ";
            out += entries[i].doc_id;
            out += ' ';
            out += std::to_string(i + 1);
            out += ' ';
            out += fmt_double(entries[i].score);
            out += ' ';
            out += run.run_id;
            out += '\n';
        }
    }
    return out;
}

inline void write_run(const FusedRun& run, const std::string& path) {
    write_file_atomic(path, format_run(run));
}

struct RunFileEntry {
    std::string doc_id;
    long rank = 0;
    double score = 0.0;
};

/// Parse a TREC run file; entries come back ordered by rank within a topic.
inline std::map<int, std::vector<RunFileEntry>> read_run(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open run file: " + path);
    std::map<int, std::vector<RunFileEntry>> topics;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        int topic_id;
        std::string q0, doc_id, tag;
        long rank;
        double score;
        if (!(ss >> topic_id >> q0 >> doc_id >> rank >> score >> tag))
            throw error("malformed run line " + std::to_string(lineno) + " in " + path);
        topics[topic_id].push_back({doc_id, rank, score});
    }
    for (auto& [topic_id, entries] : topics)
        std::sort(entries.begin(), entries.end(),
                  [](const RunFileEntry& a, const RunFileEntry& b) { return a.rank < b.rank; });
    return topics;
}

struct AspectScore {
    int topic_id = 0;
    std::string doc_id;
    double score = 0.0;
};

/// Aspect score interchange: JSONL of {"topic_id":int,"doc_id":str,"score":f}.
inline std::string format_scores(const std::vector<AspectScore>& scores) {
    std::string out;
    for (const AspectScore& s : scores) {
        nlohmann::json j;
        j["topic_id"] = s.topic_id;
        j["doc_id"] = s.doc_id;
        j["score"] = s.score;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline void write_scores(const std::vector<AspectScore>& scores, const std::string& path) {
    write_file_atomic(path, format_scores(scores));
}

inline std::map<std::pair<int, std::string>, double> read_scores(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open score file: " + path);
    std::map<std::pair<int, std::string>, double> scores;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("topic_id") || !j.contains("doc_id") || !j.contains("score"))
            throw error("malformed score line " + std::to_string(lineno) + " in " + path);
        scores[{j["topic_id"].get<int>(), j["doc_id"].get<std::string>()}] = j["score"].get<double>();
    }
    return scores;
}

}  // namespace trirank
