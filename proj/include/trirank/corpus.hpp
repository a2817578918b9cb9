#pragma once

#include <functional>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trirank/common.hpp"
#include "trirank/html.hpp"

namespace trirank {

struct RawDocument {
    std::string doc_id;
    std::string url;
    std::string html;
    std::optional<std::string> published_date;
};

struct ParsedDocument {
    std::string doc_id;
    std::string url;
    std::string text;                     // sentences joined by single spaces
    std::vector<std::string> sentences;   // ordered segmentation of text
};

struct Topic {
    int topic_id = 0;
    std::string title;
    std::string description;
    std::string claim;      // the description rephrased as a statement
    int answer = 0;         // 0 = "no", 1 = "yes"
    std::string narrative;
};

struct IngestStats {
    std::size_t yielded = 0;
    std::size_t skipped = 0;
};

/// Stream a corpus JSONL file. Malformed lines are skipped and counted;
/// more than half malformed is a format error, an unreadable file an IO one.
inline IngestStats ingest_corpus(const std::string& path,
                                 const std::function<void(RawDocument&&)>& sink) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open corpus file: " + path);
    IngestStats stats;
    std::string line;
    std::size_t considered = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;  // blank lines are not records
        ++considered;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("doc_id") ||
            !j.contains("url") || !j.contains("html") || !j["doc_id"].is_string() ||
            !j["url"].is_string() || !j["html"].is_string() ||
            j["doc_id"].get_ref<const std::string&>().empty()) {
            ++stats.skipped;
            continue;
        }
        RawDocument doc;
        doc.doc_id = j["doc_id"].get<std::string>();
        doc.url = j["url"].get<std::string>();
        doc.html = j["html"].get<std::string>();
        if (j.contains("published_date") && j["published_date"].is_string())
            doc.published_date = j["published_date"].get<std::string>();
        ++stats.yielded;
        sink(std::move(doc));
    }
    if (considered > 0 && stats.skipped * 2 > considered)
        throw error("corpus format error: " + std::to_string(stats.skipped) + " of " +
                    std::to_string(considered) + " lines malformed in " + path);
    return stats;
}

inline std::vector<RawDocument> load_corpus(const std::string& path,
                                            IngestStats* stats_out = nullptr) {
    std::vector<RawDocument> docs;
    IngestStats stats = ingest_corpus(path, [&](RawDocument&& d) { docs.push_back(std::move(d)); });
    if (stats_out) *stats_out = stats;
    return docs;
}

/// Markup-stripped visible text plus its sentence segmentation. Joining
/// `sentences` with single spaces reconstructs `text` exactly.
inline ParsedDocument extract_text(const RawDocument& doc) {
    ParsedDocument parsed;
    parsed.doc_id = doc.doc_id;
    parsed.url = doc.url;
    parsed.sentences = segments_to_sentences(html_to_segments(doc.html));
    for (std::size_t i = 0; i < parsed.sentences.size(); ++i) {
        if (i > 0) parsed.text.push_back(' ');
        parsed.text += parsed.sentences[i];
    }
    return parsed;
}

inline std::vector<Topic> load_topics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open topics file: " + path);
    std::vector<Topic> topics;
    std::set<int> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw error("topics line " + std::to_string(lineno) + " is not a JSON object");
        Topic t;
        t.topic_id = j.at("topic_id").get<int>();
        t.title = j.at("title").get<std::string>();
        t.description = j.at("description").get<std::string>();
        t.claim = j.at("claim").get<std::string>();
        t.narrative = j.value("narrative", std::string());
        std::string answer = j.at("answer").get<std::string>();
        if (answer == "yes") t.answer = 1;
        else if (answer == "no") t.answer = 0;
        else throw error("topic " + std::to_string(t.topic_id) + ": answer must be \"yes\" or \"no\"");
        if (t.claim.empty())
            throw error("topic " + std::to_string(t.topic_id) + ": claim must be non-empty");
        if (!seen.insert(t.topic_id).second)
            throw error("duplicate topic_id: " + std::to_string(t.topic_id));
        topics.push_back(std::move(t));
    }
    return topics;
}

}  // namespace trirank
