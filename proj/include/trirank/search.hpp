#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "trirank/index.hpp"
#include "trirank/text.hpp"

namespace trirank {

enum class RetrievalModel { bm25, rm3 };

struct QuerySpec {
    int topic_id = 0;
    std::string text;
    RetrievalModel model = RetrievalModel::bm25;
    std::size_t k_docs = 1000;
};

struct ScoredEntry {
    std::string doc_id;
    double score = 0.0;
};

/// Ranked result list: non-increasing scores, ties broken by ascending
/// doc_id, no duplicates.
struct ScoredList {
    int topic_id = 0;
    std::vector<ScoredEntry> entries;
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

struct Rm3Params {
    std::size_t fb_docs = 10;
    std::size_t fb_terms = 10;
    double original_query_weight = 0.5;
    double mu = 1000.0;  // Dirichlet smoothing for the second pass
};

namespace search_detail {

inline void sort_and_truncate(std::vector<ScoredEntry>& entries, std::size_t k) {
    std::sort(entries.begin(), entries.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (entries.size() > k) entries.resize(k);
}

}  // namespace search_detail

inline double bm25_idf(std::size_t doc_count, std::size_t df) {
    double n = static_cast<double>(doc_count);
    double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

/// Okapi BM25 with idf = ln(1 + (N - df + 0.5)/(df + 0.5)). The query is
/// treated as a term multiset: repeated terms contribute once per occurrence.
inline ScoredList bm25_search(const IndexedCorpus& index, const QuerySpec& q,
                              const Bm25Params& params = {}) {
    ScoredList out;
    out.topic_id = q.topic_id;
    std::vector<std::string> terms = tokenize(q.text);
    if (terms.empty() || index.doc_count() == 0) return out;
    std::unordered_map<std::uint32_t, double> scores;
    for (const std::string& term : terms) {
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        const auto& list = it->second;
        double idf = bm25_idf(index.doc_count(), list.size());
        for (const Posting& p : list) {
            double tf = static_cast<double>(p.tf);
            double dl = static_cast<double>(index.doc_lengths[p.doc]);
            double norm = params.k1 * (1.0 - params.b + params.b * dl / index.avgdl);
            scores[p.doc] += idf * tf / (tf + norm);
        }
    }
    out.entries.reserve(scores.size());
    for (const auto& [doc, score] : scores)
        out.entries.push_back({index.doc_ids[doc], score});
    search_detail::sort_and_truncate(out.entries, q.k_docs);
    return out;
}

/// Interpolated RM3 query model: original_query_weight * MLE(query) +
/// (1 - w) * relevance model from the top fb_docs of a first BM25 pass,
/// truncated to the fb_terms heaviest terms and renormalized.
inline std::vector<std::pair<std::string, double>> rm3_expanded_query(
    const IndexedCorpus& index, const QuerySpec& q, const Rm3Params& params = {},
    const Bm25Params& bm25 = {}) {
    QuerySpec first_pass = q;
    first_pass.model = RetrievalModel::bm25;
    ScoredList first = bm25_search(index, first_pass, bm25);
    if (first.entries.empty()) return {};

    std::size_t fb = std::min(params.fb_docs, first.entries.size());
    std::unordered_map<std::string, std::uint32_t> ordinals;
    ordinals.reserve(index.doc_ids.size());
    for (std::uint32_t i = 0; i < index.doc_ids.size(); ++i)
        ordinals.emplace(index.doc_ids[i], i);

    double score_sum = 0.0;
    std::vector<std::pair<std::uint32_t, double>> fb_docs;  // ordinal, bm25 score
    for (std::size_t i = 0; i < fb; ++i) {
        fb_docs.emplace_back(ordinals.at(first.entries[i].doc_id), first.entries[i].score);
        score_sum += first.entries[i].score;
    }
    // Relevance model: P_fb(t) = sum_d score_norm(d) * tf(t,d)/dl(d).
    std::map<std::string, double> fb_model;
    for (const auto& [term, list] : index.postings) {
        double weight = 0.0;
        for (const auto& [ordinal, score] : fb_docs) {
            auto it = std::lower_bound(list.begin(), list.end(), ordinal,
                                       [](const Posting& p, std::uint32_t v) { return p.doc < v; });
            if (it == list.end() || it->doc != ordinal) continue;
            double dl = static_cast<double>(index.doc_lengths[ordinal]);
            if (dl == 0.0) continue;
            double norm = score_sum > 0.0 ? score / score_sum : 1.0 / static_cast<double>(fb);
            weight += norm * static_cast<double>(it->tf) / dl;
        }
        if (weight > 0.0) fb_model[term] = weight;
    }
    // Keep the fb_terms heaviest (ties by term), renormalize.
    std::vector<std::pair<std::string, double>> ranked(fb_model.begin(), fb_model.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > params.fb_terms) ranked.resize(params.fb_terms);
    double total = 0.0;
    for (const auto& [term, w] : ranked) total += w;
    std::map<std::string, double> final_model;
    if (total > 0.0)
        for (const auto& [term, w] : ranked)
            final_model[term] = (1.0 - params.original_query_weight) * (w / total);

    std::vector<std::string> original = tokenize(q.text);
    for (const std::string& term : original)
        final_model[term] += params.original_query_weight / static_cast<double>(original.size());

    return {final_model.begin(), final_model.end()};
}

/// Query-likelihood scoring of a weighted query model with Dirichlet
/// smoothing; terms absent from the collection are skipped.
inline ScoredList query_likelihood_search(const IndexedCorpus& index,
                                          const std::vector<std::pair<std::string, double>>& model,
                                          int topic_id, std::size_t k_docs, double mu) {
    ScoredList out;
    out.topic_id = topic_id;
    if (index.doc_count() == 0) return out;
    double total = static_cast<double>(index.total_tokens);

    // resolve each model term once: postings, collection frequency
    struct TermEntry {
        const std::vector<Posting>* postings;
        double weight;
        double background;
    };
    std::vector<TermEntry> terms;
    std::vector<std::uint32_t> candidates;
    for (const auto& [term, weight] : model) {
        if (weight <= 0.0) continue;
        auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;  // cf = 0: skip
        std::uint64_t cf = 0;
        for (const Posting& p : it->second) {
            cf += p.tf;
            candidates.push_back(p.doc);
        }
        terms.push_back({&it->second, weight, static_cast<double>(cf) / total});
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    out.entries.reserve(candidates.size());
    for (std::uint32_t doc : candidates) {
        double dl = static_cast<double>(index.doc_lengths[doc]);
        double score = 0.0;
        for (const TermEntry& entry : terms) {
            double tf = 0.0;
            auto pit = std::lower_bound(entry.postings->begin(), entry.postings->end(), doc,
                                        [](const Posting& p, std::uint32_t v) { return p.doc < v; });
            if (pit != entry.postings->end() && pit->doc == doc) tf = static_cast<double>(pit->tf);
            score += entry.weight * std::log((tf + mu * entry.background) / (dl + mu));
        }
        out.entries.push_back({index.doc_ids[doc], score});
    }
    search_detail::sort_and_truncate(out.entries, k_docs);
    return out;
}

inline ScoredList rm3_search(const IndexedCorpus& index, const QuerySpec& q,
                             const Rm3Params& params = {}, const Bm25Params& bm25 = {}) {
    auto model = rm3_expanded_query(index, q, params, bm25);
    if (model.empty()) {
        ScoredList out;
        out.topic_id = q.topic_id;
        return out;
    }
    return query_likelihood_search(index, model, q.topic_id, q.k_docs, params.mu);
}

inline ScoredList run_query(const IndexedCorpus& index, const QuerySpec& q,
                            const Rm3Params& rm3 = {}, const Bm25Params& bm25 = {}) {
    return q.model == RetrievalModel::bm25 ? bm25_search(index, q, bm25)
                                           : rm3_search(index, q, rm3, bm25);
}

}  // namespace trirank
