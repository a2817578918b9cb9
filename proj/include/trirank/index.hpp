#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trirank/binio.hpp"
#include "trirank/common.hpp"
#include "trirank/corpus.hpp"
#include "trirank/text.hpp"

namespace trirank {

struct Posting {
    std::uint32_t doc = 0;  // ordinal into doc_ids
    std::uint32_t tf = 0;
};

/// Immutable inverted index over tokenized document text. Terms are kept in
/// a sorted map and postings sorted by ordinal, so serialization is
/// deterministic for a fixed input order.
struct IndexedCorpus {
    std::map<std::string, std::vector<Posting>> postings;
    std::vector<std::uint64_t> doc_lengths;  // token count per ordinal
    std::vector<std::string> doc_ids;
    double avgdl = 0.0;
    std::uint64_t total_tokens = 0;

    std::size_t doc_count() const { return doc_ids.size(); }

    std::uint64_t collection_tf(const std::string& term) const {
        auto it = postings.find(term);
        if (it == postings.end()) return 0;
        std::uint64_t sum = 0;
        for (const Posting& p : it->second) sum += p.tf;
        return sum;
    }
};

inline IndexedCorpus build_index(const std::vector<ParsedDocument>& docs) {
    IndexedCorpus index;
    std::unordered_set<std::string> seen;
    seen.reserve(docs.size());
    index.doc_ids.reserve(docs.size());
    index.doc_lengths.reserve(docs.size());
    for (const ParsedDocument& doc : docs) {
        if (!seen.insert(doc.doc_id).second)
            throw error("duplicate doc_id in corpus: " + doc.doc_id);
        std::uint32_t ordinal = static_cast<std::uint32_t>(index.doc_ids.size());
        index.doc_ids.push_back(doc.doc_id);
        std::vector<std::string> terms = tokenize(doc.text);
        index.doc_lengths.push_back(terms.size());
        index.total_tokens += terms.size();
        std::unordered_map<std::string, std::uint32_t> tf;
        for (std::string& t : terms) ++tf[std::move(t)];
        for (auto& [term, count] : tf)
            index.postings[term].push_back({ordinal, count});
    }
    for (auto& [term, list] : index.postings)
        std::sort(list.begin(), list.end(),
                  [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    index.avgdl = index.doc_ids.empty()
                      ? 0.0
                      : static_cast<double>(index.total_tokens) / static_cast<double>(index.doc_ids.size());
    return index;
}

namespace index_io {
inline constexpr char kMagic[8] = {'T', 'R', 'I', 'R', 'I', 'D', 'X', '\0'};
inline constexpr std::uint32_t kVersion = 1;
}  // namespace index_io

inline std::string serialize_index(const IndexedCorpus& index) {
    using namespace index_io;
    using namespace binio;
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, index.doc_ids.size());
    put<double>(out, index.avgdl);
    put<std::uint64_t>(out, index.total_tokens);
    for (std::size_t i = 0; i < index.doc_ids.size(); ++i) {
        put_str(out, index.doc_ids[i]);
        put<std::uint64_t>(out, index.doc_lengths[i]);
    }
    put<std::uint64_t>(out, index.postings.size());
    for (const auto& [term, list] : index.postings) {
        put_str(out, term);
        put<std::uint64_t>(out, list.size());
        for (const Posting& p : list) {
            put<std::uint32_t>(out, p.doc);
            put<std::uint32_t>(out, p.tf);
        }
    }
    return out;
}

inline IndexedCorpus deserialize_index(std::string_view data) {
    using namespace index_io;
    using namespace binio;
    if (data.size() < sizeof(kMagic) || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
        throw error("not an index file");
    std::size_t pos = sizeof(kMagic);
    std::uint32_t version = get<std::uint32_t>(data, pos);
    if (version != kVersion)
        throw error("unsupported index version " + std::to_string(version));
    IndexedCorpus index;
    std::uint64_t n = get<std::uint64_t>(data, pos);
    index.avgdl = get<double>(data, pos);
    index.total_tokens = get<std::uint64_t>(data, pos);
    index.doc_ids.reserve(n);
    index.doc_lengths.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        index.doc_ids.push_back(get_str(data, pos));
        index.doc_lengths.push_back(get<std::uint64_t>(data, pos));
    }
    std::uint64_t terms = get<std::uint64_t>(data, pos);
    for (std::uint64_t t = 0; t < terms; ++t) {
        std::string term = get_str(data, pos);
        std::uint64_t count = get<std::uint64_t>(data, pos);
        std::vector<Posting> list;
        list.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            Posting p;
            p.doc = get<std::uint32_t>(data, pos);
            p.tf = get<std::uint32_t>(data, pos);
            list.push_back(p);
        }
        index.postings.emplace(std::move(term), std::move(list));
    }
    return index;
}

inline void save_index(const IndexedCorpus& index, const std::string& path) {
    write_file_atomic(path, serialize_index(index));
}

inline IndexedCorpus load_index(const std::string& path) {
    return deserialize_index(read_file(path));
}

}  // namespace trirank
