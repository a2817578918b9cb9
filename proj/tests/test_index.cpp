#include <gtest/gtest.h>

#include "trirank/index.hpp"
#include "trirank/rng.hpp"

using namespace trirank;

namespace {
ParsedDocument doc_of(const std::string& id, const std::string& text) {
    ParsedDocument d;
    d.doc_id = id;
    d.text = text;
    d.sentences = {text};
    return d;
}
}  // namespace

TEST(Index, HandConstructedTwoDocs) {
    IndexedCorpus index = build_index({doc_of("d1", "cat sat"), doc_of("d2", "dog sat")});
    EXPECT_EQ(index.doc_count(), 2u);
    EXPECT_DOUBLE_EQ(index.avgdl, 2.0);
    ASSERT_EQ(index.postings.at("sat").size(), 2u);
    ASSERT_EQ(index.postings.at("cat").size(), 1u);
    EXPECT_EQ(index.postings.at("cat")[0].doc, 0u);
}

TEST(Index, EmptyStream) {
    IndexedCorpus index = build_index({});
    EXPECT_EQ(index.doc_count(), 0u);
    EXPECT_EQ(index.avgdl, 0.0);
    EXPECT_TRUE(index.postings.empty());
}

TEST(Index, DuplicateDocIdFatal) {
    EXPECT_THROW(build_index({doc_of("d1", "a b"), doc_of("d1", "c d")}), error);
}

TEST(Index, TfSumsMatchDocLengths) {
    IndexedCorpus index = build_index({doc_of("d1", "cat cat dog mouse"), doc_of("d2", "dog dog dog")});
    std::vector<std::uint64_t> sums(index.doc_count(), 0);
    for (const auto& [term, list] : index.postings)
        for (const Posting& p : list) sums[p.doc] += p.tf;
    for (std::size_t i = 0; i < sums.size(); ++i)
        EXPECT_EQ(sums[i], index.doc_lengths[i]);
}

TEST(Index, SerializationRoundTrip) {
    IndexedCorpus index = build_index({doc_of("d1", "cat sat on the mat"), doc_of("d2", "dogs bark")});
    std::string blob = serialize_index(index);
    IndexedCorpus back = deserialize_index(blob);
    EXPECT_EQ(back.doc_ids, index.doc_ids);
    EXPECT_EQ(back.doc_lengths, index.doc_lengths);
    EXPECT_DOUBLE_EQ(back.avgdl, index.avgdl);
    EXPECT_EQ(back.total_tokens, index.total_tokens);
    ASSERT_EQ(back.postings.size(), index.postings.size());
    for (const auto& [term, list] : index.postings) {
        const auto& other = back.postings.at(term);
        ASSERT_EQ(other.size(), list.size());
        for (std::size_t i = 0; i < list.size(); ++i) {
            EXPECT_EQ(other[i].doc, list[i].doc);
            EXPECT_EQ(other[i].tf, list[i].tf);
        }
    }
}

// Build the same synthetic corpus twice; serialized bytes must be identical.
TEST(Index, DeterministicSerialization) {
    auto make_corpus = [] {
        rng r(1234);
        std::vector<ParsedDocument> docs;
        const char* vocab[] = {"virus", "mask", "vitamin", "cure", "study",
                               "doctor", "health", "risk", "claim", "news"};
        for (int i = 0; i < 10000; ++i) {
            std::string text;
            std::size_t len = 3 + r.next_below(20);
            for (std::size_t w = 0; w < len; ++w) {
                if (w) text.push_back(' ');
                text += vocab[r.next_below(10)];
            }
            docs.push_back(doc_of("doc" + std::to_string(i), text));
        }
        return docs;
    };
    std::string a = serialize_index(build_index(make_corpus()));
    std::string b = serialize_index(build_index(make_corpus()));
    EXPECT_EQ(a, b);
}

TEST(Index, CorruptFileRejected) {
    EXPECT_THROW(deserialize_index("garbage bytes"), error);
    IndexedCorpus index = build_index({doc_of("d1", "cat")});
    std::string blob = serialize_index(index);
    blob.resize(blob.size() / 2);
    EXPECT_THROW(deserialize_index(blob), error);
}
