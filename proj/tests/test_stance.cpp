#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "trirank/rng.hpp"
#include "trirank/stance.hpp"

using namespace trirank;

namespace {

ParsedDocument doc_with_sentences(std::vector<std::string> sentences) {
    ParsedDocument p;
    p.doc_id = "d1";
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i) p.text.push_back(' ');
        p.text += sentences[i];
    }
    p.sentences = std::move(sentences);
    return p;
}

Topic topic_of(const std::string& title, const std::string& claim, int answer) {
    Topic t;
    t.topic_id = 7;
    t.title = title;
    t.description = title + "?";
    t.claim = claim;
    t.answer = answer;
    return t;
}

}  // namespace

TEST(Trim, StartsAtFirstKeywordSentence) {
    ParsedDocument p = doc_with_sentences({"A.", "Ibuprofen helps.", "B."});
    TrimmedDocument trimmed = trim_to_claim(p, topic_of("ibuprofen", "Ibuprofen helps.", 0));
    EXPECT_EQ(trimmed.text, "Ibuprofen helps. B.");
    EXPECT_EQ(trimmed.trigger, "ibuprofen");
}

TEST(Trim, NoMatchKeepsFullText) {
    ParsedDocument p = doc_with_sentences({"A.", "B."});
    TrimmedDocument trimmed = trim_to_claim(p, topic_of("zinc", "Zinc cures colds.", 0));
    EXPECT_EQ(trimmed.text, "A. B.");
    EXPECT_EQ(trimmed.trigger, "none");
}

TEST(Trim, KeywordInFirstSentenceKeepsEverything) {
    ParsedDocument p = doc_with_sentences({"Ibuprofen is news.", "More."});
    TrimmedDocument trimmed = trim_to_claim(p, topic_of("ibuprofen", "c", 0));
    EXPECT_EQ(trimmed.text, p.text);
}

TEST(Trim, Idempotent) {
    ParsedDocument p = doc_with_sentences({"A.", "Ibuprofen helps.", "B."});
    Topic t = topic_of("ibuprofen", "Ibuprofen helps.", 0);
    TrimmedDocument once = trim_to_claim(p, t);
    ParsedDocument again;
    again.doc_id = once.doc_id;
    again.text = once.text;
    again.sentences = {"Ibuprofen helps.", "B."};
    TrimmedDocument twice = trim_to_claim(again, t);
    EXPECT_EQ(twice.text, once.text);
    EXPECT_EQ(twice.trigger, once.trigger);
}

TEST(ExternalStance, LoadsTriples) {
    std::string path = (std::filesystem::temp_directory_path() / "stance.jsonl").string();
    std::ofstream out(path, std::ios::trunc);
    out << R"({"topic_id":7,"doc_id":"d1","p_disagree":0.2,"p_agree":0.7,"p_neutral":0.1})" << "\n";
    out.close();
    StanceLoadStats stats;
    StanceMap map = load_external_stance(path, &stats);
    ASSERT_EQ(map.size(), 1u);
    EXPECT_EQ(stats.rejected, 0u);
    const StanceProbabilities& p = map.at({7, "d1"});
    EXPECT_NEAR(p.disagree(), 0.2, 1e-9);
    EXPECT_NEAR(p.agree(), 0.7, 1e-9);
    EXPECT_NEAR(p.neutral(), 0.1, 1e-9);
}

TEST(ExternalStance, RejectsNonNormalized) {
    std::string path = (std::filesystem::temp_directory_path() / "stance_bad.jsonl").string();
    std::ofstream out(path, std::ios::trunc);
    out << R"({"topic_id":7,"doc_id":"d1","p_disagree":0.2,"p_agree":0.5,"p_neutral":0.1})" << "\n";
    out << R"({"topic_id":7,"doc_id":"d2","p_disagree":0.25,"p_agree":0.5,"p_neutral":0.25})" << "\n";
    out.close();
    StanceLoadStats stats;
    StanceMap map = load_external_stance(path, &stats);
    EXPECT_EQ(map.size(), 1u);
    EXPECT_EQ(stats.rejected, 1u);
    EXPECT_EQ(map.count({7, "d1"}), 0u);
}

TEST(ExternalStance, EmptyFileEmptyMap) {
    std::string path = (std::filesystem::temp_directory_path() / "stance_empty.jsonl").string();
    std::ofstream(path, std::ios::trunc).close();
    EXPECT_TRUE(load_external_stance(path).empty());
}

TEST(ExternalStance, DuplicateLastWins) {
    std::string path = (std::filesystem::temp_directory_path() / "stance_dup.jsonl").string();
    std::ofstream out(path, std::ios::trunc);
    out << R"({"topic_id":7,"doc_id":"d1","p_disagree":0.2,"p_agree":0.7,"p_neutral":0.1})" << "\n";
    out << R"({"topic_id":7,"doc_id":"d1","p_disagree":0.6,"p_agree":0.3,"p_neutral":0.1})" << "\n";
    out.close();
    StanceLoadStats stats;
    StanceMap map = load_external_stance(path, &stats);
    EXPECT_EQ(stats.duplicates, 1u);
    EXPECT_NEAR(map.at({7, "d1"}).disagree(), 0.6, 1e-9);
}

TEST(Lexical, NoCuesUniform) {
    LexicalStanceScorer scorer;
    TrimmedDocument trimmed;
    trimmed.text = "plain words only here";
    StanceProbabilities p = scorer.score(trimmed, topic_of("x", "Unrelated claim entirely.", 1));
    EXPECT_NEAR(p.disagree(), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(p.agree(), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(p.neutral(), 1.0 / 3.0, 1e-12);
}

TEST(Lexical, TwoAgreeCues) {
    LexicalStanceScorer scorer;
    TrimmedDocument trimmed;
    trimmed.text = "study shows treatment and further evidence confirms it";
    StanceProbabilities p = scorer.score(trimmed, topic_of("x", "Unrelated claim entirely.", 1));
    EXPECT_NEAR(p.agree(), 3.0 / 5.0, 1e-12);
    EXPECT_NEAR(p.disagree(), 1.0 / 5.0, 1e-12);
    EXPECT_NEAR(p.neutral(), 1.0 / 5.0, 1e-12);
}

TEST(Lexical, BalancedCues) {
    LexicalStanceScorer scorer;
    TrimmedDocument trimmed;
    trimmed.text = "no evidence that X helps";
    StanceProbabilities p = scorer.score(trimmed, topic_of("q", "Unrelated claim entirely.", 1));
    EXPECT_NEAR(p.disagree(), 2.0 / 5.0, 1e-12);
    EXPECT_NEAR(p.agree(), 2.0 / 5.0, 1e-12);
    EXPECT_NEAR(p.neutral(), 1.0 / 5.0, 1e-12);
}

TEST(Lexical, NegationNearClaimWordCountsAsDisagreement) {
    LexicalStanceScorer scorer;
    TrimmedDocument trimmed;
    trimmed.text = "ibuprofen does not worsen the illness";
    StanceProbabilities p = scorer.score(trimmed, topic_of("ibuprofen", "Ibuprofen worsens COVID-19.", 0));
    EXPECT_GT(p.disagree(), p.agree());
}

TEST(Lexical, FileCuesMatchDefaults) {
    LexicalStanceScorer defaults;
    LexicalStanceScorer from_files = LexicalStanceScorer::from_files(
        std::string(TRIRANK_RESOURCES_DIR) + "/cues_agree.txt",
        std::string(TRIRANK_RESOURCES_DIR) + "/cues_disagree.txt");
    TrimmedDocument trimmed;
    trimmed.text = "the myth that zinc helps was debunked";
    Topic t = topic_of("zinc", "Unrelated claim entirely.", 1);
    StanceProbabilities a = defaults.score(trimmed, t);
    StanceProbabilities b = from_files.score(trimmed, t);
    EXPECT_EQ(a.p, b.p);
}

TEST(MisinfoScoring, HandValues) {
    StanceProbabilities p;
    p.p = {0.2, 0.7, 0.1};
    EXPECT_NEAR(misinformation_score(p, 1).s, -0.5, 1e-12);

    StanceProbabilities q;
    q.p = {0.05, 0.9, 0.05};
    EXPECT_NEAR(misinformation_score(q, 0).s, 0.85, 1e-12);

    StanceProbabilities neutral;
    neutral.p = {0.1, 0.1, 0.8};
    EXPECT_NEAR(misinformation_score(neutral, 1).s, 0.0, 1e-12);
}

// Scoring the loaded map equals scoring each line directly as it is read.
TEST(MisinfoScoring, StreamingEqualsBatch) {
    std::string path = (std::filesystem::temp_directory_path() / "stance_stream.jsonl").string();
    std::ofstream out(path, std::ios::trunc);
    out << R"({"topic_id":1,"doc_id":"d1","p_disagree":0.2,"p_agree":0.7,"p_neutral":0.1})" << "\n";
    out << R"({"topic_id":1,"doc_id":"d2","p_disagree":0.5,"p_agree":0.25,"p_neutral":0.25})" << "\n";
    out << R"({"topic_id":2,"doc_id":"d1","p_disagree":0.05,"p_agree":0.9,"p_neutral":0.05})" << "\n";
    out.close();

    std::map<std::pair<int, std::string>, double> streamed;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        StanceProbabilities p;
        p.p = {j["p_disagree"].get<double>(), j["p_agree"].get<double>(),
               j["p_neutral"].get<double>()};
        p.renormalize();
        int topic = j["topic_id"].get<int>();
        int answer = topic == 1 ? 1 : 0;
        streamed[{topic, j["doc_id"].get<std::string>()}] = misinformation_score(p, answer).s;
    }

    StanceMap map = load_external_stance(path);
    ASSERT_EQ(map.size(), streamed.size());
    for (const auto& [key, probs] : map) {
        int answer = key.first == 1 ? 1 : 0;
        EXPECT_NEAR(misinformation_score(probs, answer).s, streamed.at(key), 1e-12);
    }
}

TEST(MisinfoScoring, RangeAndAntisymmetry) {
    rng r(8);
    for (int i = 0; i < 300; ++i) {
        StanceProbabilities p;
        double a = r.next_double(), b = r.next_double(), c = r.next_double();
        double sum = a + b + c;
        p.p = {a / sum, b / sum, c / sum};
        double s1 = misinformation_score(p, 1).s;
        double s0 = misinformation_score(p, 0).s;
        EXPECT_GE(s1, -1.0);
        EXPECT_LE(s1, 1.0);
        EXPECT_NEAR(s1, -s0, 1e-12);  // flipping the answer negates s
        if (p.p[0] == p.p[1]) EXPECT_EQ(s1, 0.0);
    }
}
