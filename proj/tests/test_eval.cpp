#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "trirank/eval.hpp"
#include "trirank/rng.hpp"

using namespace trirank;

namespace {

// Brute-force oracles, definition-level reimplementations kept free of the
// library's data structures.
double ap_oracle(const std::vector<int>& gains_in_rank_order, std::size_t relevant_total) {
    double hits = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < gains_in_rank_order.size(); ++i) {
        if (gains_in_rank_order[i] > 0) {
            hits += 1.0;
            sum += hits / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant_total);
}

double ndcg_oracle(const std::vector<int>& run_gains, std::vector<int> all_gains, std::size_t depth) {
    double dcg = 0.0;
    for (std::size_t i = 0; i < std::min(run_gains.size(), depth); ++i)
        dcg += run_gains[i] / std::log2(static_cast<double>(i + 2));
    std::sort(all_gains.begin(), all_gains.end(), std::greater<int>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(all_gains.size(), depth); ++i)
        idcg += all_gains[i] / std::log2(static_cast<double>(i + 2));
    return dcg / idcg;
}

}  // namespace

TEST(Ap, HandComputedValue) {
    std::map<std::string, int> gains = {{"r1", 1}, {"r2", 1}, {"n", 0}};
    auto value = average_precision({"r1", "n", "r2"}, gains);
    ASSERT_TRUE(value.has_value());
    EXPECT_NEAR(*value, (1.0 + 2.0 / 3.0) / 2.0, 1e-9);
    EXPECT_NEAR(*value, 0.83333, 1e-5);
}

TEST(Ap, PerfectAndEmpty) {
    std::map<std::string, int> gains = {{"a", 1}, {"b", 1}, {"c", 0}};
    EXPECT_DOUBLE_EQ(*average_precision({"a", "b", "c"}, gains), 1.0);
    EXPECT_DOUBLE_EQ(*average_precision({"c"}, gains), 0.0);  // no relevant retrieved
    std::map<std::string, int> none = {{"a", 0}};
    EXPECT_FALSE(average_precision({"a"}, none).has_value());  // topic skipped
}

TEST(Rprec, HandComputedValue) {
    std::map<std::string, int> gains = {{"r1", 1}, {"r2", 1}, {"n", 0}};
    EXPECT_NEAR(*rprec({"r1", "n", "r2"}, gains), 0.5, 1e-12);
    EXPECT_NEAR(*rprec({"r1", "r2", "n"}, gains), 1.0, 1e-12);
    // run shorter than R: missing positions are non-relevant
    EXPECT_NEAR(*rprec({"r1"}, gains), 0.5, 1e-12);
}

TEST(Ndcg, HandComputedValue) {
    std::map<std::string, int> gains = {{"a", 1}, {"b", 0}, {"c", 1}};
    auto value = ndcg({"a", "b", "c"}, gains);
    ASSERT_TRUE(value.has_value());
    double expected = 1.5 / (1.0 + 1.0 / std::log2(3.0));
    EXPECT_NEAR(*value, expected, 1e-9);
    EXPECT_NEAR(*value, 0.91972, 1e-5);
    EXPECT_DOUBLE_EQ(*ndcg({"a", "c", "b"}, gains), 1.0);  // ideal ordering
    std::map<std::string, int> none = {{"a", 0}};
    EXPECT_FALSE(ndcg({"a"}, none).has_value());
}

TEST(Ndcg, InvariantUnderEqualGainPermutations) {
    std::map<std::string, int> gains = {{"a", 2}, {"b", 2}, {"c", 1}, {"d", 0}};
    auto v1 = ndcg({"a", "b", "c", "d"}, gains);
    auto v2 = ndcg({"b", "a", "c", "d"}, gains);
    EXPECT_NEAR(*v1, *v2, 1e-12);
    EXPECT_DOUBLE_EQ(*v1, 1.0);
}

TEST(Measures, MatchBruteForceOnRandomInstances) {
    rng r(2026);
    for (int trial = 0; trial < 150; ++trial) {
        std::size_t n_docs = 1 + r.next_below(20);
        std::map<std::string, int> gains;
        std::vector<std::string> docs;
        for (std::size_t i = 0; i < n_docs; ++i) {
            std::string id = "d" + std::to_string(i);
            docs.push_back(id);
            gains[id] = static_cast<int>(r.next_below(3));  // graded 0..2
        }
        r.shuffle(docs);
        std::size_t run_len = 1 + r.next_below(n_docs);
        std::vector<std::string> ranking(docs.begin(), docs.begin() + run_len);

        std::vector<int> run_gains;
        for (const auto& d : ranking) run_gains.push_back(gains.at(d));
        std::vector<int> all_gains, positive;
        for (const auto& [d, g] : gains) {
            all_gains.push_back(g);
            if (g > 0) positive.push_back(g);
        }
        if (positive.empty()) {
            EXPECT_FALSE(ndcg(ranking, gains).has_value());
            continue;
        }
        auto nd = ndcg(ranking, gains, 1000);
        std::vector<int> pos_only_run = run_gains, pos_all = positive;
        EXPECT_NEAR(*nd, ndcg_oracle(run_gains, positive, 1000), 1e-9);

        // binarize for AP/Rprec
        std::map<std::string, int> binary;
        std::size_t relevant = 0;
        for (const auto& [d, g] : gains) {
            binary[d] = g > 0 ? 1 : 0;
            relevant += g > 0 ? 1 : 0;
        }
        std::vector<int> brun;
        for (const auto& d : ranking) brun.push_back(binary.at(d));
        EXPECT_NEAR(*average_precision(ranking, binary), ap_oracle(brun, relevant), 1e-9);

        double hits = 0.0;
        for (std::size_t i = 0; i < std::min(ranking.size(), relevant); ++i)
            hits += binary.at(ranking[i]);
        EXPECT_NEAR(*rprec(ranking, binary), hits / static_cast<double>(relevant), 1e-9);
    }
}

TEST(Cam, MeanOfAspects) {
    EXPECT_NEAR(cam({0.5, 0.7}), 0.6, 1e-12);
    EXPECT_NEAR(cam({0.5, 0.7, 0.9}), 0.7, 1e-12);
    EXPECT_EQ(cam({0.0, 0.0}), 0.0);
}

TEST(Compatibility, IdenticalToIdealIsOne) {
    std::map<std::string, int> gains = {{"a", 2}, {"b", 1}, {"c", 0}};
    EXPECT_NEAR(*compatibility({"a", "b", "c"}, gains), 1.0, 1e-12);
}

TEST(Compatibility, ZeroOverlapIsZero) {
    std::map<std::string, int> gains = {{"a", 1}, {"b", 1}};
    EXPECT_DOUBLE_EQ(*compatibility({"x", "y", "z"}, gains), 0.0);
}

TEST(Compatibility, SwapAtTopStrictlyLowers) {
    std::map<std::string, int> gains = {{"a", 2}, {"b", 1}};
    double ideal = *compatibility({"a", "b"}, gains);
    double swapped = *compatibility({"b", "a"}, gains);
    EXPECT_DOUBLE_EQ(ideal, 1.0);
    EXPECT_LT(swapped, 1.0);
}

TEST(Compatibility, InUnitInterval) {
    rng r(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::map<std::string, int> gains;
        std::vector<std::string> docs;
        for (std::size_t i = 0; i < 1 + r.next_below(15); ++i) {
            std::string id = "d" + std::to_string(i);
            docs.push_back(id);
            gains[id] = static_cast<int>(r.next_below(3));
        }
        r.shuffle(docs);
        auto value = compatibility(docs, gains);
        if (!value) continue;
        EXPECT_GE(*value, 0.0);
        EXPECT_LE(*value, 1.0 + 1e-12);
    }
}

TEST(Mappings, GainPredicates) {
    AspectJudgment useful_only{1, 0, 0};
    EXPECT_EQ(mapping_gain(useful_only, 3), 1);
    EXPECT_EQ(mapping_gain(useful_only, 4), 0);  // useful AND correct

    AspectJudgment all{1, 1, 1};
    EXPECT_EQ(mapping_gain(all, 4), 1);
    EXPECT_EQ(mapping_gain(all, 5), 1);
    EXPECT_EQ(mapping_gain(all, 7), 0);  // correct docs are not harmful
    EXPECT_EQ(mapping_gain(all, 8), 2);

    AspectJudgment harmful{1, 1, 0};
    EXPECT_EQ(mapping_gain(harmful, 7), 2);  // credible misinformation
    AspectJudgment harmful_noncred{1, 0, 0};
    EXPECT_EQ(mapping_gain(harmful_noncred, 7), 1);
    AspectJudgment unjudged_correct{1, 1, kUnjudged};
    EXPECT_EQ(mapping_gain(unjudged_correct, 7), 0);  // unjudged is not incorrect
}

TEST(Mappings, ConjunctiveMonotonicity) {
    // gain(5) <= gain(4) <= gain(3) pointwise over all label combinations
    for (int u = 0; u <= 1; ++u)
        for (int cr = -1; cr <= 1; ++cr)
            for (int co = -1; co <= 1; ++co) {
                AspectJudgment j{u, cr, co};
                EXPECT_LE(mapping_gain(j, 5), mapping_gain(j, 4));
                EXPECT_LE(mapping_gain(j, 4), mapping_gain(j, 3));
            }
}

TEST(Evaluate, MatchesFrozenOracle) {
    auto fixture = nlohmann::json::parse(
        read_file(std::string(TRIRANK_FIXTURES_DIR) + "/eval_expected.json"));

    AspectQrels qrels;
    for (const auto& [topic, docs] : fixture["qrels"].items())
        for (const auto& [doc, j] : docs.items()) {
            AspectJudgment judgment;
            judgment.usefulness = j[0].get<int>();
            judgment.credibility = j[1].get<int>();
            judgment.correctness = j[2].get<int>();
            qrels.topics[std::stoi(topic)][doc] = judgment;
        }
    std::map<int, std::vector<RunFileEntry>> run;
    for (const auto& [topic, docs] : fixture["run"].items()) {
        long rank = 1;
        for (const auto& doc : docs)
            run[std::stoi(topic)].push_back({doc.get<std::string>(), rank++, 0.0});
    }

    std::vector<MeasureResult> results = evaluate_run("fixture_run", run, qrels);
    ASSERT_EQ(results.size(), 9u);
    for (const MeasureResult& r : results) {
        const auto& expected = fixture["expected"][std::to_string(r.mapping_id)];
        EXPECT_NEAR(r.mean, expected["mean"].get<double>(), 1e-9) << "mapping " << r.mapping_id;
        for (const auto& [topic, v] : expected["per_topic"].items()) {
            ASSERT_TRUE(r.per_topic.count(std::stoi(topic)) > 0);
            EXPECT_NEAR(r.per_topic.at(std::stoi(topic)), v.get<double>(), 1e-9)
                << "mapping " << r.mapping_id << " topic " << topic;
        }
    }
    auto harmful = harmful_rprec(run, qrels);
    ASSERT_TRUE(harmful.has_value());
    EXPECT_NEAR(*harmful, fixture["expected"]["harmful_rprec_mean"].get<double>(), 1e-9);
}

TEST(Evaluate, CamOverIdenticalAspectQrelsEqualsPlainAp) {
    AspectQrels qrels;
    qrels.topics[1]["a"] = {1, 1, 1};
    qrels.topics[1]["b"] = {0, 0, 0};
    qrels.topics[1]["c"] = {1, 1, 1};
    std::map<int, std::vector<RunFileEntry>> run;
    run[1] = {{"a", 1, 0.0}, {"b", 2, 0.0}, {"c", 3, 0.0}};
    std::vector<MeasureResult> results = evaluate_run("r", run, qrels);
    std::map<std::string, int> gains = {{"a", 1}, {"b", 0}, {"c", 1}};
    double ap = *average_precision({"a", "b", "c"}, gains);
    EXPECT_NEAR(results[2].mean, ap, 1e-12);  // cam_map_three over equal aspects
}

TEST(Evaluate, NoOverlapIsError) {
    AspectQrels qrels;
    qrels.topics[1]["a"] = {1, 1, 1};
    std::map<int, std::vector<RunFileEntry>> run;
    run[9] = {{"a", 1, 0.0}};
    EXPECT_THROW(evaluate_run("r", run, qrels), error);
    AspectQrels empty;
    EXPECT_THROW(evaluate_run("r", run, empty), error);
}

TEST(Evaluate, Deterministic) {
    AspectQrels qrels;
    qrels.topics[1]["a"] = {1, 1, 0};
    qrels.topics[1]["b"] = {1, 0, 1};
    std::map<int, std::vector<RunFileEntry>> run;
    run[1] = {{"a", 1, 2.0}, {"b", 2, 1.0}};
    auto r1 = evaluate_run("r", run, qrels);
    auto r2 = evaluate_run("r", run, qrels);
    ASSERT_EQ(r1.size(), r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) EXPECT_EQ(r1[i].mean, r2[i].mean);
}

TEST(QrelsIo, CombinedAndBinaryFormats) {
    std::string combined = (std::filesystem::temp_directory_path() / "qrels_combined.txt").string();
    write_file_atomic(combined, "1 docA 1 1 0\n1 docB 0 -1 -1\n2 docC 1 0 1\n");
    AspectQrels qrels = load_combined_qrels(combined);
    EXPECT_EQ(qrels.topics.at(1).at("docA").correctness, 0);
    EXPECT_EQ(qrels.topics.at(1).at("docB").credibility, kUnjudged);

    std::string binary = (std::filesystem::temp_directory_path() / "qrels_binary.txt").string();
    write_file_atomic(binary, "1 0 docA 1\n1 0 docB 0\n2 0 docC 2\n");
    auto graded = load_binary_qrels(binary);
    EXPECT_EQ(graded.at(2).at("docC"), 2);
}

// A qrels directory of per-mapping files evaluates identically to the
// combined file for the mappings it provides, and simply omits the rest.
TEST(QrelsIo, PerMappingDirectoryMatchesCombinedExpansion) {
    AspectQrels combined;
    combined.topics[1]["a"] = {1, 1, 1};
    combined.topics[1]["b"] = {1, 0, 0};
    combined.topics[1]["c"] = {0, 1, kUnjudged};
    combined.topics[2]["d"] = {1, 1, 0};
    combined.topics[2]["e"] = {1, kUnjudged, 1};
    MappingQrels expanded = expand_qrels(combined);

    std::filesystem::path dir = std::filesystem::temp_directory_path() / "qrels_dir";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    auto dump = [&](const std::string& name, const GainsByTopic& gains) {
        std::string text;
        for (const auto& [topic_id, docs] : gains)
            for (const auto& [doc, g] : docs)
                text += std::to_string(topic_id) + " 0 " + doc + " " + std::to_string(g) + "\n";
        write_file_atomic((dir / name).string(), text);
    };
    dump("qrels.binary.useful", expanded.mapping_gains.at(3));
    dump("qrels.graded.harmful-only", expanded.mapping_gains.at(7));
    dump("qrels.aspect.useful", expanded.aspect_gains.at("useful"));
    dump("qrels.aspect.credible", expanded.aspect_gains.at("credible"));
    dump("qrels.aspect.correct", expanded.aspect_gains.at("correct"));

    std::map<int, std::vector<RunFileEntry>> run;
    run[1] = {{"b", 1, 3.0}, {"a", 2, 2.0}, {"c", 3, 1.0}};
    run[2] = {{"e", 1, 2.0}, {"d", 2, 1.0}};

    MappingQrels from_dir = load_mapping_qrels_dir(dir.string());
    std::vector<MeasureResult> partial = evaluate_run("r", run, from_dir);
    std::vector<MeasureResult> full = evaluate_run("r", run, combined);

    std::set<int> provided_ids;
    for (const MeasureResult& r : partial) provided_ids.insert(r.mapping_id);
    EXPECT_EQ(provided_ids, (std::set<int>{0, 1, 2, 3, 7}));
    for (const MeasureResult& p : partial) {
        const MeasureResult* f = nullptr;
        for (const MeasureResult& r : full)
            if (r.mapping_id == p.mapping_id) f = &r;
        ASSERT_NE(f, nullptr);
        EXPECT_NEAR(p.mean, f->mean, 1e-12) << "mapping " << p.mapping_id;
    }
    EXPECT_NEAR(*harmful_rprec(run, from_dir), *harmful_rprec(run, combined), 1e-12);

    // the table prints "-" for mappings without qrels
    std::map<std::string, std::vector<MeasureResult>> per_run = {{"r", partial}};
    std::string tsv = format_measure_table_tsv(per_run);
    EXPECT_NE(tsv.find("\t-"), std::string::npos);
}

TEST(QrelsIo, DuplicateJudgmentRejected) {
    std::string path = (std::filesystem::temp_directory_path() / "qrels_dup.txt").string();
    write_file_atomic(path, "1 docA 1 1 0\n1 docA 0 0 0\n");
    EXPECT_THROW(load_combined_qrels(path), error);
}
