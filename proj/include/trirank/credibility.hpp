#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trirank/binio.hpp"
#include "trirank/classifiers.hpp"
#include "trirank/common.hpp"
#include "trirank/features.hpp"

namespace trirank {

/// Credibility labels 1..3 collapse to 0, labels 4..5 to 1.
inline int map_labels(int raw) {
    if (raw >= 1 && raw <= 3) return 0;
    if (raw == 4 || raw == 5) return 1;
    throw error("credibility label out of range 1..5: " + std::to_string(raw));
}

struct TrainingSet {
    Matrix x;
    std::vector<int> y;  // binary labels
};

/// Mean member probability of class 1 and the soft-vote class: argmax of the
/// summed member probabilities, ties resolved to class 0.
inline double soft_vote_proba(const std::vector<double>& member_p1) {
    double sum = 0.0;
    for (double p : member_p1) sum += p;
    return sum / static_cast<double>(member_p1.size());
}

inline int soft_vote_class(const std::vector<double>& member_p1) {
    double sum1 = 0.0;
    for (double p : member_p1) sum1 += p;
    double sum0 = static_cast<double>(member_p1.size()) - sum1;
    return sum1 > sum0 ? 1 : 0;
}

/// Soft-voting ensemble of logistic regression, Gaussian naive Bayes, a
/// random forest and a Platt-calibrated linear SVM, all trained on the same
/// standardized features.
class EnsembleModel {
  public:
    std::size_t n_features() const { return n_features_; }
    double cv_accuracy() const { return cv_accuracy_; }
    bool trained() const { return n_features_ > 0; }

    std::vector<double> member_probas(const std::vector<double>& x_raw) const {
        require_usable(x_raw);
        std::vector<double> z = scaler_.transform(x_raw);
        return {lr_.predict_proba(z), gnb_.predict_proba(z), rf_.predict_proba(z),
                svm_.predict_proba(z)};
    }

    double predict_proba(const std::vector<double>& x_raw) const {
        return soft_vote_proba(member_probas(x_raw));
    }

    int predict(const std::vector<double>& x_raw) const {
        return soft_vote_class(member_probas(x_raw));
    }

    std::string serialize() const {
        std::string out = "TRIRCRD";
        out.push_back('\0');
        binio::put<std::uint32_t>(out, 1);  // format version
        binio::put<std::uint64_t>(out, n_features_);
        binio::put<std::uint64_t>(out, seed_);
        binio::put<double>(out, cv_accuracy_);
        scaler_.serialize(out);
        lr_.serialize(out);
        gnb_.serialize(out);
        rf_.serialize(out);
        svm_.serialize(out);
        return out;
    }

    static EnsembleModel deserialize(std::string_view in) {
        if (in.size() < 8 || in.substr(0, 7) != "TRIRCRD")
            throw error("not a credibility model file");
        std::size_t pos = 8;
        std::uint32_t version = binio::get<std::uint32_t>(in, pos);
        if (version != 1) throw error("unsupported model version");
        EnsembleModel model;
        model.n_features_ = binio::get<std::uint64_t>(in, pos);
        model.seed_ = binio::get<std::uint64_t>(in, pos);
        model.cv_accuracy_ = binio::get<double>(in, pos);
        model.scaler_.deserialize(in, pos);
        model.lr_.deserialize(in, pos);
        model.gnb_.deserialize(in, pos);
        model.rf_.deserialize(in, pos);
        model.svm_.deserialize(in, pos);
        return model;
    }

    void save(const std::string& path) const { write_file_atomic(path, serialize()); }
    static EnsembleModel load(const std::string& path) { return deserialize(read_file(path)); }

    friend EnsembleModel train_ensemble(const TrainingSet&, std::uint64_t);

  private:
    void require_usable(const std::vector<double>& x) const {
        if (!trained()) throw error("credibility model is not trained");
        if (x.size() != n_features_)
            throw error("feature dimension mismatch: got " + std::to_string(x.size()) +
                        ", model expects " + std::to_string(n_features_));
    }

    void fit(const TrainingSet& data, std::uint64_t seed) {
        scaler_.fit(data.x);
        Matrix z = scaler_.transform(data.x);
        lr_.fit(z, data.y);
        gnb_.fit(z, data.y);
        rf_.fit(z, data.y, seed ^ 0x9e3779b9u);
        svm_.fit(z, data.y, seed ^ 0x7f4a7c15u);
        n_features_ = data.x[0].size();
        seed_ = seed;
    }

    Standardizer scaler_;
    LogisticRegression lr_;
    GaussianNaiveBayes gnb_;
    RandomForest rf_;
    LinearSvm svm_;
    std::size_t n_features_ = 0;
    std::uint64_t seed_ = 0;
    double cv_accuracy_ = 0.0;
};

/// Deterministic training for a fixed seed. Reports stratified 5-fold
/// cross-validated accuracy alongside the final model fit on all data.
inline EnsembleModel train_ensemble(const TrainingSet& data, std::uint64_t seed) {
    if (data.x.size() != data.y.size() || data.x.empty())
        throw error("empty or inconsistent training set");
    std::size_t counts[2] = {0, 0};
    for (int label : data.y) {
        if (label != 0 && label != 1) throw error("training labels must be binary");
        ++counts[label];
    }
    if (counts[0] < 2 || counts[1] < 2)
        throw error("training requires at least 2 examples of each class");

    // stratified 5-fold assignment from a seeded shuffle
    constexpr std::size_t kFolds = 5;
    std::vector<std::size_t> fold(data.x.size());
    {
        rng r(seed);
        for (int label = 0; label < 2; ++label) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < data.y.size(); ++i)
                if (data.y[i] == label) idx.push_back(i);
            r.shuffle(idx);
            for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = i % kFolds;
        }
    }
    double correct = 0.0, evaluated = 0.0;
    for (std::size_t held = 0; held < kFolds; ++held) {
        TrainingSet train;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            if (fold[i] == held) {
                test_idx.push_back(i);
            } else {
                train.x.push_back(data.x[i]);
                train.y.push_back(data.y[i]);
            }
        }
        std::size_t train_counts[2] = {0, 0};
        for (int label : train.y) ++train_counts[label];
        if (test_idx.empty() || train_counts[0] == 0 || train_counts[1] == 0) continue;
        EnsembleModel fold_model;
        fold_model.fit(train, seed + held + 1);
        for (std::size_t i : test_idx) {
            if (fold_model.predict(data.x[i]) == data.y[i]) correct += 1.0;
            evaluated += 1.0;
        }
    }

    EnsembleModel model;
    model.fit(data, seed);
    model.cv_accuracy_ = evaluated > 0.0 ? correct / evaluated : 0.0;
    return model;
}

struct TrainingRow {
    std::string url;
    int rank = 0;
    int label_raw = 0;
    std::optional<std::vector<double>> features;  // present when the CSV carries them
};

namespace csv_detail {

inline std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace csv_detail

/// Training CSV: header `url,rank,label_raw[,feature columns...]`.
/// Feature columns are either the full numeric vector (tld one-hot expanded)
/// or the five numeric features plus a categorical `tld` column.
inline std::vector<TrainingRow> load_training_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open training csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw error("training csv is empty: " + path);
    std::vector<std::string> header = csv_detail::parse_csv_line(line);
    if (header.size() < 3 || header[0] != "url" || header[1] != "rank" || header[2] != "label_raw")
        throw error("training csv must start with columns url,rank,label_raw");

    // map optional feature columns
    std::vector<int> feature_col(kFeatureCount, -1);
    int tld_col = -1;
    for (std::size_t c = 3; c < header.size(); ++c) {
        if (header[c] == "tld") {
            tld_col = static_cast<int>(c);
            continue;
        }
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            if (header[c] == feature_names()[f]) feature_col[f] = static_cast<int>(c);
    }
    bool has_numeric5 = true;
    for (std::size_t f = 0; f < 5; ++f) has_numeric5 = has_numeric5 && feature_col[f] >= 0;
    bool has_onehot = true;
    for (std::size_t f = 5; f < kFeatureCount; ++f) has_onehot = has_onehot && feature_col[f] >= 0;
    bool with_features = has_numeric5 && (has_onehot || tld_col >= 0);

    std::vector<TrainingRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = csv_detail::parse_csv_line(line);
        if (fields.size() < header.size())
            throw error("training csv line " + std::to_string(lineno) + ": too few columns");
        TrainingRow row;
        row.url = fields[0];
        row.rank = std::stoi(fields[1]);
        row.label_raw = std::stoi(fields[2]);
        if (with_features) {
            std::vector<double> x(kFeatureCount, 0.0);
            for (std::size_t f = 0; f < 5; ++f)
                x[f] = std::stod(fields[static_cast<std::size_t>(feature_col[f])]);
            if (has_onehot) {
                for (std::size_t f = 5; f < kFeatureCount; ++f)
                    x[f] = std::stod(fields[static_cast<std::size_t>(feature_col[f])]);
            } else {
                TldCategory tld = tld_category_from_name(fields[static_cast<std::size_t>(tld_col)]);
                x[5 + static_cast<std::size_t>(tld)] = 1.0;
            }
            row.features = std::move(x);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace trirank
