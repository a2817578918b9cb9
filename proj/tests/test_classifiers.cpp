#include <cmath>

#include <gtest/gtest.h>

#include "trirank/classifiers.hpp"
#include "trirank/rng.hpp"

using namespace trirank;

namespace {

// Two Gaussian blobs separated by a margin along a random direction.
void make_blobs(rng& r, std::size_t n, std::size_t dim, double margin, Matrix& x,
                std::vector<int>& y) {
    x.clear();
    y.clear();
    auto gauss = [&r] {
        double u1 = r.next_double();
        double u2 = r.next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    for (std::size_t i = 0; i < n; ++i) {
        int label = static_cast<int>(i % 2);
        std::vector<double> row(dim);
        for (std::size_t j = 0; j < dim; ++j) row[j] = 0.3 * gauss();
        double offset = (label == 1 ? 1.0 : -1.0) * (margin / 2.0 + 1.0);
        row[0] += offset;
        x.push_back(std::move(row));
        y.push_back(label);
    }
}

}  // namespace

TEST(Standardizer, ZeroMeanUnitStd) {
    Matrix x = {{1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}};
    Standardizer s;
    s.fit(x);
    Matrix z = s.transform(x);
    double mean0 = (z[0][0] + z[1][0] + z[2][0]) / 3.0;
    EXPECT_NEAR(mean0, 0.0, 1e-12);
    double var0 = (z[0][0] * z[0][0] + z[1][0] * z[1][0] + z[2][0] * z[2][0]) / 3.0;
    EXPECT_NEAR(var0, 1.0, 1e-12);
    // constant column passes through centered
    EXPECT_EQ(z[0][1], 0.0);
    EXPECT_EQ(z[2][1], 0.0);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
    rng r(11);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 5 + r.next_below(10);
        std::size_t dim = 2 + r.next_below(4);
        Matrix x;
        std::vector<int> y;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(dim);
            for (auto& v : row) v = 2.0 * r.next_double() - 1.0;
            x.push_back(std::move(row));
            y.push_back(static_cast<int>(r.next_below(2)));
        }
        std::vector<double> w(dim + 1);
        for (auto& v : w) v = 2.0 * r.next_double() - 1.0;

        std::vector<double> grad;
        logistic_loss_grad(x, y, 1.0, w, &grad);
        const double h = 1e-6;
        for (std::size_t j = 0; j < w.size(); ++j) {
            std::vector<double> wp = w, wm = w;
            wp[j] += h;
            wm[j] -= h;
            double fd = (logistic_loss_grad(x, y, 1.0, wp, nullptr) -
                         logistic_loss_grad(x, y, 1.0, wm, nullptr)) /
                        (2.0 * h);
            double denom = std::max({1.0, std::abs(grad[j]), std::abs(fd)});
            EXPECT_NEAR(grad[j] / denom, fd / denom, 1e-5);
        }
    }
}

TEST(Logistic, LearnsSeparableData) {
    rng r(3);
    Matrix x;
    std::vector<int> y;
    make_blobs(r, 100, 3, 1.0, x, y);
    LogisticRegression lr;
    lr.fit(x, y);
    int correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        correct += (lr.predict_proba(x[i]) > 0.5 ? 1 : 0) == y[i];
    EXPECT_GE(correct, 97);
}

TEST(GaussianNb, ClosedFormTwoPointPosterior) {
    Matrix x = {{0.0}, {2.0}};
    std::vector<int> y = {0, 1};
    GaussianNaiveBayes nb;
    nb.fit(x, y);

    // Hand-computed: priors 1/2; class variances are 0 plus smoothing
    // eps = 1e-9 * pooled variance (= 1.0), so sigma^2 = 1e-9.
    double var = 1e-9;
    auto log_gauss = [&](double v, double mean) {
        return -0.5 * std::log(2.0 * M_PI * var) - (v - mean) * (v - mean) / (2.0 * var);
    };
    double query = 0.9;
    double l0 = std::log(0.5) + log_gauss(query, 0.0);
    double l1 = std::log(0.5) + log_gauss(query, 2.0);
    double mx = std::max(l0, l1);
    double expected = std::exp(l1 - mx) / (std::exp(l0 - mx) + std::exp(l1 - mx));
    EXPECT_NEAR(nb.predict_proba({query}), expected, 1e-9);
    EXPECT_LT(nb.predict_proba({0.1}), 1e-6);
    EXPECT_GT(nb.predict_proba({1.9}), 1.0 - 1e-6);
}

TEST(RandomForest, DeterministicForFixedSeed) {
    rng r(17);
    Matrix x;
    std::vector<int> y;
    make_blobs(r, 60, 4, 0.5, x, y);
    RandomForest a, b;
    ForestParams params;
    params.n_trees = 25;
    a.fit(x, y, 99, params);
    b.fit(x, y, 99, params);
    std::string sa, sb;
    a.serialize(sa);
    b.serialize(sb);
    EXPECT_EQ(sa, sb);

    RandomForest c;
    c.fit(x, y, 100, params);
    std::string sc;
    c.serialize(sc);
    EXPECT_NE(sa, sc);
}

TEST(RandomForest, LearnsSeparableData) {
    rng r(23);
    Matrix x;
    std::vector<int> y;
    make_blobs(r, 120, 3, 1.0, x, y);
    RandomForest rf;
    ForestParams params;
    params.n_trees = 50;
    rf.fit(x, y, 7, params);
    int correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        correct += (rf.predict_proba(x[i]) > 0.5 ? 1 : 0) == y[i];
    EXPECT_GE(correct, 115);
}

TEST(Svm, PlattProbabilitiesMonotoneInDecisionValue) {
    rng r(31);
    Matrix x;
    std::vector<int> y;
    make_blobs(r, 80, 2, 1.0, x, y);
    LinearSvm svm;
    svm.fit(x, y, 5);

    std::vector<double> decisions;
    for (const auto& row : x) decisions.push_back(svm.decision(row));
    std::sort(decisions.begin(), decisions.end());
    for (std::size_t i = 1; i < decisions.size(); ++i) {
        EXPECT_LE(svm.platt_proba(decisions[i - 1]), svm.platt_proba(decisions[i]) + 1e-12);
    }
    // probabilities are valid and oriented: high decision value => class 1
    EXPECT_GT(svm.platt_proba(decisions.back()), 0.5);
    EXPECT_LT(svm.platt_proba(decisions.front()), 0.5);
}

TEST(Svm, LearnsSeparableData) {
    rng r(41);
    Matrix x;
    std::vector<int> y;
    make_blobs(r, 100, 2, 1.0, x, y);
    LinearSvm svm;
    svm.fit(x, y, 19);
    int correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        correct += (svm.predict_proba(x[i]) > 0.5 ? 1 : 0) == y[i];
    EXPECT_GE(correct, 97);
}
