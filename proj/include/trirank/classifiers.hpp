#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "trirank/binio.hpp"
#include "trirank/common.hpp"
#include "trirank/rng.hpp"

namespace trirank {

using Matrix = std::vector<std::vector<double>>;

/// Per-feature zero-mean unit-variance scaling (population statistics).
/// Constant features are passed through centered only.
class Standardizer {
  public:
    void fit(const Matrix& x) {
        if (x.empty()) throw error("cannot standardize an empty dataset");
        std::size_t dim = x[0].size();
        mean_.assign(dim, 0.0);
        std_.assign(dim, 0.0);
        for (const auto& row : x)
            for (std::size_t j = 0; j < dim; ++j) mean_[j] += row[j];
        for (std::size_t j = 0; j < dim; ++j) mean_[j] /= static_cast<double>(x.size());
        for (const auto& row : x)
            for (std::size_t j = 0; j < dim; ++j) {
                double d = row[j] - mean_[j];
                std_[j] += d * d;
            }
        for (std::size_t j = 0; j < dim; ++j) {
            std_[j] = std::sqrt(std_[j] / static_cast<double>(x.size()));
            if (std_[j] == 0.0) std_[j] = 1.0;
        }
    }

    std::vector<double> transform(const std::vector<double>& row) const {
        if (row.size() != mean_.size()) throw error("feature dimension mismatch");
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j)
            out[j] = (row[j] - mean_[j]) / std_[j];
        return out;
    }

    Matrix transform(const Matrix& x) const {
        Matrix out;
        out.reserve(x.size());
        for (const auto& row : x) out.push_back(transform(row));
        return out;
    }

    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& stddev() const { return std_; }

    void serialize(std::string& out) const {
        binio::put_f64s(out, mean_);
        binio::put_f64s(out, std_);
    }
    void deserialize(std::string_view in, std::size_t& pos) {
        mean_ = binio::get_f64s(in, pos);
        std_ = binio::get_f64s(in, pos);
    }

  private:
    std::vector<double> mean_;
    std::vector<double> std_;
};

inline double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + exp(-t)) without overflow
inline double log1p_exp_neg(double t) {
    return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

struct LogisticParams {
    double c = 1.0;        // inverse regularization strength
    double tol = 1e-4;     // stop when the gradient's max-norm drops below
    int max_iter = 100;
};

/// Regularized log-loss and its gradient. Parameter layout: w[0..d-1] then
/// the unpenalized intercept at w[d].
/// J = 0.5*||w||^2 + C * sum_i log(1 + exp(-y_i * (w.x_i + b))), y in {-1,+1}.
inline double logistic_loss_grad(const Matrix& x, const std::vector<int>& y, double c,
                                 const std::vector<double>& params, std::vector<double>* grad) {
    std::size_t dim = params.size() - 1;
    double loss = 0.0;
    if (grad) grad->assign(params.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = params[dim];
        for (std::size_t j = 0; j < dim; ++j) z += params[j] * x[i][j];
        double yi = y[i] == 1 ? 1.0 : -1.0;
        loss += c * log1p_exp_neg(yi * z);
        if (grad) {
            double g = -c * yi * sigmoid(-yi * z);
            for (std::size_t j = 0; j < dim; ++j) (*grad)[j] += g * x[i][j];
            (*grad)[dim] += g;
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        loss += 0.5 * params[j] * params[j];
        if (grad) (*grad)[j] += params[j];
    }
    return loss;
}

/// Binary logistic regression fit with L-BFGS (history 10, Armijo
/// backtracking), mirroring the usual batch solver defaults.
class LogisticRegression {
  public:
    void fit(const Matrix& x, const std::vector<int>& y, const LogisticParams& params = {}) {
        std::size_t dim = x.empty() ? 0 : x[0].size();
        w_.assign(dim + 1, 0.0);
        std::vector<std::vector<double>> s_hist, y_hist;
        std::vector<double> rho_hist;
        std::vector<double> grad;
        double loss = logistic_loss_grad(x, y, params.c, w_, &grad);
        for (int iter = 0; iter < params.max_iter; ++iter) {
            double gmax = 0.0;
            for (double g : grad) gmax = std::max(gmax, std::abs(g));
            if (gmax <= params.tol) break;

            // two-loop recursion
            std::vector<double> dir = grad;
            std::vector<double> alpha(s_hist.size());
            for (std::size_t k = s_hist.size(); k-- > 0;) {
                double a = rho_hist[k] * dot(s_hist[k], dir);
                alpha[k] = a;
                axpy(dir, y_hist[k], -a);
            }
            if (!s_hist.empty()) {
                double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
                for (double& d : dir) d *= gamma;
            }
            for (std::size_t k = 0; k < s_hist.size(); ++k) {
                double beta = rho_hist[k] * dot(y_hist[k], dir);
                axpy(dir, s_hist[k], alpha[k] - beta);
            }
            for (double& d : dir) d = -d;

            double slope = dot(grad, dir);
            if (slope >= 0.0) {  // not a descent direction; reset to steepest
                for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = -grad[j];
                slope = dot(grad, dir);
            }
            double step = 1.0;
            std::vector<double> next(w_.size());
            std::vector<double> next_grad;
            double next_loss = loss;
            for (int ls = 0; ls < 40; ++ls) {
                for (std::size_t j = 0; j < w_.size(); ++j) next[j] = w_[j] + step * dir[j];
                next_loss = logistic_loss_grad(x, y, params.c, next, &next_grad);
                if (next_loss <= loss + 1e-4 * step * slope) break;
                step *= 0.5;
            }
            std::vector<double> s(w_.size()), yv(w_.size());
            for (std::size_t j = 0; j < w_.size(); ++j) {
                s[j] = next[j] - w_[j];
                yv[j] = next_grad[j] - grad[j];
            }
            double sy = dot(s, yv);
            if (sy > 1e-12) {
                s_hist.push_back(std::move(s));
                y_hist.push_back(std::move(yv));
                rho_hist.push_back(1.0 / sy);
                if (s_hist.size() > 10) {
                    s_hist.erase(s_hist.begin());
                    y_hist.erase(y_hist.begin());
                    rho_hist.erase(rho_hist.begin());
                }
            }
            w_ = next;
            grad = std::move(next_grad);
            if (std::abs(loss - next_loss) <= 1e-12 * std::max(1.0, std::abs(loss))) break;
            loss = next_loss;
        }
    }

    double predict_proba(const std::vector<double>& x) const {
        double z = w_.back();
        for (std::size_t j = 0; j + 1 < w_.size(); ++j) z += w_[j] * x[j];
        return sigmoid(z);
    }

    const std::vector<double>& coefficients() const { return w_; }

    void serialize(std::string& out) const { binio::put_f64s(out, w_); }
    void deserialize(std::string_view in, std::size_t& pos) { w_ = binio::get_f64s(in, pos); }

  private:
    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    static void axpy(std::vector<double>& y, const std::vector<double>& x, double a) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
    }

    std::vector<double> w_;  // weights then intercept
};

/// Gaussian naive Bayes with variance smoothing of 1e-9 times the largest
/// per-feature variance.
class GaussianNaiveBayes {
  public:
    void fit(const Matrix& x, const std::vector<int>& y) {
        std::size_t dim = x[0].size();
        double counts[2] = {0.0, 0.0};
        mean_[0].assign(dim, 0.0);
        mean_[1].assign(dim, 0.0);
        var_[0].assign(dim, 0.0);
        var_[1].assign(dim, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            counts[y[i]] += 1.0;
            for (std::size_t j = 0; j < dim; ++j) mean_[y[i]][j] += x[i][j];
        }
        for (int c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < dim; ++j) mean_[c][j] /= counts[c];
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < dim; ++j) {
                double d = x[i][j] - mean_[y[i]][j];
                var_[y[i]][j] += d * d;
            }
        for (int c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < dim; ++j) var_[c][j] /= counts[c];

        // smoothing: epsilon = 1e-9 * max variance of any feature over the data
        std::vector<double> pooled_mean(dim, 0.0), pooled_var(dim, 0.0);
        double m = static_cast<double>(x.size());
        for (const auto& row : x)
            for (std::size_t j = 0; j < dim; ++j) pooled_mean[j] += row[j] / m;
        for (const auto& row : x)
            for (std::size_t j = 0; j < dim; ++j) {
                double d = row[j] - pooled_mean[j];
                pooled_var[j] += d * d / m;
            }
        double eps = 1e-9 * *std::max_element(pooled_var.begin(), pooled_var.end());
        if (eps == 0.0) eps = 1e-9;
        for (int c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < dim; ++j) var_[c][j] += eps;
        prior_[0] = counts[0] / m;
        prior_[1] = counts[1] / m;
    }

    double predict_proba(const std::vector<double>& x) const {
        double logp[2];
        for (int c = 0; c < 2; ++c) {
            logp[c] = std::log(prior_[c]);
            for (std::size_t j = 0; j < x.size(); ++j) {
                double d = x[j] - mean_[c][j];
                logp[c] += -0.5 * std::log(2.0 * M_PI * var_[c][j]) - d * d / (2.0 * var_[c][j]);
            }
        }
        double mx = std::max(logp[0], logp[1]);
        double e0 = std::exp(logp[0] - mx), e1 = std::exp(logp[1] - mx);
        return e1 / (e0 + e1);
    }

    void serialize(std::string& out) const {
        binio::put<double>(out, prior_[0]);
        binio::put<double>(out, prior_[1]);
        for (int c = 0; c < 2; ++c) {
            binio::put_f64s(out, mean_[c]);
            binio::put_f64s(out, var_[c]);
        }
    }
    void deserialize(std::string_view in, std::size_t& pos) {
        prior_[0] = binio::get<double>(in, pos);
        prior_[1] = binio::get<double>(in, pos);
        for (int c = 0; c < 2; ++c) {
            mean_[c] = binio::get_f64s(in, pos);
            var_[c] = binio::get_f64s(in, pos);
        }
    }

  private:
    double prior_[2] = {0.5, 0.5};
    std::vector<double> mean_[2];
    std::vector<double> var_[2];
};

/// CART tree grown to purity on Gini impurity with per-node random feature
/// subsampling; leaves keep class counts so prediction yields probabilities.
class DecisionTree {
  public:
    struct Node {
        int feature = -1;           // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double count[2] = {0.0, 0.0};
    };

    void fit(const Matrix& x, const std::vector<int>& y, const std::vector<std::size_t>& sample,
             std::size_t max_features, rng& r) {
        nodes_.clear();
        grow(x, y, sample, max_features, r);
    }

    double predict_proba(const std::vector<double>& x) const {
        std::int32_t node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const Node& n = nodes_[static_cast<std::size_t>(node)];
            node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        const Node& leaf = nodes_[static_cast<std::size_t>(node)];
        double total = leaf.count[0] + leaf.count[1];
        return total > 0.0 ? leaf.count[1] / total : 0.5;
    }

    const std::vector<Node>& nodes() const { return nodes_; }

    void serialize(std::string& out) const {
        binio::put<std::uint64_t>(out, nodes_.size());
        for (const Node& n : nodes_) {
            binio::put<std::int32_t>(out, n.feature);
            binio::put<double>(out, n.threshold);
            binio::put<std::int32_t>(out, n.left);
            binio::put<std::int32_t>(out, n.right);
            binio::put<double>(out, n.count[0]);
            binio::put<double>(out, n.count[1]);
        }
    }
    void deserialize(std::string_view in, std::size_t& pos) {
        std::uint64_t n = binio::get<std::uint64_t>(in, pos);
        nodes_.clear();
        nodes_.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            Node node;
            node.feature = binio::get<std::int32_t>(in, pos);
            node.threshold = binio::get<double>(in, pos);
            node.left = binio::get<std::int32_t>(in, pos);
            node.right = binio::get<std::int32_t>(in, pos);
            node.count[0] = binio::get<double>(in, pos);
            node.count[1] = binio::get<double>(in, pos);
            nodes_.push_back(node);
        }
    }

  private:
    std::int32_t grow(const Matrix& x, const std::vector<int>& y,
                      const std::vector<std::size_t>& sample, std::size_t max_features, rng& r) {
        std::int32_t id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        double count[2] = {0.0, 0.0};
        for (std::size_t i : sample) count[y[i]] += 1.0;
        nodes_[static_cast<std::size_t>(id)].count[0] = count[0];
        nodes_[static_cast<std::size_t>(id)].count[1] = count[1];
        if (count[0] == 0.0 || count[1] == 0.0 || sample.size() < 2) return id;

        std::size_t dim = x[0].size();
        std::vector<std::size_t> features(dim);
        std::iota(features.begin(), features.end(), 0);
        r.shuffle(features);
        features.resize(std::min(max_features, dim));

        double total = count[0] + count[1];
        double best_gini = 1.0 - ((count[0] / total) * (count[0] / total) +
                                  (count[1] / total) * (count[1] / total));
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> values;
        for (std::size_t f : features) {
            values.clear();
            for (std::size_t i : sample) values.emplace_back(x[i][f], y[i]);
            std::sort(values.begin(), values.end());
            double left[2] = {0.0, 0.0};
            double right[2] = {count[0], count[1]};
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                left[values[i].second] += 1.0;
                right[values[i].second] -= 1.0;
                if (values[i].first == values[i + 1].first) continue;
                double nl = left[0] + left[1], nr = right[0] + right[1];
                double gl = 1.0 - ((left[0] / nl) * (left[0] / nl) + (left[1] / nl) * (left[1] / nl));
                double gr = 1.0 - ((right[0] / nr) * (right[0] / nr) + (right[1] / nr) * (right[1] / nr));
                double gini = (nl * gl + nr * gr) / total;
                if (gini < best_gini - 1e-12) {
                    best_gini = gini;
                    best_feature = static_cast<int>(f);
                    best_threshold = values[i].first + (values[i + 1].first - values[i].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : sample) {
            if (x[i][static_cast<std::size_t>(best_feature)] <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) return id;
        nodes_[static_cast<std::size_t>(id)].feature = best_feature;
        nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
        std::int32_t left = grow(x, y, left_idx, max_features, r);
        nodes_[static_cast<std::size_t>(id)].left = left;
        std::int32_t right = grow(x, y, right_idx, max_features, r);
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    std::vector<Node> nodes_;
};

struct ForestParams {
    std::size_t n_trees = 100;
    // max_features defaults to round(sqrt(dim)) when 0
    std::size_t max_features = 0;
};

/// Bootstrap-aggregated CART trees; probability is the mean of per-tree
/// leaf distributions.
class RandomForest {
  public:
    void fit(const Matrix& x, const std::vector<int>& y, std::uint64_t seed,
             const ForestParams& params = {}) {
        trees_.clear();
        trees_.resize(params.n_trees);
        std::size_t dim = x[0].size();
        std::size_t max_features = params.max_features
                                       ? params.max_features
                                       : static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dim))));
        max_features = std::max<std::size_t>(1, std::min(max_features, dim));
        rng seeder(seed);
        for (auto& tree : trees_) {
            rng r(seeder.next_u64());
            std::vector<std::size_t> sample(x.size());
            for (auto& s : sample) s = static_cast<std::size_t>(r.next_below(x.size()));
            tree.fit(x, y, sample, max_features, r);
        }
    }

    double predict_proba(const std::vector<double>& x) const {
        double sum = 0.0;
        for (const auto& tree : trees_) sum += tree.predict_proba(x);
        return sum / static_cast<double>(trees_.size());
    }

    void serialize(std::string& out) const {
        binio::put<std::uint64_t>(out, trees_.size());
        for (const auto& tree : trees_) tree.serialize(out);
    }
    void deserialize(std::string_view in, std::size_t& pos) {
        std::uint64_t n = binio::get<std::uint64_t>(in, pos);
        trees_.clear();
        trees_.resize(n);
        for (auto& tree : trees_) tree.deserialize(in, pos);
    }

  private:
    std::vector<DecisionTree> trees_;
};

struct SvmParams {
    double alpha = 1e-4;  // L2 strength
    int epochs = 50;
};

/// Linear SVM: hinge loss with L2 regularization trained by SGD
/// (Pegasos-style schedule), calibrated to probabilities by Platt scaling.
class LinearSvm {
  public:
    void fit(const Matrix& x, const std::vector<int>& y, std::uint64_t seed,
             const SvmParams& params = {}) {
        std::size_t dim = x[0].size();
        w_.assign(dim, 0.0);
        b_ = 0.0;
        rng r(seed);
        std::vector<std::size_t> order(x.size());
        std::iota(order.begin(), order.end(), 0);
        long t = 0;
        for (int epoch = 0; epoch < params.epochs; ++epoch) {
            r.shuffle(order);
            for (std::size_t i : order) {
                ++t;
                double eta = 1.0 / (params.alpha * static_cast<double>(t));
                double yi = y[i] == 1 ? 1.0 : -1.0;
                double z = b_;
                for (std::size_t j = 0; j < dim; ++j) z += w_[j] * x[i][j];
                for (std::size_t j = 0; j < dim; ++j) w_[j] *= (1.0 - eta * params.alpha);
                if (yi * z < 1.0) {
                    for (std::size_t j = 0; j < dim; ++j) w_[j] += eta * yi * x[i][j];
                    b_ += eta * yi;
                }
            }
        }
        fit_platt(x, y);
    }

    double decision(const std::vector<double>& x) const {
        double z = b_;
        for (std::size_t j = 0; j < w_.size(); ++j) z += w_[j] * x[j];
        return z;
    }

    double predict_proba(const std::vector<double>& x) const {
        return platt_proba(decision(x));
    }

    /// P(y=1 | decision value f) = 1 / (1 + exp(A f + B)).
    double platt_proba(double f) const { return sigmoid(-(platt_a_ * f + platt_b_)); }

    double platt_a() const { return platt_a_; }

    void serialize(std::string& out) const {
        binio::put_f64s(out, w_);
        binio::put<double>(out, b_);
        binio::put<double>(out, platt_a_);
        binio::put<double>(out, platt_b_);
    }
    void deserialize(std::string_view in, std::size_t& pos) {
        w_ = binio::get_f64s(in, pos);
        b_ = binio::get<double>(in, pos);
        platt_a_ = binio::get<double>(in, pos);
        platt_b_ = binio::get<double>(in, pos);
    }

  private:
    // Platt scaling via the Lin-Weng-Keerthi Newton iteration with the
    // standard smoothed targets.
    void fit_platt(const Matrix& x, const std::vector<int>& y) {
        std::size_t m = x.size();
        std::vector<double> f(m);
        double n_pos = 0.0, n_neg = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            f[i] = decision(x[i]);
            if (y[i] == 1) ++n_pos;
            else ++n_neg;
        }
        double hi = (n_pos + 1.0) / (n_pos + 2.0);
        double lo = 1.0 / (n_neg + 2.0);
        std::vector<double> target(m);
        for (std::size_t i = 0; i < m; ++i) target[i] = y[i] == 1 ? hi : lo;

        double a = 0.0;
        double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
        auto objective = [&](double aa, double bb) {
            double obj = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double z = aa * f[i] + bb;
                // t*z + log(1+exp(-z)) stabilized
                obj += z >= 0.0 ? target[i] * z + log1p_exp_neg(z)
                                : (target[i] - 1.0) * z + log1p_exp_neg(-z);
            }
            return obj;
        };
        double obj = objective(a, b);
        for (int iter = 0; iter < 100; ++iter) {
            double g1 = 0.0, g2 = 0.0, h11 = 1e-12, h22 = 1e-12, h21 = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double p = sigmoid(-(a * f[i] + b));
                double d1 = target[i] - p;
                double d2 = p * (1.0 - p);
                g1 += f[i] * d1;
                g2 += d1;
                h11 += f[i] * f[i] * d2;
                h22 += d2;
                h21 += f[i] * d2;
            }
            if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
            double det = h11 * h22 - h21 * h21;
            double da = -(h22 * g1 - h21 * g2) / det;
            double db = -(-h21 * g1 + h11 * g2) / det;
            double gd = g1 * da + g2 * db;
            double step = 1.0;
            while (step >= 1e-10) {
                double na = a + step * da, nb = b + step * db;
                double nobj = objective(na, nb);
                if (nobj < obj + 1e-4 * step * gd) {
                    a = na;
                    b = nb;
                    obj = nobj;
                    break;
                }
                step /= 2.0;
            }
            if (step < 1e-10) break;
        }
        platt_a_ = a;
        platt_b_ = b;
    }

    std::vector<double> w_;
    double b_ = 0.0;
    double platt_a_ = -1.0;
    double platt_b_ = 0.0;
};

}  // namespace trirank
