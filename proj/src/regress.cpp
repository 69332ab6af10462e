#include "nnsteal/regress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "nnsteal/rng.hpp"

namespace nnsteal::regress {

namespace {

struct Design {
    std::vector<std::vector<double>> x;  // n rows of d features
    std::vector<double> y;
    int d = 0;
};

Design make_design(const attack::TimingDataset& ds, FeatureSet features) {
    if (ds.samples.empty()) throw std::invalid_argument("regressor: empty dataset");
    Design dz;
    dz.d = features == FeatureSet::TimeOnly ? 1 : 2;
    for (const auto& s : ds.samples) {
        std::vector<double> row{s.mean_time_s};
        if (features == FeatureSet::TimePlusParams)
            row.push_back(static_cast<double>(s.n_params));
        dz.x.push_back(std::move(row));
        dz.y.push_back(static_cast<double>(s.depth));
    }
    return dz;
}

// ---- regression tree -------------------------------------------------------

struct TreeBuildConfig {
    int max_depth;
    int min_leaf;
    int mtry;  // features considered per split; 0 = all
};

double subset_mean(const Design& dz, const std::vector<int>& idx) {
    double m = 0.0;
    for (int i : idx) m += dz.y[static_cast<size_t>(i)];
    return m / static_cast<double>(idx.size());
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

// Best variance-reduction split over the given features. Tie-break: lowest
// feature index, then lowest threshold.
SplitChoice best_split(const Design& dz, const std::vector<int>& idx,
                       const std::vector<int>& features, int min_leaf) {
    SplitChoice best;
    const size_t n = idx.size();
    std::vector<std::pair<double, double>> vals(n);  // (feature value, y)
    for (int f : features) {
        for (size_t i = 0; i < n; ++i) {
            const int r = idx[i];
            vals[i] = {dz.x[static_cast<size_t>(r)][static_cast<size_t>(f)],
                       dz.y[static_cast<size_t>(r)]};
        }
        std::sort(vals.begin(), vals.end());

        double left_sum = 0.0, left_sq = 0.0;
        double right_sum = 0.0, right_sq = 0.0;
        for (const auto& [xv, yv] : vals) {
            right_sum += yv;
            right_sq += yv * yv;
        }
        for (size_t i = 0; i + 1 < n; ++i) {
            const double yv = vals[i].second;
            left_sum += yv;
            left_sq += yv * yv;
            right_sum -= yv;
            right_sq -= yv * yv;
            if (vals[i].first == vals[i + 1].first) continue;  // no boundary here
            const size_t nl = i + 1, nr = n - nl;
            if (nl < static_cast<size_t>(min_leaf) || nr < static_cast<size_t>(min_leaf)) continue;
            const double sse = (left_sq - left_sum * left_sum / static_cast<double>(nl)) +
                               (right_sq - right_sum * right_sum / static_cast<double>(nr));
            // features and thresholds are scanned in ascending order, so
            // keeping the first strict winner implements the tie-break
            // (lowest feature index, then lowest threshold)
            if (sse < best.sse) {
                best.feature = f;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best.sse = sse;
            }
        }
    }
    return best;
}

int build_node(Tree& tree, const Design& dz, std::vector<int> idx, int depth,
               const TreeBuildConfig& cfg, Rng* rng) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<size_t>(node_id)].value = subset_mean(dz, idx);

    if (depth >= cfg.max_depth || idx.size() < 2 * static_cast<size_t>(cfg.min_leaf))
        return node_id;

    std::vector<int> features(static_cast<size_t>(dz.d));
    std::iota(features.begin(), features.end(), 0);
    if (cfg.mtry > 0 && cfg.mtry < dz.d && rng != nullptr) {
        rng->shuffle(features);
        features.resize(static_cast<size_t>(cfg.mtry));
        std::sort(features.begin(), features.end());
    }

    const SplitChoice split = best_split(dz, idx, features, cfg.min_leaf);
    if (split.feature < 0) return node_id;

    std::vector<int> left, right;
    for (int i : idx) {
        if (dz.x[static_cast<size_t>(i)][static_cast<size_t>(split.feature)] <= split.threshold)
            left.push_back(i);
        else
            right.push_back(i);
    }
    if (left.empty() || right.empty()) return node_id;

    idx.clear();
    idx.shrink_to_fit();
    const int l = build_node(tree, dz, std::move(left), depth + 1, cfg, rng);
    const int r = build_node(tree, dz, std::move(right), depth + 1, cfg, rng);
    auto& node = tree.nodes[static_cast<size_t>(node_id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return node_id;
}

Tree build_tree(const Design& dz, const std::vector<int>& idx, const TreeBuildConfig& cfg,
                Rng* rng) {
    Tree tree;
    build_node(tree, dz, idx, 0, cfg, rng);
    return tree;
}

Design residual_design(const Design& dz, const std::vector<double>& residuals) {
    Design r = dz;
    r.y = residuals;
    return r;
}

// ---- standardization -------------------------------------------------------

struct Standardizer {
    std::vector<double> mean, stddev;
};

Standardizer fit_standardizer(const Design& dz) {
    Standardizer s;
    s.mean.assign(static_cast<size_t>(dz.d), 0.0);
    s.stddev.assign(static_cast<size_t>(dz.d), 0.0);
    const double n = static_cast<double>(dz.x.size());
    for (const auto& row : dz.x)
        for (int f = 0; f < dz.d; ++f) s.mean[static_cast<size_t>(f)] += row[static_cast<size_t>(f)];
    for (auto& m : s.mean) m /= n;
    for (const auto& row : dz.x)
        for (int f = 0; f < dz.d; ++f) {
            const double d = row[static_cast<size_t>(f)] - s.mean[static_cast<size_t>(f)];
            s.stddev[static_cast<size_t>(f)] += d * d;
        }
    for (auto& v : s.stddev) v = std::sqrt(v / n);
    return s;
}

// zero-variance features standardize to 0, i.e. they drop out of the model
double standardize_one(const Standardizer& s, int f, double v) {
    const double sd = s.stddev[static_cast<size_t>(f)];
    if (sd <= 0.0) return 0.0;
    return (v - s.mean[static_cast<size_t>(f)]) / sd;
}

std::vector<double> standardize_row(const Standardizer& s, std::span<const double> row) {
    std::vector<double> z(row.size());
    for (size_t f = 0; f < row.size(); ++f)
        z[f] = standardize_one(s, static_cast<int>(f), row[f]);
    return z;
}

}  // namespace

std::string kind_name(RegressorKind k) {
    switch (k) {
        case RegressorKind::Ridge: return "ridge";
        case RegressorKind::LinearSvr: return "linear-svr";
        case RegressorKind::DecisionTree: return "decision-tree";
        case RegressorKind::RandomForest: return "random-forest";
        case RegressorKind::BoostedTrees: return "boosted-trees";
    }
    return "?";
}

RegressorKind kind_from_name(const std::string& name) {
    if (name == "ridge") return RegressorKind::Ridge;
    if (name == "linear-svr" || name == "svr") return RegressorKind::LinearSvr;
    if (name == "decision-tree" || name == "tree") return RegressorKind::DecisionTree;
    if (name == "random-forest" || name == "rf") return RegressorKind::RandomForest;
    if (name == "boosted-trees" || name == "bdt") return RegressorKind::BoostedTrees;
    throw std::invalid_argument("unknown regressor kind '" + name + "'");
}

double Tree::predict(std::span<const double> x) const {
    int node = 0;
    while (nodes[static_cast<size_t>(node)].feature >= 0) {
        const auto& n = nodes[static_cast<size_t>(node)];
        node = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(node)].value;
}

std::vector<double> ridge_solve(std::span<const double> x, int n, int d, std::span<const double> y,
                                double lambda) {
    // normal equations A w = b with A = X^T X + lambda I
    std::vector<double> a(static_cast<size_t>(d) * d, 0.0);
    std::vector<double> b(static_cast<size_t>(d), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            const double xij = x[static_cast<size_t>(i) * d + j];
            b[static_cast<size_t>(j)] += xij * y[static_cast<size_t>(i)];
            for (int k = 0; k < d; ++k)
                a[static_cast<size_t>(j) * d + k] += xij * x[static_cast<size_t>(i) * d + k];
        }
    for (int j = 0; j < d; ++j) a[static_cast<size_t>(j) * d + j] += lambda;

    // Gaussian elimination with partial pivoting
    std::vector<double> w(b.begin(), b.end());
    for (int col = 0; col < d; ++col) {
        int pivot = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(a[static_cast<size_t>(r) * d + col]) >
                std::abs(a[static_cast<size_t>(pivot) * d + col]))
                pivot = r;
        if (pivot != col) {
            for (int k = 0; k < d; ++k)
                std::swap(a[static_cast<size_t>(col) * d + k], a[static_cast<size_t>(pivot) * d + k]);
            std::swap(w[static_cast<size_t>(col)], w[static_cast<size_t>(pivot)]);
        }
        const double apc = a[static_cast<size_t>(col) * d + col];
        if (apc == 0.0) continue;  // singular direction; leave coefficient 0
        for (int r = col + 1; r < d; ++r) {
            const double factor = a[static_cast<size_t>(r) * d + col] / apc;
            if (factor == 0.0) continue;
            for (int k = col; k < d; ++k)
                a[static_cast<size_t>(r) * d + k] -= factor * a[static_cast<size_t>(col) * d + k];
            w[static_cast<size_t>(r)] -= factor * w[static_cast<size_t>(col)];
        }
    }
    for (int col = d; col-- > 0;) {
        double acc = w[static_cast<size_t>(col)];
        for (int k = col + 1; k < d; ++k)
            acc -= a[static_cast<size_t>(col) * d + k] * w[static_cast<size_t>(k)];
        const double apc = a[static_cast<size_t>(col) * d + col];
        w[static_cast<size_t>(col)] = apc == 0.0 ? 0.0 : acc / apc;
    }
    return w;
}

Regressor Regressor::fit(RegressorKind kind, const attack::TimingDataset& ds, FeatureSet features,
                         const Hyper& hyper, uint64_t seed) {
    Regressor reg;
    reg.kind_ = kind;
    reg.features_ = features;
    const Design dz = make_design(ds, features);
    const int n = static_cast<int>(dz.x.size());

    if (kind == RegressorKind::Ridge || kind == RegressorKind::LinearSvr) {
        const Standardizer st = fit_standardizer(dz);
        reg.feat_mean_ = st.mean;
        reg.feat_std_ = st.stddev;
        std::vector<double> z(static_cast<size_t>(n) * dz.d);
        for (int i = 0; i < n; ++i) {
            auto row = standardize_row(st, dz.x[static_cast<size_t>(i)]);
            std::copy(row.begin(), row.end(), z.begin() + static_cast<size_t>(i) * dz.d);
        }
        const double y_mean =
            std::accumulate(dz.y.begin(), dz.y.end(), 0.0) / static_cast<double>(n);

        if (kind == RegressorKind::Ridge) {
            std::vector<double> yc(dz.y);
            for (auto& v : yc) v -= y_mean;
            reg.lin_w_ = ridge_solve(z, n, dz.d, yc, hyper.ridge_lambda);
            reg.lin_b_ = y_mean;
        } else {
            // epsilon-insensitive subgradient descent, seeded shuffles
            reg.lin_w_.assign(static_cast<size_t>(dz.d), 0.0);
            reg.lin_b_ = y_mean;
            Rng rng(seed);
            std::vector<int> order(static_cast<size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            for (int e = 0; e < hyper.svr_epochs; ++e) {
                rng.shuffle(order);
                const double eta = hyper.svr_lr / std::sqrt(1.0 + e);
                for (int i : order) {
                    const double* zi = z.data() + static_cast<size_t>(i) * dz.d;
                    double pred = reg.lin_b_;
                    for (int f = 0; f < dz.d; ++f)
                        pred += reg.lin_w_[static_cast<size_t>(f)] * zi[f];
                    const double r = pred - dz.y[static_cast<size_t>(i)];
                    if (std::abs(r) <= hyper.svr_epsilon) continue;
                    const double s = r > 0 ? 1.0 : -1.0;
                    for (int f = 0; f < dz.d; ++f)
                        reg.lin_w_[static_cast<size_t>(f)] -= eta * s * zi[f];
                    reg.lin_b_ -= eta * s;
                }
            }
        }
    } else if (kind == RegressorKind::DecisionTree) {
        std::vector<int> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        reg.tree_ = build_tree(dz, idx, {hyper.tree_max_depth, hyper.tree_min_leaf, 0}, nullptr);
    } else if (kind == RegressorKind::RandomForest) {
        reg.forest_.resize(static_cast<size_t>(hyper.forest_trees));
        Rng base(seed);
        const int mtry = dz.d >= 2 ? 1 : 0;  // feature subsampling with 2 features
#pragma omp parallel for schedule(static)
        for (int t = 0; t < hyper.forest_trees; ++t) {
            Rng rng = base.split(static_cast<uint64_t>(t));
            std::vector<int> boot(static_cast<size_t>(n));
            for (auto& v : boot)
                v = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
            std::sort(boot.begin(), boot.end());
            reg.forest_[static_cast<size_t>(t)] =
                build_tree(dz, boot, {hyper.tree_max_depth, hyper.tree_min_leaf, mtry}, &rng);
        }
    } else {  // BoostedTrees
        const double y_mean =
            std::accumulate(dz.y.begin(), dz.y.end(), 0.0) / static_cast<double>(n);
        reg.boost_base_ = y_mean;
        reg.boost_lr_ = hyper.boost_lr;
        std::vector<double> pred(static_cast<size_t>(n), y_mean);
        std::vector<int> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> residuals(static_cast<size_t>(n));
        for (int m = 0; m < hyper.boost_rounds; ++m) {
            for (int i = 0; i < n; ++i)
                residuals[static_cast<size_t>(i)] =
                    dz.y[static_cast<size_t>(i)] - pred[static_cast<size_t>(i)];
            Tree t = build_tree(residual_design(dz, residuals), idx,
                                {hyper.boost_max_depth, hyper.tree_min_leaf, 0}, nullptr);
            for (int i = 0; i < n; ++i)
                pred[static_cast<size_t>(i)] +=
                    hyper.boost_lr * t.predict(dz.x[static_cast<size_t>(i)]);
            reg.boost_trees_.push_back(std::move(t));
        }
    }
    reg.fitted_ = true;
    return reg;
}

std::vector<double> Regressor::featurize(double time_s, std::optional<int64_t> n_params) const {
    std::vector<double> x{time_s};
    if (features_ == FeatureSet::TimePlusParams) {
        if (!n_params)
            throw std::invalid_argument("predict: this regressor needs the param-count feature");
        x.push_back(static_cast<double>(*n_params));
    }
    return x;
}

double Regressor::predict_features(std::span<const double> x) const {
    if (!fitted_) throw std::logic_error("predict called before fit");
    switch (kind_) {
        case RegressorKind::Ridge:
        case RegressorKind::LinearSvr: {
            Standardizer st{feat_mean_, feat_std_};
            auto z = standardize_row(st, x);
            double pred = lin_b_;
            for (size_t f = 0; f < z.size(); ++f) pred += lin_w_[f] * z[f];
            return pred;
        }
        case RegressorKind::DecisionTree:
            return tree_.predict(x);
        case RegressorKind::RandomForest: {
            double sum = 0.0;
            for (const auto& t : forest_) sum += t.predict(x);
            return sum / static_cast<double>(forest_.size());
        }
        case RegressorKind::BoostedTrees: {
            double pred = boost_base_;
            for (const auto& t : boost_trees_) pred += boost_lr_ * t.predict(x);
            return pred;
        }
    }
    throw std::logic_error("unreachable");
}

double Regressor::predict(double time_s, std::optional<int64_t> n_params) const {
    return predict_features(featurize(time_s, n_params));
}

int Regressor::infer_depth(double time_s, std::optional<int64_t> n_params) const {
    const double p = predict(time_s, n_params);
    return std::max(1, static_cast<int>(std::ceil(p)));
}

std::vector<double> Regressor::forest_tree_predictions(std::span<const double> x) const {
    std::vector<double> out;
    for (const auto& t : forest_) out.push_back(t.predict(x));
    return out;
}

double Regressor::boosted_prefix_prediction(std::span<const double> x, int rounds) const {
    double pred = boost_base_;
    for (int m = 0; m < rounds && m < static_cast<int>(boost_trees_.size()); ++m)
        pred += boost_lr_ * boost_trees_[static_cast<size_t>(m)].predict(x);
    return pred;
}

double Regressor::boosted_round_tree_prediction(std::span<const double> x, int round) const {
    return boost_trees_.at(static_cast<size_t>(round)).predict(x);
}

int Regressor::ensemble_size() const {
    if (kind_ == RegressorKind::RandomForest) return static_cast<int>(forest_.size());
    if (kind_ == RegressorKind::BoostedTrees) return static_cast<int>(boost_trees_.size());
    return 1;
}

RegressorScore score(const Regressor& reg, const attack::TimingDataset& holdout) {
    if (holdout.samples.empty()) throw std::invalid_argument("score: empty holdout");
    RegressorScore sc;
    double y_mean = 0.0;
    for (const auto& s : holdout.samples) y_mean += s.depth;
    y_mean /= static_cast<double>(holdout.samples.size());

    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& s : holdout.samples) {
        const double pred = reg.predict(s.mean_time_s, s.n_params);
        ss_res += (pred - s.depth) * (pred - s.depth);
        ss_tot += (s.depth - y_mean) * (s.depth - y_mean);
    }
    sc.mse = ss_res / static_cast<double>(holdout.samples.size());
    if (ss_tot > 0.0)
        sc.r2 = 1.0 - ss_res / ss_tot;
    return sc;
}

std::pair<attack::TimingDataset, attack::TimingDataset> split_dataset(
    const attack::TimingDataset& ds, double holdout_fraction, uint64_t seed) {
    if (holdout_fraction <= 0.0 || holdout_fraction >= 1.0)
        throw std::invalid_argument("split_dataset: holdout fraction must be in (0, 1)");
    const size_t n = ds.samples.size();
    const size_t n_hold = std::max<size_t>(1, static_cast<size_t>(holdout_fraction * n));
    if (n_hold >= n) throw std::invalid_argument("split_dataset: dataset too small to split");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    attack::TimingDataset train = ds, hold = ds;
    train.samples.clear();
    hold.samples.clear();
    for (size_t i = 0; i < n; ++i)
        (i < n_hold ? hold : train).samples.push_back(ds.samples[order[i]]);
    return {train, hold};
}

std::vector<ComparisonRow> compare_regressors(const attack::TimingDataset& ds,
                                              double holdout_fraction,
                                              std::span<const uint64_t> seeds, FeatureSet features,
                                              const Hyper& hyper) {
    const RegressorKind kinds[] = {RegressorKind::Ridge, RegressorKind::LinearSvr,
                                   RegressorKind::DecisionTree, RegressorKind::RandomForest,
                                   RegressorKind::BoostedTrees};
    std::vector<ComparisonRow> rows;
    for (auto kind : kinds) {
        ComparisonRow row{kind, 0.0, 0.0, 0};
        for (uint64_t seed : seeds) {
            auto [train, hold] = split_dataset(ds, holdout_fraction, seed);
            auto reg = Regressor::fit(kind, train, features, hyper, seed);
            auto sc = score(reg, hold);
            row.mean_mse += sc.mse;
            row.mean_r2 += sc.r2.value_or(0.0);
            ++row.n_seeds;
        }
        if (row.n_seeds > 0) {
            row.mean_mse /= row.n_seeds;
            row.mean_r2 /= row.n_seeds;
        }
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.mean_r2 != b.mean_r2) return a.mean_r2 > b.mean_r2;
        return kind_name(a.kind) < kind_name(b.kind);
    });
    return rows;
}

void write_comparison_csv(std::span<const ComparisonRow> rows,
                          const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "kind,mean_r2,mean_mse,n_seeds\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.mean_r2);
        out << kind_name(r.kind) << "," << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.mean_mse);
        out << buf << "," << r.n_seeds << "\n";
    }
}

namespace {

nlohmann::json tree_to_json(const Tree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
    return nodes;
}

Tree tree_from_json(const nlohmann::json& j) {
    Tree t;
    for (const auto& jn : j) {
        TreeNode n;
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.value = jn.at("value").get<double>();
        t.nodes.push_back(n);
    }
    return t;
}

}  // namespace

nlohmann::json Regressor::to_json() const {
    if (!fitted_) throw std::logic_error("to_json called before fit");
    nlohmann::json j;
    j["kind"] = kind_name(kind_);
    j["features"] = features_ == FeatureSet::TimeOnly ? "time-only" : "time+params";
    switch (kind_) {
        case RegressorKind::Ridge:
        case RegressorKind::LinearSvr:
            j["coefficients"] = lin_w_;
            j["intercept"] = lin_b_;
            j["feature_mean"] = feat_mean_;
            j["feature_std"] = feat_std_;
            break;
        case RegressorKind::DecisionTree:
            j["tree"] = tree_to_json(tree_);
            break;
        case RegressorKind::RandomForest: {
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& t : forest_) trees.push_back(tree_to_json(t));
            j["trees"] = trees;
            break;
        }
        case RegressorKind::BoostedTrees: {
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& t : boost_trees_) trees.push_back(tree_to_json(t));
            j["trees"] = trees;
            j["base"] = boost_base_;
            j["lr"] = boost_lr_;
            break;
        }
    }
    return j;
}

Regressor Regressor::from_json(const nlohmann::json& j) {
    Regressor reg;
    reg.kind_ = kind_from_name(j.at("kind").get<std::string>());
    reg.features_ = j.at("features").get<std::string>() == "time-only" ? FeatureSet::TimeOnly
                                                                       : FeatureSet::TimePlusParams;
    switch (reg.kind_) {
        case RegressorKind::Ridge:
        case RegressorKind::LinearSvr:
            reg.lin_w_ = j.at("coefficients").get<std::vector<double>>();
            reg.lin_b_ = j.at("intercept").get<double>();
            reg.feat_mean_ = j.at("feature_mean").get<std::vector<double>>();
            reg.feat_std_ = j.at("feature_std").get<std::vector<double>>();
            break;
        case RegressorKind::DecisionTree:
            reg.tree_ = tree_from_json(j.at("tree"));
            break;
        case RegressorKind::RandomForest:
            for (const auto& jt : j.at("trees")) reg.forest_.push_back(tree_from_json(jt));
            break;
        case RegressorKind::BoostedTrees:
            for (const auto& jt : j.at("trees")) reg.boost_trees_.push_back(tree_from_json(jt));
            reg.boost_base_ = j.at("base").get<double>();
            reg.boost_lr_ = j.at("lr").get<double>();
            break;
    }
    reg.fitted_ = true;
    return reg;
}

}  // namespace nnsteal::regress
