#include "harbench/learners.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace harbench {

using nlohmann::json;

const char* to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::tree: return "tree";
        case LearnerKind::logreg: return "logreg";
        case LearnerKind::mlp: return "mlp";
        case LearnerKind::bagging: return "bagging";
        case LearnerKind::voting: return "voting";
    }
    return "?";
}

class ModelImpl {
public:
    virtual ~ModelImpl() = default;
    virtual std::vector<double> posterior(const double* x, std::size_t dim) const = 0;
    virtual json to_json() const = 0;
};

namespace {

std::vector<std::string> sorted_classes(const std::vector<std::string>& y) {
    std::set<std::string> s(y.begin(), y.end());
    return {s.begin(), s.end()};
}

std::vector<std::size_t> encode_labels(const std::vector<std::string>& y,
                                       const std::vector<std::string>& classes) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < classes.size(); ++i) idx[classes[i]] = i;
    std::vector<std::size_t> out;
    out.reserve(y.size());
    for (const auto& l : y) out.push_back(idx.at(l));
    return out;
}

void check_training_input(const Matrix& X, const std::vector<std::string>& y,
                          const std::vector<std::string>& schema) {
    if (X.rows == 0) throw std::invalid_argument("empty training set");
    if (X.rows != y.size()) throw std::invalid_argument("X and y row counts differ");
    if (X.cols != schema.size()) throw std::invalid_argument("X and schema widths differ");
    for (double v : X.data)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
}

// ---- decision tree ----------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    std::vector<double> dist;  // leaf class distribution
};

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const std::vector<std::size_t>& y, std::size_t n_classes,
                const TreeParams& params)
        : X_(X), y_(y), n_classes_(n_classes), params_(params) {}

    std::vector<TreeNode> build() {
        std::vector<std::size_t> all(X_.rows);
        std::iota(all.begin(), all.end(), 0);
        build_node(all, 0);
        return std::move(nodes_);
    }

private:
    std::size_t build_node(const std::vector<std::size_t>& idx, std::size_t depth) {
        const std::size_t node_id = nodes_.size();
        nodes_.emplace_back();

        std::vector<std::size_t> counts(n_classes_, 0);
        for (std::size_t i : idx) ++counts[y_[i]];
        std::vector<double> dist(n_classes_, 0.0);
        for (std::size_t c = 0; c < n_classes_; ++c)
            dist[c] = static_cast<double>(counts[c]) / static_cast<double>(idx.size());

        const bool pure = *std::max_element(counts.begin(), counts.end()) == idx.size();
        bool split_found = false;
        int best_f = -1;
        double best_t = 0.0, best_gini = std::numeric_limits<double>::infinity();

        if (!pure && depth < params_.max_depth && idx.size() >= 2 * params_.min_leaf) {
            for (std::size_t f = 0; f < X_.cols; ++f) {
                std::vector<std::size_t> order = idx;
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    return X_.at(a, f) < X_.at(b, f);
                });
                std::vector<std::size_t> left_counts(n_classes_, 0);
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    ++left_counts[y_[order[i]]];
                    const double lo = X_.at(order[i], f), hi = X_.at(order[i + 1], f);
                    if (lo == hi) continue;
                    const std::size_t nl = i + 1, nr = order.size() - nl;
                    if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
                    std::vector<std::size_t> right_counts(n_classes_, 0);
                    for (std::size_t c = 0; c < n_classes_; ++c)
                        right_counts[c] = counts[c] - left_counts[c];
                    const double wg =
                        (static_cast<double>(nl) * gini(left_counts, nl) +
                         static_cast<double>(nr) * gini(right_counts, nr)) /
                        static_cast<double>(order.size());
                    const double t = lo + 0.5 * (hi - lo);
                    if (wg < best_gini - 1e-12) {  // strict improvement keeps first (f, t) on ties
                        best_gini = wg;
                        best_f = static_cast<int>(f);
                        best_t = t;
                        split_found = true;
                    }
                }
            }
        }

        if (!split_found) {
            nodes_[node_id].dist = std::move(dist);
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx)
            (X_.at(i, static_cast<std::size_t>(best_f)) < best_t ? left_idx : right_idx)
                .push_back(i);
        nodes_[node_id].feature = best_f;
        nodes_[node_id].threshold = best_t;
        const std::size_t l = build_node(left_idx, depth + 1);
        nodes_[node_id].left = l;
        const std::size_t r = build_node(right_idx, depth + 1);
        nodes_[node_id].right = r;
        return node_id;
    }

    const Matrix& X_;
    const std::vector<std::size_t>& y_;
    std::size_t n_classes_;
    TreeParams params_;
    std::vector<TreeNode> nodes_;
};

struct TreeModel : ModelImpl {
    std::vector<TreeNode> nodes;
    std::size_t n_classes = 0;

    std::vector<double> posterior(const double* x, std::size_t) const override {
        std::size_t cur = 0;
        while (nodes[cur].feature >= 0)
            cur = x[static_cast<std::size_t>(nodes[cur].feature)] < nodes[cur].threshold
                      ? nodes[cur].left
                      : nodes[cur].right;
        return nodes[cur].dist;
    }

    json to_json() const override {
        json nodes_j = json::array();
        for (const auto& n : nodes)
            nodes_j.push_back({{"f", n.feature},
                               {"t", n.threshold},
                               {"l", n.left},
                               {"r", n.right},
                               {"dist", n.dist}});
        return {{"type", "tree"}, {"n_classes", n_classes}, {"nodes", nodes_j}};
    }

    static std::shared_ptr<TreeModel> from_json(const json& j) {
        auto m = std::make_shared<TreeModel>();
        m->n_classes = j.at("n_classes").get<std::size_t>();
        for (const auto& nj : j.at("nodes")) {
            TreeNode n;
            n.feature = nj.at("f").get<int>();
            n.threshold = nj.at("t").get<double>();
            n.left = nj.at("l").get<std::size_t>();
            n.right = nj.at("r").get<std::size_t>();
            n.dist = nj.at("dist").get<std::vector<double>>();
            m->nodes.push_back(std::move(n));
        }
        return m;
    }
};

// ---- net-backed models (logreg, mlp) ---------------------------------------

struct Scaler {
    std::vector<double> mean, sd;

    static Scaler fit(const Matrix& X) {
        Scaler s;
        s.mean.assign(X.cols, 0.0);
        s.sd.assign(X.cols, 0.0);
        for (std::size_t r = 0; r < X.rows; ++r)
            for (std::size_t c = 0; c < X.cols; ++c) s.mean[c] += X.at(r, c);
        for (double& m : s.mean) m /= static_cast<double>(X.rows);
        for (std::size_t r = 0; r < X.rows; ++r)
            for (std::size_t c = 0; c < X.cols; ++c) {
                const double d = X.at(r, c) - s.mean[c];
                s.sd[c] += d * d;
            }
        for (double& v : s.sd) {
            v = std::sqrt(v / static_cast<double>(X.rows));
            if (v == 0.0) v = 1.0;
        }
        return s;
    }

    nn::Tensor transform_row(const double* x, std::size_t dim) const {
        nn::Tensor t({dim});
        for (std::size_t c = 0; c < dim; ++c) t.v[c] = (x[c] - mean[c]) / sd[c];
        return t;
    }
};

json netspec_to_json(const nn::NetSpec& spec) {
    json layers = json::array();
    for (const auto& l : spec.layers)
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, nn::Conv2dSpec>)
                    layers.push_back(
                        {{"type", "conv2d"}, {"filters", s.filters}, {"kh", s.kh}, {"kw", s.kw}});
                else if constexpr (std::is_same_v<T, nn::MaxPoolSpec>)
                    layers.push_back({{"type", "maxpool"}, {"h", s.h}, {"w", s.w}});
                else if constexpr (std::is_same_v<T, nn::AvgPoolSpec>)
                    layers.push_back({{"type", "avgpool"}, {"h", s.h}, {"w", s.w}});
                else if constexpr (std::is_same_v<T, nn::FlattenSpec>)
                    layers.push_back({{"type", "flatten"}});
                else if constexpr (std::is_same_v<T, nn::DenseSpec>)
                    layers.push_back({{"type", "dense"}, {"units", s.units}});
                else if constexpr (std::is_same_v<T, nn::ActivationSpec>)
                    layers.push_back({{"type", "activation"},
                                      {"kind", s.kind == nn::Act::relu ? "relu" : "tanh"}});
                else if constexpr (std::is_same_v<T, nn::SoftmaxSpec>)
                    layers.push_back({{"type", "softmax"}});
                else if constexpr (std::is_same_v<T, nn::ZeroPadColumnsSpec>)
                    layers.push_back({{"type", "zeropad"}, {"positions", s.positions}});
            },
            l);
    return {{"input_shape", spec.input_shape}, {"layers", layers}};
}

nn::NetSpec netspec_from_json(const json& j) {
    nn::NetSpec spec;
    spec.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    for (const auto& lj : j.at("layers")) {
        const std::string type = lj.at("type").get<std::string>();
        if (type == "conv2d")
            spec.layers.push_back(nn::Conv2dSpec{lj.at("filters").get<std::size_t>(),
                                                 lj.at("kh").get<std::size_t>(),
                                                 lj.at("kw").get<std::size_t>()});
        else if (type == "maxpool")
            spec.layers.push_back(
                nn::MaxPoolSpec{lj.at("h").get<std::size_t>(), lj.at("w").get<std::size_t>()});
        else if (type == "avgpool")
            spec.layers.push_back(
                nn::AvgPoolSpec{lj.at("h").get<std::size_t>(), lj.at("w").get<std::size_t>()});
        else if (type == "flatten")
            spec.layers.push_back(nn::FlattenSpec{});
        else if (type == "dense")
            spec.layers.push_back(nn::DenseSpec{lj.at("units").get<std::size_t>()});
        else if (type == "activation")
            spec.layers.push_back(nn::ActivationSpec{
                lj.at("kind").get<std::string>() == "relu" ? nn::Act::relu : nn::Act::tanh});
        else if (type == "softmax")
            spec.layers.push_back(nn::SoftmaxSpec{});
        else if (type == "zeropad")
            spec.layers.push_back(
                nn::ZeroPadColumnsSpec{lj.at("positions").get<std::vector<std::size_t>>()});
        else
            throw std::invalid_argument("unknown layer type in model json: " + type);
    }
    return spec;
}

struct NetModel : ModelImpl {
    Scaler scaler;
    nn::Network net;

    explicit NetModel(nn::Network n) : net(std::move(n)) {}

    std::vector<double> posterior(const double* x, std::size_t dim) const override {
        return net.forward(scaler.transform_row(x, dim)).v;
    }

    json to_json() const override {
        std::vector<double> params(net.n_params());
        for (std::size_t i = 0; i < params.size(); ++i) params[i] = net.get_param(i);
        return {{"type", "net"},
                {"scaler_mean", scaler.mean},
                {"scaler_sd", scaler.sd},
                {"spec", netspec_to_json(net.spec())},
                {"params", params}};
    }

    static std::shared_ptr<NetModel> from_json(const json& j) {
        nn::Network net(netspec_from_json(j.at("spec")), 0);
        auto params = j.at("params").get<std::vector<double>>();
        if (params.size() != net.n_params())
            throw std::invalid_argument("model json parameter count mismatch");
        for (std::size_t i = 0; i < params.size(); ++i) net.set_param(i, params[i]);
        auto m = std::make_shared<NetModel>(std::move(net));
        m->scaler.mean = j.at("scaler_mean").get<std::vector<double>>();
        m->scaler.sd = j.at("scaler_sd").get<std::vector<double>>();
        return m;
    }
};

// ---- ensembles --------------------------------------------------------------

struct BaggingModel : ModelImpl {
    std::vector<std::shared_ptr<TreeModel>> trees;
    std::size_t n_classes = 0;

    std::vector<double> posterior(const double* x, std::size_t dim) const override {
        // vote shares: argmax of the result is exactly the majority vote with
        // ties broken by class order
        std::vector<double> votes(n_classes, 0.0);
        for (const auto& t : trees) {
            const auto p = t->posterior(x, dim);
            std::size_t best = 0;
            for (std::size_t c = 1; c < p.size(); ++c)
                if (p[c] > p[best]) best = c;
            votes[best] += 1.0;
        }
        for (double& v : votes) v /= static_cast<double>(trees.size());
        return votes;
    }

    json to_json() const override {
        json trees_j = json::array();
        for (const auto& t : trees) trees_j.push_back(t->to_json());
        return {{"type", "bagging"}, {"n_classes", n_classes}, {"trees", trees_j}};
    }
};

struct VotingModel : ModelImpl {
    std::vector<std::shared_ptr<const ModelImpl>> members;
    std::size_t n_classes = 0;

    std::vector<double> posterior(const double* x, std::size_t dim) const override {
        std::vector<double> avg(n_classes, 0.0);
        for (const auto& m : members) {
            const auto p = m->posterior(x, dim);
            for (std::size_t c = 0; c < n_classes; ++c) avg[c] += p[c];
        }
        for (double& v : avg) v /= static_cast<double>(members.size());
        return avg;
    }

    json to_json() const override {
        json members_j = json::array();
        for (const auto& m : members) members_j.push_back(m->to_json());
        return {{"type", "voting"}, {"n_classes", n_classes}, {"members", members_j}};
    }
};

std::shared_ptr<const ModelImpl> impl_from_json(const json& j);

std::shared_ptr<BaggingModel> bagging_from_json(const json& j) {
    auto m = std::make_shared<BaggingModel>();
    m->n_classes = j.at("n_classes").get<std::size_t>();
    for (const auto& tj : j.at("trees")) m->trees.push_back(TreeModel::from_json(tj));
    return m;
}

std::shared_ptr<VotingModel> voting_from_json(const json& j) {
    auto m = std::make_shared<VotingModel>();
    m->n_classes = j.at("n_classes").get<std::size_t>();
    for (const auto& mj : j.at("members")) m->members.push_back(impl_from_json(mj));
    return m;
}

std::shared_ptr<const ModelImpl> impl_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "tree") return TreeModel::from_json(j);
    if (type == "net") return NetModel::from_json(j);
    if (type == "bagging") return bagging_from_json(j);
    if (type == "voting") return voting_from_json(j);
    throw std::invalid_argument("unknown model type in json: " + type);
}

std::shared_ptr<TreeModel> fit_tree_impl(const Matrix& X, const std::vector<std::size_t>& y,
                                         std::size_t n_classes, const TreeParams& params) {
    auto m = std::make_shared<TreeModel>();
    m->n_classes = n_classes;
    m->nodes = TreeBuilder(X, y, n_classes, params).build();
    return m;
}

std::shared_ptr<NetModel> fit_net_impl(const Matrix& X, const std::vector<std::size_t>& y,
                                       std::size_t n_classes, std::size_t hidden,
                                       nn::TrainConfig cfg, bool full_batch) {
    Scaler scaler = Scaler::fit(X);
    std::vector<nn::Tensor> inputs;
    inputs.reserve(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r)
        inputs.push_back(scaler.transform_row(X.row_ptr(r), X.cols));

    nn::NetSpec spec;
    spec.input_shape = {X.cols};
    if (hidden > 0) {
        spec.layers.push_back(nn::DenseSpec{hidden});
        spec.layers.push_back(nn::ActivationSpec{nn::Act::tanh});
    }
    spec.layers.push_back(nn::DenseSpec{n_classes});
    spec.layers.push_back(nn::SoftmaxSpec{});

    if (full_batch) cfg.batch_size = X.rows;
    nn::TrainedNet trained = nn::fit(spec, inputs, y, n_classes, cfg);
    auto m = std::make_shared<NetModel>(std::move(trained.net));
    m->scaler = std::move(scaler);
    return m;
}

}  // namespace

// ---- facade -----------------------------------------------------------------

TrainedModel::TrainedModel(LearnerKind kind, std::vector<std::string> classes,
                           std::vector<std::string> schema,
                           std::shared_ptr<const ModelImpl> impl)
    : kind_(kind), classes_(std::move(classes)), schema_(std::move(schema)),
      impl_(std::move(impl)) {}

PredictResult TrainedModel::predict(const Matrix& X, const std::vector<std::string>& schema) const {
    if (schema != schema_)
        throw std::invalid_argument("feature schema does not match the training schema");
    if (X.cols != schema_.size()) throw std::invalid_argument("feature width mismatch");

    PredictResult res;
    res.posteriors = Matrix(X.rows, classes_.size());
    for (std::size_t r = 0; r < X.rows; ++r) {
        auto p = impl_->posterior(X.row_ptr(r), X.cols);
        double sum = 0.0;
        for (double v : p) sum += v;
        if (sum <= 0.0) {
            std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
        } else {
            for (double& v : p) v /= sum;
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < p.size(); ++c)
            if (p[c] > p[best]) best = c;
        for (std::size_t c = 0; c < p.size(); ++c) res.posteriors.at(r, c) = p[c];
        res.labels.push_back(classes_[best]);
    }
    return res;
}

std::optional<std::pair<std::vector<double>, std::vector<double>>>
TrainedModel::standardizer() const {
    if (auto net = dynamic_cast<const NetModel*>(impl_.get()))
        return std::make_pair(net->scaler.mean, net->scaler.sd);
    return std::nullopt;
}

std::string TrainedModel::to_json() const {
    json j;
    j["version"] = 1;
    j["kind"] = to_string(kind_);
    j["classes"] = classes_;
    j["schema"] = schema_;
    j["model"] = impl_->to_json();
    return j.dump();
}

TrainedModel TrainedModel::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("version").get<int>() != 1)
        throw std::invalid_argument("unsupported model json version");
    const std::string kind_s = j.at("kind").get<std::string>();
    LearnerKind kind;
    if (kind_s == "tree") kind = LearnerKind::tree;
    else if (kind_s == "logreg") kind = LearnerKind::logreg;
    else if (kind_s == "mlp") kind = LearnerKind::mlp;
    else if (kind_s == "bagging") kind = LearnerKind::bagging;
    else if (kind_s == "voting") kind = LearnerKind::voting;
    else throw std::invalid_argument("unknown learner kind: " + kind_s);
    return TrainedModel(kind, j.at("classes").get<std::vector<std::string>>(),
                        j.at("schema").get<std::vector<std::string>>(),
                        impl_from_json(j.at("model")));
}

TrainedModel train_tree(const Matrix& X, const std::vector<std::string>& y,
                        const std::vector<std::string>& schema, const TreeParams& params) {
    check_training_input(X, y, schema);
    auto classes = sorted_classes(y);
    auto yi = encode_labels(y, classes);
    return TrainedModel(LearnerKind::tree, classes, schema,
                        fit_tree_impl(X, yi, classes.size(), params));
}

TrainedModel train_logreg(const Matrix& X, const std::vector<std::string>& y,
                          const std::vector<std::string>& schema, const nn::TrainConfig& cfg) {
    check_training_input(X, y, schema);
    auto classes = sorted_classes(y);
    auto yi = encode_labels(y, classes);
    return TrainedModel(LearnerKind::logreg, classes, schema,
                        fit_net_impl(X, yi, classes.size(), 0, cfg, /*full_batch=*/true));
}

TrainedModel train_mlp(const Matrix& X, const std::vector<std::string>& y,
                       const std::vector<std::string>& schema, std::size_t hidden,
                       const nn::TrainConfig& cfg) {
    check_training_input(X, y, schema);
    auto classes = sorted_classes(y);
    auto yi = encode_labels(y, classes);
    if (hidden == 0) hidden = std::max<std::size_t>(16, 2 * X.cols);
    return TrainedModel(LearnerKind::mlp, classes, schema,
                        fit_net_impl(X, yi, classes.size(), hidden, cfg, /*full_batch=*/false));
}

TrainedModel train_bagging(const Matrix& X, const std::vector<std::string>& y,
                           const std::vector<std::string>& schema, std::size_t n_trees,
                           std::uint64_t seed, const TreeParams& params) {
    check_training_input(X, y, schema);
    if (n_trees < 1) throw std::invalid_argument("bagging needs >= 1 tree");
    auto classes = sorted_classes(y);
    auto yi = encode_labels(y, classes);

    auto model = std::make_shared<BaggingModel>();
    model->n_classes = classes.size();
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng(mix_seed(seed, "bootstrap", t));
        Matrix bx(X.rows, X.cols);
        std::vector<std::size_t> by(X.rows);
        for (std::size_t r = 0; r < X.rows; ++r) {
            const auto src = static_cast<std::size_t>(rng.bounded(X.rows));
            for (std::size_t c = 0; c < X.cols; ++c) bx.at(r, c) = X.at(src, c);
            by[r] = yi[src];
        }
        model->trees.push_back(fit_tree_impl(bx, by, classes.size(), params));
    }
    return TrainedModel(LearnerKind::bagging, classes, schema, model);
}

TrainedModel train_voting(const Matrix& X, const std::vector<std::string>& y,
                          const std::vector<std::string>& schema, const nn::TrainConfig& cfg,
                          const TreeParams& tree_params) {
    check_training_input(X, y, schema);
    auto classes = sorted_classes(y);
    auto yi = encode_labels(y, classes);

    auto model = std::make_shared<VotingModel>();
    model->n_classes = classes.size();
    nn::TrainConfig mlp_cfg = cfg;
    mlp_cfg.seed = mix_seed(cfg.seed, "voting-mlp");
    model->members.push_back(fit_net_impl(X, yi, classes.size(),
                                          std::max<std::size_t>(16, 2 * X.cols), mlp_cfg,
                                          /*full_batch=*/false));
    model->members.push_back(fit_tree_impl(X, yi, classes.size(), tree_params));
    nn::TrainConfig lr_cfg = cfg;
    lr_cfg.seed = mix_seed(cfg.seed, "voting-logreg");
    model->members.push_back(fit_net_impl(X, yi, classes.size(), 0, lr_cfg, /*full_batch=*/true));
    return TrainedModel(LearnerKind::voting, classes, schema, model);
}

}  // namespace harbench
