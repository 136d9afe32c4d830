#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "harbench/matrix.hpp"
#include "harbench/neuralnet.hpp"

namespace harbench {

enum class LearnerKind { tree, logreg, mlp, bagging, voting };

const char* to_string(LearnerKind k);

struct TreeParams {
    std::size_t max_depth = 16;
    std::size_t min_leaf = 1;
};

struct PredictResult {
    std::vector<std::string> labels;
    Matrix posteriors;  // one normalized row per input, columns follow class_list
};

class ModelImpl;

/// Trained classifier facade. Models are immutable; predict is const and
/// rejects feature matrices whose schema differs from the training schema.
class TrainedModel {
public:
    LearnerKind kind() const { return kind_; }
    const std::vector<std::string>& class_list() const { return classes_; }
    const std::vector<std::string>& train_schema() const { return schema_; }

    PredictResult predict(const Matrix& X, const std::vector<std::string>& schema) const;

    /// Fitted standardizer (mean, sd per feature) for net-backed models.
    std::optional<std::pair<std::vector<double>, std::vector<double>>> standardizer() const;

    /// Versioned JSON fixture format; not a cross-version stability guarantee.
    std::string to_json() const;
    static TrainedModel from_json(const std::string& text);

    TrainedModel(LearnerKind kind, std::vector<std::string> classes,
                 std::vector<std::string> schema, std::shared_ptr<const ModelImpl> impl);

private:
    LearnerKind kind_;
    std::vector<std::string> classes_;
    std::vector<std::string> schema_;
    std::shared_ptr<const ModelImpl> impl_;
};

/// Greedy binary Gini tree (J48 stand-in; no pruning). Deterministic: ties
/// break toward the lowest feature index, then the lowest threshold.
TrainedModel train_tree(const Matrix& X, const std::vector<std::string>& y,
                        const std::vector<std::string>& schema, const TreeParams& params = {});

/// Multinomial softmax regression, full-batch Adadelta, features standardized
/// with training-set statistics.
TrainedModel train_logreg(const Matrix& X, const std::vector<std::string>& y,
                          const std::vector<std::string>& schema, const nn::TrainConfig& cfg);

/// One hidden tanh layer (default size max(16, 2 x features)), softmax
/// output, Adadelta with the shared stopping rule.
TrainedModel train_mlp(const Matrix& X, const std::vector<std::string>& y,
                       const std::vector<std::string>& schema, std::size_t hidden,
                       const nn::TrainConfig& cfg);

/// Bagged Gini trees on seeded bootstrap resamples; majority vote with ties
/// broken by class order.
TrainedModel train_bagging(const Matrix& X, const std::vector<std::string>& y,
                           const std::vector<std::string>& schema, std::size_t n_trees,
                           std::uint64_t seed, const TreeParams& params = {});

/// Soft-voting ensemble of {mlp, tree, logreg} trained on identical data;
/// prediction is the argmax of the averaged posteriors.
TrainedModel train_voting(const Matrix& X, const std::vector<std::string>& y,
                          const std::vector<std::string>& schema, const nn::TrainConfig& cfg,
                          const TreeParams& tree_params = {});

}  // namespace harbench
