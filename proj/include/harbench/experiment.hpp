#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "harbench/data_model.hpp"
#include "harbench/evaluation.hpp"
#include "harbench/learners.hpp"
#include "harbench/splitplan.hpp"

namespace harbench {

/// The recognition methods of the harness. `oracle` is a diagnostic stub that
/// predicts the true label; it exercises plans and reporting end to end.
enum class Method { kwapisz, catal, kim, chen_xue, jiang_yin, ha2015, ha2016, oracle };

const char* to_string(Method m);
Method method_from_string(const std::string& s);
/// The seven recognition methods, without the oracle stub.
std::vector<Method> paper_methods();

struct ExperimentConfig {
    Method method = Method::catal;
    Combination combination = Combination::LTCV;
    double window_sec = 5.0;
    std::size_t k = 10;
    double train_frac = 0.7;  // HOLDOUT only
    std::uint64_t seed = 0;
    nn::TrainConfig train;  // shared setup for ConvNets and iterative learners
};

struct PerFold {
    std::size_t fold_id = 0;  // repetition index for SNLSx10
    double accuracy = 0.0;
    double macro_f = 0.0;
};

struct ResultRow {
    std::string method;
    std::string dataset;
    std::string combination;
    bool feasible = true;
    std::string note;  // infeasibility reason when not feasible
    double mean_accuracy = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_macro_f = 0.0;
    std::vector<PerFold> per_fold;
    LeakageReport leakage;
    std::size_t folds = 0;
    double wall_time_s = 0.0;
    std::string config_hash;
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

/// Fold plans keyed by everything that defines a split, so every method in a
/// batch trains and tests on identical fold memberships.
class PlanCache {
public:
    const FoldPlan& plan(const Dataset& ds, const ExperimentConfig& cfg);
    const std::vector<FoldPlan>& snls_x10_plans(const Dataset& ds, const ExperimentConfig& cfg);

private:
    std::map<std::string, FoldPlan> plans_;
    std::map<std::string, std::vector<FoldPlan>> reps_;
};

/// Modality groups (contiguous runs of equal sensor kind) of a dataset's
/// channel schema, as widths.
std::vector<std::size_t> modality_groups(const Dataset& ds);

/// Why a method cannot run on this dataset (the '-' marker), or nullopt.
std::optional<std::string> method_infeasibility(Method m, const Dataset& ds, double window_sec);

ResultRow run_experiment(const Dataset& ds, const ExperimentConfig& cfg, PlanCache& cache);

/// Runs several configs against one dataset with a shared plan cache.
ResultTable run_batch(const Dataset& ds, const std::vector<ExperimentConfig>& configs);

std::string config_hash(const Dataset& ds, const ExperimentConfig& cfg);

}  // namespace harbench
