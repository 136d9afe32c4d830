#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "harbench/windowing.hpp"

namespace harbench {

/// The sample-generation x validation-protocol combinations of the harness.
enum class Combination { SNCV, FNCV, LTCV, SNLS, SNLSx10, HOLDOUT };

const char* to_string(Combination c);
Combination combination_from_string(const std::string& s);

struct Fold {
    std::vector<std::size_t> train;  // indices into FoldPlan::windows
    std::vector<std::size_t> test;
};

/// A complete train/test partition of windows. Windows are shared so plans
/// (and the ten SNLSx10 repetitions) stay cheap to copy.
struct FoldPlan {
    Combination tag = Combination::SNCV;
    std::uint64_t seed = 0;
    std::shared_ptr<const std::vector<Window>> windows;
    std::vector<Fold> folds;

    const Window& window(std::size_t i) const { return (*windows)[i]; }
    std::size_t window_total() const { return windows ? windows->size() : 0; }

    /// Checks the structural invariants: disjoint train/test per fold, and for
    /// cross-validation style plans that the test sets partition all windows.
    void validate() const;

    /// Hash of fold memberships and window identities; equal hashes across a
    /// batch certify that methods saw identical splits.
    std::uint64_t content_hash() const;
};

struct LeakageReport {
    std::size_t overlap_pairs = 0;       // (train,test) pairs from one trial with intersecting ranges
    std::size_t same_trial_pairs = 0;    // pairs sharing trial_id
    std::size_t same_subject_pairs = 0;  // pairs sharing subject_id
    std::vector<std::size_t> fold_overlap;
    std::vector<std::size_t> fold_same_trial;
    std::vector<std::size_t> fold_same_subject;
};

/// Semi-non-overlapping windows (50% overlap), stratified k-fold over windows.
FoldPlan split_sncv(const Dataset& ds, std::size_t k, WindowConfig cfg, std::uint64_t seed);

/// Full-non-overlapping windows (zero overlap), stratified k-fold over windows.
FoldPlan split_fncv(const Dataset& ds, std::size_t k, WindowConfig cfg, std::uint64_t seed);

/// Leave-one-trial-out: trials are folded (stratified by activity), then
/// windows (50% overlap) inherit their trial's fold.
FoldPlan split_ltcv(const Dataset& ds, std::size_t k, WindowConfig cfg, std::uint64_t seed);

/// Leave-one-subject-out: one fold per subject, no randomness.
FoldPlan split_snls(const Dataset& ds, WindowConfig cfg);

/// Ten SNLS repetitions, each training on a seeded 80% subsample of every
/// fold's training windows; test sets are identical across repetitions.
std::vector<FoldPlan> split_snls_x10(const Dataset& ds, WindowConfig cfg, std::uint64_t seed);

/// Single stratified train/test split of windows.
FoldPlan split_holdout(const Dataset& ds, WindowConfig cfg, double train_frac,
                       std::uint64_t seed);

/// Exact leakage counts by brute-force scan over all (train, test) pairs of
/// every fold.
LeakageReport audit_leakage(const FoldPlan& plan);

/// Flat key/value JSON document for the audit CLI.
std::string leakage_report_json(const FoldPlan& plan, const LeakageReport& report);

}  // namespace harbench
