#include "harbench/splitplan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "harbench/rng.hpp"

namespace harbench {

const char* to_string(Combination c) {
    switch (c) {
        case Combination::SNCV: return "SNCV";
        case Combination::FNCV: return "FNCV";
        case Combination::LTCV: return "LTCV";
        case Combination::SNLS: return "SNLS";
        case Combination::SNLSx10: return "SNLSx10";
        case Combination::HOLDOUT: return "HOLDOUT";
    }
    return "?";
}

Combination combination_from_string(const std::string& s) {
    if (s == "SNCV") return Combination::SNCV;
    if (s == "FNCV") return Combination::FNCV;
    if (s == "LTCV") return Combination::LTCV;
    if (s == "SNLS") return Combination::SNLS;
    if (s == "SNLSx10" || s == "SNLSX10") return Combination::SNLSx10;
    if (s == "HOLDOUT") return Combination::HOLDOUT;
    throw std::invalid_argument("unknown combination: " + s);
}

void FoldPlan::validate() const {
    if (!windows) throw std::invalid_argument("fold plan has no windows");
    std::vector<std::size_t> test_seen(windows->size(), 0);
    for (const auto& f : folds) {
        std::set<std::size_t> train_set(f.train.begin(), f.train.end());
        for (std::size_t i : f.test) {
            if (train_set.count(i))
                throw std::invalid_argument("window in both train and test of one fold");
            if (i >= windows->size()) throw std::invalid_argument("window index out of range");
            ++test_seen[i];
        }
    }
    const bool cv_style = tag != Combination::HOLDOUT;
    for (std::size_t i = 0; i < test_seen.size(); ++i) {
        if (cv_style && test_seen[i] != 1)
            throw std::invalid_argument("window not in exactly one test fold");
        if (!cv_style && test_seen[i] > 1)
            throw std::invalid_argument("window tested more than once");
    }
}

std::uint64_t FoldPlan::content_hash() const {
    std::string blob = to_string(tag);
    blob += "|" + std::to_string(folds.size());
    for (const auto& f : folds) {
        for (const char* part : {"T", "E"}) {
            const auto& idx = part[0] == 'T' ? f.train : f.test;
            blob += "|";
            blob += part;
            for (std::size_t i : idx) {
                const Window& w = window(i);
                blob += w.trial_id;
                blob += ":";
                blob += std::to_string(w.start_idx);
                blob += ";";
            }
        }
    }
    return fnv1a(blob);
}

namespace {

/// Stratified assignment of items to k folds. Items must arrive in a
/// deterministic order; each label group is shuffled with the seeded
/// generator and dealt round-robin starting at a seeded offset, so per fold
/// each class count is within one of every other fold.
std::vector<std::size_t> stratified_fold_of(const std::vector<std::string>& labels,
                                            std::size_t k, Rng& rng) {
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);

    std::vector<std::size_t> fold_of(labels.size(), 0);
    for (auto& [label, idx] : by_label) {
        rng.shuffle(idx);
        const std::size_t offset = static_cast<std::size_t>(rng.bounded(k));
        for (std::size_t i = 0; i < idx.size(); ++i) fold_of[idx[i]] = (i + offset) % k;
    }
    return fold_of;
}

FoldPlan plan_from_fold_of(Combination tag, std::uint64_t seed,
                           std::shared_ptr<const std::vector<Window>> windows,
                           const std::vector<std::size_t>& fold_of, std::size_t k) {
    FoldPlan plan;
    plan.tag = tag;
    plan.seed = seed;
    plan.windows = std::move(windows);
    plan.folds.resize(k);
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        for (std::size_t f = 0; f < k; ++f)
            (f == fold_of[i] ? plan.folds[f].test : plan.folds[f].train).push_back(i);
    }
    plan.validate();
    return plan;
}

FoldPlan split_windows_cv(Combination tag, const Dataset& ds, std::size_t k, WindowConfig cfg,
                          std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    auto windows = std::make_shared<std::vector<Window>>(dataset_windows(ds, cfg));
    if (windows->size() < k)
        throw std::invalid_argument("fewer windows (" + std::to_string(windows->size()) +
                                    ") than folds (" + std::to_string(k) + ")");
    std::vector<std::string> labels;
    labels.reserve(windows->size());
    for (const auto& w : *windows) labels.push_back(w.activity_label);

    Rng rng(mix_seed(seed, to_string(tag)));
    auto fold_of = stratified_fold_of(labels, k, rng);
    return plan_from_fold_of(tag, seed, std::move(windows), fold_of, k);
}

}  // namespace

FoldPlan split_sncv(const Dataset& ds, std::size_t k, WindowConfig cfg, std::uint64_t seed) {
    cfg.overlap_frac = 0.5;
    return split_windows_cv(Combination::SNCV, ds, k, cfg, seed);
}

FoldPlan split_fncv(const Dataset& ds, std::size_t k, WindowConfig cfg, std::uint64_t seed) {
    cfg.overlap_frac = 0.0;
    return split_windows_cv(Combination::FNCV, ds, k, cfg, seed);
}

FoldPlan split_ltcv(const Dataset& ds, std::size_t k, WindowConfig cfg, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    cfg.overlap_frac = 0.5;
    if (ds.trials.size() < k)
        throw std::invalid_argument("fewer trials (" + std::to_string(ds.trials.size()) +
                                    ") than folds (" + std::to_string(k) + ")");

    std::vector<std::string> trial_labels;
    for (const auto& t : ds.trials) trial_labels.push_back(t.activity_label);
    Rng rng(mix_seed(seed, "LTCV"));
    auto trial_fold = stratified_fold_of(trial_labels, k, rng);

    auto windows = std::make_shared<std::vector<Window>>();
    std::vector<std::size_t> fold_of;
    for (std::size_t ti = 0; ti < ds.trials.size(); ++ti) {
        for (auto& w : slide_windows(ds.trials[ti], cfg)) {
            windows->push_back(std::move(w));
            fold_of.push_back(trial_fold[ti]);
        }
    }
    return plan_from_fold_of(Combination::LTCV, seed, std::move(windows), fold_of, k);
}

FoldPlan split_snls(const Dataset& ds, WindowConfig cfg) {
    cfg.overlap_frac = 0.5;
    if (ds.subject_set.size() < 2) throw std::invalid_argument("leave-one-subject-out needs >= 2 subjects");

    auto windows = std::make_shared<std::vector<Window>>(dataset_windows(ds, cfg));
    std::map<std::string, std::size_t> fold_of_subject;
    for (std::size_t s = 0; s < ds.subject_set.size(); ++s) fold_of_subject[ds.subject_set[s]] = s;

    std::vector<std::size_t> fold_of;
    fold_of.reserve(windows->size());
    std::vector<std::size_t> per_subject(ds.subject_set.size(), 0);
    for (const auto& w : *windows) {
        const std::size_t f = fold_of_subject.at(w.subject_id);
        fold_of.push_back(f);
        ++per_subject[f];
    }
    for (std::size_t s = 0; s < per_subject.size(); ++s)
        if (per_subject[s] == 0)
            throw std::invalid_argument("subject " + ds.subject_set[s] +
                                        " yields zero windows; its fold would have an empty test set");
    return plan_from_fold_of(Combination::SNLS, 0, std::move(windows), fold_of,
                             ds.subject_set.size());
}

std::vector<FoldPlan> split_snls_x10(const Dataset& ds, WindowConfig cfg, std::uint64_t seed) {
    FoldPlan base = split_snls(ds, cfg);
    std::vector<FoldPlan> reps;
    for (std::size_t r = 0; r < 10; ++r) {
        FoldPlan plan = base;
        plan.tag = Combination::SNLSx10;
        plan.seed = seed;
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            auto& train = plan.folds[f].train;
            const auto keep = static_cast<std::size_t>(
                std::floor(0.8 * static_cast<double>(train.size()) + 0.5));
            Rng rng(mix_seed(seed, "SNLSx10", r, f));
            rng.shuffle(train);
            train.resize(keep);
            std::sort(train.begin(), train.end());
        }
        reps.push_back(std::move(plan));
    }
    return reps;
}

FoldPlan split_holdout(const Dataset& ds, WindowConfig cfg, double train_frac,
                       std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0))
        throw std::invalid_argument("train_frac must be in (0,1)");
    auto windows = std::make_shared<std::vector<Window>>(dataset_windows(ds, cfg));
    if (windows->size() < 2) throw std::invalid_argument("holdout needs >= 2 windows");

    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < windows->size(); ++i)
        by_label[(*windows)[i].activity_label].push_back(i);

    FoldPlan plan;
    plan.tag = Combination::HOLDOUT;
    plan.seed = seed;
    plan.windows = std::move(windows);
    plan.folds.resize(1);
    Rng rng(mix_seed(seed, "HOLDOUT"));
    for (auto& [label, idx] : by_label) {
        rng.shuffle(idx);
        const auto n_train = static_cast<std::size_t>(
            std::floor(train_frac * static_cast<double>(idx.size()) + 0.5));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? plan.folds[0].train : plan.folds[0].test).push_back(idx[i]);
    }
    std::sort(plan.folds[0].train.begin(), plan.folds[0].train.end());
    std::sort(plan.folds[0].test.begin(), plan.folds[0].test.end());
    if (plan.folds[0].train.empty() || plan.folds[0].test.empty())
        throw std::invalid_argument("holdout produced an empty train or test side");
    plan.validate();
    return plan;
}

LeakageReport audit_leakage(const FoldPlan& plan) {
    LeakageReport rep;
    rep.fold_overlap.resize(plan.folds.size(), 0);
    rep.fold_same_trial.resize(plan.folds.size(), 0);
    rep.fold_same_subject.resize(plan.folds.size(), 0);

    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        for (std::size_t ti : plan.folds[f].train) {
            const Window& a = plan.window(ti);
            for (std::size_t ei : plan.folds[f].test) {
                const Window& b = plan.window(ei);
                if (a.subject_id == b.subject_id) ++rep.fold_same_subject[f];
                if (a.trial_id != b.trial_id) continue;
                ++rep.fold_same_trial[f];
                if (a.start_idx < b.end_idx && b.start_idx < a.end_idx) ++rep.fold_overlap[f];
            }
        }
        rep.overlap_pairs += rep.fold_overlap[f];
        rep.same_trial_pairs += rep.fold_same_trial[f];
        rep.same_subject_pairs += rep.fold_same_subject[f];
    }
    return rep;
}

std::string leakage_report_json(const FoldPlan& plan, const LeakageReport& report) {
    nlohmann::ordered_json j;
    j["combination"] = to_string(plan.tag);
    j["seed"] = plan.seed;
    j["folds"] = plan.folds.size();
    j["windows"] = plan.window_total();
    j["overlap_pairs"] = report.overlap_pairs;
    j["same_trial_pairs"] = report.same_trial_pairs;
    j["same_subject_pairs"] = report.same_subject_pairs;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const std::string p = "fold_" + std::to_string(f) + "_";
        j[p + "overlap_pairs"] = report.fold_overlap[f];
        j[p + "same_trial_pairs"] = report.fold_same_trial[f];
        j[p + "same_subject_pairs"] = report.fold_same_subject[f];
    }
    return j.dump(2);
}

}  // namespace harbench
