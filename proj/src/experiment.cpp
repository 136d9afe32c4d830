#include "harbench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "harbench/features.hpp"

namespace harbench {

const char* to_string(Method m) {
    switch (m) {
        case Method::kwapisz: return "kwapisz";
        case Method::catal: return "catal";
        case Method::kim: return "kim";
        case Method::chen_xue: return "chen_xue";
        case Method::jiang_yin: return "jiang_yin";
        case Method::ha2015: return "ha2015";
        case Method::ha2016: return "ha2016";
        case Method::oracle: return "oracle";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    for (Method m : {Method::kwapisz, Method::catal, Method::kim, Method::chen_xue,
                     Method::jiang_yin, Method::ha2015, Method::ha2016, Method::oracle})
        if (s == to_string(m)) return m;
    throw std::invalid_argument("unknown method: " + s);
}

std::vector<Method> paper_methods() {
    return {Method::kwapisz, Method::catal,  Method::kim,   Method::chen_xue,
            Method::jiang_yin, Method::ha2015, Method::ha2016};
}

namespace {

std::string plan_key(const ExperimentConfig& cfg) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s|w=%.9g|k=%zu|tf=%.9g|seed=%llu",
                  to_string(cfg.combination), cfg.window_sec, cfg.k, cfg.train_frac,
                  static_cast<unsigned long long>(cfg.seed));
    return buf;
}

FoldPlan build_plan(const Dataset& ds, const ExperimentConfig& cfg) {
    WindowConfig wc;
    wc.window_sec = cfg.window_sec;
    switch (cfg.combination) {
        case Combination::SNCV: return split_sncv(ds, cfg.k, wc, cfg.seed);
        case Combination::FNCV: return split_fncv(ds, cfg.k, wc, cfg.seed);
        case Combination::LTCV: return split_ltcv(ds, cfg.k, wc, cfg.seed);
        case Combination::SNLS: return split_snls(ds, wc);
        case Combination::HOLDOUT: return split_holdout(ds, wc, cfg.train_frac, cfg.seed);
        case Combination::SNLSx10: break;
    }
    throw std::invalid_argument("SNLSx10 produces a list of plans; use snls_x10_plans");
}

}  // namespace

const FoldPlan& PlanCache::plan(const Dataset& ds, const ExperimentConfig& cfg) {
    const std::string key = ds.name + "|" + plan_key(cfg);
    auto it = plans_.find(key);
    if (it == plans_.end()) it = plans_.emplace(key, build_plan(ds, cfg)).first;
    return it->second;
}

const std::vector<FoldPlan>& PlanCache::snls_x10_plans(const Dataset& ds,
                                                       const ExperimentConfig& cfg) {
    const std::string key = ds.name + "|" + plan_key(cfg);
    auto it = reps_.find(key);
    if (it == reps_.end()) {
        WindowConfig wc;
        wc.window_sec = cfg.window_sec;
        it = reps_.emplace(key, split_snls_x10(ds, wc, cfg.seed)).first;
    }
    return it->second;
}

std::vector<std::size_t> modality_groups(const Dataset& ds) {
    std::vector<std::size_t> groups;
    if (ds.trials.empty()) return groups;
    const auto& chans = ds.trials.front().channels;
    for (std::size_t c = 0; c < chans.size(); ++c) {
        if (c == 0 || chans[c].sensor_kind != chans[c - 1].sensor_kind)
            groups.push_back(1);
        else
            ++groups.back();
    }
    return groups;
}

std::optional<std::string> method_infeasibility(Method m, const Dataset& ds, double window_sec) {
    if (ds.trials.empty()) return "empty dataset";
    const auto& first = ds.trials.front();
    const std::size_t channels = first.channels.size();
    WindowConfig wc;
    wc.window_sec = window_sec;
    const std::size_t win = wc.window_len(first.sample_rate_hz);
    const auto n_classes = ds.activity_set.size();

    try {
        switch (m) {
            case Method::kwapisz:
            case Method::catal:
            case Method::oracle:
                return std::nullopt;
            case Method::kim:
                if (channels < 2) return "mean+correlation features need >= 2 channels";
                return std::nullopt;
            case Method::chen_xue:
                nn::build_chen_xue(win, channels, n_classes);
                return std::nullopt;
            case Method::jiang_yin: {
                if (channels < 2) return "signal image needs >= 2 channels";
                const auto seq = nn::signal_image_sequence(channels);
                nn::build_jiang_yin(seq.size(), win, n_classes);
                return std::nullopt;
            }
            case Method::ha2015:
            case Method::ha2016: {
                const auto groups = modality_groups(ds);
                if (groups.size() < 2) return "needs >= 2 modality groups";
                if (m == Method::ha2015)
                    nn::build_ha2015(win, groups, n_classes);
                else
                    nn::build_ha2016(win, groups, n_classes);
                return std::nullopt;
            }
        }
    } catch (const std::invalid_argument& e) {
        return std::string(e.what());
    }
    return "unknown method";
}

namespace {

std::vector<std::string> global_classes(const Dataset& ds) { return ds.activity_set; }

struct FoldScore {
    double accuracy = 0.0;
    double macro_f = 0.0;
    bool scored = false;  // folds with empty test sets are skipped
};

FoldScore score_predictions(const std::vector<std::string>& pred,
                            const std::vector<std::string>& truth,
                            const std::vector<std::string>& classes) {
    FoldScore s;
    if (pred.empty()) return s;
    s.accuracy = accuracy(pred, truth);
    s.macro_f = macro_f_measure(pred, truth, classes);
    s.scored = true;
    return s;
}

class MethodRunner {
public:
    MethodRunner(const Dataset& ds, const ExperimentConfig& cfg, const FoldPlan& plan)
        : ds_(ds), cfg_(cfg), plan_(plan), classes_(global_classes(ds)) {
        for (std::size_t c = 0; c < classes_.size(); ++c) class_index_[classes_[c]] = c;
        if (is_net_method()) prepare_net();
    }

    FoldScore run_fold(const Fold& fold, std::uint64_t fold_seed) {
        std::vector<std::string> truth;
        truth.reserve(fold.test.size());
        for (std::size_t i : fold.test) truth.push_back(plan_.window(i).activity_label);
        if (fold.test.empty() || fold.train.empty()) return {};

        std::vector<std::string> pred;
        if (cfg_.method == Method::oracle) {
            pred = truth;
        } else if (is_net_method()) {
            pred = run_net_fold(fold, fold_seed);
        } else {
            pred = run_feature_fold(fold, fold_seed);
        }
        return score_predictions(pred, truth, classes_);
    }

private:
    bool is_net_method() const {
        return cfg_.method == Method::chen_xue || cfg_.method == Method::jiang_yin ||
               cfg_.method == Method::ha2015 || cfg_.method == Method::ha2016;
    }

    void prepare_net() {
        const auto& first = ds_.trials.front();
        WindowConfig wc;
        wc.window_sec = cfg_.window_sec;
        const std::size_t win = wc.window_len(first.sample_rate_hz);
        const std::size_t channels = first.channels.size();
        switch (cfg_.method) {
            case Method::chen_xue:
                spec_ = nn::build_chen_xue(win, channels, classes_.size());
                break;
            case Method::jiang_yin:
                spec_ = nn::build_jiang_yin(nn::signal_image_sequence(channels).size(), win,
                                            classes_.size());
                break;
            case Method::ha2015:
                groups_ = modality_groups(ds_);
                spec_ = nn::build_ha2015(win, groups_, classes_.size());
                break;
            case Method::ha2016:
                groups_ = modality_groups(ds_);
                spec_ = nn::build_ha2016(win, groups_, classes_.size());
                break;
            default: break;
        }
        tensors_.resize(plan_.window_total());
        tensor_ready_.assign(plan_.window_total(), false);
    }

    const nn::Tensor& tensor_for(std::size_t i) {
        if (!tensor_ready_[i]) {
            const Window& w = plan_.window(i);
            switch (cfg_.method) {
                case Method::jiang_yin: tensors_[i] = nn::signal_image(w); break;
                case Method::ha2015:
                case Method::ha2016: tensors_[i] = nn::zero_padded_input(w, groups_); break;
                default: tensors_[i] = nn::window_tensor(w); break;
            }
            tensor_ready_[i] = true;
        }
        return tensors_[i];
    }

    std::vector<std::string> run_net_fold(const Fold& fold, std::uint64_t fold_seed) {
        std::vector<nn::Tensor> train_x;
        std::vector<std::size_t> train_y;
        train_x.reserve(fold.train.size());
        for (std::size_t i : fold.train) {
            train_x.push_back(tensor_for(i));
            train_y.push_back(class_index_.at(plan_.window(i).activity_label));
        }
        nn::TrainConfig tc = cfg_.train;
        tc.seed = fold_seed;
        nn::TrainedNet net = nn::fit(spec_, train_x, train_y, classes_.size(), tc);

        std::vector<std::string> pred;
        pred.reserve(fold.test.size());
        for (std::size_t i : fold.test) {
            const auto p = net.predict_proba(tensor_for(i));
            std::size_t best = 0;
            for (std::size_t c = 1; c < p.size(); ++c)
                if (p[c] > p[best]) best = c;
            pred.push_back(classes_[best]);
        }
        return pred;
    }

    std::vector<std::string> run_feature_fold(const Fold& fold, std::uint64_t fold_seed) {
        const FeatureExtractor extract =
            cfg_.method == Method::kim ? FeatureExtractor(features_mean_corr)
                                       : FeatureExtractor(features_mean_std);
        FeatureTable train_t = feature_table(*plan_.windows, fold.train, extract);
        FeatureTable test_t = feature_table(*plan_.windows, fold.test, extract);

        nn::TrainConfig tc = cfg_.train;
        tc.seed = fold_seed;
        TrainedModel model = [&] {
            switch (cfg_.method) {
                case Method::kwapisz:
                    return train_mlp(train_t.X, train_t.labels, train_t.schema, 0, tc);
                case Method::catal:
                    return train_voting(train_t.X, train_t.labels, train_t.schema, tc);
                case Method::kim:
                    return train_bagging(train_t.X, train_t.labels, train_t.schema, 10, fold_seed);
                default: throw std::logic_error("not a feature method");
            }
        }();
        return model.predict(test_t.X, test_t.schema).labels;
    }

    const Dataset& ds_;
    const ExperimentConfig& cfg_;
    const FoldPlan& plan_;
    std::vector<std::string> classes_;
    std::map<std::string, std::size_t> class_index_;
    nn::NetSpec spec_;
    std::vector<std::size_t> groups_;
    std::vector<nn::Tensor> tensors_;
    std::vector<bool> tensor_ready_;
};

void aggregate(ResultRow& row, const std::vector<PerFold>& scores) {
    row.per_fold = scores;
    row.folds = scores.size();
    if (scores.empty()) {
        row.feasible = false;
        row.note = "no scorable folds";
        return;
    }
    std::vector<double> accs, fs;
    for (const auto& s : scores) {
        accs.push_back(s.accuracy);
        fs.push_back(s.macro_f);
    }
    row.mean_accuracy = 0.0;
    for (double a : accs) row.mean_accuracy += a;
    row.mean_accuracy /= static_cast<double>(accs.size());
    row.mean_macro_f = 0.0;
    for (double f : fs) row.mean_macro_f += f;
    row.mean_macro_f /= static_cast<double>(fs.size());
    if (accs.size() >= 2) {
        auto ci = confidence_interval(accs, 0.95);
        row.ci_low = ci.first;
        row.ci_high = ci.second;
    } else {
        row.ci_low = row.ci_high = row.mean_accuracy;  // single fold: no interval
    }
}

}  // namespace

std::string config_hash(const Dataset& ds, const ExperimentConfig& cfg) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s|%s|%s|w=%.9g|k=%zu|tf=%.9g|seed=%llu|ep=%zu|sl=%.9g|bs=%zu|rho=%.9g|eps=%.9g",
                  to_string(cfg.method), ds.name.c_str(), to_string(cfg.combination),
                  cfg.window_sec, cfg.k, cfg.train_frac,
                  static_cast<unsigned long long>(cfg.seed), cfg.train.max_epochs,
                  cfg.train.stop_loss, cfg.train.batch_size, cfg.train.rho, cfg.train.eps);
    char out[24];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(fnv1a(buf)));
    return out;
}

ResultRow run_experiment(const Dataset& ds, const ExperimentConfig& cfg, PlanCache& cache) {
    const auto t0 = std::chrono::steady_clock::now();
    ResultRow row;
    row.method = to_string(cfg.method);
    row.dataset = ds.name;
    row.combination = to_string(cfg.combination);
    row.config_hash = config_hash(ds, cfg);

    if (auto reason = method_infeasibility(cfg.method, ds, cfg.window_sec)) {
        row.feasible = false;
        row.note = *reason;
        return row;
    }

    if (cfg.combination == Combination::SNLSx10) {
        const auto& reps = cache.snls_x10_plans(ds, cfg);
        std::vector<PerFold> rep_scores;
        for (std::size_t r = 0; r < reps.size(); ++r) {
            MethodRunner runner(ds, cfg, reps[r]);
            double acc_sum = 0.0, f_sum = 0.0;
            std::size_t scored = 0;
            for (std::size_t f = 0; f < reps[r].folds.size(); ++f) {
                const FoldScore s =
                    runner.run_fold(reps[r].folds[f], mix_seed(cfg.seed, "rep-fold", r, f));
                if (!s.scored) continue;
                acc_sum += s.accuracy;
                f_sum += s.macro_f;
                ++scored;
            }
            if (scored == 0) continue;
            rep_scores.push_back({r, acc_sum / static_cast<double>(scored),
                                  f_sum / static_cast<double>(scored)});
        }
        aggregate(row, rep_scores);
        row.leakage = audit_leakage(reps.front());
    } else {
        const FoldPlan& plan = cache.plan(ds, cfg);
        MethodRunner runner(ds, cfg, plan);
        std::vector<PerFold> scores;
        for (std::size_t f = 0; f < plan.folds.size(); ++f) {
            const FoldScore s = runner.run_fold(plan.folds[f], mix_seed(cfg.seed, "fold", f));
            if (s.scored) scores.push_back({f, s.accuracy, s.macro_f});
        }
        aggregate(row, scores);
        row.leakage = audit_leakage(plan);
    }

    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

ResultTable run_batch(const Dataset& ds, const std::vector<ExperimentConfig>& configs) {
    PlanCache cache;
    ResultTable table;
    for (const auto& cfg : configs) table.rows.push_back(run_experiment(ds, cfg, cache));
    return table;
}

}  // namespace harbench
