// Command-line front end: dataset generation/ingestion, experiment runs,
// leakage audits, LDA projections and report rendering.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "harbench/dataset_io.hpp"
#include "harbench/experiment.hpp"
#include "harbench/features.hpp"
#include "harbench/report.hpp"

namespace {

using namespace harbench;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct DataOpts {
    std::string path;
    bool synthetic = false;
    SyntheticSpec spec;
    std::uint64_t data_seed = 42;
};

void add_data_options(CLI::App* cmd, DataOpts& opts) {
    auto* data = cmd->add_option("--data", opts.path, "Dataset directory (canonical layout)");
    auto* synth = cmd->add_flag("--synthetic", opts.synthetic,
                                "Use the built-in synthetic generator instead of --data");
    data->excludes(synth);
    cmd->add_option("--data-seed", opts.data_seed, "Seed for --synthetic data generation")
        ->capture_default_str();
    cmd->add_option("--subjects", opts.spec.n_subjects)->capture_default_str();
    cmd->add_option("--activities", opts.spec.n_activities)->capture_default_str();
    cmd->add_option("--trials-per-pair", opts.spec.trials_per_pair)->capture_default_str();
    cmd->add_option("--trial-steps", opts.spec.trial_len_steps)->capture_default_str();
    cmd->add_option("--rate", opts.spec.sample_rate_hz)->capture_default_str();
    cmd->add_option("--channels", opts.spec.n_channels)->capture_default_str();
    cmd->add_option("--corr", opts.spec.trial_noise_corr, "AR(1) coefficient of the trial drift")
        ->capture_default_str();
    cmd->add_option("--noise-sd", opts.spec.noise_sd)->capture_default_str();
    cmd->add_option("--drift-sd", opts.spec.drift_sd)->capture_default_str();
}

Dataset load_dataset(const DataOpts& opts) {
    if (opts.synthetic) return generate_synthetic(opts.spec, opts.data_seed);
    if (opts.path.empty())
        throw std::invalid_argument("either --data or --synthetic is required");
    return ingest_dataset(opts.path);
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::vector<Method> parse_methods(const std::string& arg) {
    std::vector<Method> methods;
    if (arg == "all") return paper_methods();
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) methods.push_back(method_from_string(item));
    if (methods.empty()) throw std::invalid_argument("no methods given");
    return methods;
}

int cmd_synth(const DataOpts& opts, const std::string& out_dir) {
    Dataset ds = generate_synthetic(opts.spec, opts.data_seed);
    emit_dataset(ds, out_dir);
    std::cout << "wrote " << ds.trials.size() << " trials to " << out_dir << "\n";
    return kExitOk;
}

int cmd_ingest(const std::string& in_dir, const std::string& out_dir) {
    Dataset ds = ingest_dataset(in_dir);
    std::cout << "name=" << ds.name << " trials=" << ds.trials.size()
              << " activities=" << ds.activity_set.size()
              << " subjects=" << ds.subject_set.size() << " rate="
              << (ds.trials.empty() ? 0.0 : ds.trials.front().sample_rate_hz) << "\n";
    if (!out_dir.empty()) {
        emit_dataset(ds, out_dir);
        std::cout << "re-emitted canonical layout to " << out_dir << "\n";
    }
    return kExitOk;
}

int cmd_run(const DataOpts& data_opts, const std::string& methods_arg,
            const std::string& combination_arg, ExperimentConfig base,
            const std::string& out_path) {
    Dataset ds = load_dataset(data_opts);
    base.combination = combination_from_string(combination_arg);

    std::vector<ExperimentConfig> cfgs;
    for (Method m : parse_methods(methods_arg)) {
        ExperimentConfig c = base;
        c.method = m;
        cfgs.push_back(c);
    }
    ResultTable table = run_batch(ds, cfgs);

    bool any_feasible = false;
    for (const auto& r : table.rows) {
        if (r.feasible) {
            any_feasible = true;
            std::printf("%-10s %-8s acc=%.4f [%.4f, %.4f] macro_f=%.4f folds=%zu overlap=%zu "
                        "same_trial=%zu same_subject=%zu (%.1fs)\n",
                        r.method.c_str(), r.combination.c_str(), r.mean_accuracy, r.ci_low,
                        r.ci_high, r.mean_macro_f, r.folds, r.leakage.overlap_pairs,
                        r.leakage.same_trial_pairs, r.leakage.same_subject_pairs, r.wall_time_s);
        } else {
            std::printf("%-10s %-8s -  (%s)\n", r.method.c_str(), r.combination.c_str(),
                        r.note.c_str());
        }
    }
    if (!out_path.empty()) write_output(out_path, emit_report(table, ReportFormat::json));
    return any_feasible ? kExitOk : kExitInfeasible;
}

int cmd_audit(const DataOpts& data_opts, const std::string& combination_arg,
              ExperimentConfig base, const std::string& out_path) {
    Dataset ds = load_dataset(data_opts);
    base.combination = combination_from_string(combination_arg);
    PlanCache cache;
    const FoldPlan& plan = base.combination == Combination::SNLSx10
                               ? cache.snls_x10_plans(ds, base).front()
                               : cache.plan(ds, base);
    write_output(out_path, leakage_report_json(plan, audit_leakage(plan)) + "\n");
    return kExitOk;
}

int cmd_lda(const DataOpts& data_opts, const std::string& combination_arg, ExperimentConfig base,
            std::size_t fold_idx, std::size_t components, const std::string& features_arg,
            const std::string& set_arg, const std::string& out_path) {
    Dataset ds = load_dataset(data_opts);
    base.combination = combination_from_string(combination_arg);
    PlanCache cache;
    const FoldPlan& plan = base.combination == Combination::SNLSx10
                               ? cache.snls_x10_plans(ds, base).front()
                               : cache.plan(ds, base);
    if (fold_idx >= plan.folds.size()) throw std::invalid_argument("fold index out of range");

    const FeatureExtractor extract = features_arg == "mean_corr"
                                         ? FeatureExtractor(features_mean_corr)
                                         : FeatureExtractor(features_mean_std);
    const Fold& fold = plan.folds[fold_idx];
    FeatureTable train_t = feature_table(*plan.windows, fold.train, extract);
    FeatureTable test_t = feature_table(*plan.windows, fold.test, extract);

    LdaResult lda = lda_project(train_t.X, train_t.labels, components);
    std::vector<double> dir1(train_t.X.cols);
    for (std::size_t i = 0; i < dir1.size(); ++i) dir1[i] = lda.directions.at(i, 0);
    std::fprintf(stderr, "separability(train, comp1)=%.6f separability(test, comp1)=%.6f\n",
                 separability_ratio(train_t.X, train_t.labels, dir1),
                 separability_ratio(test_t.X, test_t.labels, dir1));

    if (set_arg == "test") {
        Matrix proj(test_t.X.rows, lda.directions.cols);
        for (std::size_t r = 0; r < test_t.X.rows; ++r)
            for (std::size_t k = 0; k < lda.directions.cols; ++k) {
                double acc = 0.0;
                for (std::size_t c = 0; c < test_t.X.cols; ++c)
                    acc += test_t.X.at(r, c) * lda.directions.at(c, k);
                proj.at(r, k) = acc;
            }
        write_output(out_path, lda_points_csv(proj, test_t.labels));
    } else {
        write_output(out_path, lda_points_csv(lda.projected, train_t.labels));
    }
    return kExitOk;
}

int cmd_report(const std::string& in_path, const std::string& format_arg,
               const std::string& out_path, const std::string& per_fold_path) {
    std::ifstream in(in_path);
    if (!in) throw std::invalid_argument("cannot read " + in_path);
    std::stringstream buf;
    buf << in.rdbuf();
    ResultTable table = table_from_json(buf.str());
    write_output(out_path, emit_report(table, report_format_from_string(format_arg)));
    if (!per_fold_path.empty()) write_output(per_fold_path, per_fold_csv(table));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bias-aware benchmark harness for wearable-sensor activity recognition"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
    DataOpts synth_opts;
    add_data_options(synth, synth_opts);
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output directory")->required();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate (and optionally re-emit) a dataset");
    std::string ingest_in, ingest_out;
    ingest->add_option("--in", ingest_in, "Dataset directory")->required();
    ingest->add_option("--out", ingest_out, "Re-emit canonical layout here");

    // shared experiment options
    auto add_experiment_options = [](CLI::App* cmd, ExperimentConfig& cfg,
                                     std::string& combination) {
        cmd->add_option("--combination", combination,
                        "SNCV, FNCV, LTCV, SNLS, SNLSx10 or HOLDOUT")
            ->required();
        cmd->add_option("--window-sec", cfg.window_sec)->capture_default_str();
        cmd->add_option("--k", cfg.k, "Folds for cross-validation combinations")
            ->capture_default_str();
        cmd->add_option("--train-frac", cfg.train_frac, "HOLDOUT train fraction")
            ->capture_default_str();
        cmd->add_option("--seed", cfg.seed, "Plan and training seed")
            ->envname("HARBENCH_SEED")
            ->capture_default_str();
        cmd->add_option("--max-epochs", cfg.train.max_epochs)->capture_default_str();
        cmd->add_option("--stop-loss", cfg.train.stop_loss)->capture_default_str();
        cmd->add_option("--batch-size", cfg.train.batch_size,
                        "Mini-batch size (250 is the large-dataset override)")
            ->capture_default_str();
    };

    // run
    auto* run = app.add_subcommand("run", "Run methods on one dataset and combination");
    DataOpts run_data;
    add_data_options(run, run_data);
    std::string run_methods = "all", run_combination, run_out;
    ExperimentConfig run_cfg;
    run->add_option("--methods", run_methods,
                    "Comma-separated subset of kwapisz,catal,kim,chen_xue,jiang_yin,ha2015,"
                    "ha2016,oracle or 'all'")
        ->capture_default_str();
    add_experiment_options(run, run_cfg, run_combination);
    run->add_option("--out", run_out, "Write the result table as JSON here");

    // audit
    auto* audit = app.add_subcommand("audit", "Leakage audit of a fold plan");
    DataOpts audit_data;
    add_data_options(audit, audit_data);
    std::string audit_combination, audit_out;
    ExperimentConfig audit_cfg;
    add_experiment_options(audit, audit_cfg, audit_combination);
    audit->add_option("--out", audit_out, "Write the JSON report here (default stdout)");

    // lda
    auto* lda = app.add_subcommand("lda", "Project fold features onto LDA components");
    DataOpts lda_data;
    add_data_options(lda, lda_data);
    std::string lda_combination, lda_out, lda_features = "mean_std", lda_set = "train";
    ExperimentConfig lda_cfg;
    std::size_t lda_fold = 0, lda_components = 2;
    add_experiment_options(lda, lda_cfg, lda_combination);
    lda->add_option("--fold", lda_fold)->capture_default_str();
    lda->add_option("--components", lda_components)->capture_default_str();
    lda->add_option("--features", lda_features, "mean_std or mean_corr")->capture_default_str();
    lda->add_option("--set", lda_set, "Project the train or test side")->capture_default_str();
    lda->add_option("--out", lda_out, "Write the point cloud CSV here (default stdout)");

    // report
    auto* report = app.add_subcommand("report", "Render a results JSON file");
    std::string report_in, report_format = "markdown", report_out, report_folds;
    report->add_option("--in", report_in, "Results JSON produced by 'run --out'")->required();
    report->add_option("--format", report_format, "json, csv or markdown")->capture_default_str();
    report->add_option("--out", report_out, "Output file (default stdout)");
    report->add_option("--per-fold-csv", report_folds, "Also write per-fold accuracy series");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_opts, synth_out);
        if (ingest->parsed()) return cmd_ingest(ingest_in, ingest_out);
        if (run->parsed()) return cmd_run(run_data, run_methods, run_combination, run_cfg, run_out);
        if (audit->parsed()) return cmd_audit(audit_data, audit_combination, audit_cfg, audit_out);
        if (lda->parsed())
            return cmd_lda(lda_data, lda_combination, lda_cfg, lda_fold, lda_components,
                           lda_features, lda_set, lda_out);
        if (report->parsed()) return cmd_report(report_in, report_format, report_out, report_folds);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitConfig;
}
