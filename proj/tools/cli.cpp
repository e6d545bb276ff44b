#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ovo/calibration.hpp"
#include "ovo/classifiers.hpp"
#include "ovo/coupling.hpp"
#include "ovo/eval.hpp"
#include "ovo/io.hpp"
#include "ovo/parallel.hpp"

namespace ovo::cli {

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel g_log_level = LogLevel::warn;

void set_log_level(const std::string& name) {
    if (name == "error") g_log_level = LogLevel::error;
    else if (name == "warn") g_log_level = LogLevel::warn;
    else if (name == "info") g_log_level = LogLevel::info;
    else if (name == "debug") g_log_level = LogLevel::debug;
    else throw ParseError("unknown log level '" + name + "'");
}

void log(LogLevel level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= g_log_level) {
        std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
    }
}

struct CommonOpts {
    std::uint64_t seed = 42;
    std::size_t threads = default_threads();
    std::string log_level;
};

void add_common(CLI::App* app, CommonOpts& opts) {
    app->add_option("--seed", opts.seed, "Base random seed");
    app->add_option("--threads", opts.threads, "Worker thread cap");
    app->add_option("--log", opts.log_level, "Log level: error|warn|info|debug");
}

void apply_log(const CommonOpts& opts) {
    if (!opts.log_level.empty()) {
        set_log_level(opts.log_level);
    } else if (const char* env = std::getenv("OVO_LOG")) {
        set_log_level(env);
    }
}

void add_train_opts(CLI::App* app, TrainOptions& train) {
    app->add_option("--lr", train.learning_rate, "Gradient-descent step size");
    app->add_option("--epochs", train.epochs, "Training epochs");
    app->add_option("--l2", train.l2, "L2 penalty");
}

io::Prediction predict_one(const std::string& id, const PairwiseScoreMatrix& raw,
                           const CalibrationSet& calib) {
    auto cm = calibrate_matrix(raw, calib);
    auto sol = solve_coupling(cm);
    auto votes = vote_label(raw);
    io::Prediction pred;
    pred.id = id;
    pred.p = sol.p.values();
    pred.label = argmax_label(sol.p);
    pred.votes = votes.wins;
    pred.method = io::method_name(sol.method);
    return pred;
}

int cmd_train(const std::string& mode, const std::string& input, const std::string& base,
              const std::string& out, const TrainOptions& train, const CommonOpts& common) {
    auto ds = io::load_dataset_csv(input);
    TrainOptions opts = train;
    opts.seed = common.seed;
    if (mode == "pairwise") {
        auto suite = train_pairwise_suite(ds, opts, common.threads);
        io::save_suite(out, suite);
    } else if (mode == "ova") {
        auto model = train_multioutput(ds, opts);
        io::save_model(out, ds.class_set, model);
    } else if (mode == "refine") {
        if (base.empty()) {
            throw ParseError("refine mode needs --base (an OvA model file)");
        }
        auto [classes, model] = io::load_model(base);
        if (!(classes == ds.class_set)) {
            throw ParseError("base model classes do not match dataset classes");
        }
        auto suite = refine_ova_to_ovo(model, ds, opts);
        io::save_suite(out, suite);
    } else {
        throw ParseError("unknown train mode '" + mode + "'");
    }
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_calibrate(const std::string& suite_path, const std::string& input,
                  const std::string& out, double holdout, const CommonOpts& common) {
    auto suite = io::load_suite(suite_path);
    auto ds = io::load_dataset_csv(input);
    if (holdout > 0.0) {
        // Fit on the held-out side of a stratified split.
        auto [train_idx, held_idx] = stratified_split(ds, 1.0 - holdout, common.seed);
        (void)train_idx;
        ds = subset(ds, held_idx);
        log(LogLevel::info, "calibrating on held-out fraction of " +
                                std::to_string(ds.size()) + " samples");
    }
    auto calib = fit_suite_calibration(suite, ds);
    for (const auto& [pair, p] : calib) {
        if (p.eta >= 0.0) {
            log(LogLevel::warn, "pair (" + std::to_string(pair.first) + "," +
                                    std::to_string(pair.second) +
                                    "): fitted eta >= 0, score ordering looks inverted");
        }
    }
    io::save_calibration(out, calib);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_couple(const std::string& scores_path, const std::string& calib_path,
               const std::string& out) {
    auto scores = load_external_scores(scores_path);
    std::optional<CalibrationSet> calib;
    if (!calib_path.empty()) {
        calib = io::load_calibration(calib_path);
    }
    std::vector<io::Prediction> preds;
    for (const auto& rec : scores.records) {
        PairwiseScoreMatrix m = rec.scores;
        if (calib) {
            m = calibrate_matrix(m, *calib);
        } else {
            // Raw entries are taken as already-calibrated estimates.
            const std::size_t k = m.num_classes();
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = i + 1; j < k; ++j) {
                    m.set_calibrated(i, j, std::clamp(m.raw(i, j), 1e-12, 1.0 - 1e-12));
                }
            }
        }
        auto sol = solve_coupling(m);
        auto votes = vote_label(rec.scores);
        preds.push_back({rec.id, sol.p.values(), argmax_label(sol.p), votes.wins,
                         io::method_name(sol.method)});
    }
    io::save_predictions(out, scores.classes.labels(), preds);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_predict(const std::string& suite_path, const std::string& calib_path,
                const std::string& input, const std::string& out, const CommonOpts& common) {
    auto suite = io::load_suite(suite_path);
    auto calib = io::load_calibration(calib_path);
    auto ds = io::load_dataset_csv(input);
    std::vector<io::Prediction> preds(ds.size());
    parallel_for(ds.size(), common.threads, [&](std::size_t n) {
        auto raw = score_sample(suite, ds.features[n]);
        preds[n] = predict_one(std::to_string(n), raw, calib);
    });
    io::save_predictions(out, suite.classes.labels(), preds);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                 const std::string& out, bool multi_label, double threshold) {
    auto preds = io::load_predictions(pred_path);
    auto truth_ds = io::load_dataset_csv(truth_path);
    if (preds.size() != truth_ds.size()) {
        throw ParseError("prediction count " + std::to_string(preds.size()) +
                         " does not match truth count " + std::to_string(truth_ds.size()));
    }
    const std::size_t k = truth_ds.class_set.size();
    const double theta = threshold > 0.0 ? threshold : 1.0 / static_cast<double>(k);

    std::vector<std::set<std::size_t>> pred_sets;
    std::vector<std::size_t> pred_single;
    for (const auto& p : preds) {
        if (multi_label) {
            pred_sets.push_back(threshold_labels(ProbabilityVector(p.p), theta));
        } else {
            pred_sets.push_back({p.label});
            pred_single.push_back(p.label);
        }
    }

    EvalReport report;
    report.class_labels = truth_ds.class_set.labels();
    for (std::size_t c = 0; c < k; ++c) {
        auto counts = confusion_counts(pred_sets, truth_ds.labels, c);
        report.per_class_counts.push_back(counts);
        report.per_class_metrics.push_back(metrics(counts));
    }
    if (!multi_label) {
        std::vector<std::size_t> truth_single;
        for (std::size_t n = 0; n < truth_ds.size(); ++n) {
            truth_single.push_back(truth_ds.single_label(n));
        }
        report.overall_accuracy = accuracy(pred_single, truth_single);
    }
    io::save_report(out, report);
    log(LogLevel::info, "wrote " + out);
    return 0;
}

int cmd_benchmark(const std::string& config_path, BenchmarkConfig config, std::size_t num_seeds,
                  const std::string& out, const CommonOpts& common) {
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            throw ParseError("cannot open config: " + config_path);
        }
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid config JSON: ") + e.what());
        }
        config.num_classes = doc.value("num_classes", config.num_classes);
        config.per_class = doc.value("per_class", config.per_class);
        config.dim = doc.value("dim", config.dim);
        config.separation = doc.value("separation", config.separation);
        config.train_fraction = doc.value("train_fraction", config.train_fraction);
        if (doc.contains("strategies")) {
            config.strategies = doc["strategies"].get<std::vector<std::string>>();
        }
        if (doc.contains("seeds")) {
            config.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
        }
    }
    if (config.seeds.empty()) {
        for (std::size_t s = 0; s < std::max<std::size_t>(num_seeds, 1); ++s) {
            config.seeds.push_back(common.seed + s);
        }
    }
    config.threads = common.threads;
    auto report = run_benchmark(config);
    io::save_report(out, report);
    for (const auto& rec : report.strategies) {
        log(LogLevel::info, rec.name + ": mean=" + std::to_string(rec.mean) +
                                " stddev=" + std::to_string(rec.stddev));
    }
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"One-versus-one multiclass pipeline: pairwise calibration and coupling"};
    app.require_subcommand(1);

    CommonOpts common;
    TrainOptions train;

    // train
    auto* sub_train = app.add_subcommand("train", "Train classifiers on a CSV dataset");
    std::string train_mode = "pairwise", train_input, train_base, train_out;
    sub_train->add_option("--mode", train_mode, "pairwise | ova | refine");
    sub_train->add_option("--input", train_input, "Dataset CSV")->required();
    sub_train->add_option("--base", train_base, "OvA model file (refine mode)");
    sub_train->add_option("--out", train_out, "Output file")->required();
    add_train_opts(sub_train, train);
    add_common(sub_train, common);

    // calibrate
    auto* sub_calib = app.add_subcommand("calibrate", "Fit per-pair sigmoid calibration");
    std::string calib_suite, calib_input, calib_out;
    double calib_holdout = 0.0;
    sub_calib->add_option("--suite", calib_suite, "Suite file")->required();
    sub_calib->add_option("--input", calib_input, "Dataset CSV")->required();
    sub_calib->add_option("--out", calib_out, "Output calibration file")->required();
    sub_calib->add_option("--holdout", calib_holdout,
                          "Fit on this held-out fraction instead of the full dataset");
    add_common(sub_calib, common);

    // couple
    auto* sub_couple = app.add_subcommand("couple", "Couple a score file into probabilities");
    std::string couple_scores, couple_calib, couple_out;
    sub_couple->add_option("--scores", couple_scores, "External score file (JSON)")->required();
    sub_couple->add_option("--calib", couple_calib,
                           "Calibration file; omitted means scores are already calibrated");
    sub_couple->add_option("--out", couple_out, "Output probabilities file")->required();
    add_common(sub_couple, common);

    // predict
    auto* sub_predict = app.add_subcommand("predict", "Score, calibrate and couple a dataset");
    std::string pred_suite, pred_calib, pred_input, pred_out;
    sub_predict->add_option("--suite", pred_suite, "Suite file")->required();
    sub_predict->add_option("--calib", pred_calib, "Calibration file")->required();
    sub_predict->add_option("--input", pred_input, "Dataset CSV")->required();
    sub_predict->add_option("--out", pred_out, "Output predictions file")->required();
    add_common(sub_predict, common);

    // evaluate
    auto* sub_eval = app.add_subcommand("evaluate", "Score predictions against truth labels");
    std::string eval_pred, eval_truth, eval_out;
    bool eval_multi = false;
    double eval_threshold = 0.0;
    sub_eval->add_option("--pred", eval_pred, "Predictions file")->required();
    sub_eval->add_option("--truth", eval_truth, "Truth dataset CSV")->required();
    sub_eval->add_option("--out", eval_out, "Output report file")->required();
    sub_eval->add_flag("--multi-label", eval_multi, "Threshold-based multi-label evaluation");
    sub_eval->add_option("--threshold", eval_threshold, "Multi-label threshold (default 1/K)");
    add_common(sub_eval, common);

    // benchmark
    auto* sub_bench = app.add_subcommand("benchmark", "Compare strategies on synthetic data");
    std::string bench_config, bench_out;
    BenchmarkConfig bench;
    std::size_t bench_num_seeds = 0;
    sub_bench->add_option("--config", bench_config, "Benchmark config JSON");
    sub_bench->add_option("--classes", bench.num_classes, "Number of classes");
    sub_bench->add_option("--per-class", bench.per_class, "Samples per class");
    sub_bench->add_option("--dim", bench.dim, "Feature dimension");
    sub_bench->add_option("--separation", bench.separation, "Cluster separation");
    sub_bench->add_option("--train-fraction", bench.train_fraction, "Train split fraction");
    sub_bench->add_option("--strategies", bench.strategies, "Subset of proposed,voting,ova");
    sub_bench->add_option("--num-seeds", bench_num_seeds, "Seeds seed..seed+n-1");
    sub_bench->add_option("--out", bench_out, "Output report file")->required();
    add_train_opts(sub_bench, bench.train);
    add_common(sub_bench, common);
    bench.seeds.clear();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        apply_log(common);
        if (sub_train->parsed()) {
            return cmd_train(train_mode, train_input, train_base, train_out, train, common);
        }
        if (sub_calib->parsed()) {
            return cmd_calibrate(calib_suite, calib_input, calib_out, calib_holdout, common);
        }
        if (sub_couple->parsed()) {
            return cmd_couple(couple_scores, couple_calib, couple_out);
        }
        if (sub_predict->parsed()) {
            return cmd_predict(pred_suite, pred_calib, pred_input, pred_out, common);
        }
        if (sub_eval->parsed()) {
            return cmd_evaluate(eval_pred, eval_truth, eval_out, eval_multi, eval_threshold);
        }
        if (sub_bench->parsed()) {
            return cmd_benchmark(bench_config, bench, bench_num_seeds, bench_out, common);
        }
        return 1;
    } catch (const DegenerateCouplingError& e) {
        log(LogLevel::error, e.what());
        return 2;
    } catch (const DegenerateFitError& e) {
        log(LogLevel::error, e.what());
        return 2;
    } catch (const Error& e) {
        log(LogLevel::error, e.what());
        return 1;
    } catch (const std::exception& e) {
        log(LogLevel::error, e.what());
        return 1;
    }
}

} // namespace ovo::cli
