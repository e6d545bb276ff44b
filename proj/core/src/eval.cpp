#include "ovo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ovo/coupling.hpp"
#include "ovo/parallel.hpp"

namespace ovo {

ConfusionCounts confusion_counts(const std::vector<std::set<std::size_t>>& predicted,
                                 const std::vector<std::set<std::size_t>>& truth,
                                 std::size_t cls) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("prediction/truth length mismatch");
    }
    ConfusionCounts c;
    for (std::size_t n = 0; n < predicted.size(); ++n) {
        const bool in_pred = predicted[n].count(cls) > 0;
        const bool in_truth = truth[n].count(cls) > 0;
        if (in_pred && in_truth) {
            ++c.tp;
        } else if (in_pred) {
            ++c.fp;
        } else if (in_truth) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

Metrics metrics(const ConfusionCounts& c) {
    Metrics m;
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double tn = static_cast<double>(c.tn);
    if (c.tp + c.fp > 0) m.precision = tp / (tp + fp);
    if (c.tp + c.fn > 0) m.recall = tp / (tp + fn);
    if (c.tn + c.fp > 0) m.specificity = tn / (tn + fp);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

double accuracy(const std::vector<std::size_t>& predicted,
                const std::vector<std::size_t>& truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeError("prediction/truth length mismatch");
    }
    if (predicted.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t n = 0; n < predicted.size(); ++n) {
        if (predicted[n] == truth[n]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

LabeledDataset gen_synthetic(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                             double separation, std::uint64_t seed) {
    if (num_classes < 2 || per_class < 1 || dim < 1 || separation < 0.0) {
        throw ShapeError("invalid synthetic dataset parameters");
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < num_classes; ++c) {
        names.push_back("c" + std::to_string(c));
    }
    ClassSet classes(std::move(names));

    // Class means on a circle in the first two dimensions (a line for
    // dim = 1), adjacent means `separation` apart.
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim, 0.0));
    if (dim == 1) {
        for (std::size_t c = 0; c < num_classes; ++c) {
            means[c][0] = separation * static_cast<double>(c);
        }
    } else {
        const double pi = std::acos(-1.0);
        const double radius =
            separation / (2.0 * std::sin(pi / static_cast<double>(num_classes)));
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double angle = 2.0 * pi * static_cast<double>(c) /
                                 static_cast<double>(num_classes);
            means[c][0] = radius * std::cos(angle);
            means[c][1] = radius * std::sin(angle);
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> features;
    std::vector<std::set<std::size_t>> labels;
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (std::size_t n = 0; n < per_class; ++n) {
            std::vector<double> x(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                x[d] = means[c][d] + gauss(rng);
            }
            features.push_back(std::move(x));
            labels.push_back({c});
        }
    }
    return LabeledDataset(std::move(classes), std::move(features), std::move(labels));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const LabeledDataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ShapeError("train fraction must lie in (0,1)");
    }
    std::vector<std::vector<std::size_t>> by_class(ds.class_set.size());
    for (std::size_t n = 0; n < ds.size(); ++n) {
        by_class[ds.single_label(n)].push_back(n);
    }
    std::mt19937_64 rng(seed ^ 0x5751f9a5u);
    std::vector<std::size_t> train, test;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        const auto n_train = static_cast<std::size_t>(
            std::round(train_fraction * static_cast<double>(members.size())));
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < n_train ? train : test).push_back(members[i]);
        }
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& indices) {
    std::vector<std::vector<double>> features;
    std::vector<std::set<std::size_t>> labels;
    for (std::size_t idx : indices) {
        features.push_back(ds.features.at(idx));
        labels.push_back(ds.labels.at(idx));
    }
    return LabeledDataset(ds.class_set, std::move(features), std::move(labels));
}

CalibrationSet fit_suite_calibration(const ClassifierSuite& suite, const LabeledDataset& ds,
                                     const FitOptions& opts) {
    CalibrationSet out;
    for (const auto& clf : suite.pair_scorers) {
        CalibrationFitData data;
        for (std::size_t n = 0; n < ds.size(); ++n) {
            const bool is_i = ds.labels[n].count(clf.class_i) > 0;
            const bool is_j = ds.labels[n].count(clf.class_j) > 0;
            if (is_i == is_j) continue; // only the pair's two classes
            data.samples.push_back({clf.score(ds.features[n]), is_i});
            (is_i ? data.n_i : data.n_j) += 1;
        }
        auto params = fit_calibration(data, opts);
        params.class_i = clf.class_i;
        params.class_j = clf.class_j;
        out[{clf.class_i, clf.class_j}] = params;
    }
    return out;
}

namespace {

double sample_stddev(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) {
        acc += (x - mean) * (x - mean);
    }
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

} // namespace

EvalReport run_benchmark(const BenchmarkConfig& config) {
    if (config.seeds.empty()) {
        throw ShapeError("benchmark needs at least one seed");
    }
    const std::size_t n_seeds = config.seeds.size();
    // per_strategy[s][seed_index]
    std::vector<std::vector<double>> per_strategy(config.strategies.size(),
                                                  std::vector<double>(n_seeds, 0.0));

    parallel_for(n_seeds, config.threads, [&](std::size_t si) {
        const std::uint64_t seed = config.seeds[si];
        auto ds = gen_synthetic(config.num_classes, config.per_class, config.dim,
                                config.separation, seed);
        auto [train_idx, test_idx] = stratified_split(ds, config.train_fraction, seed);
        auto train = subset(ds, train_idx);
        auto test = subset(ds, test_idx);

        std::vector<std::size_t> truth;
        for (std::size_t n = 0; n < test.size(); ++n) {
            truth.push_back(test.single_label(n));
        }

        const bool needs_suite =
            std::any_of(config.strategies.begin(), config.strategies.end(),
                        [](const std::string& s) { return s == "proposed" || s == "voting"; });
        std::optional<ClassifierSuite> suite;
        std::optional<CalibrationSet> calib;
        if (needs_suite) {
            suite = train_pairwise_suite(train, config.train);
            calib = fit_suite_calibration(*suite, train);
        }
        std::optional<MultiOutputModel> ova;
        if (std::find(config.strategies.begin(), config.strategies.end(), "ova") !=
            config.strategies.end()) {
            ova = train_multioutput(train, config.train);
        }

        for (std::size_t s = 0; s < config.strategies.size(); ++s) {
            const std::string& name = config.strategies[s];
            std::vector<std::size_t> preds;
            preds.reserve(test.size());
            for (std::size_t n = 0; n < test.size(); ++n) {
                if (name == "proposed") {
                    auto m = score_sample(*suite, test.features[n]);
                    auto cm = calibrate_matrix(m, *calib);
                    preds.push_back(argmax_label(solve_coupling(cm).p));
                } else if (name == "voting") {
                    preds.push_back(vote_label(score_sample(*suite, test.features[n])).label);
                } else if (name == "ova") {
                    auto scores = (*ova)(test.features[n]);
                    preds.push_back(static_cast<std::size_t>(
                        std::max_element(scores.begin(), scores.end()) - scores.begin()));
                } else {
                    throw ShapeError("unknown strategy '" + name + "'");
                }
            }
            per_strategy[s][si] = accuracy(preds, truth);
        }
    });

    EvalReport report;
    report.config = config;
    for (std::size_t s = 0; s < config.strategies.size(); ++s) {
        StrategyRecord rec;
        rec.name = config.strategies[s];
        rec.per_seed_accuracy = per_strategy[s];
        rec.mean = std::accumulate(per_strategy[s].begin(), per_strategy[s].end(), 0.0) /
                   static_cast<double>(n_seeds);
        rec.stddev = sample_stddev(per_strategy[s], rec.mean);
        report.strategies.push_back(std::move(rec));
    }
    return report;
}

} // namespace ovo
