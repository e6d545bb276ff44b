#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ovo/calibration.hpp"
#include "ovo/classifiers.hpp"
#include "ovo/types.hpp"

namespace ovo {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
};

/// Per-class metrics; a zero-denominator metric is reported as an
/// explicit empty marker, never substituted by 0 or 1.
struct Metrics {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> specificity;
    std::optional<double> f1;
};

struct StrategyRecord {
    std::string name;
    std::vector<double> per_seed_accuracy;
    double mean = 0.0;
    double stddev = 0.0;
};

struct BenchmarkConfig {
    std::size_t num_classes = 3;
    std::size_t per_class = 300;
    std::size_t dim = 2;
    double separation = 3.0;
    double train_fraction = 0.7;
    std::vector<std::string> strategies = {"proposed", "voting", "ova"};
    std::vector<std::uint64_t> seeds = {42};
    TrainOptions train;
    std::size_t threads = 1;
};

struct EvalReport {
    std::vector<std::string> class_labels;
    std::vector<ConfusionCounts> per_class_counts;
    std::vector<Metrics> per_class_metrics;
    std::optional<double> overall_accuracy;
    std::vector<StrategyRecord> strategies;
    std::optional<BenchmarkConfig> config; // set by run_benchmark
};

ConfusionCounts confusion_counts(const std::vector<std::set<std::size_t>>& predicted,
                                 const std::vector<std::set<std::size_t>>& truth,
                                 std::size_t cls);

Metrics metrics(const ConfusionCounts& c);

double accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth);

/// Gaussian clusters with unit covariance; mean placement scales with
/// `separation`, deterministic for a fixed seed.
LabeledDataset gen_synthetic(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                             double separation, std::uint64_t seed);

/// Stratified per-class split; returns (train, test) indices into ds.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const LabeledDataset& ds, double train_fraction, std::uint64_t seed);

LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& indices);

/// Fits per-pair calibration by scoring each pair's samples with the
/// suite's scorer for that pair.
CalibrationSet fit_suite_calibration(const ClassifierSuite& suite, const LabeledDataset& ds,
                                     const FitOptions& opts = {});

EvalReport run_benchmark(const BenchmarkConfig& config);

} // namespace ovo
