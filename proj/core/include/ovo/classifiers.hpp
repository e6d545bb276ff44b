#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ovo/types.hpp"

namespace ovo {

struct TrainOptions {
    double learning_rate = 0.5;
    std::size_t epochs = 500;
    double l2 = 1e-4;
    std::uint64_t seed = 42;
};

/// Logistic model for one unordered pair: score(x) = sigmoid(w.x + b),
/// near 1 for class i, near 0 for class j.
struct BinaryLinearClassifier {
    std::vector<double> weights;
    double bias = 0.0;
    std::size_t class_i = 0;
    std::size_t class_j = 1; // i < j

    double score(const std::vector<double>& x) const;
};

/// One-vs-all model: K independent logistic nodes over the same features.
struct MultiOutputModel {
    std::vector<std::vector<double>> weights; // K x d
    std::vector<double> biases;               // K

    std::size_t num_classes() const { return biases.size(); }
    double node(std::size_t i, const std::vector<double>& x) const;
    std::vector<double> operator()(const std::vector<double>& x) const;
};

enum class SuiteProvenance { pairwise_scratch, ova_refined, external };

/// Complete set of K(K-1)/2 pair scorers plus the per-pair training counts
/// that later feed calibration.
struct ClassifierSuite {
    ClassSet classes;
    std::vector<BinaryLinearClassifier> pair_scorers; // pair-index order, i < j
    SuiteProvenance provenance = SuiteProvenance::pairwise_scratch;

    const BinaryLinearClassifier& scorer(std::size_t i, std::size_t j) const;
};

/// Loss after every epoch, for monotonicity checks.
struct TrainTrace {
    std::vector<double> losses;
};

BinaryLinearClassifier train_binary_logistic(const std::vector<std::vector<double>>& data_i,
                                             const std::vector<std::vector<double>>& data_j,
                                             const TrainOptions& opts, TrainTrace* trace = nullptr);

ClassifierSuite train_pairwise_suite(const LabeledDataset& ds, const TrainOptions& opts,
                                     std::size_t threads = 1);

MultiOutputModel train_multioutput(const LabeledDataset& ds, const TrainOptions& opts);

ClassifierSuite refine_ova_to_ovo(const MultiOutputModel& model, const LabeledDataset& ds,
                                  const TrainOptions& opts);

PairwiseScoreMatrix score_sample(const ClassifierSuite& suite, const std::vector<double>& x);

/// One externally computed score record.
struct ExternalScoreRecord {
    std::string id;
    PairwiseScoreMatrix scores;
    std::optional<std::set<std::size_t>> truth;
};

struct ExternalScores {
    ClassSet classes;
    std::vector<ExternalScoreRecord> records;
};

ExternalScores load_external_scores(const std::string& path);

} // namespace ovo
