#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ovo/errors.hpp"

namespace ovo {

/// Ordered set of distinct class names. All math works on the dense
/// indices 0..K-1; names are resolved once at load time.
class ClassSet {
public:
    explicit ClassSet(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t index_of(const std::string& label) const;

    bool operator==(const ClassSet& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
};

/// Point on the K-simplex: nonnegative entries summing to 1 within 1e-12.
/// Construction enforces the invariants; violating input throws.
class ProbabilityVector {
public:
    static constexpr double kSumTolerance = 1e-12;

    explicit ProbabilityVector(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_.at(i); }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

/// Fitted sigmoid calibration r(s) = 1 / (1 + exp(eta*s + tau)) for one
/// unordered class pair, with fit diagnostics.
struct CalibrationParams {
    double eta = 0.0;
    double tau = 0.0;
    std::size_t class_i = 0; // pair (i, j), i < j
    std::size_t class_j = 1;
    std::size_t iterations = 0;
    bool converged = false;
    double final_nll = 0.0;
};

/// Per-sample pairwise scores. Raw s_ij and (optionally) calibrated r_ij
/// for every ordered pair; the diagonal is unused. Entries are stored for
/// i < j only; the (j, i) view is the complement 1 - value.
class PairwiseScoreMatrix {
public:
    explicit PairwiseScoreMatrix(ClassSet classes);

    std::size_t num_classes() const { return classes_.size(); }
    const ClassSet& classes() const { return classes_; }

    void set_raw(std::size_t i, std::size_t j, double s_ij);
    double raw(std::size_t i, std::size_t j) const;

    void set_calibrated(std::size_t i, std::size_t j, double r_ij);
    double calibrated(std::size_t i, std::size_t j) const;
    bool has_calibrated() const { return !calibrated_.empty(); }

private:
    std::size_t upper_index(std::size_t i, std::size_t j) const;
    void check_pair(std::size_t i, std::size_t j) const;

    ClassSet classes_;
    std::vector<double> raw_;        // K(K-1)/2 entries, i < j
    std::vector<double> calibrated_; // empty until first set_calibrated
};

/// Feature vectors with class annotations; single-label samples carry a
/// singleton label set.
struct LabeledDataset {
    ClassSet class_set;
    std::vector<std::vector<double>> features;
    std::vector<std::set<std::size_t>> labels; // per-sample class indices
    std::vector<std::size_t> counts;           // N_i per class

    LabeledDataset(ClassSet classes, std::vector<std::vector<double>> feats,
                   std::vector<std::set<std::size_t>> labs);

    std::size_t size() const { return features.size(); }
    std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
    /// Single label of a sample; throws if the sample has multiple labels.
    std::size_t single_label(std::size_t sample) const;
};

/// Pair weights n_ij = N_i + N_j from the per-class training counts.
class CouplingWeights {
public:
    explicit CouplingWeights(std::vector<std::size_t> class_counts);

    std::size_t num_classes() const { return counts_.size(); }
    double n(std::size_t i, std::size_t j) const;

private:
    std::vector<std::size_t> counts_;
};

/// Outcome of validate_scores: accepted, or the first violating entry.
struct ScoreValidation {
    bool ok = true;
    std::size_t row = 0;
    std::size_t col = 0;
    std::string reason;
};

/// Pairwise conditional mu_ij = p_i / (p_i + p_j).
double mu(const ProbabilityVector& p, std::size_t i, std::size_t j);

/// Checks the complement convention and [0,1] range on raw entries (and
/// (0,1) strictly on calibrated entries) within 1e-9.
ScoreValidation validate_scores(const PairwiseScoreMatrix& m);

/// Same check on a dense K x K grid (diagonal ignored), as ingested from
/// external score files before the upper-triangular form is built.
ScoreValidation validate_scores(const std::vector<std::vector<double>>& dense);

} // namespace ovo
