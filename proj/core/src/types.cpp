#include "ovo/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace ovo {

namespace {
constexpr double kScoreTolerance = 1e-9;
}

ClassSet::ClassSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
        throw ShapeError("class set needs at least 2 classes, got " +
                         std::to_string(labels_.size()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_) {
        if (!seen.insert(l).second) {
            throw ShapeError("duplicate class label '" + l + "'");
        }
    }
}

std::size_t ClassSet::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw ShapeError("unknown class label '" + label + "'");
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

ProbabilityVector::ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) {
        throw ShapeError("probability vector needs at least 2 entries");
    }
    double sum = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ShapeError("probability vector entry out of range: " + std::to_string(v));
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw ShapeError("probability vector sums to " + std::to_string(sum) + ", not 1");
    }
}

PairwiseScoreMatrix::PairwiseScoreMatrix(ClassSet classes)
    : classes_(std::move(classes)),
      raw_(classes_.size() * (classes_.size() - 1) / 2, 0.5) {}

std::size_t PairwiseScoreMatrix::upper_index(std::size_t i, std::size_t j) const {
    // Row-major upper triangle, i < j.
    const std::size_t k = classes_.size();
    return i * k - i * (i + 1) / 2 + (j - i - 1);
}

void PairwiseScoreMatrix::check_pair(std::size_t i, std::size_t j) const {
    const std::size_t k = classes_.size();
    if (i >= k || j >= k) {
        throw ShapeError("pair index out of range");
    }
    if (i == j) {
        throw InvalidPairError("diagonal entry (" + std::to_string(i) + "," +
                               std::to_string(j) + ") is unused");
    }
}

void PairwiseScoreMatrix::set_raw(std::size_t i, std::size_t j, double s_ij) {
    check_pair(i, j);
    if (i < j) {
        raw_[upper_index(i, j)] = s_ij;
    } else {
        raw_[upper_index(j, i)] = 1.0 - s_ij;
    }
}

double PairwiseScoreMatrix::raw(std::size_t i, std::size_t j) const {
    check_pair(i, j);
    return i < j ? raw_[upper_index(i, j)] : 1.0 - raw_[upper_index(j, i)];
}

void PairwiseScoreMatrix::set_calibrated(std::size_t i, std::size_t j, double r_ij) {
    check_pair(i, j);
    if (calibrated_.empty()) {
        calibrated_.assign(raw_.size(), 0.5);
    }
    if (i < j) {
        calibrated_[upper_index(i, j)] = r_ij;
    } else {
        calibrated_[upper_index(j, i)] = 1.0 - r_ij;
    }
}

double PairwiseScoreMatrix::calibrated(std::size_t i, std::size_t j) const {
    check_pair(i, j);
    if (calibrated_.empty()) {
        throw MissingCalibrationError("matrix has no calibrated entries");
    }
    return i < j ? calibrated_[upper_index(i, j)] : 1.0 - calibrated_[upper_index(j, i)];
}

LabeledDataset::LabeledDataset(ClassSet classes, std::vector<std::vector<double>> feats,
                               std::vector<std::set<std::size_t>> labs)
    : class_set(std::move(classes)), features(std::move(feats)), labels(std::move(labs)) {
    if (features.size() != labels.size()) {
        throw ShapeError("feature/label count mismatch");
    }
    if (!features.empty()) {
        const std::size_t d = features.front().size();
        if (d == 0) {
            throw ShapeError("feature dimension must be >= 1");
        }
        for (const auto& f : features) {
            if (f.size() != d) {
                throw ShapeError("inconsistent feature dimensions");
            }
        }
    }
    counts.assign(class_set.size(), 0);
    for (const auto& ls : labels) {
        for (std::size_t c : ls) {
            if (c >= class_set.size()) {
                throw ShapeError("label index " + std::to_string(c) + " out of range");
            }
            ++counts[c];
        }
    }
}

std::size_t LabeledDataset::single_label(std::size_t sample) const {
    const auto& ls = labels.at(sample);
    if (ls.size() != 1) {
        throw ShapeError("sample " + std::to_string(sample) + " is not single-label");
    }
    return *ls.begin();
}

CouplingWeights::CouplingWeights(std::vector<std::size_t> class_counts)
    : counts_(std::move(class_counts)) {
    if (counts_.size() < 2) {
        throw ShapeError("coupling weights need at least 2 classes");
    }
}

double CouplingWeights::n(std::size_t i, std::size_t j) const {
    if (i >= counts_.size() || j >= counts_.size() || i == j) {
        throw InvalidPairError("invalid weight pair");
    }
    return static_cast<double>(counts_[i] + counts_[j]);
}

double mu(const ProbabilityVector& p, std::size_t i, std::size_t j) {
    if (i == j || i >= p.size() || j >= p.size()) {
        throw InvalidPairError("mu requires distinct in-range indices");
    }
    const double denom = p[i] + p[j];
    if (denom == 0.0) {
        throw DegeneratePairError("mu undefined: p_i + p_j = 0 for pair (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
    }
    return p[i] / denom;
}

ScoreValidation validate_scores(const PairwiseScoreMatrix& m) {
    const std::size_t k = m.num_classes();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double s = m.raw(i, j);
            if (!std::isfinite(s) || s < -kScoreTolerance || s > 1.0 + kScoreTolerance) {
                return {false, i, j, "raw score out of [0,1]"};
            }
            if (m.has_calibrated()) {
                const double r = m.calibrated(i, j);
                if (!std::isfinite(r) || r <= 0.0 || r >= 1.0) {
                    return {false, i, j, "calibrated score out of (0,1)"};
                }
            }
        }
    }
    return {};
}

ScoreValidation validate_scores(const std::vector<std::vector<double>>& dense) {
    const std::size_t k = dense.size();
    for (std::size_t i = 0; i < k; ++i) {
        if (dense[i].size() != k) {
            return {false, i, 0, "non-square score grid"};
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double s = dense[i][j];
            if (!std::isfinite(s) || s < -kScoreTolerance || s > 1.0 + kScoreTolerance) {
                return {false, i, j, "score out of [0,1]"};
            }
            if (std::abs(dense[i][j] + dense[j][i] - 1.0) > kScoreTolerance) {
                // Report the lexicographically later entry of the pair.
                return i < j ? ScoreValidation{false, j, i, "complement convention violated"}
                             : ScoreValidation{false, i, j, "complement convention violated"};
            }
        }
    }
    return {};
}

} // namespace ovo
