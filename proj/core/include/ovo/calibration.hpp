#pragma once

#include <map>
#include <utility>
#include <vector>

#include "ovo/types.hpp"

namespace ovo {

/// Scores of one pair's training samples with their class-of-origin flags.
/// Smoothed regression targets follow from the per-class counts.
struct CalibrationFitData {
    struct Sample {
        double score;
        bool from_class_i;
    };
    std::vector<Sample> samples;
    std::size_t n_i = 0;
    std::size_t n_j = 0;
};

struct FitOptions {
    double tol = 1e-10; // infinity-norm of the NLL gradient
    std::size_t max_iter = 100;
};

/// Per-fit diagnostics; the NLL trace holds the objective after every
/// accepted Newton step, starting with the value at the initial point.
struct FitDiagnostics {
    std::vector<double> nll_trace;
    bool eta_nonnegative = false; // fitted eta >= 0, score ordering suspicious
    bool flat_direction = false;  // all scores identical, eta unidentifiable
};

/// Smoothed targets ((N_i+1)/(N_i+2), 1/(N_j+2)).
std::pair<double, double> platt_targets(std::size_t n_i, std::size_t n_j);

/// r = 1 / (1 + exp(eta*score + tau)), overflow-safe, clamped into (0,1).
double apply_calibration(const CalibrationParams& params, double score);

/// Negative log-likelihood of the calibration sigmoid on the fit data,
/// evaluated in log-sum form (never computes log(0)).
double nll(const CalibrationParams& params, const CalibrationFitData& data);

/// Analytic gradient of the NLL with respect to (eta, tau).
std::pair<double, double> nll_gradient(const CalibrationParams& params,
                                       const CalibrationFitData& data);

/// Fits (eta, tau) by damped Newton with backtracking line search.
CalibrationParams fit_calibration(const CalibrationFitData& data, const FitOptions& opts = {},
                                  FitDiagnostics* diagnostics = nullptr);

using CalibrationSet = std::map<std::pair<std::size_t, std::size_t>, CalibrationParams>;

/// Applies per-pair calibration to every raw entry; raw entries unchanged.
PairwiseScoreMatrix calibrate_matrix(const PairwiseScoreMatrix& m, const CalibrationSet& params);

} // namespace ovo
