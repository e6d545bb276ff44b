#include "ovo/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "ovo/linalg.hpp"

namespace ovo {

namespace {

// log(1 + exp(u)) without overflow.
double softplus(double u) {
    if (u > 0.0) {
        return u + std::log1p(std::exp(-u));
    }
    return std::log1p(std::exp(u));
}

double target_of(const CalibrationFitData& data, const CalibrationFitData::Sample& s) {
    auto [t_pos, t_neg] = platt_targets(data.n_i, data.n_j);
    return s.from_class_i ? t_pos : t_neg;
}

double nll_at(double eta, double tau, const CalibrationFitData& data) {
    double f = 0.0;
    for (const auto& s : data.samples) {
        const double u = eta * s.score + tau;
        const double t = target_of(data, s);
        // -t log r - (1-t) log(1-r) with r = sigmoid(-u)
        f += softplus(u) - (1.0 - t) * u;
    }
    return f;
}

} // namespace

std::pair<double, double> platt_targets(std::size_t n_i, std::size_t n_j) {
    const double t_pos = (static_cast<double>(n_i) + 1.0) / (static_cast<double>(n_i) + 2.0);
    const double t_neg = 1.0 / (static_cast<double>(n_j) + 2.0);
    return {t_pos, t_neg};
}

double apply_calibration(const CalibrationParams& params, double score) {
    if (!std::isfinite(params.eta) || !std::isfinite(params.tau)) {
        throw InvalidParamsError("calibration params must be finite");
    }
    const double u = params.eta * score + params.tau;
    double r;
    if (u >= 0.0) {
        const double e = std::exp(-u);
        r = e / (1.0 + e);
    } else {
        r = 1.0 / (1.0 + std::exp(u));
    }
    return std::clamp(r, 1e-300, 1.0 - 1e-16);
}

double nll(const CalibrationParams& params, const CalibrationFitData& data) {
    if (data.samples.empty()) {
        throw EmptyDataError("calibration NLL needs at least one sample");
    }
    return nll_at(params.eta, params.tau, data);
}

std::pair<double, double> nll_gradient(const CalibrationParams& params,
                                       const CalibrationFitData& data) {
    double g_eta = 0.0, g_tau = 0.0;
    for (const auto& s : data.samples) {
        const double r = apply_calibration(params, s.score);
        const double d = target_of(data, s) - r; // dF/du
        g_eta += d * s.score;
        g_tau += d;
    }
    return {g_eta, g_tau};
}

CalibrationParams fit_calibration(const CalibrationFitData& data, const FitOptions& opts,
                                  FitDiagnostics* diagnostics) {
    if (data.samples.empty()) {
        throw EmptyDataError("calibration fit needs samples");
    }
    bool scores_identical = true;
    bool targets_identical = true;
    for (const auto& s : data.samples) {
        if (s.score != data.samples.front().score) scores_identical = false;
        if (s.from_class_i != data.samples.front().from_class_i) targets_identical = false;
    }
    if (scores_identical && targets_identical) {
        throw DegenerateFitError("flat likelihood: all scores and targets identical");
    }

    CalibrationParams params;
    params.eta = 0.0;
    params.tau = std::log((static_cast<double>(data.n_j) + 1.0) /
                          (static_cast<double>(data.n_i) + 1.0));

    double f = nll_at(params.eta, params.tau, data);
    if (diagnostics) {
        diagnostics->nll_trace.clear();
        diagnostics->nll_trace.push_back(f);
        diagnostics->flat_direction = scores_identical;
    }

    std::size_t iter = 0;
    bool converged = false;
    for (; iter < opts.max_iter; ++iter) {
        auto [g_eta, g_tau] = nll_gradient(params, data);
        if (std::max(std::abs(g_eta), std::abs(g_tau)) < opts.tol) {
            converged = true;
            break;
        }
        double h_ee = 0.0, h_et = 0.0, h_tt = 0.0;
        for (const auto& s : data.samples) {
            const double r = apply_calibration(params, s.score);
            const double w = r * (1.0 - r);
            h_ee += w * s.score * s.score;
            h_et += w * s.score;
            h_tt += w;
        }
        linalg::Matrix h(2, 2);
        h(0, 0) = h_ee + 1e-12;
        h(0, 1) = h_et;
        h(1, 0) = h_et;
        h(1, 1) = h_tt + 1e-12;
        auto step = linalg::solve(h, {-g_eta, -g_tau});
        if (!step) {
            break;
        }
        double scale = 1.0;
        double f_new = f;
        double eta_new = params.eta, tau_new = params.tau;
        bool accepted = false;
        for (int halving = 0; halving <= 20; ++halving) {
            eta_new = params.eta + scale * (*step)[0];
            tau_new = params.tau + scale * (*step)[1];
            f_new = nll_at(eta_new, tau_new, data);
            if (std::isfinite(f_new) && f_new <= f) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            break;
        }
        params.eta = eta_new;
        params.tau = tau_new;
        f = f_new;
        if (diagnostics) {
            diagnostics->nll_trace.push_back(f);
        }
    }

    params.iterations = iter;
    params.converged = converged && !scores_identical;
    params.final_nll = f;
    if (diagnostics) {
        diagnostics->eta_nonnegative = params.eta >= 0.0;
    }
    return params;
}

PairwiseScoreMatrix calibrate_matrix(const PairwiseScoreMatrix& m, const CalibrationSet& params) {
    const std::size_t k = m.num_classes();
    PairwiseScoreMatrix out = m;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            auto it = params.find({i, j});
            if (it == params.end()) {
                throw MissingCalibrationError("no calibration params for pair (" +
                                              std::to_string(i) + "," + std::to_string(j) + ")");
            }
            out.set_calibrated(i, j, apply_calibration(it->second, m.raw(i, j)));
        }
    }
    return out;
}

} // namespace ovo
