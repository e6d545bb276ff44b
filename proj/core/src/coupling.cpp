#include "ovo/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ovo/linalg.hpp"

namespace ovo {

namespace {

void require_calibrated(const PairwiseScoreMatrix& m) {
    if (!m.has_calibrated()) {
        throw MissingCalibrationError("coupling requires a calibrated score matrix");
    }
    auto v = validate_scores(m);
    if (!v.ok) {
        throw ShapeError("invalid score matrix at (" + std::to_string(v.row) + "," +
                         std::to_string(v.col) + "): " + v.reason);
    }
}

std::vector<double> q_times(const QMatrix& q, const std::vector<double>& p) {
    std::vector<double> out(q.k, 0.0);
    for (std::size_t i = 0; i < q.k; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < q.k; ++j) {
            acc += q(i, j) * p[j];
        }
        out[i] = acc;
    }
    return out;
}

double half_quadratic(const QMatrix& q, const std::vector<double>& p) {
    auto qp = q_times(q, p);
    return 0.5 * std::inner_product(p.begin(), p.end(), qp.begin(), 0.0);
}

double residual_inf(const QMatrix& q, const std::vector<double>& p, double b) {
    auto qp = q_times(q, p);
    double r = 0.0;
    for (double v : qp) {
        r = std::max(r, std::abs(v + b));
    }
    return r;
}

CouplingSolution finish(const PairwiseScoreMatrix& m, const QMatrix& q, std::vector<double> p,
                        double b, CouplingMethod method) {
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= sum;
    ProbabilityVector pv(std::move(p));
    CouplingSolution sol{pv, b, method, quadratic_objective(pv, m),
                         residual_inf(q, pv.values(), b)};
    return sol;
}

} // namespace

QMatrix build_q(const PairwiseScoreMatrix& m) {
    require_calibrated(m);
    const std::size_t k = m.num_classes();
    QMatrix q;
    q.k = k;
    q.entries.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        double diag = 0.0;
        for (std::size_t s = 0; s < k; ++s) {
            if (s == i) continue;
            const double r_si = m.calibrated(s, i);
            diag += r_si * r_si;
        }
        q.entries[i * k + i] = diag;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            q.entries[i * k + j] = -m.calibrated(j, i) * m.calibrated(i, j);
        }
    }
    return q;
}

CouplingSolution solve_coupling(const PairwiseScoreMatrix& m) {
    const QMatrix q = build_q(m);
    const std::size_t k = q.k;

    auto solve_bordered = [&](double ridge) {
        linalg::Matrix a(k + 1, k + 1, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                a(i, j) = q(i, j);
            }
            a(i, i) += ridge;
            a(i, k) = 1.0;
            a(k, i) = 1.0;
        }
        std::vector<double> rhs(k + 1, 0.0);
        rhs[k] = 1.0;
        return linalg::solve(a, rhs);
    };

    auto x = solve_bordered(0.0);
    if (!x) {
        x = solve_bordered(1e-12);
    }
    if (!x) {
        throw DegenerateCouplingError("singular KKT system");
    }

    std::vector<double> p(x->begin(), x->begin() + static_cast<std::ptrdiff_t>(k));
    const double b = (*x)[k];

    const double min_p = *std::min_element(p.begin(), p.end());
    if (min_p < -1e-9) {
        return projected_gradient_coupling(m);
    }
    CouplingMethod method = CouplingMethod::kkt;
    if (min_p < 0.0) {
        for (double& v : p) v = std::max(v, 0.0);
        method = CouplingMethod::repaired;
    }
    return finish(m, q, std::move(p), b, method);
}

CouplingSolution projected_gradient_coupling(const PairwiseScoreMatrix& m, std::size_t max_iter,
                                             double tol) {
    const QMatrix q = build_q(m);
    const std::size_t k = q.k;

    // Step size from the row-sum bound on Q's spectral radius.
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            row += std::abs(q(i, j));
        }
        lipschitz = std::max(lipschitz, row);
    }
    const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    std::vector<double> p(k, 1.0 / static_cast<double>(k));
    double f = half_quadratic(q, p);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        auto g = q_times(q, p);
        std::vector<double> trial(k);
        for (std::size_t i = 0; i < k; ++i) {
            trial[i] = p[i] - step * g[i];
        }
        trial = project_to_simplex(std::move(trial));
        // Exact line search along the feasible direction d = trial - p.
        std::vector<double> d(k);
        for (std::size_t i = 0; i < k; ++i) {
            d[i] = trial[i] - p[i];
        }
        auto qd = q_times(q, d);
        const double gd = std::inner_product(g.begin(), g.end(), d.begin(), 0.0);
        const double dqd = std::inner_product(d.begin(), d.end(), qd.begin(), 0.0);
        double alpha = 1.0;
        if (dqd > 0.0) {
            alpha = std::clamp(-gd / dqd, 0.0, 1.0);
        }
        for (std::size_t i = 0; i < k; ++i) {
            p[i] += alpha * d[i];
        }
        const double f_new = half_quadratic(q, p);
        if (f - f_new < tol) {
            f = std::min(f, f_new);
            break;
        }
        f = f_new;
    }

    // Multiplier consistent with stationarity on the support.
    auto qp = q_times(q, p);
    const double b = -std::accumulate(qp.begin(), qp.end(), 0.0) / static_cast<double>(k);
    return finish(m, q, std::move(p), b, CouplingMethod::projected_gradient);
}

double kl_objective(const ProbabilityVector& p, const PairwiseScoreMatrix& m,
                    const CouplingWeights& w) {
    require_calibrated(m);
    const std::size_t k = m.num_classes();
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double r = m.calibrated(i, j);
            if (r == 0.0) continue;
            const double denom = p[i] + p[j];
            const double mu_ij = denom > 0.0 ? p[i] / denom : 0.0;
            if (mu_ij <= 0.0) {
                return std::numeric_limits<double>::infinity();
            }
            acc += w.n(i, j) * r * std::log(r / mu_ij);
        }
    }
    return acc;
}

double quadratic_objective(const ProbabilityVector& p, const PairwiseScoreMatrix& m) {
    require_calibrated(m);
    const std::size_t k = m.num_classes();
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double t = m.calibrated(i, j) * p[j] - m.calibrated(j, i) * p[i];
            acc += t * t;
        }
    }
    return 0.5 * acc;
}

VoteResult vote_label(const PairwiseScoreMatrix& m) {
    const std::size_t k = m.num_classes();
    VoteResult result;
    result.wins.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            if (m.raw(i, j) > m.raw(j, i)) {
                ++result.wins[i];
            }
        }
    }
    result.label = static_cast<std::size_t>(
        std::max_element(result.wins.begin(), result.wins.end()) - result.wins.begin());
    return result;
}

std::size_t argmax_label(const ProbabilityVector& p) {
    const auto& v = p.values();
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::set<std::size_t> threshold_labels(const ProbabilityVector& p, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw InvalidThresholdError("threshold must lie in (0,1), got " + std::to_string(theta));
    }
    std::set<std::size_t> out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] >= theta) {
            out.insert(i);
        }
    }
    return out;
}

std::vector<double> project_to_simplex(std::vector<double> v) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumsum += sorted[i];
        const double candidate = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) {
            rho = i + 1;
            theta = candidate;
        }
    }
    (void)rho;
    for (double& x : v) {
        x = std::max(x - theta, 0.0);
    }
    return v;
}

} // namespace ovo
