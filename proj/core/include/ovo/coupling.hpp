#pragma once

#include <set>
#include <vector>

#include "ovo/types.hpp"

namespace ovo {

enum class CouplingMethod { kkt, projected_gradient, repaired };

/// Coupled class probabilities with solver diagnostics. b is the Lagrange
/// multiplier of the sum-to-one constraint; residual_norm is the
/// infinity-norm of Q p + b e at the solution.
struct CouplingSolution {
    ProbabilityVector p;
    double b = 0.0;
    CouplingMethod method = CouplingMethod::kkt;
    double quadratic_objective = 0.0;
    double residual_norm = 0.0;
};

/// Symmetric PSD matrix of the coupling quadratic program:
/// Q_ii = sum_{s != i} r_si^2, Q_ij = -r_ji * r_ij for i != j.
struct QMatrix {
    std::size_t k = 0;
    std::vector<double> entries; // row-major K x K

    double operator()(std::size_t i, std::size_t j) const { return entries[i * k + j]; }
};

QMatrix build_q(const PairwiseScoreMatrix& m);

/// Solves the coupling QP through the bordered KKT linear system, with
/// clamp-and-renormalize repair of tiny negatives and a projected-gradient
/// fallback for larger ones.
CouplingSolution solve_coupling(const PairwiseScoreMatrix& m);

/// Minimizes (1/2) p^T Q p over the simplex by projected gradient descent.
CouplingSolution projected_gradient_coupling(const PairwiseScoreMatrix& m,
                                             std::size_t max_iter = 100000, double tol = 1e-12);

/// Weighted KL diagnostic sum_{i != j} n_ij r_ij log(r_ij / mu_ij).
/// Returns +infinity when some mu_ij = 0 faces r_ij > 0.
double kl_objective(const ProbabilityVector& p, const PairwiseScoreMatrix& m,
                    const CouplingWeights& w);

/// (1/2) sum_{i<j} (r_ij p_j - r_ji p_i)^2, evaluated directly.
double quadratic_objective(const ProbabilityVector& p, const PairwiseScoreMatrix& m);

/// Pairwise-win vote over raw scores; ties go to the smallest class index.
struct VoteResult {
    std::size_t label = 0;
    std::vector<std::size_t> wins; // per-class win counts
};

VoteResult vote_label(const PairwiseScoreMatrix& m);

/// Index of the maximum entry; ties go to the smallest index.
std::size_t argmax_label(const ProbabilityVector& p);

/// All classes with p_i >= theta; theta must lie in (0,1).
std::set<std::size_t> threshold_labels(const ProbabilityVector& p, double theta);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> v);

} // namespace ovo
