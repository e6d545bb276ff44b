#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ovo/coupling.hpp"
#include "test_util.hpp"

using namespace ovo;

namespace {

PairwiseScoreMatrix calibrated_k2(double r12) {
    PairwiseScoreMatrix m(testutil::make_classes(2));
    m.set_raw(0, 1, r12);
    m.set_calibrated(0, 1, r12);
    return m;
}

// The consistent K=3 fixture: r built exactly from p* = (0.5, 0.3, 0.2).
const std::vector<double> kConsistentP{0.5, 0.3, 0.2};

} // namespace

TEST_CASE("build_q direct substitution") {
    auto m = calibrated_k2(0.7);
    auto q = build_q(m);
    CHECK(q(0, 0) == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(q(0, 1) == doctest::Approx(-0.21).epsilon(1e-12));
    CHECK(q(1, 0) == doctest::Approx(-0.21).epsilon(1e-12));
    CHECK(q(1, 1) == doctest::Approx(0.49).epsilon(1e-12));

    PairwiseScoreMatrix u(testutil::make_classes(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) u.set_calibrated(i, j, 0.5);
    auto qu = build_q(u);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(qu(i, i) == doctest::Approx(0.5));
        for (std::size_t j = 0; j < 3; ++j) {
            if (i != j) CHECK(qu(i, j) == doctest::Approx(-0.25));
        }
    }

    PairwiseScoreMatrix raw_only(testutil::make_classes(2));
    CHECK_THROWS_AS(build_q(raw_only), MissingCalibrationError);
}

TEST_CASE("Q identity: half p'Qp equals the objective sum") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng() % 5;
        auto m = testutil::random_calibrated_matrix(k, rng);
        auto q = build_q(m);
        auto v = testutil::random_simplex_point(k, rng);
        double quad = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) quad += v[i] * q(i, j) * v[j];
        ProbabilityVector p(v);
        CHECK(0.5 * quad == doctest::Approx(quadratic_objective(p, m)).epsilon(1e-12));
        // PSD probe
        CHECK(quad >= -1e-12);
    }
}

TEST_CASE("solve_coupling closed forms") {
    SUBCASE("uniform r gives uniform p") {
        PairwiseScoreMatrix m(testutil::make_classes(3));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j) m.set_calibrated(i, j, 0.5);
        auto sol = solve_coupling(m);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(sol.p[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        }
    }
    SUBCASE("K=2 returns (r12, r21) exactly") {
        auto sol = solve_coupling(calibrated_k2(0.7));
        CHECK(sol.p[0] == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(sol.p[1] == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(sol.quadratic_objective == doctest::Approx(0.0));
    }
    SUBCASE("consistent K=3 fixture recovered") {
        auto m = testutil::matrix_from_p(kConsistentP);
        CHECK(m.calibrated(0, 1) == doctest::Approx(0.625));
        CHECK(m.calibrated(0, 2) == doctest::Approx(5.0 / 7.0));
        CHECK(m.calibrated(1, 2) == doctest::Approx(0.6));
        auto sol = solve_coupling(m);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(sol.p[i] == doctest::Approx(kConsistentP[i]).epsilon(1e-8));
        }
        CHECK(sol.quadratic_objective < 1e-12);
        CHECK(sol.method == CouplingMethod::kkt);
    }
}

TEST_CASE("KKT residual small when method is kkt") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng() % 6;
        auto m = testutil::random_calibrated_matrix(k, rng);
        auto sol = solve_coupling(m);
        if (sol.method == CouplingMethod::kkt) {
            CHECK(sol.residual_norm <= 1e-9);
        }
        const double sum = std::accumulate(sol.p.values().begin(), sol.p.values().end(), 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("projected gradient agrees with the KKT route") {
    std::mt19937_64 rng(13);
    SUBCASE("uniform r in one step") {
        PairwiseScoreMatrix m(testutil::make_classes(4));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) m.set_calibrated(i, j, 0.5);
        auto sol = projected_gradient_coupling(m);
        for (std::size_t i = 0; i < 4; ++i) CHECK(sol.p[i] == doctest::Approx(0.25));
    }
    SUBCASE("consistent fixture cross-method") {
        auto m = testutil::matrix_from_p(kConsistentP);
        auto kkt = solve_coupling(m);
        auto pg = projected_gradient_coupling(m);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(pg.p[i] == doctest::Approx(kkt.p[i]).epsilon(1e-6));
        }
    }
    SUBCASE("random K=5 objective agreement") {
        for (int trial = 0; trial < 30; ++trial) {
            auto m = testutil::random_calibrated_matrix(5, rng);
            auto kkt = solve_coupling(m);
            auto pg = projected_gradient_coupling(m);
            CHECK(std::abs(kkt.quadratic_objective - pg.quadratic_objective) <= 1e-9);
        }
    }
}

TEST_CASE("coupling matches the brute-force simplex oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 2 + rng() % 3; // K in {2,3,4}
        auto m = testutil::random_calibrated_matrix(k, rng);
        auto [p_star, f_star] = testutil::brute_force_coupling(m, k <= 3 ? 1000 : 50);
        auto sol = solve_coupling(m);
        CHECK(std::abs(sol.quadratic_objective - f_star) <= 1e-6);
    }
}

TEST_CASE("permutation equivariance") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng() % 5;
        auto m = testutil::random_calibrated_matrix(k, rng);
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        PairwiseScoreMatrix pm(testutil::make_classes(k));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                pm.set_calibrated(perm[i], perm[j], m.calibrated(i, j));
            }
        }
        auto sol = solve_coupling(m);
        auto psol = solve_coupling(pm);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(psol.p[perm[i]] == doctest::Approx(sol.p[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("kl_objective diagnostics") {
    SUBCASE("zero iff consistent") {
        auto m = testutil::matrix_from_p(kConsistentP);
        ProbabilityVector p(kConsistentP);
        CouplingWeights w({10, 10, 10});
        CHECK(kl_objective(p, m, w) == doctest::Approx(0.0).epsilon(1e-12));
        // Perturbed r: strictly positive KL.
        auto m2 = m;
        m2.set_calibrated(0, 1, 0.7);
        CHECK(kl_objective(p, m2, w) > 1e-4);
    }
    SUBCASE("hand-computed K=2 value") {
        auto m = calibrated_k2(0.7);
        ProbabilityVector p({0.5, 0.5});
        CouplingWeights w({5, 5}); // n_12 = 10
        const double expected = 10.0 * 0.7 * std::log(0.7 / 0.5) +
                                10.0 * 0.3 * std::log(0.3 / 0.5);
        CHECK(expected == doctest::Approx(0.822829).epsilon(1e-6));
        CHECK(kl_objective(p, m, w) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("zero entry facing positive r") {
        auto m = testutil::matrix_from_p({0.5, 0.25, 0.25});
        ProbabilityVector p({0.0, 0.5, 0.5});
        CouplingWeights w({4, 4, 4});
        CHECK(std::isinf(kl_objective(p, m, w)));
    }
}

TEST_CASE("quadratic_objective direct values") {
    auto m = calibrated_k2(0.7);
    ProbabilityVector p({0.5, 0.5});
    CHECK(quadratic_objective(p, m) == doctest::Approx(0.02).epsilon(1e-12));
    auto mc = testutil::matrix_from_p(kConsistentP);
    CHECK(quadratic_objective(ProbabilityVector(kConsistentP), mc) ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("vote_label indicator counts") {
    PairwiseScoreMatrix m(testutil::make_classes(3));
    m.set_raw(0, 1, 0.9);
    m.set_raw(0, 2, 0.8);
    m.set_raw(1, 2, 0.6);
    auto v = vote_label(m);
    CHECK(v.label == 0);
    CHECK(v.wins[0] == 2);

    PairwiseScoreMatrix tie(testutil::make_classes(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) tie.set_raw(i, j, 0.5);
    auto vt = vote_label(tie);
    CHECK(vt.label == 0); // tie broken toward the smallest index
    CHECK(vt.wins == std::vector<std::size_t>{0, 0, 0});

    PairwiseScoreMatrix m2(testutil::make_classes(3));
    m2.set_raw(0, 1, 0.4);
    m2.set_raw(0, 2, 0.9);
    m2.set_raw(1, 2, 0.9);
    auto v2 = vote_label(m2);
    CHECK(v2.label == 1); // class 1 wins pairs (0,1) and (1,2)
}

TEST_CASE("vote_label matches an independent double-loop count") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 2 + rng() % 6;
        auto m = testutil::random_raw_matrix(k, rng);
        // Oracle: literal indicator double loop over ordered pairs.
        std::vector<std::size_t> wins(k, 0);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (i != j && m.raw(i, j) > m.raw(j, i)) ++wins[i];
            }
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < k; ++i) {
            if (wins[i] > wins[best]) best = i;
        }
        auto v = vote_label(m);
        CHECK(v.label == best);
        CHECK(v.wins == wins);
    }
}

TEST_CASE("argmax and threshold labeling") {
    CHECK(argmax_label(ProbabilityVector({0.2, 0.5, 0.3})) == 1);
    CHECK(argmax_label(ProbabilityVector({0.5, 0.5})) == 0);
    CHECK(argmax_label(solve_coupling(testutil::matrix_from_p(kConsistentP)).p) == 0);

    ProbabilityVector p({0.5, 0.3, 0.2});
    CHECK(threshold_labels(p, 0.25) == std::set<std::size_t>{0, 1});
    CHECK(threshold_labels(p, 0.6).empty());
    ProbabilityVector u({0.25, 0.25, 0.25, 0.25});
    CHECK(threshold_labels(u, 0.25).size() == 4); // boundary inclusive
    CHECK_THROWS_AS(threshold_labels(p, 1.5), InvalidThresholdError);
    CHECK_THROWS_AS(threshold_labels(p, 0.0), InvalidThresholdError);
}

TEST_CASE("simplex projection") {
    auto p = project_to_simplex({0.4, 0.3, 0.3});
    CHECK(p[0] == doctest::Approx(0.4));
    auto q = project_to_simplex({2.0, 0.0, 0.0});
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(q[1] == doctest::Approx(0.0));
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(4);
        for (double& x : v) x = u(rng);
        auto proj = project_to_simplex(v);
        double sum = std::accumulate(proj.begin(), proj.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        for (double x : proj) CHECK(x >= 0.0);
    }
}
