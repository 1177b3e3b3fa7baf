#include <doctest.h>

#include <cmath>
#include <string>

#include "schrolab/error.hpp"
#include "schrolab/experiments.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/semigroup.hpp"
#include "support.hpp"

using namespace schrolab;

TEST_CASE("truncation and renormalization") {
    const Grid g = testing::default_grid();
    const GridMeasure mu = testing::gaussian(g, 0.0, 1.0);
    const auto whole = truncate_renormalize(mu, 100.0);
    CHECK(whole.alpha == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(testing::l1(whole.measure.weights(), mu.weights()) < 1e-14);

    // Boundary midway between nodes, so the node set matches the ball.
    const Grid offset(1, 8.0, 521);
    const auto unit = truncate_renormalize(testing::gaussian(offset, 0.0, 1.0), 1.0);
    CHECK(unit.alpha == doctest::Approx(1.0 / std::erf(1.0 / std::sqrt(2.0))).epsilon(1e-3));
    for (std::size_t i = 0; i < offset.size(); ++i)
        if (std::abs(offset.axis_coord(static_cast<int>(i))) > 1.0) CHECK(unit.measure.weight(i) == 0.0);

    CHECK_THROWS_AS(truncate_renormalize(testing::gaussian(g, 3.0, 0.25), 0.5), DomainError);
}

TEST_CASE("continuity sweep with equal marginals is symmetric") {
    const Grid g(1, 8.0, 257);
    const GridMeasure mu = testing::gaussian(g, 0.0, 1.0);
    const auto sweep = continuity_sweep(mu, mu, Generator::laplacian(1), {2.0, 4.0});
    REQUIRE(sweep.records.size() == 2);
    for (const auto& r : sweep.records) {
        CHECK(r.converged);
        CHECK(r.fisher_mu == r.fisher_nu);
        CHECK(r.entropy_mu == r.entropy_nu);
        CHECK(r.alpha_mu == r.alpha_nu);
        CHECK(r.w2_mu == r.w2_nu);
    }
    CHECK(std::isinf(sweep.reference.radius));
    CHECK(sweep.records[1].gap < sweep.records[0].gap);
    CHECK_THROWS_AS(continuity_sweep(mu, mu, Generator::laplacian(1), {}), DomainError);
}

TEST_CASE("continuity sweep marks solves that fail") {
    // At tol 1e-15 some truncated solves hit their rounding floor; which ones
    // depends on the platform, so only the bookkeeping is checked.
    const Grid g = testing::default_grid();
    const auto sweep = continuity_sweep(testing::gaussian(g, -1.0, 1.0), testing::gaussian(g, 1.0, 1.0),
                                        Generator::laplacian(1), {1.0, 2.0, 3.0}, {}, {1e-15, 100000});
    REQUIRE(sweep.records.size() == 3);
    bool any_failed = false;
    for (const auto& r : sweep.records) {
        CHECK(r.converged == r.failure.empty());
        if (!r.converged) {
            any_failed = true;
            CHECK(std::isnan(r.cost));
            CHECK(std::isnan(r.gap));
        }
    }
    CHECK(any_failed);
    CHECK_FALSE(sweep.monotone);
    CHECK(sweep.final_gap_ok == (sweep.records.back().converged && sweep.records.back().gap < 1e-3));
}

TEST_CASE("derivative along a common translation vanishes") {
    const Grid g = testing::default_grid();
    const auto a = translation_curve(g, gaussian_1d(-1.0, 1.0), {0.5, 0.0}, {0.0});
    const auto b = translation_curve(g, gaussian_1d(1.0, 1.0), {0.5, 0.0}, {0.0});
    const auto rec = derivative_check(a, b, Generator::laplacian(1), 1.0, 0.0);
    CHECK(std::abs(rec.fd_sch) < 1e-8);
    CHECK(std::abs(rec.analytic_static) < 1e-8);
    CHECK(std::abs(rec.fd_cost) < 1e-6);
    CHECK(std::abs(rec.analytic_dynamic) < 1e-6);
}

TEST_CASE("finite-difference error is second order in the step") {
    const Grid g(1, 12.0, 769);
    const auto mu = dilation_curve(g, gaussian_1d(0.0, 1.0), 1.0, {0.0});
    const auto nu = constant_curve(testing::gaussian(g, 0.0, 2.25), {0.0});
    const Generator lap = Generator::laplacian(1);
    const auto coarse = derivative_check(mu, nu, lap, 1.0, 0.0, {0.2, 65, false});
    const auto fine = derivative_check(mu, nu, lap, 1.0, 0.0, {0.1, 65, false});
    CHECK(coarse.rel_err_static > 5e-3);
    const double ratio = coarse.rel_err_static / fine.rel_err_static;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
    // Richardson removes the leading term.
    const auto extrapolated = derivative_check(mu, nu, lap, 1.0, 0.0, {0.2, 65, true});
    CHECK(extrapolated.rel_err_static < 0.1 * fine.rel_err_static);
}

TEST_CASE("derivative failures name the time") {
    const Grid g(1, 8.0, 257);
    const auto a = translation_curve(g, gaussian_1d(-1.0, 1.0), {0.5, 0.0}, {0.0});
    const auto b = constant_curve(testing::gaussian(g, 1.0, 1.0), {0.0});
    try {
        derivative_check(a, b, Generator::laplacian(1), 1.0, 0.25, {}, {1e-10, 2});
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("t=0.25") != std::string::npos);
        CHECK(e.residual_trace().size() == 2);
    }
    CHECK(relative_error(1.0, 0.0) == 1.0);
    CHECK(relative_error(1.5, 1.0) == 0.5);
}

TEST_CASE("contraction: equal variances") {
    const Grid g(1, 8.0, 257);
    const auto report = contraction_check(testing::gaussian(g, -1.0, 1.0), testing::gaussian(g, 1.0, 1.0), {0.1, 0.2});
    CHECK(report.all_hold);
    for (const auto& row : report.rows) CHECK(std::abs(row.correction) < 1e-12);
    CHECK(report.rows[0].cost < report.cost0);
    CHECK(report.rows[1].cost < report.rows[0].cost);
}

TEST_CASE("contraction: equal marginals") {
    const Grid g(1, 8.0, 257);
    const GridMeasure mu = testing::gaussian(g, 0.0, 0.5);
    const auto report = contraction_check(mu, mu, {0.1, 0.3});
    CHECK(report.all_hold);
    // C(mu, mu) is the integrated Fisher information, not zero, and it
    // decreases along the heat flow.
    CHECK(report.cost0 > 0.0);
    for (const auto& row : report.rows) CHECK(row.correction == 0.0);
    CHECK(report.rows[1].cost < report.rows[0].cost);
    CHECK_THROWS_AS(contraction_check(mu, mu, {-0.1}), DomainError);
}

TEST_CASE("Talagrand argument checks") {
    const Grid g = testing::default_grid();
    const GridMeasure mu = testing::gaussian(g, -0.5, 1.0);
    const GridMeasure nu = testing::gaussian(g, 0.5, 1.0);
    CHECK_THROWS_AS(talagrand_check(mu, nu, Generator::laplacian(1), TalagrandBranch::PositiveCurvature, {1.0}),
                    DomainError);
    CHECK_THROWS_AS(talagrand_check(mu, nu, Generator::ornstein_uhlenbeck(), TalagrandBranch::ZeroCurvature, {1.0}),
                    DomainError);
    CHECK_THROWS_AS(talagrand_check(mu, nu, Generator::laplacian(1), TalagrandBranch::ZeroCurvature, {0.5}),
                    DomainError);
    CHECK(to_string(TalagrandBranch::PositiveCurvature) != to_string(TalagrandBranch::ZeroCurvature));
}

TEST_CASE("Talagrand with the stationary measure is tight") {
    const Grid g = testing::default_grid();
    const GridMeasure m = testing::gaussian(g, 0.0, 1.0);
    const auto report = talagrand_check(m, m, Generator::ornstein_uhlenbeck(), TalagrandBranch::PositiveCurvature, {1.0});
    CHECK(report.all_hold);
    CHECK(std::abs(report.rows[0].cost) < 1e-10);
    CHECK(std::abs(report.rows[0].bound) < 1e-10);
}

TEST_CASE("Talagrand OU bound for a mean shift") {
    // C_T = 4 F coth(T/2) is the exact infimum of the bound here.
    const Grid g = testing::default_grid();
    const auto report = talagrand_check(testing::gaussian(g, 0.5, 1.0), testing::gaussian(g, -0.5, 1.0),
                                        Generator::ornstein_uhlenbeck(), TalagrandBranch::PositiveCurvature, {1.0});
    CHECK(report.all_hold);
    CHECK(report.rows[0].cost == doctest::Approx(4.0 * 0.125 / std::tanh(0.5)).epsilon(1e-8));
    CHECK(report.rows[0].slack >= 0.0);
}

TEST_CASE("Monge-Ampere identity") {
    const Grid g = testing::default_grid();
    const auto shift = translation_curve(g, gaussian_1d(0.0, 1.0), {0.75, 0.0}, {0.0, 1.0});
    const auto same = monge_ampere_check(shift, 0.4, 0.4);
    CHECK(same.gap == 0.0);
    CHECK(same.lhs == same.rhs);
    CHECK(monge_ampere_check(shift, 0.0, 1.0).gap < 1e-10);

    const auto heat = heat_flow_curve(Generator::laplacian(1), testing::gaussian(g, 0.0, 0.5), {0.0, 0.3, 0.6});
    const auto r = monge_ampere_check(heat, 0.1, 0.5);
    CHECK(r.gap < 1e-8);
    CHECK(r.excluded_mass < 1e-8);
    // H(N(0, v) | Leb) = -log(2 pi e v) / 2
    CHECK(r.lhs == doctest::Approx(testing::gaussian_entropy(1.5)).epsilon(1e-6));
}
