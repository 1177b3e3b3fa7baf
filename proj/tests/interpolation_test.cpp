#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "schrolab/error.hpp"
#include "schrolab/functionals.hpp"
#include "schrolab/interpolation.hpp"
#include "schrolab/io.hpp"
#include "schrolab/semigroup.hpp"
#include "support.hpp"

using namespace schrolab;

namespace {

SchroedingerPotentials shifted_pair(double horizon = 1.0) {
    const Grid g = testing::default_grid();
    return solve_schroedinger_system(testing::gaussian(g, -1.0, 1.0), testing::gaussian(g, 1.0, 1.0),
                                     Generator::laplacian(1), horizon);
}

SchroedingerPotentials spread_pair() {
    const Grid g = testing::default_grid();
    return solve_schroedinger_system(testing::gaussian(g, 0.0, 0.5), testing::gaussian(g, 0.5, 1.0),
                                     Generator::laplacian(1), 1.0);
}

}  // namespace

TEST_CASE("interpolation hits both marginals") {
    const auto pot = spread_pair();
    const auto start = interpolate(pot, 0.0);
    const auto end = interpolate(pot, pot.horizon);
    CHECK(testing::l1(start.measure.weights(), pot.mu.weights()) < 1e-10);
    CHECK(testing::l1(end.measure.weights(), pot.nu.weights()) < 1e-10);
    CHECK(start.defect < 1e-10);
    CHECK_THROWS_AS(interpolate(pot, 1.5), DomainError);
}

TEST_CASE("OU stationary path does not move") {
    const Grid g = testing::default_grid();
    const GridMeasure m = testing::gaussian(g, 0.0, 1.0);
    const auto pot = solve_schroedinger_system(m, m, Generator::ornstein_uhlenbeck(), 1.0);
    for (double s : {0.25, 0.5, 0.75}) {
        CHECK(testing::l1(interpolate(pot, s).measure.weights(), m.weights()) < 1e-9);
        const auto v = velocity(pot, s);
        double largest = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (m.density(i) > 1e-8) largest = std::max(largest, std::abs(v.at(i, 0)));
        CHECK(largest < 1e-6);
    }
    const auto cost = dynamic_cost(pot);
    CHECK(std::abs(cost.value) < 1e-12);
}

TEST_CASE("reflection symmetry of the midpoint velocity") {
    // mu and nu are mirror images, so v_{T/2} is even.
    const auto pot = shifted_pair();
    const auto v = velocity(pot, 0.5);
    const Grid& g = pot.grid();
    const auto mid = interpolate(pot, 0.5).measure;
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mid.density(i) > 1e-6) worst = std::max(worst, std::abs(v.at(i, 0) - v.at(g.size() - 1 - i, 0)));
    CHECK(worst < 1e-6);

    // With mu = nu the path is time symmetric and the midpoint velocity vanishes.
    const GridMeasure mu = testing::gaussian(g, 0.4, 0.7);
    const auto same = solve_schroedinger_system(mu, mu, Generator::laplacian(1), 1.0);
    const auto w = velocity(same, 0.5);
    const auto mid2 = interpolate(same, 0.5).measure;
    double largest = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mid2.density(i) > 1e-6) largest = std::max(largest, std::abs(w.at(i, 0)));
    CHECK(largest < 1e-6);
}

TEST_CASE("interpolation solves the continuity equation weakly") {
    const auto pot = spread_pair();
    const Grid& g = pot.grid();
    const double h = 1e-3;
    for (double s : {0.2, 0.5, 0.8}) {
        CAPTURE(s);
        auto moment = [&](double t, auto phi) {
            const auto m = interpolate(pot, t).measure;
            double total = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) total += phi(g.axis_coord(static_cast<int>(i))) * m.weight(i);
            return total;
        };
        const auto mu_s = interpolate(pot, s).measure;
        const auto v = velocity(pot, s);
        // phi(x) = x and phi(x) = x^2
        const double d1 = (moment(s + h, [](double x) { return x; }) - moment(s - h, [](double x) { return x; })) / (2 * h);
        const double d2 =
            (moment(s + h, [](double x) { return x * x; }) - moment(s - h, [](double x) { return x * x; })) / (2 * h);
        double flux1 = 0.0, flux2 = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            flux1 += v.at(i, 0) * mu_s.weight(i);
            flux2 += 2.0 * g.axis_coord(static_cast<int>(i)) * v.at(i, 0) * mu_s.weight(i);
        }
        CHECK(std::abs(d1 - flux1) < 1e-5);
        CHECK(std::abs(d2 - flux2) < 1e-5);
    }
}

TEST_CASE("dynamic cost: quadrature convergence, symmetry and bounds") {
    const auto pot = spread_pair();
    const auto c65 = dynamic_cost(pot, 65);
    const auto c129 = dynamic_cost(pot, 129);
    CHECK(std::abs(c65.value - c129.value) < 1e-6);
    CHECK(c65.value >= 0.0);
    CHECK(c65.path.size() == 65);

    const auto reversed = solve_schroedinger_system(pot.nu, pot.mu, pot.kernel);
    CHECK(dynamic_cost(reversed, 65).value == doctest::Approx(c65.value).epsilon(1e-9));

    for (double c : {-3.0, 7.0}) CHECK(dynamic_cost(pot.gauge_shifted(c), 65).value == doctest::Approx(c65.value).epsilon(1e-12));

    const double w2 = wasserstein_1d(pot.mu, pot.nu);
    CHECK(c65.kinetic >= w2 * w2 / pot.horizon - 1e-2);
}

TEST_CASE("Benamou-Brenier-Schroedinger identity") {
    const auto report = bbs_report(shifted_pair());
    CHECK(report.residual < 1e-8);
    CHECK_FALSE(report.horizon_extension);
    CHECK(report.sch == doctest::Approx(report.c_dynamic / 4 + (report.entropy_mu + report.entropy_nu) / 2).epsilon(1e-8));
    CHECK(bbs_report(shifted_pair(2.0)).horizon_extension);
}

TEST_CASE("entropy is convex along the path") {
    const auto rows = entropy_profile(spread_pair(), 65);
    CHECK(rows.size() == 65);
    CHECK(std::all_of(rows.begin(), rows.end(), [](const EntropyProfileRow& r) { return r.convex; }));
    CHECK(rows.front().d1 == 0.0);

    const Grid g = testing::default_grid();
    const GridMeasure m = testing::gaussian(g, 0.0, 1.0);
    CHECK_THROWS_AS(entropy_profile(solve_schroedinger_system(m, m, Generator::ornstein_uhlenbeck(), 1.0)), DomainError);
}

TEST_CASE("chain rule for the entropy at the start of the path") {
    // mu_s = N(-1 + 2s, (1-s)^2 + s^2 + 2 sqrt(2) s (1-s)), so dF/ds(0) = 1 - sqrt(2)
    const auto pot = shifted_pair();
    CHECK(entropy_slope(pot, 0.0) == doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-6));
    const Generator lap = Generator::laplacian(1);
    const double h = 1.0 / 64.0;
    auto F = [&](double s) { return entropy_F(interpolate(pot, s).measure, lap); };
    const double fd = (-3.0 * F(0.0) + 4.0 * F(h) - F(2.0 * h)) / (2.0 * h);
    CHECK(std::abs(entropy_slope(pot, 0.0) - fd) < 1e-3);
}

TEST_CASE("Simpson's rule") {
    // exact on cubics
    std::vector<double> v;
    const double step = 0.125;
    for (int k = 0; k <= 16; ++k) {
        const double x = k * step;
        v.push_back(x * x * x - 2.0 * x + 1.0);
    }
    CHECK(simpson(v, step) == doctest::Approx(4.0 - 4.0 + 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(simpson(std::vector<double>{1.0, 2.0}, 1.0), DomainError);

    const auto pot = spread_pair();
    CHECK_THROWS_AS(dynamic_cost(pot, 31), DomainError);
    CHECK_THROWS_AS(dynamic_cost(pot, 64), DomainError);
    CHECK_THROWS_AS(sample_path(pot, 2), DomainError);
}

TEST_CASE("long horizons on a small window lose mass") {
    const auto pot = shifted_pair(8.0);
    CHECK_THROWS_AS(dynamic_cost(pot), NumericalError);
}

TEST_CASE("path CSV") {
    const auto pot = spread_pair();
    const auto path = std::filesystem::temp_directory_path() / "schrolab_tests" / "path.csv";
    const auto samples = sample_path(pot, 5);
    write_path_csv(path, samples);
    const std::string text = io::read_file(path);
    CHECK(text.rfind("s,entropy,fisher,kinetic,integrand\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}

TEST_CASE("flow maps along a translation are shifts") {
    const Grid g = testing::default_grid();
    const auto curve = translation_curve(g, gaussian_1d(0.0, 1.0), {0.75, 0.0}, {0.0, 1.0});
    CHECK(flow_map(curve, 0.3, 0.3, 1.234) == 1.234);
    for (double x : {-2.0, 0.0, 1.5}) CHECK(flow_map(curve, 0.0, 1.0, x) == doctest::Approx(x + 0.75).epsilon(1e-12));
    CHECK(flow_map(curve, 1.0, 0.2, 0.5) == doctest::Approx(0.5 - 0.6).epsilon(1e-12));
    CHECK_THROWS_AS(flow_map(curve, 0.0, 1.0, 9.0), DomainError);
}

TEST_CASE("flow maps along the heat flow") {
    const Grid g = testing::default_grid();
    const auto curve = heat_flow_curve(Generator::laplacian(1), testing::gaussian(g, 0.0, 0.5), {0.0, 0.3, 0.6});
    // mu_t = N(0, 0.5 + 2t), so T_{t->s}(x) = x sqrt((0.5 + 2s) / (0.5 + 2t))
    const std::vector<double> xs{-2.0, -0.5, 0.3, 1.7};
    const auto mapped = flow_map(curve, 0.1, 0.6, xs);
    for (std::size_t k = 0; k < xs.size(); ++k)
        CHECK(mapped[k] == doctest::Approx(xs[k] * std::sqrt(1.7 / 0.7)).epsilon(1e-6));

    // composition T_{t->s} o T_{r->t} = T_{r->s}
    const auto two = flow_map(curve, 0.4, 0.6, flow_map(curve, 0.1, 0.4, xs));
    for (std::size_t k = 0; k < xs.size(); ++k) CHECK(std::abs(two[k] - mapped[k]) < 1e-8);

    CHECK(flow_pushforward_check(curve, 0.1, 0.6).w2 < 1e-3);
}

TEST_CASE("trajectories leaving the grid") {
    const Grid g = testing::default_grid();
    const auto curve = heat_flow_curve(Generator::laplacian(1), testing::gaussian(g, 0.0, 0.5), {0.0, 0.6});
    try {
        flow_map(curve, 0.1, 0.6, 7.9);
        FAIL("expected GridExitError");
    } catch (const GridExitError& e) {
        // 7.9 sqrt((0.5 + 2t) / 0.7) reaches 8 at t = 0.1089
        CHECK(e.exit_time() > 0.1);
        CHECK(e.exit_time() < 0.12);
    }
    const std::vector<double> xs{0.0, 7.9};
    const auto tracked = flow_map_tracked(curve, 0.1, 0.6, xs);
    CHECK_FALSE(tracked.exited[0]);
    CHECK(tracked.exited[1]);
    CHECK(std::abs(tracked.positions[1]) <= 8.0);
}
