#include "fixtures.hpp"

#include "nlresp/errors.hpp"
#include "nlresp/propagator.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nlresp;
using nlresp::testing::reference_bath;
using nlresp::testing::single_level;
using nlresp::testing::two_levels;

namespace {

// tests/oracles/closed_form_oracles.py
const complex k3_ref_100_100_100{-0.040436783269166329, 0.022279022455084727};
const complex k2_uncorrelated_100_100{-0.11073590249937979, -0.0043803216756245934};
const complex coeff_I_ref_0_100_50{-0.010708912314680908, -0.026540469727969489};
const complex coeff_M_ref_100{0.046765853266835362, -0.011906948813655609};

double rel(complex a, complex b) { return std::abs(a - b) / std::abs(b); }

LineBroadening reference() { return LineBroadening::obo(reference_bath()); }

double max_rel_deviation(const ResponseField& a, const ResponseField& b)
{
    double scale = 0.0;
    double dev = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) {
        scale = std::max(scale, std::abs(b.values()[k]));
        dev = std::max(dev, std::abs(a.values()[k] - b.values()[k]));
    }
    return dev / scale;
}

// Composite Simpson on [0, x] with 2n panels.
template <typename F>
complex simpson(F f, double x, int n = 2000)
{
    const double h = x / (2 * n);
    complex sum = f(0.0) + f(x);
    for (int k = 1; k < 2 * n; ++k) {
        sum += (k % 2 ? 4.0 : 2.0) * f(k * h);
    }
    return sum * h / 3.0;
}

} // namespace

TEST_CASE("third-interval relaxation tensor")
{
    const auto sys = single_level(reference());
    const PathwaySpec p{0, 0};
    for (const double t : {0.0, 10.0, 250.0}) {
        CHECK(std::abs(k3(sys, p, t, 0.0, 0.0) + sys.correlation.gdot(0, 0, t)) < 1e-16);
    }
    CHECK(rel(k3(sys, p, 100.0, 100.0, 100.0), k3_ref_100_100_100) < 1e-12);
    const auto bare = single_level(LineBroadening{});
    CHECK(k3(bare, p, 30.0, 40.0, 50.0) == complex{0.0, 0.0});
    CHECK_THROWS_AS(k3(sys, p, -1.0, 0.0, 0.0), DomainError);
}

TEST_CASE("second-interval relaxation tensor")
{
    const auto sys = single_level(reference());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    for (int k = 0; k < 1000; ++k) {
        CHECK(k2(sys, PathwaySpec{0, 0}, u(rng), u(rng)) == complex{0.0, 0.0});
    }
    const auto bare = two_levels(LineBroadening{}, 0.4);
    CHECK(k2(bare, PathwaySpec{0, 1}, 100.0, 100.0) == complex{0.0, 0.0});

    const auto pair = two_levels(reference(), 0.0);
    CHECK(rel(k2(pair, PathwaySpec{0, 1}, 100.0, 100.0), k2_uncorrelated_100_100) < 1e-12);
}

TEST_CASE("projector coefficients I and M")
{
    const auto sys = single_level(reference());
    CHECK(coeff_I(sys, 0, 123.0, 0.0, 0.0) == complex{0.0, 0.0});
    CHECK(rel(coeff_I(sys, 0, 0.0, 100.0, 50.0), coeff_I_ref_0_100_50) < 1e-12);
    CHECK(coeff_M(sys, 0, 0.0) == complex{0.0, 0.0});
    CHECK(rel(coeff_M(sys, 0, 100.0), coeff_M_ref_100) < 1e-12);

    const auto bare = single_level(LineBroadening{});
    CHECK(coeff_I(bare, 0, 5.0, 6.0, 7.0) == complex{0.0, 0.0});
    CHECK(coeff_M(bare, 0, 5.0) == complex{0.0, 0.0});
    CHECK_THROWS_AS(coeff_M(sys, 3, 1.0), DomainError);
}

TEST_CASE("K3 = -(I + M) for the diagonal pathway")
{
    const auto sys = single_level(reference());
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 800.0);
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
        const double t = u(rng), waiting = u(rng), tau = u(rng);
        worst = std::max(worst, std::abs(k3(sys, PathwaySpec{0, 0}, t, waiting, tau) +
                                         coeff_I(sys, 0, t, waiting, tau) + coeff_M(sys, 0, t)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("RK4 integrator")
{
    const auto rate = [](double s) { return complex{-0.01 * s / 100.0, -0.05}; };
    const auto exact = [](double s) { return std::exp(complex{-0.01 * s * s / 200.0, -0.05 * s}); };
    const complex y0{0.3, -0.7};

    SUBCASE("initial value is returned untouched")
    {
        const auto sol = integrate_linear(rate, y0, TimeGrid{2.0, 50}, 1.0);
        CHECK(sol.values[0] == y0);
        CHECK(sol.step_fs == 1.0);
        CHECK(sol.scheme == "rk4");
        const auto single = integrate_linear(rate, y0, TimeGrid{2.0, 1}, 1.0);
        REQUIRE(single.values.size() == 1);
        CHECK(single.values[0] == y0);
    }
    SUBCASE("fourth-order convergence")
    {
        const TimeGrid grid{4.0, 101};
        double prev = 0.0;
        for (const double h : {4.0, 2.0, 1.0, 0.5}) {
            const auto sol = integrate_linear(rate, complex{1.0, 0.0}, grid, h);
            double err = 0.0;
            for (std::size_t k = 0; k < grid.count; ++k) {
                err = std::max(err, std::abs(sol.values[k] - exact(grid.at(k))));
            }
            if (prev > 0.0) {
                CHECK(prev / err >= 8.0);
            }
            prev = err;
        }
    }
    SUBCASE("steps coarser than the grid use dense output")
    {
        const TimeGrid grid{1.0, 103};
        const auto sol = integrate_linear(rate, complex{1.0, 0.0}, grid, 4.0);
        CHECK(sol.step_fs == 4.0);
        // RK nodes agree with a run on the matching coarse grid.
        const auto nodes = integrate_linear(rate, complex{1.0, 0.0}, TimeGrid{4.0, 26}, 4.0);
        for (std::size_t k = 0; k < nodes.values.size(); ++k) {
            CHECK(sol.values[4 * k] == nodes.values[k]);
        }
        // Interior points are no worse than the node error.
        double node_err = 0.0;
        double all_err = 0.0;
        for (std::size_t k = 0; k < grid.count; ++k) {
            const double e = std::abs(sol.values[k] - exact(grid.at(k)));
            all_err = std::max(all_err, e);
            if (k % 4 == 0) {
                node_err = std::max(node_err, e);
            }
        }
        CHECK(all_err <= 1.5 * node_err);
        CHECK(all_err < 1e-4);
    }
    SUBCASE("non-dividing step is shrunk")
    {
        const auto sol = integrate_linear(rate, complex{1.0, 0.0}, TimeGrid{2.0, 10}, 0.7);
        CHECK(sol.step_fs == doctest::Approx(2.0 / 3.0));
    }
    CHECK_THROWS_AS(integrate_linear(rate, y0, TimeGrid{1.0, 5}, 0.0), DomainError);
    CHECK_THROWS_AS(integrate_linear(rate, y0, TimeGrid{1.0, 5}, -1.0), DomainError);
}

TEST_CASE("first interval")
{
    const TimeGrid grid{1.0, 501};
    const auto sys = single_level(reference(), 10000.0, 10000.0);
    const auto sol = propagate_first(sys, 0, grid, 1.0);
    CHECK(sol.values[0] == complex{1.0, 0.0});
    // Deviation relative to the largest modulus; pointwise relative error in
    // the e^-30 tail is dominated by RK4 truncation (~1e-5 at 1 fs).
    double worst = 0.0;
    for (std::size_t k = 1; k < grid.count; ++k) {
        const complex expected = std::conj(linear_coherence(sys, 0, grid.at(k)));
        worst = std::max(worst, std::abs(sol.values[k] - expected));
    }
    CHECK(worst < 1e-6);
    const auto fine = propagate_first(sys, 0, grid, 0.25);
    CHECK(rel(fine.values[500], std::conj(linear_coherence(sys, 0, 500.0))) < 1e-7);

    const auto bare = single_level(LineBroadening{}, 10000.0, 9800.0);
    const auto osc = propagate_first(bare, 0, grid, 1.0);
    for (std::size_t k = 0; k < grid.count; k += 25) {
        CHECK(std::abs(osc.values[k]) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(rel(osc.values[k], std::exp(complex{0.0, bare.frame_omega(0) * grid.at(k)})) < 1e-6);
    }
    CHECK_THROWS_AS(propagate_first(sys, 0, grid, 0.0), DomainError);
}

TEST_CASE("second interval")
{
    const TimeGrid grid{1.0, 301};
    SUBCASE("diagonal pathway is stationary")
    {
        const auto sys = single_level(reference());
        const complex y0{0.4, 0.2};
        const auto sol = propagate_second(sys, PathwaySpec{0, 0}, grid, 80.0, y0, 1.0);
        for (const auto& v : sol.values) {
            CHECK(v == y0);
        }
    }
    SUBCASE("bare bath oscillates at the level splitting")
    {
        const auto pair = two_levels(LineBroadening{}, 0.0, 10000.0, 10100.0, 10000.0);
        const auto sol = propagate_second(pair, PathwaySpec{0, 1}, grid, 50.0, complex{1.0, 0.0}, 1.0);
        const double split = pair.frame_omega(1) - pair.frame_omega(0);
        for (std::size_t k = 0; k < grid.count; k += 20) {
            CHECK(rel(sol.values[k], std::exp(complex{0.0, -split * grid.at(k)})) < 1e-7);
        }
    }
    SUBCASE("partially correlated levels follow the integrated tensor")
    {
        const auto pair = two_levels(reference(), 0.5, 10000.0, 10200.0, 10100.0);
        const PathwaySpec p{0, 1};
        const double tau = 60.0;
        const auto sol = propagate_second(pair, p, grid, tau, complex{1.0, 0.0}, 1.0);
        const double split = pair.frame_omega(1) - pair.frame_omega(0);
        for (const std::size_t k : {50u, 150u, 300u}) {
            const double T = grid.at(k);
            const complex integral = simpson([&](double s) { return k2(pair, p, s, tau); }, T);
            const complex expected = std::exp(complex{0.0, -split * T} + integral);
            CHECK(rel(sol.values[k], expected) < 2e-5);
        }
    }
}

TEST_CASE("third interval reproduces the exact response")
{
    const auto sys = single_level(reference());
    const PathwaySpec p{0, 0};
    const TimeGrid grid{1.0, 501};
    const double tau = 100.0;
    const double waiting = 100.0;
    const auto sol = propagate_third(sys, p, grid, waiting, tau, 1.0);
    CHECK(sol.values[0] == r2_initial(sys, p, tau, waiting));
    double scale = 0.0;
    double dev = 0.0;
    for (std::size_t k = 0; k < grid.count; ++k) {
        const complex exact = r2_exact(sys, p, tau, waiting, grid.at(k));
        scale = std::max(scale, std::abs(exact));
        dev = std::max(dev, std::abs(sol.values[k] - exact));
    }
    CHECK(dev / scale < 1e-4);

    const auto single = propagate_third(sys, p, TimeGrid{1.0, 1}, waiting, tau, 1.0);
    CHECK(single.values == std::vector<complex>{r2_initial(sys, p, tau, waiting)});

    const auto bare = single_level(LineBroadening{}, 10000.0, 9900.0);
    const complex seed = r2_initial(bare, p, tau, waiting);
    const auto osc = propagate_third(bare, p, grid, waiting, tau, 1.0);
    for (std::size_t k = 0; k < grid.count; k += 50) {
        CHECK(rel(osc.values[k], seed * std::exp(complex{0.0, -bare.frame_omega(0) * grid.at(k)})) < 1e-7);
    }
}

TEST_CASE("chained propagation rebuilds R2")
{
    const PathwaySpec p{0, 0};
    const TimeGrid axis{2.0, 256};

    SUBCASE("origin")
    {
        auto sys = single_level(reference());
        sys.dipole = {1.5};
        const auto f = r2_via_master(sys, p, TimeGrid{1.0, 1}, TimeGrid{1.0, 1}, 0.0);
        CHECK(f(0, 0) == complex{std::pow(1.5, 4), 0.0});
        CHECK(f.provenance() == Provenance::Propagated);
    }
    SUBCASE("no bath")
    {
        const auto bare = single_level(LineBroadening{});
        const auto f = r2_via_master(bare, p, axis, axis, 100.0);
        CHECK(max_rel_deviation(f, field_exact(bare, p, axis, axis, 100.0)) < 1e-14);
    }
    SUBCASE("reference bath at several waiting times")
    {
        const auto sys = single_level(reference());
        for (const double waiting : {0.0, 100.0, 500.0}) {
            MasterOptions opts;
            opts.jobs = 4;
            const auto f = r2_via_master(sys, p, axis, axis, waiting, opts);
            CHECK(max_rel_deviation(f, field_exact(sys, p, axis, axis, waiting)) < 1e-4);
        }
    }
    SUBCASE("cross pathway with partially correlated levels")
    {
        const auto pair = two_levels(reference(), 0.5, 10000.0, 10150.0, 10050.0);
        const PathwaySpec cross{0, 1};
        const TimeGrid small{2.0, 64};
        int diagnostics = 0;
        MasterOptions opts;
        opts.on_diagnostic = [&](std::string_view) { ++diagnostics; };
        const auto f = r2_via_master(pair, cross, small, small, 200.0, opts);
        CHECK(max_rel_deviation(f, field_exact(pair, cross, small, small, 200.0)) < 1e-4);
        CHECK(diagnostics == 0);
    }
    SUBCASE("seed mismatch falls back to the closed-form initial condition")
    {
        const auto sys = single_level(reference());
        const TimeGrid small{2.0, 32};
        int diagnostics = 0;
        MasterOptions opts;
        opts.rk_step_fs = 20.0;
        opts.seed_tolerance = 1e-12;
        opts.on_diagnostic = [&](std::string_view) { ++diagnostics; };
        (void)r2_via_master(sys, p, small, small, 100.0, opts);
        CHECK(diagnostics > 0);
    }
}

TEST_CASE("log-derivative of the exact response equals the third-interval rate")
{
    const auto pair = two_levels(reference(), 0.7, 10000.0, 10200.0, 10000.0);
    for (const PathwaySpec p : {PathwaySpec{0, 0}, PathwaySpec{0, 1}}) {
        const double tau = 80.0;
        const double waiting = 150.0;
        auto err = [&](double h) {
            double worst = 0.0;
            for (const double t : {20.0, 90.0, 300.0}) {
                const complex fd =
                    std::log(r2_exact(pair, p, tau, waiting, t + h) / r2_exact(pair, p, tau, waiting, t - h)) / (2.0 * h);
                const complex rate = relaxation(pair, p, Interval::Third, t, waiting, tau).value;
                worst = std::max(worst, std::abs(fd - rate));
            }
            return worst;
        };
        CHECK(std::log2(err(0.5) / err(0.25)) >= 1.9);
    }
}
