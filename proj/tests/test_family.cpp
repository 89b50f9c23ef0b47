#include "khess/errors.hpp"
#include "khess/family.hpp"
#include "khess/stability.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>

using namespace khess;

TEST_CASE("delta_nk values") {
    CHECK(delta_nk(10, 1) == 0.0);
    CHECK(delta_nk(12, 2) == 0.0);
    CHECK(delta_nk(11, 1) == doctest::Approx((-14.0 + 2.0 * std::sqrt(40.0)) / 4.0).epsilon(1e-14));
    CHECK(delta_nk(11, 1) == doctest::Approx(-0.3377223398).epsilon(1e-9));
    for (int k = 1; k <= 6; ++k) {
        for (int n = std::max(2, k); n <= 50; ++n) {
            CHECK(delta_nk_factored(n, k) == doctest::Approx(delta_nk(n, k)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(delta_nk(3, 4), DomainError);
}

TEST_CASE("exponents and regimes") {
    CHECK(classify_regime(ProblemParams(9, 1)) == Regime::bounded);
    CHECK(classify_regime(ProblemParams(10, 1)) == Regime::logarithmic);
    CHECK(classify_regime(ProblemParams(11, 1)) == Regime::power);
    CHECK(to_string(Regime::logarithmic) == "log");
    for (int k = 1; 2 * k + 8 <= 60; ++k) {
        for (int n = 2 * k + 8; n <= 60; ++n) {
            const auto e = estimate_exponents(ProblemParams(n, k));
            CHECK(e.identity_gap <= 1e-12);
            CHECK(e.d3u_rate == doctest::Approx(e.delta - 3.0));
            // (k-1)/(k+1) + ((k+1)(delta-2)+2)/(k+1) = delta - 1
            CHECK((k - 1.0) / (k + 1) + ((k + 1) * (e.delta - 2) + 2) / (k + 1) == doctest::Approx(e.delta - 1).epsilon(1e-12));
            CHECK(sk_coefficient(ProblemParams(n, k)) > 0.0);
            CHECK(sk_coefficient(ProblemParams(n, k)) >= 8.0 - e.delta - 1e-12);
        }
    }
    CHECK(sk_coefficient(ProblemParams(10, 1)) == doctest::Approx(8.0));
    CHECK(sk_coefficient(ProblemParams(11, 1)) == doctest::Approx(8.6623).epsilon(1e-4));
    CHECK_THROWS_AS(displayed_derivative_exponent(12, 1, 4), DomainError);
}

TEST_CASE("h functions") {
    const auto c = HFunction::constant(2.0);
    CHECK(c.H(0.5) == doctest::Approx(1.0));
    const auto p = HFunction::power(3.0, 0.5);
    CHECK(p.H(0.25) == doctest::Approx(3.0 * std::pow(0.25, 1.5) / 1.5));
    CHECK(p.dh(0.25) == doctest::Approx(1.5 * std::pow(0.25, -0.5)));
    CHECK_THROWS_AS(HFunction::power(1.0, -1.0), DomainError);
    CHECK_THROWS_AS(HFunction::constant(-1.0), DomainError);

    const auto t = HFunction::tabulated({0.1, 0.5, 1.0}, {1.0, 3.0, 3.0});
    CHECK(t.h(0.3) == doctest::Approx(2.0));
    CHECK(t.H(0.1) == doctest::Approx(0.1));
    CHECK(t.H(0.5) == doctest::Approx(0.1 + 0.4 * 2.0));
    CHECK(t.H(0.3) == doctest::Approx(0.1 + 0.2 * 1.5));
    CHECK(t.dh(0.3) == doctest::Approx(5.0));
    CHECK_THROWS_AS(HFunction::tabulated({0.1, 0.5}, {1.0, -1.0}), DomainError);
}

TEST_CASE("spec validation") {
    const auto grid = RadialGrid::log_uniform();
    CHECK_THROWS_AS(FamilySpec(ProblemParams(9, 1), HFunction::zero(), grid), DomainError);
    CHECK_NOTHROW(FamilySpec(ProblemParams(10, 1), HFunction::zero(), grid));
}

TEST_CASE("closed forms for h = 0") {
    const auto grid = RadialGrid::log_uniform();
    {
        const FamilySpec spec(ProblemParams(10, 1), HFunction::zero(), grid);
        const auto fam = build_family(spec);
        for (std::size_t i = 0; i < grid.size(); i += 97) {
            CHECK(fam.profile.u()[i] == doctest::Approx(std::log(grid[i])).epsilon(1e-10));
            CHECK(fam.profile.du()[i] == doctest::Approx(1.0 / grid[i]).epsilon(1e-14));
        }
        // g(s) = c 8 e^{-2ks}
        const auto g = reconstruct_g(spec, fam.profile);
        for (double s : {-15.0, -3.0, -0.2}) CHECK(g.g(s) == doctest::Approx(8.0 * std::exp(-2.0 * s)).epsilon(1e-4));
    }
    {
        const FamilySpec spec(ProblemParams(14, 2), HFunction::zero(), grid);
        const auto fam = build_family(spec);
        const double d = spec.delta();
        for (std::size_t i = 0; i < grid.size(); i += 97) {
            CHECK(fam.profile.u()[i] == doctest::Approx((std::pow(grid[i], d) - 1.0) / d).epsilon(1e-10));
            CHECK(family_sk(spec, grid[i]) ==
                  doctest::Approx(spec.params().c_nk() * sk_coefficient(spec.params()) * std::pow(grid[i], 2 * (d - 2))));
        }
    }
}

TEST_CASE("family_sk matches the radial operator and is positive") {
    const auto grid = RadialGrid::log_uniform();
    for (int k = 1; k <= 3; ++k) {
        const FamilySpec spec(ProblemParams(2 * k + 9, k), HFunction::power(2.0, 0.5), grid);
        const auto fam = build_family(spec);
        for (std::size_t i = 0; i < grid.size(); i += 41) {
            const double expected = family_sk(spec, grid[i]);
            CHECK(expected > 0.0);
            CHECK(sk_radial(grid[i], fam.profile.du()[i], (*fam.profile.d2u())[i], spec.params()) ==
                  doctest::Approx(expected).epsilon(1e-10));
            const double h = 1e-6 * grid[i];
            const double fd = (family_sk(spec, grid[i] + h) - family_sk(spec, grid[i] - h)) / (2 * h);
            if (grid[i] + h <= 1.0) CHECK(family_sk_derivative(spec, grid[i]) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("u by quadrature against Gauss-Kronrod") {
    const auto grid = RadialGrid::log_uniform();
    const FamilySpec spec(ProblemParams(11, 1), HFunction::constant(1.0), grid);
    const auto fam = build_family(spec);
    const double d = spec.delta();
    auto du = [d](double r) { return std::pow(r, d - 1) * std::sqrt(1 + r); };
    for (double r : {1e-6, 1e-3, 0.3}) {
        const std::size_t i = grid.lower_index(r);
        const double oracle = -boost::math::quadrature::gauss_kronrod<double, 61>::integrate(du, grid[i], 1.0, 15, 1e-14);
        CHECK(fam.profile.u()[i] == doctest::Approx(oracle).epsilon(1e-7));
    }
}

TEST_CASE("reconstructed g makes the family an exact solution") {
    const auto grid = RadialGrid::log_uniform();
    for (int k = 1; k <= 3; ++k) {
        const FamilySpec spec(ProblemParams(2 * k + 8, k), HFunction::zero(), grid);
        const auto fam = build_family(spec);
        const auto g = reconstruct_g(spec, fam.profile);
        CHECK(integral_residual(fam.profile, g, spec.params()).max_abs <= 1e-6);
        for (const auto& b : default_bump_suite(grid.r_min(), 8)) {
            CHECK(std::abs(weak_residual(fam.profile, g, b.as_test_function(), spec.params())) <= 1e-6);
        }
        const auto rec = recover_uprime(grid, fam.profile.u(), g, spec.params());
        for (std::size_t i = 0; i < grid.size(); i += 101) {
            CHECK(rec[i] == doctest::Approx(fam.profile.du()[i]).epsilon(1e-4));
        }
    }
    // Non-monotone u is rejected.
    const FamilySpec spec(ProblemParams(10, 1), HFunction::zero(), grid);
    std::vector<double> u(grid.size(), -1.0);
    CHECK_THROWS_AS(reconstruct_g(spec, RadialProfile(grid, u, std::vector<double>(grid.size(), 1.0))), DomainError);
}

TEST_CASE("unbounded, finite norm, semistable") {
    const auto grid = RadialGrid::log_uniform();
    for (int k = 1; k <= 3; ++k) {
        for (int extra : {0, 1, 4}) {
            const FamilySpec spec(ProblemParams(2 * k + 8 + extra, k), HFunction::constant(1.0), grid);
            const auto fam = build_family(spec);
            // Monotone divergence over the innermost three decades.
            const auto& u = fam.profile.u();
            const std::size_t j3 = grid.lower_index(1e3 * grid.r_min());
            for (std::size_t i = 1; i <= j3; ++i) REQUIRE(u[i] > u[i - 1]);
            CHECK(u[0] < u[j3] - 1.0);
            CHECK(weighted_sobolev_norm(fam.profile, spec.params(), grid.r_min(), 1.0).finite);
            const auto rep = min_rayleigh(fam.profile, reconstruct_g(spec, fam.profile), spec.params());
            CHECK(rep.verdict == Verdict::semistable);
        }
    }
}

TEST_CASE("decay fits") {
    const auto grid = RadialGrid::log_uniform();
    std::vector<double> pure(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) pure[i] = std::pow(grid[i], -0.7);
    const auto fit = fit_decay(grid.nodes(), pure);
    CHECK(fit.rate == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.count >= 200);
    pure[grid.lower_index(1e-4)] = 0.0;
    CHECK_THROWS_AS(fit_decay(grid.nodes(), pure), DomainError);

    for (int hk = 0; hk < 2; ++hk) {
        const FamilySpec spec(ProblemParams(12, 1), hk ? HFunction::constant(1.0) : HFunction::zero(), grid);
        const auto fam = build_family(spec);
        auto U = decay_normalized(fam.profile, spec.delta());
        for (double& v : U) v = -v;
        CHECK(std::abs(fit_decay(grid.nodes(), U).rate / spec.delta() - 1.0) <= (hk ? 0.02 : 0.005));
    }

    const FamilySpec crit(ProblemParams(10, 1), HFunction::zero(), grid);
    CHECK(fit_log_coefficient(grid.nodes(), build_family(crit).profile.u()).rate == doctest::Approx(1.0).epsilon(1e-10));
}
