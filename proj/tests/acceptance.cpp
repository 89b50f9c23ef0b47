// Acceptance criteria 1-10; one PASS/FAIL line each, nonzero exit on any failure.
#include "khess/family.hpp"
#include "khess/hessian.hpp"
#include "khess/numerics.hpp"
#include "khess/radial.hpp"
#include "khess/stability.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace khess;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Sample {
    Eigen::VectorXd x;
    RadialEigenpair pair;
    Eigen::MatrixXd h;
};

Sample random_sample(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> radius(0.05, 3.0), eig(-3.0, 3.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = normal(rng);
    x *= radius(rng) / x.norm();
    const RadialEigenpair pair{eig(rng), eig(rng), x.norm()};
    return {x, pair, radial_hessian(x, pair)};
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const RadialGrid& grid() {
    static const RadialGrid g = RadialGrid::log_uniform(1e-8, 0.1, 4096);
    return g;
}

struct Case {
    int n, k;
    HFunction h;
};

std::vector<Case> battery() {
    std::vector<Case> out;
    for (int k = 1; k <= 3; ++k)
        for (int extra : {0, 1, 4})
            for (int hk = 0; hk < 3; ++hk)
                out.push_back({2 * k + 8 + extra, k,
                               hk == 0 ? HFunction::zero() : hk == 1 ? HFunction::constant(1.0) : HFunction::power(1.0, 1.0)});
    return out;
}

Outcome radial_formula() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(42);
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n)
        for (int k = 1; k <= n; ++k)
            for (int t = 0; t < 100; ++t) {
                const auto s = random_sample(n, rng);
                const double rad = sk_radial(s.pair.r, s.pair.lambda2 * s.pair.r, s.pair.lambda1, ProblemParams(n, k));
                worst = std::max(worst, std::abs(sk_full(s.h, k) - rad) / (1.0 + std::abs(rad)));
            }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && secs < 30.0, fmt("max rel dev %.2e, %.1f s", worst, secs)};
}

Outcome skij_closed_form() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(43);
    double worst = 0.0, equal_worst = 0.0;
    const double step = 1e-5;
    for (int n = 2; n <= 6; ++n)
        for (int k = 1; k <= n; ++k) {
            const ProblemParams p(n, k);
            for (int t = 0; t < 50; ++t) {
                const auto s = random_sample(n, rng);
                const Eigen::MatrixXd S = skij_matrix(s.x, s.pair, p).matrix;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        Eigen::MatrixXd hp = s.h, hm = s.h;
                        hp(i, j) += step;
                        hm(i, j) -= step;
                        const double fd = (sk_full(hp, k) - sk_full(hm, k)) / (2 * step);
                        worst = std::max(worst, std::abs(fd - S(i, j)) / (1.0 + std::abs(S(i, j))));
                    }
            }
            const auto s = random_sample(n, rng);
            const double l = s.pair.lambda2;
            const Eigen::MatrixXd expect = k * p.c_nk() * std::pow(l, k - 1) * Eigen::MatrixXd::Identity(n, n);
            const Eigen::MatrixXd got = skij_matrix(s.x, {l, l, s.pair.r}, p).matrix;
            equal_worst = std::max(equal_worst, (got - expect).cwiseAbs().maxCoeff() / (1.0 + expect.cwiseAbs().maxCoeff()));
        }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && equal_worst <= 1e-12 && secs < 30.0,
            fmt("fd rel dev %.2e, equal-eigenvalue dev %.2e", worst, equal_worst) + fmt(", %.1f s", secs)};
}

Outcome euler_identity() {
    std::mt19937_64 rng(43);
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n)
        for (int k = 1; k <= n; ++k)
            for (int t = 0; t < 50; ++t) {
                const auto s = random_sample(n, rng);
                const double tr = (skij_matrix(s.x, s.pair, ProblemParams(n, k)).matrix * s.h).trace();
                const double target = k * sk_full(s.h, k);
                worst = std::max(worst, std::abs(tr - target) / std::max(1.0, std::abs(target)));
            }
    return {worst <= 1e-10, fmt("max rel dev %.2e", worst)};
}

Outcome constant_g() {
    const auto t0 = std::chrono::steady_clock::now();
    double err = 0.0, integral = 0.0, weak = 0.0;
    for (auto [n, k, c] : {std::tuple{3, 1, 1.0}, std::tuple{4, 2, 2.0}, std::tuple{6, 3, 0.5}}) {
        const ProblemParams p(n, k);
        const auto g = Nonlinearity::constant(c);
        const auto res = shoot_solve(g, p, grid());
        const double amp = std::pow(c / (n * p.c_nk()), 1.0 / k);
        for (std::size_t i = 0; i < grid().size(); ++i)
            err = std::max(err, std::abs(res.profile.u()[i] - amp * (grid()[i] * grid()[i] - 1.0) / 2.0));
        integral = std::max(integral, integral_residual(res.profile, g, p).max_abs);
        for (const auto& b : default_bump_suite(grid().r_min(), 20))
            weak = std::max(weak, std::abs(weak_residual(res.profile, g, b.as_test_function(), p)));
    }
    const double secs = seconds_since(t0);
    return {err <= 1e-6 && integral <= 1e-6 && weak <= 1e-6 && secs < 10.0,
            fmt("u error %.2e, integral residual %.2e", err, integral) + fmt(", weak residual %.2e, %.1f s", weak, secs)};
}

Outcome identity_gap() {
    const auto bumps = default_bump_suite(grid().r_min(), 20);
    double worst = 0.0;
    auto scan = [&](const RadialProfile& prof, const Nonlinearity& g, const ProblemParams& p) {
        for (const auto& b : bumps) {
            const auto gap = q_ueta_identity_gap(prof, g, b.as_test_function(), p);
            worst = std::max(worst, gap.gap / gap.scale);
        }
    };
    const ProblemParams p(4, 2);
    const auto g = Nonlinearity::constant(1.0);
    scan(shoot_solve(g, p, grid()).profile, g, p);
    for (const auto& c : {Case{10, 1, HFunction::constant(1.0)}, Case{12, 2, HFunction::zero()},
                          Case{17, 3, HFunction::power(1.0, 1.0)}}) {
        const FamilySpec spec(ProblemParams(c.n, c.k), c.h, grid());
        const auto fam = build_family(spec);
        scan(fam.profile, reconstruct_g(spec, fam.profile), spec.params());
    }
    return {worst <= 1e-5, fmt("max gap/scale %.2e", worst)};
}

Outcome family_semistability() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double sk_dev = 0.0, min_ratio = INFINITY;
    for (const auto& c : battery()) {
        const FamilySpec spec(ProblemParams(c.n, c.k), c.h, grid());
        const auto fam = build_family(spec);
        const auto rep = min_rayleigh(fam.profile, reconstruct_g(spec, fam.profile), spec.params());
        ok = ok && rep.verdict == Verdict::semistable && rep.min_eig >= -rep.threshold;
        min_ratio = std::min(min_ratio, rep.min_eig / rep.threshold);
        for (std::size_t i = 0; i < grid().size(); ++i) {
            const double want = family_sk(spec, grid()[i]);
            const double got = sk_radial(grid()[i], fam.profile.du()[i], (*fam.profile.d2u())[i], spec.params());
            sk_dev = std::max(sk_dev, std::abs(got - want) / std::abs(want));
        }
    }
    const double secs = seconds_since(t0);
    return {ok && sk_dev <= 1e-6 && secs < 120.0,
            fmt("27 specs, min min_eig/threshold %.3g, sk rel dev %.2e", min_ratio, sk_dev) + fmt(", %.1f s", secs)};
}

Outcome hardy() {
    const auto bumps = random_bump_suite(grid().r_min(), 50, 42);
    bool ok = true;
    double identity = 0.0, worst_margin = INFINITY;
    auto scan = [&](std::span<const double> V, std::span<const double> dV, double a, double b, const ProblemParams& p) {
        for (const auto& bump : bumps) {
            const auto res = hardy_check(grid(), V, dV, a, b, p, bump.as_test_function());
            ok = ok && res.conditions_ok && res.lhs >= -10.0 * res.quad_error;
            worst_margin = std::min(worst_margin, res.lhs / res.scale);
        }
    };
    for (const auto& c : battery()) {
        const ProblemParams p(c.n, c.k);
        const auto fam = build_family(FamilySpec(p, c.h, grid()));
        const auto [a, b] = hardy_parameters(p);
        identity = std::max(identity, std::abs(a * a / 4.0 - b * b - (2.0 * c.n - c.k - 1.0) / (c.k + 1.0)));
        scan(fam.V, fam.dV, a, b, p);
    }
    const std::vector<double> one(grid().size(), 1.0), zero(grid().size(), 0.0);
    for (int n : {3, 5, 10}) scan(one, zero, n - 2.0, 0.0, ProblemParams(n, 1));
    return {ok && identity <= 1e-12, fmt("min lhs/scale %.3g, alpha/beta identity %.2e", worst_margin, identity)};
}

Outcome decay_rates() {
    double u_dev[2] = {0.0, 0.0}, d_dev = 0.0, gap = 0.0;
    for (int k = 1; k <= 3; ++k)
        for (int extra : {1, 2, 4})
            for (int hk = 0; hk < 2; ++hk) {
                const FamilySpec spec(ProblemParams(2 * k + 8 + extra, k),
                                      hk ? HFunction::constant(1.0) : HFunction::zero(), grid());
                const auto fam = build_family(spec);
                const double d = spec.delta();
                auto U = decay_normalized(fam.profile, d);
                for (double& v : U) v = -v;
                std::vector<double> d2(grid().size());
                for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = std::abs((*fam.profile.d2u())[i]);
                u_dev[hk] = std::max(u_dev[hk], std::abs(fit_decay(grid().nodes(), U).rate / d - 1.0));
                d_dev = std::max(d_dev, std::abs(fit_decay(grid().nodes(), fam.profile.du()).rate / (d - 1.0) - 1.0));
                d_dev = std::max(d_dev, std::abs(fit_decay(grid().nodes(), d2).rate / (d - 2.0) - 1.0));
            }
    for (int k = 1; 2 * k + 8 <= 60; ++k)
        for (int n = 2 * k + 8; n <= 60; ++n) gap = std::max(gap, estimate_exponents(ProblemParams(n, k)).identity_gap);
    return {u_dev[0] <= 0.005 && u_dev[1] <= 0.02 && d_dev <= 0.02 && gap <= 1e-12,
            fmt("u rel dev h=0 %.2e, h=1 %.2e", u_dev[0], u_dev[1]) + fmt(", u'/u'' %.2e, exponent gap %.2e", d_dev, gap)};
}

Outcome regime_partition() {
    bool ok = true;
    double crit_delta = 0.0, off_crit = INFINITY;
    for (int k = 1; k <= 5; ++k)
        for (int n = std::max(2, k); n <= 40; ++n) {
            const ProblemParams p(n, k);
            const Regime r = classify_regime(p);
            const int hits = (r == Regime::bounded) + (r == Regime::logarithmic) + (r == Regime::power);
            const bool expected = n < 2 * k + 8 ? r == Regime::bounded : n == 2 * k + 8 ? r == Regime::logarithmic
                                                                                        : r == Regime::power;
            const double d = delta_nk(n, k);
            ok = ok && hits == 1 && expected && ((std::abs(d) <= 1e-12) == (n == 2 * k + 8));
            if (n == 2 * k + 8) crit_delta = std::max(crit_delta, std::abs(d));
            else off_crit = std::min(off_crit, std::abs(d));
        }
    return {ok, fmt("max |delta| at n=2k+8 %.2e, min |delta| elsewhere %.3g", crit_delta, off_crit)};
}

Outcome eigen_oracle() {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> e(-2.0, 2.0), m(0.05, 3.0);
    double worst = 0.0;
    for (std::size_t size = 1; size <= 12; ++size)
        for (int t = 0; t < 50; ++t) {
            TridiagonalPair pair;
            pair.diag.resize(size);
            pair.mass.resize(size);
            pair.offdiag.resize(size - 1);
            for (auto& v : pair.diag) v = e(rng);
            for (auto& v : pair.offdiag) v = e(rng);
            for (auto& v : pair.mass) v = m(rng);
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size, size), B = A;
            for (std::size_t i = 0; i < size; ++i) {
                A(i, i) = pair.diag[i];
                B(i, i) = pair.mass[i];
                if (i + 1 < size) A(i, i + 1) = A(i + 1, i) = pair.offdiag[i];
            }
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(A, B);
            const double want = dense.eigenvalues().minCoeff();
            worst = std::max(worst, std::abs(min_generalized_eig(pair).value - want) / std::max(1.0, std::abs(want)));
        }
    return {worst <= 1e-10, fmt("max rel dev %.2e over 600 pencils", worst)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"radial formula vs principal minors", radial_formula},
        {"S^ij closed form vs finite differences", skij_closed_form},
        {"Euler identity", euler_identity},
        {"constant-g solution", constant_g},
        {"u'eta stability identity", identity_gap},
        {"family semistability battery", family_semistability},
        {"Hardy inequality", hardy},
        {"decay rates and exponent identities", decay_rates},
        {"regime partition", regime_partition},
        {"tridiagonal eigensolver vs dense", eigen_oracle},
    };
    int failures = 0;
    int index = 1;
    for (const auto& [name, fn] : criteria) {
        Outcome o{false, ""};
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d %s: %s (%s)\n", index++, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
