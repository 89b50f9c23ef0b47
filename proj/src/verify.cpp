#include "khess/verify.hpp"

#include "khess/errors.hpp"
#include "khess/family.hpp"
#include "khess/stability.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace khess {

namespace {

struct RadialSample {
    Eigen::VectorXd x;
    RadialEigenpair pair;
    Eigen::MatrixXd hessian;
};

RadialSample random_radial(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> radius(0.1, 2.0);
    std::uniform_real_distribution<double> eig(-2.0, 2.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = normal(rng);
    const double r = radius(rng);
    x *= r / x.norm();
    RadialEigenpair pair{eig(rng), eig(rng), x.norm()};
    return {x, pair, radial_hessian(x, pair)};
}

std::string describe(const std::string& where) { return where.empty() ? std::string("ok") : "worst at " + where; }

CheckResult make(std::string name, double deviation, double tolerance, std::string where) {
    CheckResult c;
    c.name = std::move(name);
    c.max_deviation = deviation;
    c.tolerance = tolerance;
    c.pass = std::isfinite(deviation) && deviation <= tolerance;
    c.detail = describe(where);
    return c;
}

CheckResult radial_formula(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    double worst = 0.0;
    std::string where;
    for (int n = 1; n <= opt.n_max; ++n) {
        for (int k = 1; k <= n; ++k) {
            const ProblemParams p(n, k);
            for (int t = 0; t < 100; ++t) {
                const auto s = random_radial(n, rng);
                const double radial = sk_radial(s.pair.r, s.pair.lambda2 * s.pair.r, s.pair.lambda1, p);
                const double dev = std::abs(sk_full(s.hessian, k) - radial) / (1.0 + std::abs(radial));
                if (dev > worst) {
                    worst = dev;
                    where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
                }
            }
        }
    }
    return make("radial_formula", worst, 1e-10, where);
}

CheckResult skij_finite_difference(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed + 1);
    const double step = 1e-5;
    double worst = 0.0;
    std::string where;
    for (int n = 2; n <= std::min(6, opt.n_max); ++n) {
        for (int k = 1; k <= n; ++k) {
            const ProblemParams p(n, k);
            for (int t = 0; t < 50; ++t) {
                const auto s = random_radial(n, rng);
                const auto S = skij_matrix(s.x, s.pair, p).matrix;
                const double scale = 1.0 + S.cwiseAbs().maxCoeff();
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < n; ++j) {
                        Eigen::MatrixXd hp = s.hessian;
                        Eigen::MatrixXd hm = s.hessian;
                        hp(i, j) += step;
                        hm(i, j) -= step;
                        const double fd = (sk_full(hp, k) - sk_full(hm, k)) / (2.0 * step);
                        const double dev = std::abs(fd - S(i, j)) / scale;
                        if (dev > worst) {
                            worst = dev;
                            where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
                        }
                    }
                }
            }
            // Equal eigenvalues reduce to k c lambda^{k-1} I.
            const auto s = random_radial(n, rng);
            const RadialEigenpair equal{s.pair.lambda2, s.pair.lambda2, s.pair.r};
            const Eigen::MatrixXd expected = k * p.c_nk() * std::pow(equal.lambda2, k - 1) *
                                             Eigen::MatrixXd::Identity(n, n);
            const double dev = (skij_matrix(s.x, equal, p).matrix - expected).cwiseAbs().maxCoeff() /
                               (1.0 + expected.cwiseAbs().maxCoeff());
            if (dev > worst) {
                worst = dev;
                where = "equal eigenvalues n=" + std::to_string(n) + " k=" + std::to_string(k);
            }
        }
    }
    return make("skij_finite_difference", worst, 1e-6, where);
}

CheckResult euler_identity(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    const double fault = opt.inject == "euler" ? 1.0 + 1e-6 : 1.0;
    double worst = 0.0;
    std::string where;
    for (int n = 2; n <= opt.n_max; ++n) {
        for (int k = 1; k <= n; ++k) {
            const ProblemParams p(n, k);
            for (int t = 0; t < 100; ++t) {
                const auto s = random_radial(n, rng);
                const double trace = (skij_matrix(s.x, s.pair, p).matrix * s.hessian).trace() * fault;
                const double target = k * sk_full(s.hessian, k);
                const double dev = std::abs(trace - target) / (1.0 + std::abs(target));
                if (dev > worst) {
                    worst = dev;
                    where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
                }
            }
        }
    }
    return make("euler_identity", worst, 1e-10, where);
}

RadialGrid default_grid(const VerifyOptions& opt) { return RadialGrid::log_uniform(opt.grid_min, 0.1, opt.grid_nodes); }

CheckResult constant_g_solution(const VerifyOptions& opt) {
    const auto grid = default_grid(opt);
    const auto g = Nonlinearity::constant(1.0);
    double worst = 0.0;
    std::string where;
    for (auto [n, k] : {std::pair{3, 1}, std::pair{4, 2}, std::pair{6, 3}}) {
        const ProblemParams p(n, k);
        const auto result = shoot_solve(g, p, grid);
        const double amp = std::pow(1.0 / (n * p.c_nk()), 1.0 / k);
        double err = result.residual_max;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            err = std::max(err, std::abs(result.profile.u()[i] - amp * (grid[i] * grid[i] - 1.0) / 2.0));
        }
        for (const auto& b : default_bump_suite(grid.r_min(), 8)) {
            err = std::max(err, std::abs(weak_residual(result.profile, g, b.as_test_function(), p)));
        }
        if (err > worst) {
            worst = err;
            where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
        }
    }
    return make("constant_g_solution", worst, 1e-6, where);
}

struct FamilyCase {
    int n;
    int k;
    HFunction h;
    std::string label;
};

std::vector<FamilyCase> family_battery() {
    std::vector<FamilyCase> out;
    for (int k = 1; k <= 3; ++k) {
        for (int extra : {0, 1, 4}) {
            const int n = 2 * k + 8 + extra;
            out.push_back({n, k, HFunction::zero(), "h=0"});
            out.push_back({n, k, HFunction::constant(1.0), "h=1"});
            out.push_back({n, k, HFunction::power(1.0, 1.0), "h=r"});
        }
    }
    return out;
}

std::string case_name(const FamilyCase& c) {
    return "n=" + std::to_string(c.n) + " k=" + std::to_string(c.k) + " " + c.label;
}

CheckResult stability_identity(const VerifyOptions& opt) {
    const auto grid = default_grid(opt);
    const auto bumps = default_bump_suite(grid.r_min());
    double worst = 0.0;
    std::string where;
    auto scan = [&](const RadialProfile& profile, const Nonlinearity& g, const ProblemParams& p,
                    const std::string& label) {
        for (const auto& b : bumps) {
            const auto gap = q_ueta_identity_gap(profile, g, b.as_test_function(), p);
            const double dev = gap.gap / gap.scale;
            if (dev > worst) {
                worst = dev;
                where = label;
            }
        }
    };
    {
        const ProblemParams p(3, 1);
        const auto g = Nonlinearity::constant(1.0);
        scan(shoot_solve(g, p, grid).profile, g, p, "constant g n=3 k=1");
    }
    const std::vector<FamilyCase> cases = {{10, 1, HFunction::zero(), "h=0"},
                                           {13, 2, HFunction::constant(1.0), "h=1"},
                                           {18, 3, HFunction::power(1.0, 1.0), "h=r"}};
    for (const auto& c : cases) {
        const FamilySpec spec(ProblemParams(c.n, c.k), c.h, grid);
        const auto fam = build_family(spec);
        scan(fam.profile, reconstruct_g(spec, fam.profile), spec.params(), case_name(c));
    }
    return make("stability_identity", worst, 1e-5, where);
}

CheckResult family_semistability(const VerifyOptions& opt) {
    const auto grid = default_grid(opt);
    double worst = 0.0;
    std::string where;
    bool all_semistable = true;
    for (const auto& c : family_battery()) {
        const FamilySpec spec(ProblemParams(c.n, c.k), c.h, grid);
        const auto fam = build_family(spec);
        const auto report = min_rayleigh(fam.profile, reconstruct_g(spec, fam.profile), spec.params());
        if (report.verdict != Verdict::semistable) {
            all_semistable = false;
            where = case_name(c) + " verdict " + to_string(report.verdict);
        }
        for (std::size_t i = 0; i < grid.size(); i += std::max<std::size_t>(1, grid.size() / 100)) {
            const double r = grid[i];
            const double expected = family_sk(spec, r);
            const double got = sk_radial(r, fam.profile.du()[i], (*fam.profile.d2u())[i], spec.params());
            const double dev = std::abs(got - expected) / std::abs(expected);
            if (dev > worst) {
                worst = dev;
                if (all_semistable) where = case_name(c);
            }
        }
    }
    auto out = make("family_semistability", worst, 1e-6, where);
    out.pass = out.pass && all_semistable;
    return out;
}

CheckResult hardy_suite(const VerifyOptions& opt) {
    const auto grid = default_grid(opt);
    const auto bumps = random_bump_suite(grid.r_min(), 50, opt.seed);
    // Deviation: how far lhs falls below -10 quad_error, relative to scale; zero when fine.
    double worst = 0.0;
    std::string where;
    bool conditions = true;
    auto scan = [&](std::span<const double> V, std::span<const double> dV, double alpha, double beta,
                    const ProblemParams& p, const std::string& label) {
        for (const auto& b : bumps) {
            const auto res = hardy_check(grid, V, dV, alpha, beta, p, b.as_test_function());
            if (!res.conditions_ok) {
                conditions = false;
                where = label + " conditions";
            }
            const double shortfall = std::max(0.0, -(res.lhs + 10.0 * res.quad_error)) / res.scale;
            if (shortfall > worst) {
                worst = shortfall;
                where = label;
            }
        }
    };
    for (const auto& c : family_battery()) {
        const ProblemParams p(c.n, c.k);
        const FamilySpec spec(p, c.h, grid);
        const auto fam = build_family(spec);
        const auto [alpha, beta] = hardy_parameters(p);
        const double identity = std::abs(alpha * alpha / 4.0 - beta * beta - (2.0 * c.n - c.k - 1.0) / (c.k + 1.0));
        if (identity > 1e-12) {
            worst = std::max(worst, identity);
            where = case_name(c) + " alpha/beta identity";
        }
        scan(fam.V, fam.dV, alpha, beta, p, case_name(c));
    }
    for (int n : {3, 5, 10}) {
        const std::vector<double> V(grid.size(), 1.0);
        const std::vector<double> dV(grid.size(), 0.0);
        scan(V, dV, n - 2.0, 0.0, ProblemParams(n, 1), "V=1 n=" + std::to_string(n));
    }
    auto out = make("hardy_suite", worst, 0.0, where);
    out.pass = out.pass && conditions;
    return out;
}

CheckResult exponent_identities(const VerifyOptions&) {
    double worst = 0.0;
    std::string where;
    for (int k = 1; 2 * k + 8 <= 60; ++k) {
        for (int n = 2 * k + 8; n <= 60; ++n) {
            const auto e = estimate_exponents(ProblemParams(n, k));
            if (e.identity_gap > worst) {
                worst = e.identity_gap;
                where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
            }
        }
    }
    return make("exponent_identities", worst, 1e-12, where);
}

CheckResult decay_rates(const VerifyOptions& opt) {
    const auto grid = default_grid(opt);
    // Deviation normalized by the per-quantity tolerance, so 1 is the threshold.
    double worst = 0.0;
    std::string where;
    for (int k = 1; k <= 3; ++k) {
        for (int extra : {2, 4}) {
            for (int hk = 0; hk < 2; ++hk) {
                const ProblemParams p(2 * k + 8 + extra, k);
                const FamilySpec spec(p, hk == 0 ? HFunction::zero() : HFunction::constant(1.0), grid);
                const auto fam = build_family(spec);
                const double delta = spec.delta();
                auto U = decay_normalized(fam.profile, delta);
                for (double& v : U) v = -v;
                std::vector<double> d2(grid.size());
                for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = std::abs((*fam.profile.d2u())[i]);
                const double u_tol = hk == 0 ? 0.005 : 0.02;
                const double devs[] = {
                    std::abs(fit_decay(grid.nodes(), U).rate / delta - 1.0) / u_tol,
                    std::abs(fit_decay(grid.nodes(), fam.profile.du()).rate / (delta - 1.0) - 1.0) / 0.02,
                    std::abs(fit_decay(grid.nodes(), d2).rate / (delta - 2.0) - 1.0) / 0.02,
                };
                for (double d : devs) {
                    if (d > worst) {
                        worst = d;
                        where = "n=" + std::to_string(p.n()) + " k=" + std::to_string(k) + (hk ? " h=1" : " h=0");
                    }
                }
            }
        }
    }
    return make("decay_rates", worst, 1.0, where);
}

CheckResult regime_partition(const VerifyOptions&) {
    double worst = 0.0;
    std::string where;
    bool ok = true;
    for (int k = 1; k <= 5; ++k) {
        for (int n = std::max(2, k); n <= 40; ++n) {
            const ProblemParams p(n, k);
            const int crit = p.critical_dimension();
            const int cases = (n < crit) + (n == crit) + (n > crit);
            const double delta = delta_nk(n, k);
            const bool zero = std::abs(delta) <= 1e-12;
            if (cases != 1 || zero != (n == crit) || (n > crit && !(delta < 0.0)) || (n < crit && !(delta > 0.0))) {
                ok = false;
                where = "n=" + std::to_string(n) + " k=" + std::to_string(k);
            }
            if (n == crit) worst = std::max(worst, std::abs(delta));
        }
    }
    auto out = make("regime_partition", worst, 1e-12, where);
    out.pass = out.pass && ok;
    return out;
}

CheckResult eigen_oracle(const VerifyOptions& opt) {
    std::mt19937_64 rng(opt.seed + 2);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    std::uniform_real_distribution<double> mass(0.1, 2.0);
    double worst = 0.0;
    std::string where;
    for (std::size_t m = 1; m <= 12; ++m) {
        for (int t = 0; t < 20; ++t) {
            TridiagonalPair pair;
            pair.diag.resize(m);
            pair.mass.resize(m);
            pair.offdiag.resize(m - 1);
            for (auto& d : pair.diag) d = 3.0 * entry(rng);
            for (auto& o : pair.offdiag) o = entry(rng);
            for (auto& b : pair.mass) b = mass(rng);
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
            for (std::size_t i = 0; i < m; ++i) {
                A(i, i) = pair.diag[i];
                B(i, i) = pair.mass[i];
                if (i + 1 < m) A(i, i + 1) = A(i + 1, i) = pair.offdiag[i];
            }
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(A, B);
            const double expected = dense.eigenvalues().minCoeff();
            const double got = min_generalized_eig(pair).value;
            const double dev = std::abs(got - expected) / std::max(1.0, std::abs(expected));
            if (dev > worst) {
                worst = dev;
                where = "m=" + std::to_string(m);
            }
        }
    }
    return make("eigen_oracle", worst, 1e-10, where);
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& options) {
    if (options.n_max < 2 || options.n_max > 12) throw DomainError("--n-max must lie in 2..12");
    if (!options.inject.empty() && options.inject != "euler") throw DomainError("unknown fault '" + options.inject + "'");
    using Check = CheckResult (*)(const VerifyOptions&);
    const std::pair<const char*, Check> checks[] = {
        {"radial_formula", radial_formula},
        {"skij_finite_difference", skij_finite_difference},
        {"euler_identity", euler_identity},
        {"constant_g_solution", constant_g_solution},
        {"stability_identity", stability_identity},
        {"family_semistability", family_semistability},
        {"hardy_suite", hardy_suite},
        {"exponent_identities", exponent_identities},
        {"decay_rates", decay_rates},
        {"regime_partition", regime_partition},
        {"eigen_oracle", eigen_oracle},
    };
    std::vector<CheckResult> out;
    for (const auto& [name, fn] : checks) {
        try {
            out.push_back(fn(options));
        } catch (const std::exception& e) {
            CheckResult failed;
            failed.name = name;
            failed.pass = false;
            failed.max_deviation = std::numeric_limits<double>::quiet_NaN();
            failed.detail = std::string("exception: ") + e.what();
            out.push_back(std::move(failed));
        }
    }
    return out;
}

}  // namespace khess
