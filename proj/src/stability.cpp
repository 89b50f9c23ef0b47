#include "khess/stability.hpp"

#include "khess/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace khess {

// ---------------------------------------------------------------------------
// Bumps

double Bump::value(double r) const {
    const double t = (r - center) / width;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double Bump::derivative(double r) const {
    const double t = (r - center) / width;
    if (std::abs(t) >= 1.0) return 0.0;
    const double s = 1.0 - t * t;
    return std::exp(1.0 - 1.0 / s) * (-2.0 * t / (s * s)) / width;
}

TestFunction Bump::as_test_function() const {
    const Bump b = *this;
    return {[b](double r) { return b.value(r); }, [b](double r) { return b.derivative(r); }};
}

std::vector<Bump> default_bump_suite(double r_min, std::size_t count) {
    const double lo = std::max(1e-4, 100.0 * r_min);
    const double hi = 0.6;
    if (!(lo < hi)) throw DomainError("grid too coarse near the origin for the bump suite");
    std::vector<Bump> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(count - 1);
        const double c = lo * std::pow(hi / lo, t);
        out.push_back({c, 0.5 * c});
    }
    return out;
}

std::vector<Bump> random_bump_suite(double r_min, std::size_t count, std::uint64_t seed) {
    const double lo = std::max(1e-4, 100.0 * r_min);
    const double hi = 0.6;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_center(std::log(lo), std::log(hi));
    std::uniform_real_distribution<double> fraction(0.1, 0.6);
    std::vector<Bump> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double c = std::exp(log_center(rng));
        out.push_back({c, fraction(rng) * c});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadratic forms

namespace {

void sample(const TestFunction& f, const RadialGrid& grid, std::vector<double>& v, std::vector<double>& dv) {
    v.resize(grid.size());
    dv.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = f.value(grid[i]);
        dv[i] = f.derivative(grid[i]);
    }
}

// k c r^{n-k} (u')^{k-1}; zero where u' = 0 and k >= 2.
double stiffness_weight(double r, double du, const ProblemParams& p) {
    return p.k() * p.c_nk() * std::pow(r, p.n() - p.k()) * std::pow(du, p.k() - 1);
}

}  // namespace

double q_radial(const RadialProfile& profile, const Nonlinearity& g, std::span<const double> xi,
                std::span<const double> dxi, const ProblemParams& params) {
    const auto& grid = profile.grid();
    if (xi.size() != grid.size() || dxi.size() != grid.size()) throw DomainError("test function samples do not match the grid");
    std::vector<double> integrand(grid.size());
    const int n = params.n();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        integrand[i] = stiffness_weight(r, profile.du()[i], params) * dxi[i] * dxi[i] +
                       g.gprime(profile.u()[i]) * xi[i] * xi[i] * std::pow(r, n - 1);
    }
    return integrate(integrand, grid);
}

double q_radial(const RadialProfile& profile, const Nonlinearity& g, const TestFunction& xi,
                const ProblemParams& params) {
    std::vector<double> v;
    std::vector<double> dv;
    sample(xi, profile.grid(), v, dv);
    return q_radial(profile, g, v, dv, params);
}

namespace {

struct GfreeParts {
    double value;
    double magnitude;
};

GfreeParts gfree_parts(const RadialProfile& profile, std::span<const double> eta, std::span<const double> deta,
                       const ProblemParams& params) {
    const auto& grid = profile.grid();
    if (eta.size() != grid.size() || deta.size() != grid.size()) throw DomainError("test function samples do not match the grid");
    const int n = params.n();
    const int k = params.k();
    const double beta = static_cast<double>(k - 1) / (k + 1);
    const double gamma = static_cast<double>(2 * n - k - 1) / (k + 1);
    std::vector<double> signed_part(grid.size());
    std::vector<double> abs_part(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        const double weight = std::pow(profile.du()[i] / r, k + 1) * std::pow(r, n - 1);
        const double kinetic = r * r * deta[i] * deta[i];
        const double cross = beta * r * 2.0 * eta[i] * deta[i];  // (x, grad eta^2) = r (eta^2)'
        const double potential = gamma * eta[i] * eta[i];
        signed_part[i] = weight * (kinetic + cross - potential);
        abs_part[i] = weight * (kinetic + std::abs(cross) + potential);
    }
    return {integrate(signed_part, grid), integrate(abs_part, grid)};
}

}  // namespace

double q_gfree(const RadialProfile& profile, std::span<const double> eta, std::span<const double> deta,
               const ProblemParams& params) {
    return gfree_parts(profile, eta, deta, params).value;
}

double q_gfree(const RadialProfile& profile, const TestFunction& eta, const ProblemParams& params) {
    std::vector<double> v;
    std::vector<double> dv;
    sample(eta, profile.grid(), v, dv);
    return q_gfree(profile, v, dv, params);
}

IdentityGap q_ueta_identity_gap(const RadialProfile& profile, const Nonlinearity& g, const TestFunction& eta,
                                const ProblemParams& params) {
    if (!profile.d2u()) throw DomainError("identity check needs u'' in the profile");
    const auto& grid = profile.grid();
    std::vector<double> e;
    std::vector<double> de;
    sample(eta, grid, e, de);
    std::vector<double> xi(grid.size());
    std::vector<double> dxi(grid.size());
    const auto& d2u = *profile.d2u();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        xi[i] = profile.du()[i] * e[i];
        dxi[i] = d2u[i] * e[i] + profile.du()[i] * de[i];
    }
    const double kc = params.k() * params.c_nk();
    const auto parts = gfree_parts(profile, e, de, params);
    IdentityGap out;
    out.lhs = q_radial(profile, g, xi, dxi, params);
    out.rhs = kc * parts.value;
    out.gap = std::abs(out.lhs - out.rhs);
    out.scale = kc * parts.magnitude;
    return out;
}

// ---------------------------------------------------------------------------
// Discrete Rayleigh quotient

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::semistable:
            return "semistable";
        case Verdict::unstable:
            return "unstable";
        case Verdict::inconclusive:
            break;
    }
    return "inconclusive";
}

StabilityPencil assemble_stability_pencil(const RadialProfile& profile, const Nonlinearity& g,
                                          const ProblemParams& params) {
    const auto& grid = profile.grid();
    const std::size_t nodes = grid.size();
    const std::size_t m = nodes - 2;
    const int n = params.n();

    std::vector<double> a(nodes);
    StabilityPencil out;
    for (std::size_t i = 0; i < nodes; ++i) {
        if (profile.du()[i] < 0.0) throw DomainError("stability analysis requires u' >= 0");
        a[i] = stiffness_weight(grid[i], profile.du()[i], params);
        if (params.k() >= 2 && profile.du()[i] == 0.0 && i > 0 && i + 1 < nodes) ++out.degenerate_nodes;
    }

    auto& pair = out.pair;
    pair.diag.assign(m, 0.0);
    pair.offdiag.assign(m - 1, 0.0);
    pair.mass.assign(m, 0.0);
    // Element e = [r_e, r_{e+1}] couples interior unknowns e-1 and e.
    for (std::size_t e = 0; e + 1 < nodes; ++e) {
        const double h = grid[e + 1] - grid[e];
        const double k_e = 0.5 * (a[e] + a[e + 1]) / h;
        if (e >= 1) pair.diag[e - 1] += k_e;
        if (e + 1 <= m) pair.diag[e] += k_e;
        if (e >= 1 && e + 1 <= m) pair.offdiag[e - 1] -= k_e;
    }
    for (std::size_t i = 1; i + 1 < nodes; ++i) {
        const double r = grid[i];
        const double hbar = 0.5 * (grid[i + 1] - grid[i - 1]);
        const double r_pow = std::pow(r, n - 1);
        pair.diag[i - 1] += g.gprime(profile.u()[i]) * r_pow * hbar;
        pair.mass[i - 1] = std::max(r_pow * hbar, std::numeric_limits<double>::min());
    }
    return out;
}

StabilityReport min_rayleigh(const RadialProfile& profile, const Nonlinearity& g, const ProblemParams& params,
                             double relative_threshold) {
    if (!(relative_threshold > 0.0)) throw DomainError("threshold must be positive");
    const auto pencil = assemble_stability_pencil(profile, g, params);
    const auto& pair = pencil.pair;
    const std::size_t m = pair.size();

    StabilityReport report;
    report.degenerate_nodes = pencil.degenerate_nodes;
    double max_diag = 0.0;
    for (double d : pair.diag) max_diag = std::max(max_diag, std::abs(d));
    report.threshold = relative_threshold * max_diag;
    report.witness.assign(profile.size(), 0.0);
    if (pencil.degenerate_nodes == m) {
        report.verdict = Verdict::inconclusive;
        return report;
    }

    GeneralizedEigenpair eig;
    try {
        eig = min_generalized_eig(pair, 1e-10);
    } catch (const ConvergenceError& e) {
        report.min_eig = e.best_value;
        report.verdict = Verdict::inconclusive;
        return report;
    }
    report.min_eig = eig.value;
    for (std::size_t i = 0; i < m; ++i) report.witness[i + 1] = eig.vector[i];

    double energy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double av = pair.diag[i] * eig.vector[i];
        if (i > 0) av += pair.offdiag[i - 1] * eig.vector[i - 1];
        if (i + 1 < m) av += pair.offdiag[i] * eig.vector[i + 1];
        energy += eig.vector[i] * av;
    }
    report.witness_energy = energy;

    if (report.min_eig >= -report.threshold) {
        report.verdict = Verdict::semistable;
    } else {
        report.verdict = energy < 0.0 ? Verdict::unstable : Verdict::inconclusive;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Cutoff family

CutoffFamily::CutoffFamily(double epsilon, int sigma, int n) : epsilon_(epsilon), sigma_(sigma), n_(n) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("cutoff epsilon must lie in (0,1)");
    if (sigma < 1) throw DomainError("cutoff sigma must be a positive integer");
    if (n < 2 * sigma) throw DomainError("cutoff requires n >= 2 sigma");
}

double cutoff_profile(double t) { return 2.0 * (1.0 - t) * (1.0 - t) * (2.5 - t); }

double cutoff_profile_derivative(double t) { return -6.0 * (1.0 - t) * (2.0 - t); }

std::pair<double, double> cutoff_eval(const CutoffFamily& family, double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("cutoff is defined on [0,1]");
    const double eps = family.epsilon();
    if (family.logarithmic()) {
        if (r < eps * eps) return {0.0, 0.0};
        if (r >= eps) return {1.0, 0.0};
        const double log_eps = std::log(eps);
        const double t = std::log(r) / log_eps;
        return {1.0 - cutoff_profile(t), -cutoff_profile_derivative(t) / (r * log_eps)};
    }
    if (r < eps) return {0.0, 0.0};
    if (r >= 2.0 * eps) return {1.0, 0.0};
    const double t = r / eps;
    return {cutoff_profile(t), cutoff_profile_derivative(t) / eps};
}

// ---------------------------------------------------------------------------
// Hardy check

namespace {

double trapezoid_stride(std::span<const double> f, const RadialGrid& grid, std::size_t stride) {
    double sum = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = stride; i < grid.size(); i += stride) {
        sum += 0.5 * (grid[i] - grid[prev]) * (f[i] + f[prev]);
        prev = i;
    }
    if (prev != grid.size() - 1) {
        const std::size_t last = grid.size() - 1;
        sum += 0.5 * (grid[last] - grid[prev]) * (f[last] + f[prev]);
    }
    return sum;
}

double interpolate(std::span<const double> values, const RadialGrid& grid, double r) {
    const std::size_t j = grid.lower_index(r);
    if (j >= grid.size()) return values.back();
    if (grid[j] == r || j == 0) return values[j];
    const double t = (r - grid[j - 1]) / (grid[j] - grid[j - 1]);
    return values[j - 1] + t * (values[j] - values[j - 1]);
}

}  // namespace

HardyResult hardy_check(const RadialGrid& grid, std::span<const double> V, std::span<const double> dV, double alpha,
                        double beta, const ProblemParams& params, const TestFunction& eta) {
    if (V.size() != grid.size()) throw DomainError("weight samples do not match the grid");
    std::vector<double> derivative;
    // A differenced V' carries O(h^2) error, so borderline weights need a looser band.
    const double rel_slack = dV.empty() ? 1e-4 : 1e-10;
    if (dV.empty()) {
        derivative = nonuniform_gradient(V, grid.nodes());
        dV = derivative;
    }
    if (dV.size() != grid.size()) throw DomainError("weight derivative samples do not match the grid");
    const int n = params.n();

    HardyResult out;
    out.growth_condition_ok = true;
    const double shift = n - 2.0 * beta - alpha - 2.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (V[i] < 0.0) out.growth_condition_ok = false;
        const double rv = grid[i] * dV[i];
        const double value = alpha * (rv + shift * V[i]);
        const double slack = rel_slack * std::abs(alpha) * (std::abs(rv) + std::abs(shift * V[i]));
        if (value < -slack) out.growth_condition_ok = false;
    }

    // r^{n-2} V must fall by at least 10x per decade over the innermost three decades.
    const double r0 = grid.r_min();
    out.limit_condition_ok = false;
    if (1000.0 * r0 <= 1.0) {
        out.limit_condition_ok = true;
        double prev = std::pow(r0, n - 2) * interpolate(V, grid, r0);
        for (int j = 1; j <= 3; ++j) {
            const double r = r0 * std::pow(10.0, j);
            const double cur = std::pow(r, n - 2) * interpolate(V, grid, r);
            if (prev == 0.0 && cur >= 0.0) {
                prev = cur;
                continue;
            }
            if (!(cur >= 10.0 * (1.0 - 1e-6) * prev)) out.limit_condition_ok = false;
            prev = cur;
        }
    }
    out.conditions_ok = out.growth_condition_ok && out.limit_condition_ok;

    const double quarter_alpha2 = 0.25 * alpha * alpha;
    std::vector<double> signed_part(grid.size());
    std::vector<double> abs_part(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        const double e = eta.value(r);
        const double de = eta.derivative(r);
        const double weight = std::pow(r, n - 3) * V[i];
        const double grad = r * de + beta * e;
        signed_part[i] = weight * (grad * grad - quarter_alpha2 * e * e);
        abs_part[i] = weight * (grad * grad + quarter_alpha2 * e * e);
    }
    out.lhs = integrate(signed_part, grid);
    out.scale = integrate(abs_part, grid);
    out.quad_error = std::abs(out.lhs - trapezoid_stride(signed_part, grid, 2)) / 3.0;
    return out;
}

}  // namespace khess
