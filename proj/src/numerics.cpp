#include "khess/numerics.hpp"

#include "khess/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>

namespace khess {

namespace {

std::string node_message(const char* what, std::size_t i, double r) {
    std::ostringstream os;
    os << what << " at node " << i << " (r=" << r << ")";
    return os.str();
}

void check_sizes(std::span<const double> samples, const RadialGrid& grid) {
    if (samples.size() != grid.size()) {
        throw DomainError("sample count " + std::to_string(samples.size()) + " does not match grid size " +
                          std::to_string(grid.size()));
    }
}

void check_finite(std::span<const double> samples, const RadialGrid& grid) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) throw DomainError(node_message("non-finite sample", i, grid[i]));
    }
}

// expm1(q L) / q, continuous at q = 0.
double growth(double q, double log_ratio) {
    if (q == 0.0) return log_ratio;
    return std::expm1(q * log_ratio) / q;
}

}  // namespace

// ---------------------------------------------------------------------------
// RadialGrid

RadialGrid RadialGrid::from_nodes(std::vector<double> nodes) {
    if (nodes.size() < kMinNodes) {
        throw DomainError("radial grid needs at least " + std::to_string(kMinNodes) + " nodes, got " +
                          std::to_string(nodes.size()));
    }
    if (!(nodes.front() >= kMinRadius)) {
        throw DomainError("radial grid first node must be >= 1e-12");
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!(nodes[i] > nodes[i - 1])) throw DomainError(node_message("grid not strictly increasing", i, nodes[i]));
    }
    if (nodes.back() != 1.0) throw DomainError("radial grid must end at r = 1");
    return RadialGrid(std::move(nodes));
}

RadialGrid RadialGrid::log_uniform(double r_min, double r_join, std::size_t nodes) {
    if (nodes < kMinNodes) throw DomainError("radial grid needs at least 16 nodes");
    if (!(r_min >= kMinRadius) || !(r_min < 1.0)) throw DomainError("r_min must lie in [1e-12, 1)");
    if (r_min >= r_join || r_join >= 1.0) return uniform(r_min, nodes);

    // Match the geometric spacing at r_join with the uniform spacing.
    const std::size_t intervals = nodes - 1;
    const double log_span = std::log(r_join / r_min);
    const double uniform_span = 1.0 - r_join;
    auto n_log = static_cast<std::size_t>(
        std::llround(static_cast<double>(intervals) * r_join * log_span / (r_join * log_span + uniform_span)));
    n_log = std::clamp<std::size_t>(n_log, 4, intervals - 4);
    const std::size_t n_uni = intervals - n_log;

    std::vector<double> r(nodes);
    for (std::size_t i = 0; i <= n_log; ++i) {
        r[i] = r_min * std::exp(log_span * static_cast<double>(i) / static_cast<double>(n_log));
    }
    r[n_log] = r_join;
    for (std::size_t j = 1; j <= n_uni; ++j) {
        r[n_log + j] = r_join + uniform_span * static_cast<double>(j) / static_cast<double>(n_uni);
    }
    r.back() = 1.0;
    return from_nodes(std::move(r));
}

RadialGrid RadialGrid::uniform(double a, std::size_t nodes) {
    if (nodes < kMinNodes) throw DomainError("radial grid needs at least 16 nodes");
    std::vector<double> r(nodes);
    const double span = 1.0 - a;
    for (std::size_t i = 0; i < nodes; ++i) {
        r[i] = a + span * static_cast<double>(i) / static_cast<double>(nodes - 1);
    }
    r.back() = 1.0;
    return from_nodes(std::move(r));
}

std::size_t RadialGrid::lower_index(double r) const noexcept {
    return static_cast<std::size_t>(std::lower_bound(nodes_.begin(), nodes_.end(), r) - nodes_.begin());
}

// ---------------------------------------------------------------------------
// Quadrature

double integrate(std::span<const double> samples, const RadialGrid& grid) {
    check_sizes(samples, grid);
    check_finite(samples, grid);
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        sum += 0.5 * (grid[i] - grid[i - 1]) * (samples[i] + samples[i - 1]);
    }
    return sum;
}

double integrate_range(std::span<const double> samples, const RadialGrid& grid, double a, double b) {
    check_sizes(samples, grid);
    check_finite(samples, grid);
    if (!(a >= grid.r_min() && a <= b && b <= 1.0)) throw DomainError("integration range outside the grid");
    if (a == b) return 0.0;

    auto value_at = [&](double r) {
        std::size_t j = grid.lower_index(r);
        if (j < grid.size() && grid[j] == r) return samples[j];
        const double t = (r - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return samples[j - 1] + t * (samples[j] - samples[j - 1]);
    };

    // Collect abscissae a < nodes < b.
    double sum = 0.0;
    double prev_r = a;
    double prev_f = value_at(a);
    for (std::size_t i = grid.lower_index(a); i < grid.size() && grid[i] < b; ++i) {
        if (grid[i] <= a) continue;
        sum += 0.5 * (grid[i] - prev_r) * (samples[i] + prev_f);
        prev_r = grid[i];
        prev_f = samples[i];
    }
    sum += 0.5 * (b - prev_r) * (value_at(b) + prev_f);
    return sum;
}

std::vector<double> cumulative_trapezoid(std::span<const double> samples, const RadialGrid& grid, double start) {
    check_sizes(samples, grid);
    check_finite(samples, grid);
    std::vector<double> out(grid.size());
    out[0] = start;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (samples[i] + samples[i - 1]);
    }
    return out;
}

PowerMoments power_moments(double a, double b, double p) {
    const double log_ratio = std::log1p((b - a) / a);
    const double m0 = std::pow(a, p + 1.0) * growth(p + 1.0, log_ratio);
    const double m1 = std::pow(a, p + 2.0) * (growth(p + 2.0, log_ratio) - growth(p + 1.0, log_ratio));
    return {m0, m1};
}

std::vector<double> cumulative_power_weighted(std::span<const double> samples, double power, const RadialGrid& grid,
                                              double start) {
    check_sizes(samples, grid);
    check_finite(samples, grid);
    std::vector<double> out(grid.size());
    out[0] = start;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double a = grid[i - 1];
        const double b = grid[i];
        const auto m = power_moments(a, b, power);
        out[i] = out[i - 1] + samples[i - 1] * m.m0 + (samples[i] - samples[i - 1]) * m.m1 / (b - a);
    }
    return out;
}

std::vector<double> nonuniform_gradient(std::span<const double> values, std::span<const double> x) {
    const std::size_t m = values.size();
    if (m != x.size() || m < 2) throw DomainError("gradient needs matching arrays with at least two points");
    std::vector<double> d(m);
    if (m == 2) {
        d[0] = d[1] = (values[1] - values[0]) / (x[1] - x[0]);
        return d;
    }
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double h1 = x[i] - x[i - 1];
        const double h2 = x[i + 1] - x[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * values[i - 1] + (h2 - h1) / (h1 * h2) * values[i] +
               h1 / (h2 * (h1 + h2)) * values[i + 1];
    }
    {
        const double h1 = x[1] - x[0];
        const double h2 = x[2] - x[1];
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * values[0] + (h1 + h2) / (h1 * h2) * values[1] -
               h1 / (h2 * (h1 + h2)) * values[2];
    }
    {
        const double h1 = x[m - 2] - x[m - 3];
        const double h2 = x[m - 1] - x[m - 2];
        d[m - 1] = h2 / (h1 * (h1 + h2)) * values[m - 3] - (h1 + h2) / (h1 * h2) * values[m - 2] +
                   (2.0 * h2 + h1) / (h2 * (h1 + h2)) * values[m - 1];
    }
    return d;
}

// ---------------------------------------------------------------------------
// Tridiagonal pencil

namespace {

// C = B^{-1/2} A B^{-1/2}
struct ScaledTridiagonal {
    std::vector<double> d;
    std::vector<double> e;
    std::vector<double> e2;
    double pivmin = 0.0;
};

ScaledTridiagonal scale_pencil(const TridiagonalPair& pair) {
    const std::size_t m = pair.size();
    if (m == 0) throw DomainError("empty pencil");
    if (pair.mass.size() != m || pair.offdiag.size() + 1 != m) throw DomainError("pencil arrays have inconsistent sizes");
    ScaledTridiagonal c;
    c.d.resize(m);
    c.e.resize(m - 1);
    c.e2.resize(m - 1);
    double max_e2 = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(pair.mass[i] > 0.0) || !std::isfinite(pair.mass[i])) {
            throw DomainError("mass entry " + std::to_string(i) + " is not positive");
        }
        if (!std::isfinite(pair.diag[i])) throw DomainError("non-finite stiffness entry " + std::to_string(i));
        c.d[i] = pair.diag[i] / pair.mass[i];
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
        c.e[i] = pair.offdiag[i] / std::sqrt(pair.mass[i] * pair.mass[i + 1]);
        c.e2[i] = c.e[i] * c.e[i];
        max_e2 = std::max(max_e2, c.e2[i]);
    }
    c.pivmin = std::numeric_limits<double>::min() * max_e2;
    return c;
}

std::size_t count_below(const ScaledTridiagonal& c, double x) {
    std::size_t count = 0;
    double q = c.d[0] - x;
    if (std::abs(q) < c.pivmin) q = -c.pivmin;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < c.d.size(); ++i) {
        q = (c.d[i] - x) - c.e2[i - 1] / q;
        if (std::abs(q) < c.pivmin) q = -c.pivmin;
        if (q < 0.0) ++count;
    }
    return count;
}

// Solves (C - shift I) y = rhs by Gaussian elimination with partial pivoting.
std::vector<double> solve_shifted(const ScaledTridiagonal& c, double shift, std::vector<double> rhs) {
    const std::size_t m = c.d.size();
    if (m == 1) {
        double piv = c.d[0] - shift;
        if (piv == 0.0) piv = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c.d[0]));
        rhs[0] /= piv;
        return rhs;
    }
    // Rows stored as (sub, diag, sup, sup2) after pivoting, LAPACK dgtsv style.
    std::vector<double> dl(c.e.begin(), c.e.end());
    std::vector<double> dd(m);
    std::vector<double> du(c.e.begin(), c.e.end());
    std::vector<double> du2(m > 2 ? m - 2 : 0, 0.0);
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        dd[i] = c.d[i] - shift;
        norm = std::max(norm, std::abs(dd[i]) + (i > 0 ? std::abs(c.e[i - 1]) : 0.0) + (i + 1 < m ? std::abs(c.e[i]) : 0.0));
    }
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(norm, std::numeric_limits<double>::min());

    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (std::abs(dd[i]) >= std::abs(dl[i])) {
            if (dd[i] == 0.0) dd[i] = tiny;
            const double f = dl[i] / dd[i];
            dd[i + 1] -= f * du[i];
            rhs[i + 1] -= f * rhs[i];
            dl[i] = 0.0;
        } else {
            const double f = dd[i] / dl[i];
            dd[i] = dl[i];
            const double tmp = dd[i + 1];
            dd[i + 1] = du[i] - f * tmp;
            if (i + 2 < m) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            std::swap(rhs[i], rhs[i + 1]);
            rhs[i + 1] -= f * rhs[i];
        }
    }
    if (dd[m - 1] == 0.0) dd[m - 1] = tiny;

    rhs[m - 1] /= dd[m - 1];
    rhs[m - 2] = (rhs[m - 2] - du[m - 2] * rhs[m - 1]) / dd[m - 2];
    for (std::size_t ii = m - 2; ii-- > 0;) {
        rhs[ii] = (rhs[ii] - du[ii] * rhs[ii + 1] - du2[ii] * rhs[ii + 2]) / dd[ii];
    }
    return rhs;
}

double inf_norm(const std::vector<double>& diag, const std::vector<double>& off) {
    double best = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        double row = std::abs(diag[i]);
        if (i > 0) row += std::abs(off[i - 1]);
        if (i < off.size()) row += std::abs(off[i]);
        best = std::max(best, row);
    }
    return best;
}

}  // namespace

std::size_t sturm_count(const TridiagonalPair& pair, double x) { return count_below(scale_pencil(pair), x); }

GeneralizedEigenpair min_generalized_eig(const TridiagonalPair& pair, double tol) {
    if (!(tol > 0.0)) throw DomainError("eigensolver tolerance must be positive");
    const ScaledTridiagonal c = scale_pencil(pair);
    const std::size_t m = c.d.size();

    // Gerschgorin interval.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        const double radius = (i > 0 ? std::abs(c.e[i - 1]) : 0.0) + (i + 1 < m ? std::abs(c.e[i]) : 0.0);
        lo = std::min(lo, c.d[i] - radius);
        hi = std::max(hi, c.d[i] + radius);
    }
    const double width = hi - lo;
    lo -= 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), width) + c.pivmin;
    hi += 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(hi), width) + c.pivmin;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 4000; ++iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) + c.pivmin || mid <= lo || mid >= hi) break;
        if (count_below(c, mid) >= 1) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const double lambda = lo + 0.5 * (hi - lo);

    // Inverse iteration in the scaled coordinates, checked in the original ones.
    const double a_norm = inf_norm(pair.diag, pair.offdiag);
    const double b_norm = *std::max_element(pair.mass.begin(), pair.mass.end());
    const double bound = tol * (a_norm + std::abs(lambda) * b_norm);

    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = 1.0 + 0.01 * static_cast<double>(i % 7);

    GeneralizedEigenpair best;
    best.value = lambda;
    best.residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 8; ++iter) {
        y = solve_shifted(c, lambda, std::move(y));
        double ny = 0.0;
        for (double v : y) ny += v * v;
        ny = std::sqrt(ny);
        if (!(ny > 0.0) || !std::isfinite(ny)) break;
        for (double& v : y) v /= ny;

        std::vector<double> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = y[i] / std::sqrt(pair.mass[i]);
        double res2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double av = pair.diag[i] * v[i];
            if (i > 0) av += pair.offdiag[i - 1] * v[i - 1];
            if (i + 1 < m) av += pair.offdiag[i] * v[i + 1];
            const double ri = av - lambda * pair.mass[i] * v[i];
            res2 += ri * ri;
        }
        const double residual = std::sqrt(res2);
        if (residual < best.residual) {
            best.residual = residual;
            best.vector = std::move(v);
        }
        if (best.residual <= bound) return best;
    }
    throw ConvergenceError("inverse iteration did not reach the residual bound", best.value, best.vector,
                           best.residual);
}

// ---------------------------------------------------------------------------
// Root finding

double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw DomainError("root tolerance must be positive");
    if (lo > hi) std::swap(lo, hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi)) throw BracketError("non-finite value at a bracket endpoint");
    if (std::abs(flo) <= tol) return lo;
    if (std::abs(fhi) <= tol) return hi;
    if (flo * fhi > 0.0) {
        std::ostringstream os;
        os << "no sign change on [" << lo << ", " << hi << "]: f(lo)=" << flo << ", f(hi)=" << fhi;
        throw BracketError(os.str());
    }

    double best_x = std::abs(flo) < std::abs(fhi) ? lo : hi;
    double best_f = std::min(std::abs(flo), std::abs(fhi));
    auto tracked = [&](double x) {
        const double fx = f(x);
        if (std::abs(fx) < best_f) {
            best_f = std::abs(fx);
            best_x = x;
        }
        return fx;
    };
    auto stop = [&](double a, double b) { return best_f <= tol || std::abs(b - a) <= tol; };

    std::uintmax_t max_iter = 500;
    const auto bracket = boost::math::tools::toms748_solve(tracked, lo, hi, flo, fhi, stop, max_iter);
    if (best_f <= tol) return best_x;
    return 0.5 * (bracket.first + bracket.second);
}

}  // namespace khess
