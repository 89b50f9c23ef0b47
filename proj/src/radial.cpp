#include "khess/radial.hpp"

#include "khess/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace khess {

namespace {

std::string at_node(const std::string& what, std::size_t i, double r) {
    std::ostringstream os;
    os << what << " at node " << i << " (r=" << r << ")";
    return os.str();
}

std::vector<double> evaluate_g(const RadialGrid& grid, std::span<const double> u, const Nonlinearity& g) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = g.g(u[i]);
        if (!std::isfinite(out[i])) throw DomainError(at_node("g is not evaluable (u=" + std::to_string(u[i]) + ")", i, grid[i]));
    }
    return out;
}

void require_nonnegative_slope(const RadialProfile& profile) {
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.du()[i] < 0.0) throw DomainError(at_node("profile has u' < 0", i, profile.grid()[i]));
    }
}

// Solution blew up during a trial integration.
struct Blowup {};

constexpr double kBlowupLevel = 1e8;

}  // namespace

// ---------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(RadialGrid grid, std::vector<double> u, std::vector<double> du,
                             std::optional<std::vector<double>> d2u)
    : grid_(std::move(grid)), u_(std::move(u)), du_(std::move(du)), d2u_(std::move(d2u)) {
    if (u_.size() != grid_.size() || du_.size() != grid_.size() || (d2u_ && d2u_->size() != grid_.size())) {
        throw DomainError("profile arrays must match the grid size");
    }
    for (std::size_t i = 0; i < u_.size(); ++i) {
        if (!std::isfinite(u_[i]) || !std::isfinite(du_[i]) || (d2u_ && !std::isfinite((*d2u_)[i]))) {
            throw DomainError(at_node("non-finite profile sample", i, grid_[i]));
        }
    }
}

RadialProfile RadialProfile::with_second_derivative(std::vector<double> d2u) const {
    return RadialProfile(grid_, u_, du_, std::move(d2u));
}

// ---------------------------------------------------------------------------
// Nonlinearity

Nonlinearity::Nonlinearity(Kind kind, std::string description, std::function<double(double)> g,
                           std::function<double(double)> gprime)
    : kind_(kind), description_(std::move(description)), g_(std::move(g)), gprime_(std::move(gprime)) {}

Nonlinearity Nonlinearity::constant(double c) {
    return Nonlinearity(Kind::constant, "const:" + std::to_string(c), [c](double) { return c; },
                        [](double) { return 0.0; });
}

Nonlinearity Nonlinearity::exponential(double lambda) {
    return Nonlinearity(
        Kind::exponential, "exp:" + std::to_string(lambda), [lambda](double s) { return lambda * std::exp(s); },
        [lambda](double s) { return lambda * std::exp(s); });
}

Nonlinearity Nonlinearity::power(double lambda, double p) {
    return Nonlinearity(
        Kind::power, "power:" + std::to_string(lambda) + ":" + std::to_string(p),
        [lambda, p](double s) { return s <= 0.0 ? lambda * std::pow(-s, p) : 0.0; },
        [lambda, p](double s) { return s < 0.0 ? -lambda * p * std::pow(-s, p - 1.0) : 0.0; });
}

Nonlinearity Nonlinearity::tabulated(std::vector<double> s, std::vector<double> g, std::vector<double> gprime) {
    if (s.size() < 2 || g.size() != s.size()) throw DomainError("table needs at least two (s, g) rows");
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!(s[i] > s[i - 1])) throw DomainError("table abscissae must be strictly increasing (row " + std::to_string(i + 1) + ")");
    }
    if (gprime.empty()) gprime = nonuniform_gradient(g, s);
    if (gprime.size() != s.size()) throw DomainError("table derivative column has the wrong length");

    auto table = std::make_shared<const Table>(Table{std::move(s), std::move(g), std::move(gprime)});
    auto counter = std::make_shared<std::atomic<std::size_t>>(0);

    auto lookup = [table, counter](double x, const std::vector<double>& y) {
        const auto& xs = table->s;
        if (x <= xs.front() || x >= xs.back()) {
            if (x < xs.front() || x > xs.back()) counter->fetch_add(1, std::memory_order_relaxed);
            return x <= xs.front() ? y.front() : y.back();
        }
        const auto j = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return y[j - 1] + t * (y[j] - y[j - 1]);
    };

    Nonlinearity out(
        Kind::tabulated, "table", [table, lookup](double x) { return lookup(x, table->g); },
        [table, lookup](double x) { return lookup(x, table->gprime); });
    out.table_ = table;
    out.extrapolations_ = counter;
    return out;
}

Nonlinearity Nonlinearity::custom(std::string name, std::function<double(double)> g,
                                  std::function<double(double)> gprime) {
    return Nonlinearity(Kind::custom, std::move(name), std::move(g), std::move(gprime));
}

double Nonlinearity::g(double s) const { return g_(s); }
double Nonlinearity::gprime(double s) const { return gprime_(s); }

// ---------------------------------------------------------------------------
// Residuals and recovery

namespace {

// Integral of s^{n-1} g over [0, r_min], modelling g as g0 (s/r_min)^p there.
// p is the logarithmic slope of g(u(r)) at r_min; zero for bounded sources.
double origin_integral(const RadialGrid& grid, std::span<const double> gu, int n, double log_slope) {
    if (!std::isfinite(log_slope)) log_slope = 0.0;
    if (n + log_slope <= 0.0) throw DomainError("source is not integrable at the origin");
    return gu[0] * std::pow(grid.r_min(), n) / (n + log_slope);
}

double two_node_log_slope(const RadialGrid& grid, std::span<const double> gu) {
    if (!(gu[0] > 0.0 && gu[1] > 0.0)) return 0.0;
    return std::log(gu[1] / gu[0]) / std::log(grid[1] / grid[0]);
}

}  // namespace

std::vector<double> source_integral(const RadialGrid& grid, std::span<const double> u, const Nonlinearity& g,
                                    const ProblemParams& params, std::span<const double> du) {
    if (u.size() != grid.size()) throw DomainError("u does not match the grid");
    const auto gu = evaluate_g(grid, u, g);
    const int n = params.n();
    if (du.empty()) {
        return cumulative_power_weighted(gu, n - 1.0, grid, origin_integral(grid, gu, n, two_node_log_slope(grid, gu)));
    }
    if (du.size() != grid.size()) throw DomainError("u' does not match the grid");
    const double start =
        origin_integral(grid, gu, n, gu[0] > 0.0 ? grid[0] * g.gprime(u[0]) * du[0] / gu[0] : 0.0);

    std::vector<double> slope(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        slope[i] = g.gprime(u[i]) * du[i];
        if (!std::isfinite(slope[i])) throw DomainError(at_node("g' is not evaluable", i, grid[i]));
    }
    std::vector<double> out(grid.size());
    out[0] = start;
    using Gauss = boost::math::quadrature::gauss<double, 7>;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double a = grid[i - 1];
        const double h = grid[i] - a;
        const double f0 = gu[i - 1], f1 = gu[i], d0 = h * slope[i - 1], d1 = h * slope[i];
        auto integrand = [&](double s) {
            const double t = (s - a) / h;
            const double t2 = t * t, t3 = t2 * t;
            const double hermite = (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 + (3 * t2 - 2 * t3) * f1 +
                                   (t3 - t2) * d1;
            return std::pow(s, n - 1) * hermite;
        };
        out[i] = out[i - 1] + Gauss::integrate(integrand, a, grid[i]);
    }
    return out;
}

IntegralResidual integral_residual(const RadialProfile& profile, const Nonlinearity& g, const ProblemParams& params) {
    require_nonnegative_slope(profile);
    const auto& grid = profile.grid();
    const auto source = source_integral(grid, profile.u(), g, params, profile.du());
    const int n = params.n();
    const int k = params.k();
    IntegralResidual out;
    out.residual.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        out.residual[i] = std::pow(r, n - k) * std::pow(profile.du()[i], k) - source[i] / params.c_nk();
        if (std::abs(out.residual[i]) > out.max_abs) {
            out.max_abs = std::abs(out.residual[i]);
            out.argmax = i;
        }
    }
    return out;
}

std::vector<double> recover_uprime(const RadialGrid& grid, std::span<const double> u, const Nonlinearity& g,
                                   const ProblemParams& params) {
    const auto gu = evaluate_g(grid, u, g);
    for (std::size_t i = 0; i < gu.size(); ++i) {
        if (gu[i] < 0.0) throw DomainError(at_node("negative source g(u)", i, grid[i]));
    }
    const int n = params.n();
    const int k = params.k();
    const auto source = source_integral(grid, u, g, params);
    std::vector<double> du(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        // (G / (c r^{n-k}))^{1/k}, evaluated in logs to avoid underflow of r^{n-k}.
        du[i] = source[i] > 0.0
                    ? std::exp((std::log(source[i] / params.c_nk()) - (n - k) * std::log(r)) / k)
                    : 0.0;
    }
    return du;
}

SecondDerivative usecond_from_integral(const RadialProfile& profile, const Nonlinearity& g,
                                       const ProblemParams& params) {
    const auto& grid = profile.grid();
    const auto gu = evaluate_g(grid, profile.u(), g);
    const int n = params.n();
    const int k = params.k();
    const double c = params.c_nk();
    const auto source = source_integral(grid, profile.u(), g, params, profile.du());

    SecondDerivative out;
    out.d2u.resize(grid.size());
    out.degenerate.assign(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        if (k == 1) {
            out.d2u[i] = (gu[i] - (n - 1) * source[i] / std::pow(r, n)) / c;
            continue;
        }
        if (source[i] <= 0.0) {
            out.degenerate[i] = true;
            out.d2u[i] = 0.0;
            continue;
        }
        // q = G / r^{n-k}; u'' = c^{-1/k}/k q^{(1-k)/k} (r^{k-1} g + (k-n) q / r)
        const double q = source[i] / std::pow(r, n - k);
        out.d2u[i] = std::pow(c, -1.0 / k) / k * std::pow(q, (1.0 - k) / k) *
                     (std::pow(r, k - 1) * gu[i] + (k - n) * q / r);
    }
    return out;
}

double weak_residual(const RadialProfile& profile, const Nonlinearity& g, const TestFunction& xi,
                     const ProblemParams& params) {
    const auto& grid = profile.grid();
    const auto gu = evaluate_g(grid, profile.u(), g);
    const int n = params.n();
    const int k = params.k();
    std::vector<double> flux(grid.size());
    std::vector<double> source(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        flux[i] = params.c_nk() * std::pow(r, n - k) * std::pow(profile.du()[i], k) * xi.derivative(r);
        source[i] = std::pow(r, n - 1) * gu[i] * xi.value(r);
    }
    return integrate(flux, grid) + integrate(source, grid);
}

// ---------------------------------------------------------------------------
// Shooting

RadialProfile integrate_from_center(const Nonlinearity& g, const ProblemParams& params, const RadialGrid& grid,
                                    double u0, const ShootOptions& options) {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 2>;

    const int n = params.n();
    const int k = params.k();
    const double c = params.c_nk();

    // Independent variable t = log r; state (u, W) with W = r^{-n} int_0^r s^{n-1} g(u) ds / c,
    // so that u' = r W^{1/k} and dW/dt = g(u)/c - n W.
    auto rhs = [&](const State& y, State& dy, double t) {
        const double r = std::exp(t);
        const double gu = g.g(y[0]);
        if (!std::isfinite(y[0]) || y[0] > kBlowupLevel || !std::isfinite(gu) || !std::isfinite(y[1])) throw Blowup{};
        const double w = std::max(y[1], 0.0);
        dy[0] = r * r * std::pow(w, 1.0 / k);
        dy[1] = gu / c - n * w;
    };

    const double r0 = grid.r_min();
    const double g0 = g.g(u0);
    if (!(g0 > 0.0)) throw DomainError("g must be positive at u(0)=" + std::to_string(u0));
    const double w0 = g0 / (n * c);
    const double slope0 = std::pow(w0, 1.0 / k);
    State y{u0 + 0.5 * slope0 * r0 * r0, w0};

    std::vector<double> times(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) times[i] = std::log(grid[i]);
    times.back() = 0.0;

    std::vector<double> u(grid.size());
    std::vector<double> w(grid.size());
    std::size_t idx = 0;
    auto observer = [&](const State& s, double) {
        u[idx] = s[0];
        w[idx] = std::max(s[1], 0.0);
        ++idx;
    };

    auto stepper = odeint::make_dense_output(options.ode_abs_tol, options.ode_rel_tol, odeint::runge_kutta_dopri5<State>());
    const double dt0 = std::min(0.01, (times[1] - times[0]));
    try {
        odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt0, observer,
                                odeint::max_step_checker(200000));
    } catch (const odeint::no_progress_error& e) {
        throw StiffnessError(std::string("ODE step control failed: ") + e.what());
    } catch (const odeint::step_adjustment_error& e) {
        throw StiffnessError(std::string("ODE step control failed: ") + e.what());
    }

    std::vector<double> du(grid.size());
    std::vector<double> d2u(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        const double l2 = std::pow(w[i], 1.0 / k);  // u'/r
        du[i] = r * l2;
        const double gu = g.g(u[i]);
        d2u[i] = (k == 1) ? gu / c - (n - 1) * l2
                          : gu / (k * c) * std::pow(w[i], (1.0 - k) / k) - static_cast<double>(n - k) / k * l2;
    }
    return RadialProfile(grid, std::move(u), std::move(du), std::move(d2u));
}

ShootResult shoot_solve(const Nonlinearity& g, const ProblemParams& params, const RadialGrid& grid,
                        const ShootOptions& options) {
    if (!(options.tol > 0.0)) throw DomainError("shooting tolerance must be positive");
    int evaluations = 0;
    auto boundary_value = [&](double u0) {
        ++evaluations;
        try {
            return integrate_from_center(g, params, grid, u0, options).u().back();
        } catch (const Blowup&) {
            return kBlowupLevel;
        }
    };

    double lo = 0.0;
    double hi = 0.0;
    if (options.bracket) {
        lo = options.bracket->first;
        hi = options.bracket->second;
    } else {
        // Ladder 0, -2^-10, ..., -2^40; first adjacent pair with a sign change of u(1).
        std::vector<double> ladder{0.0};
        for (int j = -10; j <= 40; ++j) ladder.push_back(-std::ldexp(1.0, j));
        bool have_prev = false;
        bool found = false;
        bool any_positive_g = false;
        double prev_u0 = 0.0;
        double prev_f = 0.0;
        for (double cand : ladder) {
            if (!(g.g(cand) > 0.0)) continue;
            any_positive_g = true;
            const double f = boundary_value(cand);
            if (f == 0.0) {
                lo = hi = cand;
                found = true;
                break;
            }
            if (have_prev && prev_f * f < 0.0) {
                lo = cand;
                hi = prev_u0;
                found = true;
                break;
            }
            have_prev = true;
            prev_u0 = cand;
            prev_f = f;
        }
        if (!any_positive_g) throw DomainError("shooting requires a positive nonlinearity g");
        if (!found) throw BracketError("no u(0) in [-2^40, 0] changes the sign of u(1)");
    }

    double u0 = lo;
    if (lo != hi) u0 = find_root_bracketed(boundary_value, lo, hi, options.tol);

    RadialProfile profile = [&] {
        try {
            return integrate_from_center(g, params, grid, u0, options);
        } catch (const Blowup&) {
            throw StiffnessError("solution blows up at the selected u(0)");
        }
    }();
    ShootResult result{profile, u0, std::abs(profile.u().back()), 0.0, evaluations};
    result.residual_max = integral_residual(profile, g, params).max_abs;
    return result;
}

// ---------------------------------------------------------------------------
// Weighted norm

SobolevNorm weighted_sobolev_norm(const RadialProfile& profile, const ProblemParams& params, double a, double b) {
    const auto& grid = profile.grid();
    const int n = params.n();
    const int k = params.k();
    std::vector<double> integrand(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        integrand[i] = std::pow(r, n - k) *
                       (std::pow(std::abs(profile.u()[i]), k + 1) + std::pow(std::abs(profile.du()[i]), k + 1));
    }
    SobolevNorm out;
    const double total = integrate_range(integrand, grid, a, b);
    if (!std::isfinite(total)) {
        out.value = std::numeric_limits<double>::infinity();
        out.finite = false;
        return out;
    }
    out.value = std::pow(total, 1.0 / (k + 1));

    // Tail heuristic: when the annulus reaches the innermost decade, the
    // per-decade contributions must shrink toward r_min.
    const double r0 = grid.r_min();
    if (a <= 10.0 * r0 * (1.0 + 1e-12) && 1000.0 * r0 <= b) {
        const double d0 = integrate_range(integrand, grid, r0, 10.0 * r0);
        const double d1 = integrate_range(integrand, grid, 10.0 * r0, 100.0 * r0);
        const double d2 = integrate_range(integrand, grid, 100.0 * r0, 1000.0 * r0);
        const bool decaying = d0 <= 0.9 * d1 && d1 <= 0.9 * d2;
        const bool negligible = d0 <= 1e-12 * total;
        out.finite = decaying || negligible;
    }
    return out;
}

}  // namespace khess
