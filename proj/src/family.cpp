#include "khess/family.hpp"

#include "khess/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace khess {

namespace {

std::string format_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double radicand(int n, int k) {
    const double d = 2.0 * (k + 1) * n - 4.0 * k;
    if (d < 0.0) throw DomainError("negative radicand 2(k+1)n - 4k");
    return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// h and its primitive

HFunction HFunction::zero() { return HFunction(Kind::zero, "zero"); }

HFunction HFunction::constant(double a) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("h must be nonnegative");
    HFunction f(Kind::constant, "const:" + format_number(a));
    f.a_ = a;
    return f;
}

HFunction HFunction::power(double a, double b) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("h must be nonnegative");
    if (!(b > -1.0) || !std::isfinite(b)) throw DomainError("h = a r^b needs b > -1 to be integrable");
    HFunction f(Kind::power, "pow:" + format_number(a) + ":" + format_number(b));
    f.a_ = a;
    f.b_ = b;
    return f;
}

HFunction HFunction::tabulated(std::vector<double> r, std::vector<double> h) {
    if (r.size() != h.size() || r.size() < 2) throw DomainError("h table needs at least two matching rows");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0) || !std::isfinite(r[i])) throw DomainError("h table radii must be positive");
        if (i > 0 && !(r[i] > r[i - 1])) throw DomainError("h table radii must be strictly increasing");
        if (!(h[i] >= 0.0) || !std::isfinite(h[i])) throw DomainError("h must be nonnegative");
    }
    HFunction f(Kind::tabulated, "table");
    f.cumulative_.resize(r.size());
    f.cumulative_[0] = h[0] * r[0];
    for (std::size_t i = 1; i < r.size(); ++i) {
        f.cumulative_[i] = f.cumulative_[i - 1] + 0.5 * (r[i] - r[i - 1]) * (h[i] + h[i - 1]);
    }
    f.r_ = std::move(r);
    f.h_ = std::move(h);
    return f;
}

double HFunction::h(double r) const {
    switch (kind_) {
        case Kind::zero:
            return 0.0;
        case Kind::constant:
            return a_;
        case Kind::power:
            return a_ * std::pow(r, b_);
        case Kind::tabulated:
            break;
    }
    if (r <= r_.front()) return h_.front();
    if (r >= r_.back()) return h_.back();
    const auto j = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin());
    const double t = (r - r_[j - 1]) / (r_[j] - r_[j - 1]);
    return h_[j - 1] + t * (h_[j] - h_[j - 1]);
}

double HFunction::H(double r) const {
    switch (kind_) {
        case Kind::zero:
            return 0.0;
        case Kind::constant:
            return a_ * r;
        case Kind::power:
            return a_ * std::pow(r, b_ + 1.0) / (b_ + 1.0);
        case Kind::tabulated:
            break;
    }
    if (r <= r_.front()) return h_.front() * r;
    if (r >= r_.back()) return cumulative_.back() + h_.back() * (r - r_.back());
    const auto j = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin());
    const double d = r - r_[j - 1];
    return cumulative_[j - 1] + 0.5 * d * (h_[j - 1] + h(r));
}

double HFunction::dh(double r) const {
    switch (kind_) {
        case Kind::zero:
        case Kind::constant:
            return 0.0;
        case Kind::power:
            return a_ * b_ * std::pow(r, b_ - 1.0);
        case Kind::tabulated:
            break;
    }
    if (r < r_.front() || r >= r_.back()) return 0.0;
    const auto j = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin());
    return (h_[j] - h_[j - 1]) / (r_[j] - r_[j - 1]);
}

FamilySpec::FamilySpec(ProblemParams params, HFunction h, RadialGrid grid)
    : params_(params), h_(std::move(h)), grid_(std::move(grid)) {
    if (params_.n() < params_.critical_dimension()) {
        throw DomainError("the family requires n >= 2k+8 (n=" + std::to_string(params_.n()) +
                          ", k=" + std::to_string(params_.k()) + ")");
    }
    for (double r : grid_.nodes()) {
        const double v = h_.h(r);
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("h < 0 at r=" + format_number(r));
    }
    delta_ = delta_nk(params_.n(), params_.k());
}

// ---------------------------------------------------------------------------
// Exponents

double delta_nk_factored(int n, int k) {
    const double root = std::sqrt(radicand(n, k));
    return -(root + 2.0 * k) * (n - 2.0 * k - 8.0) / ((k + 1.0) * (root + 2.0 * k + 4.0));
}

double delta_nk(int n, int k) {
    if (k < 1 || k > n) throw DomainError("delta needs 1 <= k <= n");
    const double root = std::sqrt(radicand(n, k));
    const double kp = k + 1.0;
    const double direct = (-kp * n + 2.0 * root + 2.0 * k * k + 6.0 * k) / (kp * kp);
    const double factored = delta_nk_factored(n, k);
    // The factored form is exact at the critical dimension; the direct one carries rounding there.
    if (std::abs(direct - factored) > 1e-12 * std::max(1.0, std::abs(factored))) {
        throw Error("delta forms disagree for n=" + std::to_string(n) + ", k=" + std::to_string(k));
    }
    return factored;
}

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::bounded:
            return "bounded";
        case Regime::logarithmic:
            return "log";
        case Regime::power:
            break;
    }
    return "power";
}

Regime classify_regime(const ProblemParams& params) {
    const int crit = params.critical_dimension();
    if (params.n() < crit) return Regime::bounded;
    if (params.n() == crit) return Regime::logarithmic;
    return Regime::power;
}

double displayed_derivative_exponent(int n, int k, int i) {
    const double root = std::sqrt(radicand(n, k));
    const double kp = k + 1.0;
    const double head = -kp * n + 2.0 * root;
    switch (i) {
        case 1:
            return (head + k * k + 4.0 * k - 1.0) / (kp * kp);
        case 2:
            return (head + (2.0 - i) * k * k + 2.0 * (3.0 - i) * k - i) / (kp * kp);
        case 3:
            return (head - k * k - 3.0) / (kp * kp);
        default:
            throw DomainError("derivative order must be 1, 2 or 3");
    }
}

ExponentSet estimate_exponents(const ProblemParams& params) {
    ExponentSet e;
    e.delta = delta_nk(params.n(), params.k());
    e.u_rate = e.delta;
    e.du_rate = e.delta - 1.0;
    e.d2u_rate = e.delta - 2.0;
    e.d3u_rate = e.delta - 3.0;
    e.regime = classify_regime(params);
    const double rates[] = {e.du_rate, e.d2u_rate, e.d3u_rate};
    for (int i = 1; i <= 3; ++i) {
        e.identity_gap = std::max(e.identity_gap,
                                  std::abs(rates[i - 1] - displayed_derivative_exponent(params.n(), params.k(), i)));
    }
    return e;
}

// ---------------------------------------------------------------------------
// Construction

double sk_coefficient(const ProblemParams& params) {
    return params.n() + params.k() * (delta_nk(params.n(), params.k()) - 2.0);
}

FamilyProfile build_family(const FamilySpec& spec) {
    const auto& grid = spec.grid();
    const auto& p = spec.params();
    const int k = p.k();
    const double delta = spec.delta();
    const double kp = k + 1.0;
    const double v_exp = kp * (delta - 2.0) + 2.0;
    const std::size_t m = grid.size();

    std::vector<double> factor(m);
    std::vector<double> V(m);
    std::vector<double> dV(m);
    std::vector<double> du(m);
    std::vector<double> d2u(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = grid[i];
        const double one_h = 1.0 + spec.h().H(r);
        const double h = spec.h().h(r);
        factor[i] = std::pow(one_h, 1.0 / kp);
        V[i] = std::pow(r, v_exp) * one_h;
        dV[i] = v_exp * V[i] / r + std::pow(r, v_exp) * h;
        du[i] = std::pow(r, delta - 1.0) * factor[i];
        d2u[i] = (delta - 1.0) * std::pow(r, delta - 2.0) * factor[i] +
                 std::pow(r, delta - 1.0) * h * std::pow(one_h, -k / kp) / kp;
    }
    // u(r) = -int_r^1 u', with the power weight integrated exactly.
    const auto cumulative = cumulative_power_weighted(factor, delta - 1.0, grid);
    std::vector<double> u(m);
    for (std::size_t i = 0; i < m; ++i) u[i] = cumulative[i] - cumulative.back();
    u.back() = 0.0;
    return {std::move(V), std::move(dV), RadialProfile(grid, std::move(u), std::move(du), std::move(d2u))};
}

double family_sk(const FamilySpec& spec, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("family_sk needs r in (0,1]");
    const auto& p = spec.params();
    const int k = p.k();
    const double delta = spec.delta();
    const double one_h = 1.0 + spec.h().H(r);
    const double bracket = p.n() + k * (delta - 2.0) + k * r * spec.h().h(r) / ((k + 1.0) * one_h);
    return p.c_nk() * std::pow(r, k * (delta - 2.0)) * std::pow(one_h, k / (k + 1.0)) * bracket;
}

double family_sk_derivative(const FamilySpec& spec, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("family_sk_derivative needs r in (0,1]");
    const auto& p = spec.params();
    const int k = p.k();
    const double kp = k + 1.0;
    const double a = k * (spec.delta() - 2.0);
    const double F = 1.0 + spec.h().H(r);
    const double h = spec.h().h(r);
    const double B = p.n() + a + k * r * h / (kp * F);
    const double dB = k / kp * ((h + r * spec.h().dh(r)) / F - r * h * h / (F * F));
    const double ra = std::pow(r, a);
    const double Fk = std::pow(F, k / kp);
    return p.c_nk() * (a * ra / r * Fk * B + ra * (k / kp) * Fk / F * h * B + ra * Fk * dB);
}

Nonlinearity reconstruct_g(const FamilySpec& spec, const RadialProfile& profile) {
    const auto& u = profile.u();
    std::vector<double> s(u.begin(), u.end());
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!(s[i] > s[i - 1])) throw DomainError("u is not strictly increasing on the grid; g cannot be tabulated");
    }
    std::vector<double> g(s.size());
    std::vector<double> gp(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double r = profile.grid()[i];
        g[i] = family_sk(spec, r);
        gp[i] = family_sk_derivative(spec, r) / profile.du()[i];
    }
    return Nonlinearity::tabulated(std::move(s), std::move(g), std::move(gp));
}

std::pair<double, double> hardy_parameters(const ProblemParams& params) {
    const int n = params.n();
    const int k = params.k();
    const double alpha = 2.0 * std::sqrt(radicand(n, k)) / (k + 1.0);
    const double beta = (k - 1.0) / (k + 1.0);
    return {alpha, beta};
}

// ---------------------------------------------------------------------------
// Decay fits

std::vector<double> decay_normalized(const RadialProfile& profile, double delta) {
    if (delta == 0.0) throw DomainError("decay normalization needs delta != 0");
    const double r = profile.grid().r_min();
    const double du = profile.du().front();
    double anchor = r * du / delta;
    if (profile.d2u() && std::abs(delta + 1.0) > 1e-8) {
        const double d2u = profile.d2u()->front();
        anchor -= (r * r * d2u - (delta - 1.0) * r * du) / (delta * (delta + 1.0));
    }
    const double shift = anchor - profile.u().front();
    std::vector<double> out(profile.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = profile.u()[i] + shift;
    return out;
}

namespace {

DecayFit linear_fit(std::span<const double> r, std::span<const double> values, double r_lo, double r_hi,
                    bool log_values) {
    if (r.size() != values.size()) throw DomainError("fit needs matching arrays");
    if (!(r_lo > 0.0 && r_lo < r_hi)) throw DomainError("fit window must satisfy 0 < r_lo < r_hi");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < r_lo || r[i] > r_hi) continue;
        if (log_values && !(values[i] > 0.0)) {
            throw DomainError("nonpositive sample at r=" + format_number(r[i]) + " in the fit window");
        }
        const double x = std::log(r[i]);
        const double y = log_values ? std::log(values[i]) : values[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++count;
    }
    if (count < 2) throw DomainError("fit window holds fewer than two nodes");
    const double cn = static_cast<double>(count);
    const double vx = sxx - sx * sx / cn;
    const double vy = syy - sy * sy / cn;
    const double cxy = sxy - sx * sy / cn;
    DecayFit fit;
    fit.rate = cxy / vx;
    fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
    fit.count = count;
    return fit;
}

}  // namespace

DecayFit fit_decay(std::span<const double> r, std::span<const double> values, double r_lo, double r_hi) {
    return linear_fit(r, values, r_lo, r_hi, true);
}

DecayFit fit_log_coefficient(std::span<const double> r, std::span<const double> values, double r_lo, double r_hi) {
    return linear_fit(r, values, r_lo, r_hi, false);
}

}  // namespace khess
