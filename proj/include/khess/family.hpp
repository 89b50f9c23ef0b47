/**
 * @file family.hpp
 * @brief Explicit semistable unbounded family u' = r^{delta-1} (1 + H)^{1/(k+1)},
 *        H(r) = int_0^r h, its nonlinearity g, decay exponents and log-log fits.
 */
#pragma once

#include "khess/radial.hpp"

#include <string>
#include <utility>
#include <vector>

namespace khess {

/// Nonnegative integrable perturbation h on (0,1] together with H(r) = int_0^r h.
class HFunction {
public:
    enum class Kind { zero, constant, power, tabulated };

    static HFunction zero();
    static HFunction constant(double a);
    /// a r^b with b > -1.
    static HFunction power(double a, double b);
    /// Linear interpolation of (r, h) samples; constant extension to the left of the first node
    /// and to the right of the last one.
    static HFunction tabulated(std::vector<double> r, std::vector<double> h);

    double h(double r) const;
    double H(double r) const;
    /// h'(r); one-sided slope of the segment to the right for tables.
    double dh(double r) const;

    Kind kind() const noexcept { return kind_; }
    const std::string& description() const noexcept { return description_; }

private:
    HFunction(Kind kind, std::string description) : kind_(kind), description_(std::move(description)) {}

    Kind kind_;
    std::string description_;
    double a_ = 0.0;
    double b_ = 0.0;
    std::vector<double> r_;
    std::vector<double> h_;
    std::vector<double> cumulative_;  ///< H at the table nodes
};

/// Validated inputs: n >= 2k+8 and h >= 0 at every grid node.
class FamilySpec {
public:
    FamilySpec(ProblemParams params, HFunction h, RadialGrid grid);

    const ProblemParams& params() const noexcept { return params_; }
    const HFunction& h() const noexcept { return h_; }
    const RadialGrid& grid() const noexcept { return grid_; }
    double delta() const noexcept { return delta_; }

private:
    ProblemParams params_;
    HFunction h_;
    RadialGrid grid_;
    double delta_;
};

/// (-(k+1)n + 2 sqrt(2(k+1)n - 4k) + 2k^2 + 6k) / (k+1)^2, cross-checked against the factored form.
double delta_nk(int n, int k);

/// Factored form -(sqrt(D) + 2k)(n - 2k - 8) / ((k+1)(sqrt(D) + 2k + 4)), D = 2(k+1)n - 4k.
double delta_nk_factored(int n, int k);

enum class Regime { bounded, logarithmic, power };
std::string to_string(Regime regime);
Regime classify_regime(const ProblemParams& params);

struct ExponentSet {
    double delta = 0.0;
    double u_rate = 0.0;
    double du_rate = 0.0;
    double d2u_rate = 0.0;
    double d3u_rate = 0.0;
    Regime regime = Regime::bounded;
    /// |simplified rate - exponent as displayed in the estimates| for u', u'' and u'''.
    double identity_gap = 0.0;
};

/// Verbatim exponent of the i-th derivative estimate, i in {1, 2, 3}.
double displayed_derivative_exponent(int n, int k, int i);

ExponentSet estimate_exponents(const ProblemParams& params);

struct FamilyProfile {
    std::vector<double> V;   ///< r^{(k+1)(delta-2)+2} (1 + H)
    std::vector<double> dV;  ///< analytic derivative of V
    RadialProfile profile;   ///< u with u(1) = 0, u', u''
};

FamilyProfile build_family(const FamilySpec& spec);

/// S_k(D^2 u) of the family at radius r.
double family_sk(const FamilySpec& spec, double r);

/// d/dr of family_sk.
double family_sk_derivative(const FamilySpec& spec, double r);

/// n + k(delta - 2), the leading coefficient of family_sk for h = 0.
double sk_coefficient(const ProblemParams& params);

/// Tabulated g with g(u(r_i)) = S_k(D^2 u)(r_i) and g'(u(r_i)) = (dS_k/dr) / u'(r_i).
Nonlinearity reconstruct_g(const FamilySpec& spec, const RadialProfile& profile);

/// Weight parameters (alpha, beta) for the Hardy route.
std::pair<double, double> hardy_parameters(const ProblemParams& params);

/// Antiderivative of u' = r^{delta-1} f anchored at the innermost node so that it carries no constant
/// term to second order: U(r_min) = r u'/delta - (r^2 u'' - (delta-1) r u') / (delta (delta+1)) at r_min
/// (the second term is dropped when u'' is absent). Equals r^delta / delta exactly for h = 0.
std::vector<double> decay_normalized(const RadialProfile& profile, double delta);

struct DecayFit {
    double rate = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

/// Least-squares slope of log(value) against log(r) over nodes in [r_lo, r_hi].
/// Values in the window must be strictly positive.
DecayFit fit_decay(std::span<const double> r, std::span<const double> values, double r_lo = 1e-6,
                   double r_hi = 1e-2);

/// Least-squares slope of value against log(r) over the window (logarithmic regime).
DecayFit fit_log_coefficient(std::span<const double> r, std::span<const double> values, double r_lo = 1e-6,
                             double r_hi = 1e-2);

}  // namespace khess
