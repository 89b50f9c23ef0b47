/**
 * @file stability.hpp
 * @brief Semistability quadratic forms for radial solutions, the discrete
 *        Rayleigh-quotient verdict, the cutoff family used to pass from
 *        C^1_c(B_1) to C^1_c(B_1 \ {0}), and a weighted Hardy check.
 *
 * All integrals are one-dimensional in r; the common factor |dB_1| is dropped.
 */
#pragma once

#include "khess/radial.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace khess {

/// Smooth bump exp(1 - 1/(1-t^2)), t = (r - center)/width, supported in (center - width, center + width).
struct Bump {
    double center;
    double width;

    double value(double r) const;
    double derivative(double r) const;
    TestFunction as_test_function() const;
};

/// `count` bumps with log-spaced centers in [max(1e-4, 100 r_min), 0.6], width = center / 2.
std::vector<Bump> default_bump_suite(double r_min, std::size_t count = 20);

/// Random bumps (std::mt19937_64 seeded with `seed`): log-uniform centers, widths 10-60% of the center.
std::vector<Bump> random_bump_suite(double r_min, std::size_t count, std::uint64_t seed);

/// int [k c r^{n-k} (u')^{k-1} (xi')^2 + g'(u) xi^2 r^{n-1}] dr
double q_radial(const RadialProfile& profile, const Nonlinearity& g, const TestFunction& xi,
                const ProblemParams& params);
double q_radial(const RadialProfile& profile, const Nonlinearity& g, std::span<const double> xi,
                std::span<const double> dxi, const ProblemParams& params);

/// int (u'/r)^{k+1} [r^2 (eta')^2 + (k-1)/(k+1) r (eta^2)' - (2n-k-1)/(k+1) eta^2] r^{n-1} dr
double q_gfree(const RadialProfile& profile, const TestFunction& eta, const ProblemParams& params);
double q_gfree(const RadialProfile& profile, std::span<const double> eta, std::span<const double> deta,
               const ProblemParams& params);

struct IdentityGap {
    double gap = 0.0;    ///< |q_radial(u' eta) - k c q_gfree(eta)|
    double scale = 0.0;  ///< k c times the integral of the absolute values of the g-free terms
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Both sides of Q_u(u' eta) = k c_{n,k} (g-free form of eta). Needs u'' in the profile.
IdentityGap q_ueta_identity_gap(const RadialProfile& profile, const Nonlinearity& g, const TestFunction& eta,
                                const ProblemParams& params);

enum class Verdict { semistable, unstable, inconclusive };
std::string to_string(Verdict v);

struct StabilityReport {
    double min_eig = 0.0;
    std::vector<double> witness;  ///< per-node hat coefficients, zero at both ends
    Verdict verdict = Verdict::inconclusive;
    double threshold = 0.0;       ///< absolute band used for the verdict
    double witness_energy = 0.0;  ///< discrete Q_u(witness)
    std::size_t degenerate_nodes = 0;
};

struct StabilityPencil {
    TridiagonalPair pair;  ///< interior nodes 1..N-2
    std::size_t degenerate_nodes = 0;
};

/// Hat-function discretization of Q_u (stiffness and lumped potential) against
/// the lumped r^{n-1} mass.
StabilityPencil assemble_stability_pencil(const RadialProfile& profile, const Nonlinearity& g,
                                          const ProblemParams& params);

/// Smallest discrete Rayleigh quotient and verdict. The band is
/// relative_threshold * max diagonal of the stiffness matrix.
StabilityReport min_rayleigh(const RadialProfile& profile, const Nonlinearity& g, const ProblemParams& params,
                             double relative_threshold = 1e-8);

/// Cutoff that vanishes near the origin: logarithmic branch for n = 2 sigma,
/// linear rescaling for n >= 2 sigma + 1.
class CutoffFamily {
public:
    CutoffFamily(double epsilon, int sigma, int n);
    double epsilon() const noexcept { return epsilon_; }
    int sigma() const noexcept { return sigma_; }
    int n() const noexcept { return n_; }
    bool logarithmic() const noexcept { return n_ == 2 * sigma_; }

private:
    double epsilon_;
    int sigma_;
    int n_;
};

/// Profile 2 (1-t)^2 (5/2 - t) used by the cutoff.
double cutoff_profile(double t);
double cutoff_profile_derivative(double t);

/// (value, derivative) of the cutoff at r in [0,1]; derivative one-sided (from the right) at joins.
std::pair<double, double> cutoff_eval(const CutoffFamily& family, double r);

struct HardyResult {
    double lhs = 0.0;
    bool conditions_ok = false;
    bool growth_condition_ok = false;  ///< alpha (r V' + (n - 2 beta - alpha - 2) V) >= 0, relative slack 1e-10 (1e-4 if V' is differenced)
    bool limit_condition_ok = false;   ///< r^{n-2} V -> 0 (decade test)
    double scale = 0.0;                ///< same integral with |.| on both terms
    double quad_error = 0.0;           ///< |T_h - T_2h| / 3
};

/**
 * int r^{n-3} V [(r eta' + beta eta)^2 - alpha^2/4 eta^2] dr together with the
 * hypotheses on V. `dV` may be empty, in which case V' is estimated by
 * finite differences on the grid.
 */
HardyResult hardy_check(const RadialGrid& grid, std::span<const double> V, std::span<const double> dV, double alpha,
                        double beta, const ProblemParams& params, const TestFunction& eta);

}  // namespace khess
