/**
 * @file radial.hpp
 * @brief Radial profiles and nonlinearities; residuals of the integral and
 *        weak formulations, derivative recovery and a shooting solver for
 *        c_{n,k} r^{1-n} (r^{n-k} (u')^k)' = g(u), u'(0) = u(1) = 0.
 */
#pragma once

#include "khess/hessian.hpp"
#include "khess/numerics.hpp"

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace khess {

/// Sampled u and u' (optionally u'') on a radial grid. Immutable.
class RadialProfile {
public:
    RadialProfile(RadialGrid grid, std::vector<double> u, std::vector<double> du,
                  std::optional<std::vector<double>> d2u = std::nullopt);

    const RadialGrid& grid() const noexcept { return grid_; }
    const std::vector<double>& u() const noexcept { return u_; }
    const std::vector<double>& du() const noexcept { return du_; }
    const std::optional<std::vector<double>>& d2u() const noexcept { return d2u_; }
    std::size_t size() const noexcept { return u_.size(); }

    /// Same samples with u'' attached (replacing any existing one).
    RadialProfile with_second_derivative(std::vector<double> d2u) const;

private:
    RadialGrid grid_;
    std::vector<double> u_;
    std::vector<double> du_;
    std::optional<std::vector<double>> d2u_;
};

/// g and g' evaluators for the right-hand side of the equation.
class Nonlinearity {
public:
    enum class Kind { constant, exponential, power, tabulated, custom };

    struct Table {
        std::vector<double> s;       ///< strictly increasing
        std::vector<double> g;
        std::vector<double> gprime;
    };

    static Nonlinearity constant(double c);
    /// lambda e^s
    static Nonlinearity exponential(double lambda);
    /// lambda (-s)^p for s <= 0, zero for s > 0
    static Nonlinearity power(double lambda, double p);
    /// Linear interpolation of node data, constant extrapolation (counted).
    /// Missing g' is filled by centered differences in s, one-sided at the ends.
    static Nonlinearity tabulated(std::vector<double> s, std::vector<double> g, std::vector<double> gprime = {});
    static Nonlinearity custom(std::string name, std::function<double(double)> g,
                               std::function<double(double)> gprime);

    double g(double s) const;
    double gprime(double s) const;

    Kind kind() const noexcept { return kind_; }
    const std::string& description() const noexcept { return description_; }
    const Table* table() const noexcept { return table_.get(); }

    /// Number of tabulated lookups that fell outside the table range.
    std::size_t extrapolation_count() const noexcept { return extrapolations_ ? extrapolations_->load() : 0; }

private:
    Nonlinearity(Kind kind, std::string description, std::function<double(double)> g,
                 std::function<double(double)> gprime);

    Kind kind_;
    std::string description_;
    std::function<double(double)> g_;
    std::function<double(double)> gprime_;
    std::shared_ptr<const Table> table_;
    std::shared_ptr<std::atomic<std::size_t>> extrapolations_;
};

/// Radial test function with its derivative.
struct TestFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

struct IntegralResidual {
    std::vector<double> residual;  ///< r^{n-k} (u')^k - c^{-1} int_0^r s^{n-1} g(u) ds
    double max_abs = 0.0;
    std::size_t argmax = 0;
};

/// int_0^{r_i} s^{n-1} g(u(s)) ds at every node. The piece below r_min models
/// g(u(s)) as g0 (s/r_min)^p, with p the log-slope of g(u(r)) at r_min (exact
/// from g' u' when `du` is given, else from the first two nodes); p = 0 gives
/// g0 r_min^n / n. Above it g(u) is interpolated per element, linearly
/// when `du` is empty and by cubic Hermite (slopes g'(u) u') otherwise, and
/// integrated against s^{n-1}.
std::vector<double> source_integral(const RadialGrid& grid, std::span<const double> u, const Nonlinearity& g,
                                    const ProblemParams& params, std::span<const double> du = {});

IntegralResidual integral_residual(const RadialProfile& profile, const Nonlinearity& g, const ProblemParams& params);

/// u' = c^{-1/k} (int_0^r s^{n-1} g(u) ds / r^{n-k})^{1/k}.
std::vector<double> recover_uprime(const RadialGrid& grid, std::span<const double> u, const Nonlinearity& g,
                                   const ProblemParams& params);

struct SecondDerivative {
    std::vector<double> d2u;
    std::vector<bool> degenerate;  ///< zero accumulated source with k >= 2 (value set to 0)
};

/// u'' from the integral identity.
SecondDerivative usecond_from_integral(const RadialProfile& profile, const Nonlinearity& g,
                                       const ProblemParams& params);

/// c_{n,k} int r^{n-k} (u')^k xi' dr + int r^{n-1} g(u) xi dr; zero for weak solutions.
double weak_residual(const RadialProfile& profile, const Nonlinearity& g, const TestFunction& xi,
                     const ProblemParams& params);

struct ShootOptions {
    double tol = 1e-9;
    /// Explicit bracket for u(0); searched automatically when absent.
    std::optional<std::pair<double, double>> bracket;
    double ode_rel_tol = 1e-12;
    double ode_abs_tol = 1e-15;
};

struct ShootResult {
    RadialProfile profile;
    double u0 = 0.0;
    double boundary_error = 0.0;  ///< |u(1)|
    double residual_max = 0.0;    ///< integral_residual max
    int evaluations = 0;          ///< number of trial integrations
};

/// Solves the radial Dirichlet problem by shooting on u(0) < 0.
ShootResult shoot_solve(const Nonlinearity& g, const ProblemParams& params, const RadialGrid& grid,
                        const ShootOptions& options = {});

/// Integrates from r_min for a given u(0), returning the profile (u'' included).
RadialProfile integrate_from_center(const Nonlinearity& g, const ProblemParams& params, const RadialGrid& grid,
                                    double u0, const ShootOptions& options = {});

struct SobolevNorm {
    double value = 0.0;
    bool finite = true;
};

/// ( int_a^b r^{n-k} (|u|^{k+1} + |u'|^{k+1}) dr )^{1/(k+1)}; the surface factor is dropped.
SobolevNorm weighted_sobolev_norm(const RadialProfile& profile, const ProblemParams& params, double a, double b);

}  // namespace khess
