/**
 * @file numerics.hpp
 * @brief Shared kernels: radial grids, quadrature, tridiagonal pencil
 *        eigensolver, bracketed root finding.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace khess {

/**
 * Strictly increasing nodes in (0,1] with the last node equal to 1.
 *
 * Invariants (checked on construction): at least 16 nodes, first node
 * r_min >= 1e-12, strictly increasing, last node == 1.
 */
class RadialGrid {
public:
    static constexpr std::size_t kMinNodes = 16;
    static constexpr double kMinRadius = 1e-12;

    /// Validates and adopts an explicit node list.
    static RadialGrid from_nodes(std::vector<double> nodes);

    /// Geometric nodes on [r_min, r_join] followed by uniform nodes on
    /// [r_join, 1]. The split is chosen so the spacing is continuous at
    /// r_join. With r_min >= r_join the grid is uniform on [r_min, 1].
    static RadialGrid log_uniform(double r_min = 1e-8, double r_join = 0.1, std::size_t nodes = 4096);

    /// Uniform nodes on [a, 1].
    static RadialGrid uniform(double a, std::size_t nodes);

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double operator[](std::size_t i) const noexcept { return nodes_[i]; }
    double r_min() const noexcept { return nodes_.front(); }

    /// Index of the first node >= r (size() if none).
    std::size_t lower_index(double r) const noexcept;

private:
    explicit RadialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {}
    std::vector<double> nodes_;
};

/// Symmetric tridiagonal A with diagonal positive B, defining A v = lambda B v.
struct TridiagonalPair {
    std::vector<double> diag;     ///< A_ii, size m
    std::vector<double> offdiag;  ///< A_{i,i+1}, size m-1
    std::vector<double> mass;     ///< B_ii > 0, size m

    std::size_t size() const noexcept { return diag.size(); }
};

struct GeneralizedEigenpair {
    double value = 0.0;
    std::vector<double> vector;  ///< B-normalized: v^T B v = 1
    double residual = 0.0;       ///< ||A v - value B v||_2
};

/// Composite trapezoid of samples over the grid, from r_min to 1.
/// Throws DomainError naming the first non-finite node.
double integrate(std::span<const double> samples, const RadialGrid& grid);

/// Trapezoid over [a, b] using linear interpolation of the samples at
/// non-node endpoints. Requires r_min <= a <= b <= 1.
double integrate_range(std::span<const double> samples, const RadialGrid& grid, double a, double b);

/// Running trapezoid: out[i] = start + int_{r_min}^{r_i} f dr.
std::vector<double> cumulative_trapezoid(std::span<const double> samples, const RadialGrid& grid,
                                         double start = 0.0);

/**
 * Product integration of s^p f(s): f is treated as piecewise linear on the
 * grid and the power weight is integrated exactly on every element.
 * out[i] = int_{r_min}^{r_i} s^p f(s) ds + start.
 */
std::vector<double> cumulative_power_weighted(std::span<const double> samples, double power,
                                              const RadialGrid& grid, double start = 0.0);

/// Exact moments on [a,b] (0 < a < b): m0 = int s^p, m1 = int s^p (s-a).
struct PowerMoments {
    double m0;
    double m1;
};
PowerMoments power_moments(double a, double b, double p);

/// Second-order derivative estimate of samples w.r.t. the abscissae x
/// (three-point nonuniform stencil inside, one-sided at the ends).
std::vector<double> nonuniform_gradient(std::span<const double> values, std::span<const double> x);

/**
 * Smallest eigenvalue of the pencil A v = lambda B v by Sturm-count
 * bisection, followed by inverse iteration for the eigenvector.
 *
 * On return the residual satisfies ||Av - lambda Bv|| <= tol (||A|| + |lambda| ||B||)
 * (infinity norms for the matrices). Throws ConvergenceError with the best
 * iterate otherwise.
 */
GeneralizedEigenpair min_generalized_eig(const TridiagonalPair& pair, double tol = 1e-10);

/// Number of eigenvalues of the pencil strictly below x.
std::size_t sturm_count(const TridiagonalPair& pair, double x);

/// Root of a scalar map on a bracket [lo, hi] with f(lo) f(hi) <= 0.
/// Returns x with |f(x)| <= tol or a final bracket of width <= tol.
/// Throws BracketError if the endpoints do not straddle a sign change.
double find_root_bracketed(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace khess
