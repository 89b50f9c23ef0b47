/**
 * @file hessian.hpp
 * @brief Elementary symmetric functions, the Gamma_k cone, the k-Hessian
 *        by principal minors and in radial form, and its linearization
 *        S_k^{ij} for radial Hessians.
 */
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace khess {

/// Exact binomial coefficient for 0 <= n <= 64 (Pascal recurrence).
std::uint64_t binomial(int n, int k);

/// Dimension n, Hessian order k and the radial constant c_{n,k} = C(n,k)/n.
class ProblemParams {
public:
    ProblemParams(int n, int k);

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }
    double c_nk() const noexcept { return c_nk_; }

    /// Threshold dimension 2k+8 separating the estimate regimes.
    int critical_dimension() const noexcept { return 2 * k_ + 8; }

private:
    int n_;
    int k_;
    double c_nk_;
};

/// Eigenvalues of a radial Hessian at radius r: u'' (simple) and u'/r (multiplicity n-1).
struct RadialEigenpair {
    double lambda1;
    double lambda2;
    double r;
};

/// k-th elementary symmetric function of lambda. Throws DomainError unless 1 <= k <= size.
double sigma_k(std::span<const double> lambda, int k);

/// True iff sigma_i(lambda) > 0 for i = 1..k.
bool in_gamma_k(std::span<const double> lambda, int k);

/// Brute-force oracle: sum of all k x k principal minors of H (n <= 12).
double sk_full(const Eigen::MatrixXd& h, int k);

/// c_{n,k} (u'/r)^{k-1} (n u'/r + k (u'' - u'/r)).
double sk_radial(double r, double uprime, double usecond, const ProblemParams& params);

/// Hessian of a radial function at x: lambda2 I + (lambda1 - lambda2) x x^T / |x|^2.
Eigen::MatrixXd radial_hessian(const Eigen::VectorXd& x, const RadialEigenpair& pair);

struct SkijMatrix {
    Eigen::MatrixXd matrix;
    /// Set when lambda2 == 0 and k >= 2. For k >= 3 the matrix is then zero;
    /// for k = 2 the two-term formula is finite and is returned as is.
    bool degenerate = false;
};

/// Closed form of S_k^{ij} = d S_k / d u_ij for a radial Hessian. Requires |x| == pair.r.
SkijMatrix skij_matrix(const Eigen::VectorXd& x, const RadialEigenpair& pair, const ProblemParams& params);

/// w S v^T split into radial and tangential parts.
double quad_wSv(const Eigen::VectorXd& w, const Eigen::VectorXd& v, const Eigen::VectorXd& x,
                const RadialEigenpair& pair, const ProblemParams& params);

/// Coefficient lambda2 + (k-1)/(n-1) (lambda1 - lambda2) of the tangential block.
double tangential_coefficient(const RadialEigenpair& pair, const ProblemParams& params);

}  // namespace khess
