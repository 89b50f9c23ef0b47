#include "khess/hessian.hpp"

#include "khess/errors.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace khess {

namespace {

constexpr int kMaxBinomial = 64;
constexpr int kMaxOracleDimension = 12;

const std::array<std::array<std::uint64_t, kMaxBinomial + 1>, kMaxBinomial + 1>& pascal() {
    static const auto table = [] {
        std::array<std::array<std::uint64_t, kMaxBinomial + 1>, kMaxBinomial + 1> t{};
        for (int n = 0; n <= kMaxBinomial; ++n) {
            t[n][0] = 1;
            for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
        }
        return t;
    }();
    return table;
}

// Integer power; exponent >= 0.
double ipow(double base, int exponent) {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

void check_order(int k, std::size_t n) {
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw DomainError("Hessian order k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
    }
}

void check_radius(const Eigen::VectorXd& x, const RadialEigenpair& pair, const ProblemParams& params) {
    if (x.size() != params.n()) throw DomainError("point dimension does not match n");
    if (!(pair.r > 0.0)) throw DomainError("radius must be positive");
    if (std::abs(x.norm() - pair.r) > 1e-10 * pair.r) throw DomainError("|x| does not match the eigenpair radius");
}

}  // namespace

std::uint64_t binomial(int n, int k) {
    if (n < 0 || n > kMaxBinomial) throw DomainError("binomial supports 0 <= n <= 64");
    if (k < 0 || k > n) return 0;
    return pascal()[n][k];
}

ProblemParams::ProblemParams(int n, int k) : n_(n), k_(k) {
    if (n < 1) throw DomainError("dimension n must be >= 1");
    if (n > kMaxBinomial) throw DomainError("dimension n must be <= 64");
    if (k < 1 || k > n) throw DomainError("Hessian order must satisfy 1 <= k <= n");
    c_nk_ = static_cast<double>(binomial(n, k)) / static_cast<double>(n);
}

double sigma_k(std::span<const double> lambda, int k) {
    check_order(k, lambda.size());
    // e[j] holds sigma_j of the entries processed so far.
    std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (double l : lambda) {
        for (int j = k; j >= 1; --j) e[j] += l * e[j - 1];
    }
    return e[k];
}

bool in_gamma_k(std::span<const double> lambda, int k) {
    check_order(k, lambda.size());
    for (int i = 1; i <= k; ++i) {
        if (!(sigma_k(lambda, i) > 0.0)) return false;
    }
    return true;
}

double sk_full(const Eigen::MatrixXd& h, int k) {
    const auto n = static_cast<int>(h.rows());
    if (h.cols() != n) throw DomainError("matrix must be square");
    if (n > kMaxOracleDimension) throw ScaleError("principal-minor oracle limited to n <= 12");
    check_order(k, static_cast<std::size_t>(n));

    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[i] = i;
    Eigen::MatrixXd minor(k, k);
    double sum = 0.0;
    while (true) {
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) minor(a, b) = h(idx[a], idx[b]);
        }
        sum += minor.partialPivLu().determinant();

        int pos = k - 1;
        while (pos >= 0 && idx[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return sum;
}

double sk_radial(double r, double uprime, double usecond, const ProblemParams& params) {
    if (!(r > 0.0)) throw DomainError("sk_radial requires r > 0");
    const double l2 = uprime / r;
    const int n = params.n();
    const int k = params.k();
    return params.c_nk() * ipow(l2, k - 1) * (n * l2 + k * (usecond - l2));
}

Eigen::MatrixXd radial_hessian(const Eigen::VectorXd& x, const RadialEigenpair& pair) {
    const double r2 = x.squaredNorm();
    const auto n = x.size();
    Eigen::MatrixXd h = pair.lambda2 * Eigen::MatrixXd::Identity(n, n);
    h += (pair.lambda1 - pair.lambda2) / r2 * (x * x.transpose());
    return h;
}

double tangential_coefficient(const RadialEigenpair& pair, const ProblemParams& params) {
    const double ratio = static_cast<double>(params.k() - 1) / static_cast<double>(params.n() - 1);
    return pair.lambda2 + ratio * (pair.lambda1 - pair.lambda2);
}

SkijMatrix skij_matrix(const Eigen::VectorXd& x, const RadialEigenpair& pair, const ProblemParams& params) {
    check_radius(x, pair, params);
    const int n = params.n();
    const int k = params.k();
    const double kc = k * params.c_nk();

    SkijMatrix out;
    out.degenerate = (pair.lambda2 == 0.0 && k >= 2);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    out.matrix = kc * ipow(pair.lambda2, k - 1) * identity;
    if (k >= 2) {
        const double ratio = static_cast<double>(k - 1) / static_cast<double>(n - 1);
        const Eigen::MatrixXd tangential = identity - (x * x.transpose()) / x.squaredNorm();
        out.matrix += kc * ipow(pair.lambda2, k - 2) * ratio * (pair.lambda1 - pair.lambda2) * tangential;
    }
    return out;
}

double quad_wSv(const Eigen::VectorXd& w, const Eigen::VectorXd& v, const Eigen::VectorXd& x,
                const RadialEigenpair& pair, const ProblemParams& params) {
    check_radius(x, pair, params);
    if (w.size() != x.size() || v.size() != x.size()) throw DomainError("vector dimension does not match n");
    const int k = params.k();
    const double kc = k * params.c_nk();
    const Eigen::VectorXd theta = x / x.norm();
    const double wr = theta.dot(w);
    const double vr = theta.dot(v);
    const double radial = ipow(pair.lambda2, k - 1) * wr * vr;
    if (k == 1) return kc * w.dot(v);
    const double tangential = ipow(pair.lambda2, k - 2) * tangential_coefficient(pair, params) * (w.dot(v) - wr * vr);
    return kc * (radial + tangential);
}

}  // namespace khess
