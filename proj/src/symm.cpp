#include "hyperlab/symm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyperlab::symm {

PrincipalTuple::PrincipalTuple(std::vector<double> v) : values(std::move(v)) {
    if (values.empty())
        throw std::invalid_argument("PrincipalTuple: at least one entry required");
    for (double x : values)
        if (!std::isfinite(x))
            throw std::invalid_argument("PrincipalTuple: entries must be finite");
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

std::vector<double> elementary_symmetric_all(std::span<const double> lambda) {
    const int m = static_cast<int>(lambda.size());
    std::vector<double> e(static_cast<size_t>(m) + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < m; ++i) {
        for (int j = std::min(i + 1, m); j >= 1; --j) e[j] += lambda[i] * e[j - 1];
    }
    return e;
}

double sigma_k(const PrincipalTuple& lambda, int k) {
    const int m = lambda.dim();
    if (k < 0 || k > m) throw std::domain_error("sigma_k: k out of range [0, m]");
    return elementary_symmetric_all(lambda.values)[static_cast<size_t>(k)];
}

double normalized_Hk(const PrincipalTuple& lambda, int k) {
    const int m = lambda.dim();
    if (k < 0 || k > m) throw std::domain_error("normalized_Hk: k out of range [0, m]");
    if (k == 0) return 1.0;
    return sigma_k(lambda, k) / binomial(m, k);
}

std::vector<double> sigma_of_matrix(const Eigen::MatrixXd& B) {
    if (B.rows() != B.cols()) throw std::invalid_argument("sigma_of_matrix: square matrix required");
    const int m = static_cast<int>(B.rows());
    std::vector<double> sig(static_cast<size_t>(m) + 1, 0.0);
    sig[0] = 1.0;
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m, m);  // T_0
    for (int s = 1; s <= m; ++s) {
        Eigen::MatrixXd BT = B * T;
        sig[static_cast<size_t>(s)] = BT.trace() / static_cast<double>(s);
        T = sig[static_cast<size_t>(s)] * Eigen::MatrixXd::Identity(m, m) - BT;
    }
    return sig;
}

NewtonTensor newton_tensor(const Eigen::MatrixXd& B, int k) {
    if (B.rows() != B.cols()) throw std::invalid_argument("newton_tensor: square matrix required");
    const int m = static_cast<int>(B.rows());
    if (k < 0 || k > m - 1) throw std::domain_error("newton_tensor: k out of range [0, m-1]");
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m, m);
    for (int s = 1; s <= k; ++s) {
        Eigen::MatrixXd BT = B * T;
        const double sig_s = BT.trace() / static_cast<double>(s);
        T = sig_s * Eigen::MatrixXd::Identity(m, m) - BT;
    }
    return NewtonTensor{std::move(T), k};
}

bool garding_membership(const PrincipalTuple& lambda, int k) {
    const int m = lambda.dim();
    if (k < 1 || k > m) throw std::domain_error("garding_membership: k out of range [1, m]");
    const auto sig = elementary_symmetric_all(lambda.values);
    for (int j = 1; j <= k; ++j)
        if (!(sig[static_cast<size_t>(j)] > 0.0)) return false;
    return true;
}

double newton_maclaurin_margin(const PrincipalTuple& lambda, int j, int k) {
    const int m = lambda.dim();
    if (!(1 <= j && j < k && k <= m))
        throw std::domain_error("newton_maclaurin_margin: need 1 <= j < k <= m");
    if (!garding_membership(lambda, k))
        throw std::domain_error("newton_maclaurin_margin: tuple not in Gamma_k");
    const double Hj = normalized_Hk(lambda, j);
    const double Hk = normalized_Hk(lambda, k);
    return Hj - std::pow(Hk, static_cast<double>(j) / static_cast<double>(k));
}

double relative_spread(std::span<const double> values) {
    double lo = values[0], hi = values[0], mean = 0.0;
    for (double x : values) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        mean += x;
    }
    mean /= static_cast<double>(values.size());
    return (hi - lo) / (1.0 + std::abs(mean));
}

bool is_umbilic(const PrincipalTuple& lambda, double rel_spread_tol) {
    return relative_spread(lambda.values) < rel_spread_tol;
}

}  // namespace hyperlab::symm
