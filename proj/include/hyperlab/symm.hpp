#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hyperlab::symm {

/// Eigenvalue tuple of a shape operator. Entries are principal curvatures
/// in hyperbolic units (ambient sectional curvature -1).
struct PrincipalTuple {
    std::vector<double> values;

    explicit PrincipalTuple(std::vector<double> v);
    int dim() const { return static_cast<int>(values.size()); }
};

double binomial(int n, int k);

/// All elementary symmetric polynomials sigma_0..sigma_m of the tuple,
/// accumulated as the coefficients of prod_i (t + lambda_i). One pass, O(m^2),
/// no subset enumeration.
std::vector<double> elementary_symmetric_all(std::span<const double> lambda);

/// sigma_k, 0 <= k <= m (sigma_0 = 1).
double sigma_k(const PrincipalTuple& lambda, int k);

/// Normalized k-th mean curvature H_k = sigma_k / C(m,k), H_0 = 1.
double normalized_Hk(const PrincipalTuple& lambda, int k);

/// sigma_0..sigma_m of a matrix (coefficients of its characteristic
/// polynomial), by the Faddeev-LeVerrier recursion. Valid for any square
/// matrix; used here on shape operators that are self-adjoint w.r.t. a metric.
std::vector<double> sigma_of_matrix(const Eigen::MatrixXd& B);

struct NewtonTensor {
    Eigen::MatrixXd entries;  // mixed-index (1,1) form
    int order = 0;
};

/// Newton transformation T_k(B), 0 <= k <= m-1, via
///   T_0 = Id,  T_k = sigma_k(B) Id - B T_{k-1}.
NewtonTensor newton_tensor(const Eigen::MatrixXd& B, int k);

/// Gamma_k membership: sigma_j(lambda) > 0 for all j = 1..k (strict, no epsilon).
bool garding_membership(const PrincipalTuple& lambda, int k);

/// Signed Newton-Maclaurin margin H_j - H_k^{j/k} for 1 <= j < k <= m and
/// lambda in Gamma_k. Nonnegative; zero exactly on constant tuples.
double newton_maclaurin_margin(const PrincipalTuple& lambda, int j, int k);

/// Umbilicity test: relative spread max|lambda_i - lambda_j| / (1 + |mean|)
/// below tolerance.
bool is_umbilic(const PrincipalTuple& lambda, double rel_spread_tol = 1e-8);

/// max|lambda_i - lambda_j| / (1 + |mean|).
double relative_spread(std::span<const double> values);

}  // namespace hyperlab::symm
