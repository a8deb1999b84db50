#pragma once

#include <Eigen/Dense>

namespace hyperlab::ambient {

/// Radius cap: cosh/sinh conditioning degrades beyond, and the problems
/// studied here are scale-free. Enforced by all constructors.
inline constexpr double kMaxRadius = 10.0;

/// Minkowski product with signature (-,+,...,+); coordinate 0 is timelike.
double minkowski_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// A point of H^n in both charts: polar (r, theta) about the base point and
/// hyperboloid X = (cosh r, sinh r * theta) with <X,X> = -1, X0 > 0.
struct AmbientPoint {
    int dim = 0;               // ambient dimension n
    double r = 0.0;            // geodesic distance to the base point
    Eigen::VectorXd theta;     // unit vector in R^n
    Eigen::VectorXd hyperboloid;  // n+1 coordinates

    static AmbientPoint from_polar(int n, double r, const Eigen::VectorXd& theta);
    static AmbientPoint from_hyperboloid(const Eigen::VectorXd& X);
};

/// Element of the static potential space: a0 cosh r + sum_i a_i x^i sinh r.
/// Restricted to the hyperboloid these are exactly the linear functions
/// X -> a0 X^0 + sum_i a_i X^i, which is how values are computed.
struct StaticPotential {
    Eigen::VectorXd coeffs;  // (a0, a1, ..., an)

    static StaticPotential basis(int n, int i);  // V_(i), i = 0..n
    double value(const Eigen::VectorXd& X) const;
    double value(const AmbientPoint& at) const { return value(at.hyperboloid); }

    /// Ambient gradient as a vector in R^{n+1}, tangent to the hyperboloid.
    Eigen::VectorXd gradient_hyperboloid(const Eigen::VectorXd& X) const;
};

/// Lorentz product on the potential space: eta(V,W) = a0 b0 - sum_i a_i b_i.
double lorentz_product(const StaticPotential& V, const StaticPotential& W);

/// Orthonormal tangent frame at a point: column 0 is the radial direction
/// E_r = (sinh r, cosh r * theta); the remaining n-1 columns span the
/// angular directions. Deterministic completion; requires r > 0.
Eigen::MatrixXd polar_frame(const AmbientPoint& at);

struct PotentialGradient {
    double value = 0.0;
    Eigen::VectorXd frame_components;  // w.r.t. polar_frame columns
};

/// Value and ambient gradient of V at a point, gradient expressed in the
/// orthonormal polar frame (radial component first).
PotentialGradient potential_value_and_gradient(const StaticPotential& V, const AmbientPoint& at);

/// Max-norm of (Hess V - V b) sampled on an orthonormal frame by geodesic
/// central differences with step h in the hyperboloid model. O(h^2) for
/// members of the static potential space. Steps h > 0.1 are rejected.
double hessian_residual(const StaticPotential& V, const AmbientPoint& at, double h);

/// Geodesic sphere, possibly off-center: center at hyperbolic distance d
/// from the base point along center_direction, radius rho.
struct SphereSpec {
    double center_distance = 0.0;
    Eigen::VectorXd center_direction;  // unit vector in R^n
    double radius = 1.0;
};

/// Radius r(theta) of the sphere's radial graph about the base point:
/// the unique positive root of
///   cosh rho = cosh r cosh d - sinh r sinh d cos(alpha),
/// alpha the angle between theta and the center direction. Requires d < rho
/// (star-shaped about the base point).
double sphere_radial_function(const SphereSpec& s, const Eigen::VectorXd& theta);

}  // namespace hyperlab::ambient
