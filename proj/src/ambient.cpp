#include "hyperlab/ambient.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperlab::ambient {

double minkowski_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = -a[0] * b[0];
    for (Eigen::Index i = 1; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

AmbientPoint AmbientPoint::from_polar(int n, double r, const Eigen::VectorXd& theta) {
    if (n < 2) throw std::invalid_argument("AmbientPoint: dimension >= 2 required");
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("AmbientPoint: radius must be finite and >= 0");
    if (r > kMaxRadius) throw std::invalid_argument("AmbientPoint: radius exceeds cap 10");
    if (theta.size() != n) throw std::invalid_argument("AmbientPoint: direction size mismatch");
    if (std::abs(theta.norm() - 1.0) > 1e-10) throw std::invalid_argument("AmbientPoint: direction must be a unit vector");
    AmbientPoint p;
    p.dim = n;
    p.r = r;
    p.theta = theta;
    p.hyperboloid.resize(n + 1);
    p.hyperboloid[0] = std::cosh(r);
    p.hyperboloid.tail(n) = std::sinh(r) * theta;
    return p;
}

AmbientPoint AmbientPoint::from_hyperboloid(const Eigen::VectorXd& X) {
    const int n = static_cast<int>(X.size()) - 1;
    if (n < 2) throw std::invalid_argument("AmbientPoint: dimension >= 2 required");
    if (std::abs(minkowski_dot(X, X) + 1.0) > 1e-10 * (1.0 + X[0] * X[0]) || !(X[0] > 0.0))
        throw std::invalid_argument("AmbientPoint: not on the unit hyperboloid");
    AmbientPoint p;
    p.dim = n;
    p.r = std::acosh(std::max(1.0, X[0]));
    if (p.r > kMaxRadius + 1e-12) throw std::invalid_argument("AmbientPoint: radius exceeds cap 10");
    const double sh = std::sinh(p.r);
    if (sh > 1e-300) {
        p.theta = X.tail(n) / sh;
        p.theta.normalize();
    } else {
        p.theta = Eigen::VectorXd::Zero(n);
        p.theta[0] = 1.0;
    }
    p.hyperboloid = X;
    return p;
}

StaticPotential StaticPotential::basis(int n, int i) {
    if (n < 2 || i < 0 || i > n) throw std::invalid_argument("StaticPotential::basis: index out of range");
    StaticPotential v;
    v.coeffs = Eigen::VectorXd::Zero(n + 1);
    v.coeffs[i] = 1.0;
    return v;
}

double StaticPotential::value(const Eigen::VectorXd& X) const {
    return coeffs.dot(X);
}

Eigen::VectorXd StaticPotential::gradient_hyperboloid(const Eigen::VectorXd& X) const {
    // V = <X, A> with A = (-a0, a1, ..., an); grad V = A + V(X) X.
    Eigen::VectorXd A = coeffs;
    A[0] = -A[0];
    return A + value(X) * X;
}

double lorentz_product(const StaticPotential& V, const StaticPotential& W) {
    double s = V.coeffs[0] * W.coeffs[0];
    for (Eigen::Index i = 1; i < V.coeffs.size(); ++i) s -= V.coeffs[i] * W.coeffs[i];
    return s;
}

Eigen::MatrixXd polar_frame(const AmbientPoint& at) {
    const int n = at.dim;
    if (!(at.r > 0.0)) throw std::invalid_argument("polar_frame: polar chart requires r > 0");
    Eigen::MatrixXd frame(n + 1, n);
    frame.col(0).setZero();
    frame(0, 0) = std::sinh(at.r);
    frame.col(0).tail(n) = std::cosh(at.r) * at.theta;

    // deterministic orthonormal completion of theta in R^n
    Eigen::MatrixXd tang(n, n - 1);
    if (n == 2) {
        tang(0, 0) = -at.theta[1];
        tang(1, 0) = at.theta[0];
    } else if (n == 3) {
        Eigen::Vector3d t(at.theta[0], at.theta[1], at.theta[2]);
        Eigen::Vector3d pick = (std::abs(t.z()) < 0.9) ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
        Eigen::Vector3d e1 = t.cross(pick).normalized();
        Eigen::Vector3d e2 = t.cross(e1).normalized();
        tang.col(0) = e1;
        tang.col(1) = e2;
    } else {
        throw std::invalid_argument("polar_frame: only dimensions 2 and 3 supported");
    }
    for (int a = 0; a < n - 1; ++a) {
        frame.col(a + 1).setZero();
        frame.col(a + 1).tail(n) = tang.col(a);
    }
    return frame;
}

PotentialGradient potential_value_and_gradient(const StaticPotential& V, const AmbientPoint& at) {
    PotentialGradient out;
    out.value = V.value(at.hyperboloid);
    const Eigen::VectorXd grad = V.gradient_hyperboloid(at.hyperboloid);
    out.frame_components.resize(at.dim);
    if (at.r > 0.0) {
        const Eigen::MatrixXd frame = polar_frame(at);
        for (int a = 0; a < at.dim; ++a) out.frame_components[a] = minkowski_dot(grad, frame.col(a));
    } else {
        // grad is tangent at the base point, components (0, a1..an) there.
        out.frame_components = grad.tail(at.dim);
    }
    return out;
}

namespace {

Eigen::VectorXd geodesic_step(const Eigen::VectorXd& X, const Eigen::VectorXd& u, double t) {
    return std::cosh(t) * X + std::sinh(t) * u;
}

double second_difference(const StaticPotential& V, const Eigen::VectorXd& X, const Eigen::VectorXd& u,
                         double h) {
    return (V.value(geodesic_step(X, u, h)) - 2.0 * V.value(X) + V.value(geodesic_step(X, u, -h))) / (h * h);
}

}  // namespace

double hessian_residual(const StaticPotential& V, const AmbientPoint& at, double h) {
    if (!(h > 0.0) || h > 0.1) throw std::invalid_argument("hessian_residual: step must satisfy 0 < h <= 0.1");
    if (!(at.r > 0.0)) throw std::invalid_argument("hessian_residual: polar chart requires r > 0");
    const int n = at.dim;
    const Eigen::MatrixXd frame = polar_frame(at);
    const double v = V.value(at.hyperboloid);
    const Eigen::VectorXd& X = at.hyperboloid;

    double worst = 0.0;
    constexpr double inv_sqrt2 = 0.7071067811865476;
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            double hess;
            if (a == b) {
                hess = second_difference(V, X, frame.col(a), h);
            } else {
                const Eigen::VectorXd up = inv_sqrt2 * (frame.col(a) + frame.col(b));
                const Eigen::VectorXd um = inv_sqrt2 * (frame.col(a) - frame.col(b));
                hess = 0.5 * (second_difference(V, X, up, h) - second_difference(V, X, um, h));
            }
            const double target = (a == b) ? v : 0.0;
            worst = std::max(worst, std::abs(hess - target));
        }
    }
    return worst;
}

double sphere_radial_function(const SphereSpec& s, const Eigen::VectorXd& theta) {
    if (!(s.radius > 0.0)) throw std::invalid_argument("sphere_radial_function: radius must be positive");
    if (s.center_distance < 0.0) throw std::invalid_argument("sphere_radial_function: center distance must be >= 0");
    if (s.center_distance >= s.radius)
        throw std::domain_error("sphere_radial_function: not star-shaped (center distance >= radius)");
    if (s.center_distance + s.radius > kMaxRadius)
        throw std::invalid_argument("sphere_radial_function: exceeds radius cap 10");
    const double d = s.center_distance;
    if (d == 0.0) return s.radius;
    double cos_alpha = s.center_direction.dot(theta) / s.center_direction.norm();
    cos_alpha = std::clamp(cos_alpha, -1.0, 1.0);

    // cosh rho = A cosh r - B sinh r = sqrt(A^2-B^2) cosh(r - t), t = atanh(B/A)
    const double A = std::cosh(d);
    const double B = std::sinh(d) * cos_alpha;
    const double t = std::atanh(B / A);
    const double scale = std::sqrt(A * A - B * B);
    const double q = std::cosh(s.radius) / scale;
    if (q < 1.0 - 1e-12) throw std::runtime_error("sphere_radial_function: no root (internal error)");
    const double r = t + std::acosh(std::max(1.0, q));
    if (!(r > 0.0)) throw std::runtime_error("sphere_radial_function: nonpositive root (internal error)");
    return r;
}

}  // namespace hyperlab::ambient
