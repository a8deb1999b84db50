#include "hyperlab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hyperlab/spectral.hpp"
#include "hyperlab/symm.hpp"

namespace hyperlab::surface {

using spectral::packed_lm;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;
constexpr double kSqrt4Pi = 3.5449077018110318;  // sqrt(4 pi)
}  // namespace

int RadialShape::coeff_count(int dim, int band_limit) {
    if (dim == 2) return 2 * band_limit + 1;
    if (dim == 3) return (band_limit + 1) * (band_limit + 1);
    throw std::invalid_argument("RadialShape: dimension must be 2 or 3");
}

RadialShape RadialShape::sphere(int dim, double rho, int band_limit) {
    if (!(rho > 0.0) || rho > ambient::kMaxRadius)
        throw std::invalid_argument("RadialShape::sphere: radius must lie in (0, 10]");
    RadialShape s;
    s.dim = dim;
    s.band_limit = band_limit;
    s.coeffs.assign(static_cast<size_t>(coeff_count(dim, band_limit)), 0.0);
    s.coeffs[0] = (dim == 2) ? rho : rho * kSqrt4Pi;
    s.description = "centered geodesic sphere";
    return s;
}

void RadialShape::validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("RadialShape: dimension must be 2 or 3");
    if (band_limit < 0) throw std::invalid_argument("RadialShape: band limit must be >= 0");
    if (static_cast<int>(coeffs.size()) != coeff_count(dim, band_limit))
        throw std::invalid_argument("RadialShape: coefficient count does not match band limit");
    for (double c : coeffs)
        if (!std::isfinite(c)) throw std::invalid_argument("RadialShape: coefficients must be finite");
}

QuadratureGrid::QuadratureGrid(int dim_, int resolution_) : dim(dim_), resolution(resolution_) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("QuadratureGrid: dimension must be 2 or 3");
    if (resolution < 2) throw std::invalid_argument("QuadratureGrid: resolution >= 2 required");
    if (dim == 2) {
        n_azimuth = resolution;
        azimuth.resize(static_cast<size_t>(resolution));
        weight.assign(static_cast<size_t>(resolution), kTwoPi / resolution);
        for (int q = 0; q < resolution; ++q) azimuth[static_cast<size_t>(q)] = kTwoPi * q / resolution;
        return;
    }
    n_polar = resolution;
    n_azimuth = resolution;
    const auto rule = spectral::gauss_legendre(n_polar);
    gl_u = rule.nodes;
    gl_w = rule.weights;
    const int nq = n_polar * n_azimuth;
    polar_angle.resize(static_cast<size_t>(nq));
    polar_u.resize(static_cast<size_t>(nq));
    azimuth.resize(static_cast<size_t>(nq));
    weight.resize(static_cast<size_t>(nq));
    const double wz = kTwoPi / n_azimuth;
    for (int iu = 0; iu < n_polar; ++iu) {
        const double u = gl_u[static_cast<size_t>(iu)];
        const double th = std::acos(u);
        for (int ia = 0; ia < n_azimuth; ++ia) {
            const int q = iu * n_azimuth + ia;
            polar_u[static_cast<size_t>(q)] = u;
            polar_angle[static_cast<size_t>(q)] = th;
            azimuth[static_cast<size_t>(q)] = wz * ia;
            weight[static_cast<size_t>(q)] = gl_w[static_cast<size_t>(iu)] * wz;
        }
    }
}

Eigen::VectorXd QuadratureGrid::node_direction(int q) const {
    Eigen::VectorXd v(dim);
    const double ph = azimuth[static_cast<size_t>(q)];
    if (dim == 2) {
        v << std::cos(ph), std::sin(ph);
    } else {
        const double u = polar_u[static_cast<size_t>(q)];
        const double s = std::sin(polar_angle[static_cast<size_t>(q)]);
        v << s * std::cos(ph), s * std::sin(ph), u;
    }
    return v;
}

ShapeSynthesis::ShapeSynthesis(const QuadratureGrid& grid, int dim, int band_limit)
    : dim_(dim), band_limit_(band_limit) {
    if (grid.dim != dim) throw std::invalid_argument("ShapeSynthesis: grid dimension mismatch");
    const int L = band_limit;
    weight_ = grid.weight;
    if (dim == 2) {
        if (grid.resolution < 2 * L + 2)
            throw std::invalid_argument("ShapeSynthesis: grid resolution must be >= 2L+2");
        n_nodes_ = grid.node_count();
        n_azimuth_ = grid.n_azimuth;
        cos_m_.resize(static_cast<size_t>(n_nodes_ * (L + 1)));
        sin_m_.resize(static_cast<size_t>(n_nodes_ * (L + 1)));
        for (int q = 0; q < n_nodes_; ++q) {
            for (int l = 0; l <= L; ++l) {
                cos_m_[static_cast<size_t>(q * (L + 1) + l)] = std::cos(l * grid.azimuth[static_cast<size_t>(q)]);
                sin_m_[static_cast<size_t>(q * (L + 1) + l)] = std::sin(l * grid.azimuth[static_cast<size_t>(q)]);
            }
        }
        return;
    }
    if (grid.n_polar < 2 * L + 2 || grid.n_azimuth < 2 * L + 2)
        throw std::invalid_argument("ShapeSynthesis: grid resolution must be >= 2L+2 in each direction");
    n_polar_ = grid.n_polar;
    n_azimuth_ = grid.n_azimuth;
    n_nodes_ = grid.node_count();
    gl_w_ = grid.gl_w;
    const int tab = (L + 1) * (L + 2) / 2;
    P_.resize(static_cast<size_t>(n_polar_ * tab));
    dP_.resize(static_cast<size_t>(n_polar_ * tab));
    d2P_.resize(static_cast<size_t>(n_polar_ * tab));
    for (int iu = 0; iu < n_polar_; ++iu) {
        std::span<double> P(P_.data() + iu * tab, static_cast<size_t>(tab));
        std::span<double> dP(dP_.data() + iu * tab, static_cast<size_t>(tab));
        std::span<double> d2P(d2P_.data() + iu * tab, static_cast<size_t>(tab));
        spectral::normalized_assoc_legendre(L, grid.gl_u[static_cast<size_t>(iu)], P, dP, d2P);
    }
    cos_m_.resize(static_cast<size_t>(n_azimuth_ * (L + 1)));
    sin_m_.resize(static_cast<size_t>(n_azimuth_ * (L + 1)));
    const double wz = kTwoPi / n_azimuth_;
    for (int ia = 0; ia < n_azimuth_; ++ia) {
        for (int m = 0; m <= L; ++m) {
            cos_m_[static_cast<size_t>(ia * (L + 1) + m)] = std::cos(m * wz * ia);
            sin_m_[static_cast<size_t>(ia * (L + 1) + m)] = std::sin(m * wz * ia);
        }
    }
}

void ShapeSynthesis::jets(std::span<const double> coeffs, std::vector<ShapeJet>& out) const {
    const int L = band_limit_;
    out.assign(static_cast<size_t>(n_nodes_), ShapeJet{});
    if (dim_ == 2) {
        for (int q = 0; q < n_nodes_; ++q) {
            const double* c = cos_m_.data() + q * (L + 1);
            const double* s = sin_m_.data() + q * (L + 1);
            double r = coeffs[0], rp = 0, rpp = 0;
            for (int l = 1; l <= L; ++l) {
                const double al = coeffs[static_cast<size_t>(2 * l - 1)];
                const double bl = coeffs[static_cast<size_t>(2 * l)];
                r += al * c[l] + bl * s[l];
                rp += l * (-al * s[l] + bl * c[l]);
                rpp -= l * l * (al * c[l] + bl * s[l]);
            }
            out[static_cast<size_t>(q)].r = r;
            out[static_cast<size_t>(q)].r_ph = rp;
            out[static_cast<size_t>(q)].r_phph = rpp;
        }
        return;
    }
    const int tab = (L + 1) * (L + 2) / 2;
    // Per polar row: azimuthal-mode profiles A_m(u) (cos part) and B_m(u)
    // (sin part) together with their theta-derivatives.
    std::vector<double> Ac(static_cast<size_t>(L + 1)), As(static_cast<size_t>(L + 1));
    std::vector<double> dAc(static_cast<size_t>(L + 1)), dAs(static_cast<size_t>(L + 1));
    std::vector<double> d2Ac(static_cast<size_t>(L + 1)), d2As(static_cast<size_t>(L + 1));
    constexpr double kSqrt2 = 1.4142135623730951;
    for (int iu = 0; iu < n_polar_; ++iu) {
        const double* P = P_.data() + iu * tab;
        const double* dP = dP_.data() + iu * tab;
        const double* d2P = d2P_.data() + iu * tab;
        for (int m = 0; m <= L; ++m) {
            double ac = 0, as = 0, dac = 0, das = 0, d2ac = 0, d2as = 0;
            const double norm = (m == 0) ? 1.0 : kSqrt2;
            for (int l = m; l <= L; ++l) {
                const int t = packed_lm(l, m);
                const double cc = norm * coeffs[static_cast<size_t>(l * l + l + m)];
                ac += cc * P[t];
                dac += cc * dP[t];
                d2ac += cc * d2P[t];
                if (m > 0) {
                    const double cs = norm * coeffs[static_cast<size_t>(l * l + l - m)];
                    as += cs * P[t];
                    das += cs * dP[t];
                    d2as += cs * d2P[t];
                }
            }
            Ac[static_cast<size_t>(m)] = ac;
            As[static_cast<size_t>(m)] = as;
            dAc[static_cast<size_t>(m)] = dac;
            dAs[static_cast<size_t>(m)] = das;
            d2Ac[static_cast<size_t>(m)] = d2ac;
            d2As[static_cast<size_t>(m)] = d2as;
        }
        for (int ia = 0; ia < n_azimuth_; ++ia) {
            const double* c = cos_m_.data() + ia * (L + 1);
            const double* s = sin_m_.data() + ia * (L + 1);
            ShapeJet jet;
            for (int m = 0; m <= L; ++m) {
                const double cm = c[m], sm = s[m];
                jet.r += cm * Ac[static_cast<size_t>(m)] + sm * As[static_cast<size_t>(m)];
                jet.r_th += cm * dAc[static_cast<size_t>(m)] + sm * dAs[static_cast<size_t>(m)];
                jet.r_thth += cm * d2Ac[static_cast<size_t>(m)] + sm * d2As[static_cast<size_t>(m)];
                jet.r_ph += m * (-sm * Ac[static_cast<size_t>(m)] + cm * As[static_cast<size_t>(m)]);
                jet.r_thph += m * (-sm * dAc[static_cast<size_t>(m)] + cm * dAs[static_cast<size_t>(m)]);
                jet.r_phph -= m * m * (cm * Ac[static_cast<size_t>(m)] + sm * As[static_cast<size_t>(m)]);
            }
            out[static_cast<size_t>(iu * n_azimuth_ + ia)] = jet;
        }
    }
}

std::vector<double> ShapeSynthesis::values(std::span<const double> coeffs) const {
    std::vector<ShapeJet> j;
    jets(coeffs, j);
    std::vector<double> v(j.size());
    for (size_t q = 0; q < j.size(); ++q) v[q] = j[q].r;
    return v;
}

std::vector<double> ShapeSynthesis::analyze(std::span<const double> node_values) const {
    const int L = band_limit_;
    std::vector<double> c(static_cast<size_t>(RadialShape::coeff_count(dim_, L)), 0.0);
    if (dim_ == 2) {
        for (int q = 0; q < n_nodes_; ++q) {
            const double fw = node_values[static_cast<size_t>(q)] * weight_[static_cast<size_t>(q)];
            const double* cs = cos_m_.data() + q * (L + 1);
            const double* sn = sin_m_.data() + q * (L + 1);
            c[0] += fw / kTwoPi;
            for (int l = 1; l <= L; ++l) {
                c[static_cast<size_t>(2 * l - 1)] += fw * cs[l] / std::numbers::pi;
                c[static_cast<size_t>(2 * l)] += fw * sn[l] / std::numbers::pi;
            }
        }
        return c;
    }
    const int tab = (L + 1) * (L + 2) / 2;
    constexpr double kSqrt2 = 1.4142135623730951;
    for (int iu = 0; iu < n_polar_; ++iu) {
        const double* P = P_.data() + iu * tab;
        for (int ia = 0; ia < n_azimuth_; ++ia) {
            const int q = iu * n_azimuth_ + ia;
            const double fw = node_values[static_cast<size_t>(q)] * weight_[static_cast<size_t>(q)];
            const double* cs = cos_m_.data() + ia * (L + 1);
            const double* sn = sin_m_.data() + ia * (L + 1);
            for (int m = 0; m <= L; ++m) {
                const double norm = (m == 0) ? 1.0 : kSqrt2;
                for (int l = m; l <= L; ++l) {
                    const double y = norm * P[packed_lm(l, m)];
                    c[static_cast<size_t>(l * l + l + m)] += fw * y * cs[m];
                    if (m > 0) c[static_cast<size_t>(l * l + l - m)] += fw * y * sn[m];
                }
            }
        }
    }
    return c;
}

namespace {

SurfaceSample make_sample(int dim, double theta, double phi, double w, const ShapeJet& jet) {
    SurfaceSample smp;
    smp.theta = theta;
    smp.phi = phi;
    const double r = jet.r;
    if (!(r > 0.0)) throw std::domain_error("build_geometry: radius not positive (not star-shaped)");
    if (r > ambient::kMaxRadius + 1e-9) throw std::domain_error("build_geometry: radius exceeds cap 10");
    const double lam = std::sinh(r);
    const double lamp = std::cosh(r);
    smp.r = r;
    smp.V = lamp;

    if (dim == 2) {
        const double rp = jet.r_ph;
        const double grad2 = rp * rp;
        const double W = std::sqrt(1.0 + grad2 / (lam * lam));
        const double g = rp * rp + lam * lam;
        const double h = (-jet.r_phph + lam * lamp + 2.0 * (lamp / lam) * rp * rp) / W;
        smp.W = W;
        smp.p = lam / W;
        smp.area_weight = lam * W * w;
        smp.grad_r[0] = rp;
        smp.grad_V[0] = lam * rp;
        smp.g(0, 0) = g;
        smp.g_inv(0, 0) = 1.0 / g;
        smp.shape_op(0, 0) = h / g;
        smp.principal[0] = h / g;
        smp.normal_frame[0] = 1.0 / W;
        smp.normal_frame[1] = -rp / (W * lam);
        return smp;
    }

    const double u = std::cos(theta);
    const double s = std::sin(theta);
    const double rth = jet.r_th, rph = jet.r_ph;
    // covariant Hessian of r on the round sphere (lat-long chart)
    const double H_tt = jet.r_thth;
    const double H_tp = jet.r_thph - (u / s) * rph;
    const double H_pp = jet.r_phph + s * u * rth;
    const double grad2 = rth * rth + (rph * rph) / (s * s);
    const double W = std::sqrt(1.0 + grad2 / (lam * lam));

    Eigen::Matrix2d g;
    g(0, 0) = rth * rth + lam * lam;
    g(0, 1) = rth * rph;
    g(1, 0) = g(0, 1);
    g(1, 1) = rph * rph + lam * lam * s * s;
    const double detg = lam * lam * lam * lam * s * s * W * W;
    if (!(detg > 0.0)) throw std::domain_error("build_geometry: degenerate induced metric");
    Eigen::Matrix2d ginv;
    ginv(0, 0) = g(1, 1) / detg;
    ginv(1, 1) = g(0, 0) / detg;
    ginv(0, 1) = -g(0, 1) / detg;
    ginv(1, 0) = ginv(0, 1);

    Eigen::Matrix2d h;
    const double c2 = 2.0 * lamp / lam;
    h(0, 0) = (-H_tt + lam * lamp + c2 * rth * rth) / W;
    h(0, 1) = (-H_tp + c2 * rth * rph) / W;
    h(1, 0) = h(0, 1);
    h(1, 1) = (-H_pp + lam * lamp * s * s + c2 * rph * rph) / W;

    smp.W = W;
    smp.p = lam / W;
    smp.area_weight = lam * lam * W * w;
    smp.grad_r[0] = rth;
    smp.grad_r[1] = rph;
    smp.grad_V[0] = lam * rth;
    smp.grad_V[1] = lam * rph;
    smp.g = g;
    smp.g_inv = ginv;
    smp.shape_op = ginv * h;

    // eigenvalues of g^{-1} h via the metric Cholesky similarity S = L^{-1} h L^{-T}
    const double L00 = std::sqrt(g(0, 0));
    const double L10 = g(0, 1) / L00;
    const double L11 = std::sqrt(std::max(g(1, 1) - L10 * L10, 1e-300));
    const double M00 = h(0, 0) / L00, M01 = h(0, 1) / L00;
    const double M10 = (h(1, 0) - L10 * M00) / L11, M11 = (h(1, 1) - L10 * M01) / L11;
    const double S00 = M00 / L00;
    const double S10 = M10 / L00;
    const double S01 = (M01 - S00 * L10) / L11;
    const double S11 = (M11 - S10 * L10) / L11;
    const double off = 0.5 * (S01 + S10);
    const double mean = 0.5 * (S00 + S11);
    const double disc = std::sqrt(0.25 * (S00 - S11) * (S00 - S11) + off * off);
    smp.principal[0] = mean - disc;
    smp.principal[1] = mean + disc;

    smp.normal_frame[0] = 1.0 / W;
    smp.normal_frame[1] = -rth / (W * lam);
    smp.normal_frame[2] = -rph / (W * lam * s);
    return smp;
}

}  // namespace

SurfaceSample sample_from_jet(int dim, double theta, double phi, double weight, const ShapeJet& jet) {
    return make_sample(dim, theta, phi, weight, jet);
}

ambient::AmbientPoint SurfaceGeometry::position(int q) const {
    return ambient::AmbientPoint::from_polar(dim, samples[static_cast<size_t>(q)].r, grid.node_direction(q));
}

double SurfaceGeometry::umbilicity_spread() const {
    // Closed totally umbilical hypersurfaces in H^n have globally constant
    // principal curvature, so the statistic is the global eigenvalue spread
    // (which dominates the per-node spread, and stays meaningful for curves).
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, acc = 0.0;
    int count = 0;
    for (const auto& s : samples) {
        for (int i = 0; i < m; ++i) {
            lo = std::min(lo, s.principal[i]);
            hi = std::max(hi, s.principal[i]);
            acc += s.principal[i];
            ++count;
        }
    }
    return (hi - lo) / (1.0 + std::abs(acc / count));
}

bool SurfaceGeometry::garding_everywhere(int k) const {
    for (const auto& s : samples) {
        const std::span<const double> lam(s.principal, static_cast<size_t>(m));
        const auto sig = symm::elementary_symmetric_all(lam);
        for (int j = 1; j <= k; ++j)
            if (!(sig[static_cast<size_t>(j)] > 0.0)) return false;
    }
    return true;
}

double SurfaceGeometry::min_Hk(int k) const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        const std::span<const double> lam(s.principal, static_cast<size_t>(m));
        const auto sig = symm::elementary_symmetric_all(lam);
        lo = std::min(lo, sig[static_cast<size_t>(k)] / symm::binomial(m, k));
    }
    return lo;
}

SurfaceGeometry build_geometry(const RadialShape& shape, const QuadratureGrid& grid,
                               const ShapeSynthesis& synthesis) {
    shape.validate();
    if (grid.dim != shape.dim) throw std::invalid_argument("build_geometry: dimension mismatch");
    SurfaceGeometry geo(grid);
    geo.dim = shape.dim;
    geo.m = shape.dim - 1;
    std::vector<ShapeJet> jets;
    synthesis.jets(shape.coeffs, jets);
    const int nq = grid.node_count();
    geo.samples.reserve(static_cast<size_t>(nq));
    double area = 0.0, rint = 0.0;
    double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
    for (int q = 0; q < nq; ++q) {
        const double th = (shape.dim == 3) ? grid.polar_angle[static_cast<size_t>(q)] : 0.0;
        SurfaceSample smp =
            make_sample(shape.dim, th, grid.azimuth[static_cast<size_t>(q)], grid.weight[static_cast<size_t>(q)],
                        jets[static_cast<size_t>(q)]);
        area += smp.area_weight;
        rint += smp.r * smp.area_weight;
        rmin = std::min(rmin, smp.r);
        rmax = std::max(rmax, smp.r);
        geo.samples.push_back(smp);
    }
    geo.total_area = area;
    geo.r_min = rmin;
    geo.r_max = rmax;
    geo.r_mean = rint / area;
    return geo;
}

SurfaceGeometry build_geometry(const RadialShape& shape, const QuadratureGrid& grid) {
    const ShapeSynthesis synthesis(grid, shape.dim, shape.band_limit);
    return build_geometry(shape, grid, synthesis);
}

double radius_at(const RadialShape& shape, double theta, double phi) {
    const int L = shape.band_limit;
    if (shape.dim == 2) {
        double r = shape.coeffs[0];
        for (int l = 1; l <= L; ++l)
            r += shape.coeffs[static_cast<size_t>(2 * l - 1)] * std::cos(l * phi) +
                 shape.coeffs[static_cast<size_t>(2 * l)] * std::sin(l * phi);
        return r;
    }
    const int tab = (L + 1) * (L + 2) / 2;
    std::vector<double> P(static_cast<size_t>(tab));
    spectral::normalized_assoc_legendre(L, std::cos(theta), P);
    constexpr double kSqrt2 = 1.4142135623730951;
    double r = 0.0;
    for (int m = 0; m <= L; ++m) {
        const double norm = (m == 0) ? 1.0 : kSqrt2;
        const double cm = std::cos(m * phi), sm = std::sin(m * phi);
        for (int l = m; l <= L; ++l) {
            const double y = norm * P[static_cast<size_t>(packed_lm(l, m))];
            r += shape.coeffs[static_cast<size_t>(l * l + l + m)] * y * cm;
            if (m > 0) r += shape.coeffs[static_cast<size_t>(l * l + l - m)] * y * sm;
        }
    }
    return r;
}

namespace {

Eigen::VectorXd embed(const RadialShape& shape, double theta, double phi) {
    const double r = radius_at(shape, theta, phi);
    const double ch = std::cosh(r), sh = std::sinh(r);
    if (shape.dim == 2) {
        Eigen::VectorXd X(3);
        X << ch, sh * std::cos(phi), sh * std::sin(phi);
        return X;
    }
    Eigen::VectorXd X(4);
    const double s = std::sin(theta);
    X << ch, sh * s * std::cos(phi), sh * s * std::sin(phi), sh * std::cos(theta);
    return X;
}

}  // namespace

std::optional<Eigen::MatrixXd> oracle_shape_operator(const RadialShape& shape, double theta, double phi,
                                                     double h) {
    shape.validate();
    if (!(h > 0.0) || h > 0.05) throw std::invalid_argument("oracle_shape_operator: step must satisfy 0 < h <= 0.05");
    const int m = shape.dim - 1;
    const int dimX = shape.dim + 1;
    if (shape.dim == 3 && (theta < 2.0 * h || theta > std::numbers::pi - 2.0 * h)) return std::nullopt;

    const Eigen::VectorXd Xc = embed(shape, theta, phi);
    std::vector<Eigen::VectorXd> D1(static_cast<size_t>(m));
    Eigen::MatrixXd gij(m, m);
    Eigen::MatrixXd hij(m, m);

    auto at = [&](double dth, double dph) { return embed(shape, theta + dth, phi + dph); };

    if (m == 1) {
        D1[0] = (at(0, h) - at(0, -h)) / (2.0 * h);
    } else {
        D1[0] = (at(h, 0) - at(-h, 0)) / (2.0 * h);
        D1[1] = (at(0, h) - at(0, -h)) / (2.0 * h);
    }

    // Minkowski-orthogonal complement of span{X, D_i X}: nullspace of J-rows.
    Eigen::MatrixXd rows(m + 1, dimX);
    auto jrow = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd w = v;
        w[0] = -w[0];
        return w;
    };
    rows.row(0) = jrow(Xc).transpose();
    for (int i = 0; i < m; ++i) rows.row(i + 1) = jrow(D1[static_cast<size_t>(i)]).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
    Eigen::VectorXd nu = svd.matrixV().col(dimX - 1);
    const double nn = ambient::minkowski_dot(nu, nu);
    if (!(nn > 0.0)) throw std::runtime_error("oracle_shape_operator: degenerate normal");
    nu /= std::sqrt(nn);
    if (nu[0] < 0.0) nu = -nu;  // outward: support function nu^0 > 0

    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) gij(i, j) = ambient::minkowski_dot(D1[static_cast<size_t>(i)], D1[static_cast<size_t>(j)]);

    if (m == 1) {
        const Eigen::VectorXd D2 = (at(0, h) - 2.0 * Xc + at(0, -h)) / (h * h);
        hij(0, 0) = -ambient::minkowski_dot(D2, nu);
    } else {
        const Eigen::VectorXd Dtt = (at(h, 0) - 2.0 * Xc + at(-h, 0)) / (h * h);
        const Eigen::VectorXd Dpp = (at(0, h) - 2.0 * Xc + at(0, -h)) / (h * h);
        const Eigen::VectorXd Dtp =
            (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        hij(0, 0) = -ambient::minkowski_dot(Dtt, nu);
        hij(0, 1) = -ambient::minkowski_dot(Dtp, nu);
        hij(1, 0) = hij(0, 1);
        hij(1, 1) = -ambient::minkowski_dot(Dpp, nu);
    }
    return Eigen::MatrixXd(gij.inverse() * hij);
}

RadialShape perturb_sphere(int dim, double rho, double amplitude, std::uint64_t seed, int band_limit) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("perturb_sphere: dimension must be 2 or 3");
    if (!(rho > 0.0)) throw std::invalid_argument("perturb_sphere: radius must be positive");
    if (!(amplitude >= 0.0) || amplitude >= rho / 2.0)
        throw std::invalid_argument("perturb_sphere: amplitude must lie in [0, rho/2)");
    if (rho + amplitude > ambient::kMaxRadius) throw std::invalid_argument("perturb_sphere: exceeds radius cap 10");
    if (amplitude == 0.0) return RadialShape::sphere(dim, rho, band_limit);
    if (band_limit < 1) throw std::invalid_argument("perturb_sphere: band limit >= 1 required");

    const int check_res = std::max(2 * band_limit + 2, 24);
    const QuadratureGrid grid(dim, check_res);
    const ShapeSynthesis synthesis(grid, dim, band_limit);

    RadialShape shape;
    shape.dim = dim;
    shape.band_limit = band_limit;
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> gauss(0.0, 1.0);
        shape.coeffs.assign(static_cast<size_t>(RadialShape::coeff_count(dim, band_limit)), 0.0);
        if (dim == 2) {
            for (int l = 1; l <= band_limit; ++l) {
                shape.coeffs[static_cast<size_t>(2 * l - 1)] = gauss(rng) / (1.0 + l);
                shape.coeffs[static_cast<size_t>(2 * l)] = gauss(rng) / (1.0 + l);
            }
        } else {
            for (int l = 1; l <= band_limit; ++l)
                for (int mm = -l; mm <= l; ++mm)
                    shape.coeffs[static_cast<size_t>(l * l + l + mm)] = gauss(rng) / (1.0 + l);
        }
        const auto vals = synthesis.values(shape.coeffs);
        double sup = 0.0;
        for (double v : vals) sup = std::max(sup, std::abs(v));
        if (sup <= 0.0) continue;
        for (double& c : shape.coeffs) c *= amplitude / sup;
        shape.coeffs[0] += (dim == 2) ? rho : rho * kSqrt4Pi;

        try {
            const SurfaceGeometry geo = build_geometry(shape, grid, synthesis);
            if (geo.garding_everywhere(dim - 1)) {
                std::ostringstream desc;
                desc << "perturbed sphere rho=" << rho << " amplitude=" << amplitude << " seed=" << seed;
                shape.description = desc.str();
                return shape;
            }
        } catch (const std::domain_error&) {
            // infeasible draw; resample
        }
    }
    throw std::runtime_error("perturb_sphere: could not draw a Gamma-valid perturbation");
}

RadialShape project_sphere(const ambient::SphereSpec& spec, int dim, int band_limit) {
    const int res = std::max(2 * band_limit + 4, 32);
    const QuadratureGrid grid(dim, res);
    const ShapeSynthesis synthesis(grid, dim, band_limit);
    std::vector<double> vals(static_cast<size_t>(grid.node_count()));
    for (int q = 0; q < grid.node_count(); ++q)
        vals[static_cast<size_t>(q)] = ambient::sphere_radial_function(spec, grid.node_direction(q));
    RadialShape shape;
    shape.dim = dim;
    shape.band_limit = band_limit;
    shape.coeffs = synthesis.analyze(vals);
    std::ostringstream desc;
    desc << "geodesic sphere rho=" << spec.radius << " center distance=" << spec.center_distance;
    shape.description = desc.str();
    return shape;
}

namespace {

// Real azimuthal DFT of one polar row: a_m, b_m such that
// f = a_0 + sum_m (a_m cos m phi + b_m sin m phi) (+ Nyquist cos term).
struct AzimuthalModes {
    std::vector<double> a, b;  // size n/2+1
};

AzimuthalModes row_dft(std::span<const double> f) {
    const int n = static_cast<int>(f.size());
    const int half = n / 2;
    AzimuthalModes mo;
    mo.a.assign(static_cast<size_t>(half) + 1, 0.0);
    mo.b.assign(static_cast<size_t>(half) + 1, 0.0);
    for (int m = 0; m <= half; ++m) {
        double ca = 0.0, cb = 0.0;
        for (int q = 0; q < n; ++q) {
            const double ang = kTwoPi * m * q / n;
            ca += f[static_cast<size_t>(q)] * std::cos(ang);
            cb += f[static_cast<size_t>(q)] * std::sin(ang);
        }
        const double scale = (m == 0 || (n % 2 == 0 && m == half)) ? 1.0 / n : 2.0 / n;
        mo.a[static_cast<size_t>(m)] = ca * scale;
        mo.b[static_cast<size_t>(m)] = cb * scale;
    }
    return mo;
}

}  // namespace

std::vector<double> divergence(const QuadratureGrid& grid, std::span<const double> area_density,
                               std::span<const double> Y_theta, std::span<const double> Y_phi) {
    const int nq = grid.node_count();
    std::vector<double> out(static_cast<size_t>(nq), 0.0);

    if (grid.dim == 2) {
        // div = (1/rho) d_phi(rho Y^phi), rho = sqrt(g_phiphi)
        const int n = grid.n_azimuth;
        std::vector<double> F(static_cast<size_t>(n));
        for (int q = 0; q < n; ++q) F[static_cast<size_t>(q)] = area_density[static_cast<size_t>(q)] * Y_phi[static_cast<size_t>(q)];
        const AzimuthalModes mo = row_dft(F);
        const int half = n / 2;
        // the even-N Nyquist mode has zero derivative at the nodes; for odd N
        // the top mode is a regular one and participates
        const int m_top = (n % 2 == 0) ? half - 1 : half;
        for (int q = 0; q < n; ++q) {
            double d = 0.0;
            const double ph = grid.azimuth[static_cast<size_t>(q)];
            for (int m = 1; m <= m_top; ++m)
                d += m * (-mo.a[static_cast<size_t>(m)] * std::sin(m * ph) + mo.b[static_cast<size_t>(m)] * std::cos(m * ph));
            out[static_cast<size_t>(q)] = d / area_density[static_cast<size_t>(q)];
        }
        return out;
    }

    const int np = grid.n_polar, na = grid.n_azimuth;
    if (np < 4) throw std::invalid_argument("divergence: polar resolution >= 4 required");
    const int half = na / 2;
    const int Lt = np - 1;

    // Flux fields: F_theta = sin(theta) rho Y^theta (per node), F_phi = rho Y^phi.
    // div = (1/rho) (-d_u F_theta + d_phi F_phi).
    std::vector<double> Fth(static_cast<size_t>(nq)), Fph(static_cast<size_t>(nq));
    for (int q = 0; q < nq; ++q) {
        const double s = std::sin(grid.polar_angle[static_cast<size_t>(q)]);
        Fth[static_cast<size_t>(q)] = s * area_density[static_cast<size_t>(q)] * Y_theta[static_cast<size_t>(q)];
        Fph[static_cast<size_t>(q)] = area_density[static_cast<size_t>(q)] * Y_phi[static_cast<size_t>(q)];
    }

    // d_phi F_phi row by row (exact trigonometric derivative).
    std::vector<double> dFph(static_cast<size_t>(nq), 0.0);
    std::vector<double> row(static_cast<size_t>(na));
    const int m_top = (na % 2 == 0) ? half - 1 : half;
    for (int iu = 0; iu < np; ++iu) {
        for (int ia = 0; ia < na; ++ia) row[static_cast<size_t>(ia)] = Fph[static_cast<size_t>(iu * na + ia)];
        const AzimuthalModes mo = row_dft(row);
        for (int ia = 0; ia < na; ++ia) {
            const double ph = grid.azimuth[static_cast<size_t>(iu * na + ia)];
            double d = 0.0;
            for (int m = 1; m <= m_top; ++m)
                d += m * (-mo.a[static_cast<size_t>(m)] * std::sin(m * ph) + mo.b[static_cast<size_t>(m)] * std::cos(m * ph));
            dFph[static_cast<size_t>(iu * na + ia)] = d;
        }
    }

    // Azimuthal analysis of F_theta, then per-mode Legendre differentiation
    // in u. Legendre tables at the GL nodes.
    std::vector<double> Ptab(static_cast<size_t>(np * (Lt + 1))), dPtab(static_cast<size_t>(np * (Lt + 1)));
    for (int iu = 0; iu < np; ++iu) {
        std::span<double> p(Ptab.data() + iu * (Lt + 1), static_cast<size_t>(Lt + 1));
        std::span<double> dp(dPtab.data() + iu * (Lt + 1), static_cast<size_t>(Lt + 1));
        spectral::legendre_values_and_derivatives(Lt, grid.gl_u[static_cast<size_t>(iu)], p, dp);
    }

    std::vector<AzimuthalModes> modes(static_cast<size_t>(np));
    for (int iu = 0; iu < np; ++iu) {
        for (int ia = 0; ia < na; ++ia) row[static_cast<size_t>(ia)] = Fth[static_cast<size_t>(iu * na + ia)];
        modes[static_cast<size_t>(iu)] = row_dft(row);
    }

    std::vector<double> prof(static_cast<size_t>(np)), dprof(static_cast<size_t>(np));
    std::vector<double> coeff(static_cast<size_t>(Lt + 1));
    std::vector<double> dFth(static_cast<size_t>(nq), 0.0);

    auto legendre_fit = [&](std::span<const double> vals, int degree) {
        std::fill(coeff.begin(), coeff.end(), 0.0);
        for (int iu = 0; iu < np; ++iu) {
            const double vw = vals[static_cast<size_t>(iu)] * grid.gl_w[static_cast<size_t>(iu)];
            const double* p = Ptab.data() + iu * (Lt + 1);
            for (int l = 0; l <= degree; ++l) coeff[static_cast<size_t>(l)] += vw * p[l] * (2.0 * l + 1.0) / 2.0;
        }
    };

    auto accumulate_mode = [&](int m, bool sin_part) {
        for (int iu = 0; iu < np; ++iu)
            prof[static_cast<size_t>(iu)] =
                sin_part ? modes[static_cast<size_t>(iu)].b[static_cast<size_t>(m)] : modes[static_cast<size_t>(iu)].a[static_cast<size_t>(m)];
        // Azimuthal mode m of the polar flux behaves like (1-u^2)^{m/2} times a
        // smooth function; odd modes need the explicit sqrt factor and the mean
        // mode the full (1-u^2) factor (which also makes its fitted derivative
        // integrate to exactly zero under the GL weights).
        if (m == 0) {
            std::vector<double> Hvals(static_cast<size_t>(np));
            for (int iu = 0; iu < np; ++iu) {
                const double u = grid.gl_u[static_cast<size_t>(iu)];
                Hvals[static_cast<size_t>(iu)] = prof[static_cast<size_t>(iu)] / (1.0 - u * u);
            }
            legendre_fit(Hvals, Lt - 2);
            for (int iu = 0; iu < np; ++iu) {
                const double u = grid.gl_u[static_cast<size_t>(iu)];
                const double* p = Ptab.data() + iu * (Lt + 1);
                const double* dp = dPtab.data() + iu * (Lt + 1);
                double Hv = 0.0, dHv = 0.0;
                for (int l = 0; l <= Lt - 2; ++l) {
                    Hv += coeff[static_cast<size_t>(l)] * p[l];
                    dHv += coeff[static_cast<size_t>(l)] * dp[l];
                }
                dprof[static_cast<size_t>(iu)] = -2.0 * u * Hv + (1.0 - u * u) * dHv;
            }
        } else if (m % 2 == 1) {
            std::vector<double> Gvals(static_cast<size_t>(np));
            for (int iu = 0; iu < np; ++iu) {
                const double u = grid.gl_u[static_cast<size_t>(iu)];
                Gvals[static_cast<size_t>(iu)] = prof[static_cast<size_t>(iu)] / std::sqrt(1.0 - u * u);
            }
            legendre_fit(Gvals, Lt - 1);
            for (int iu = 0; iu < np; ++iu) {
                const double u = grid.gl_u[static_cast<size_t>(iu)];
                const double s = std::sqrt(1.0 - u * u);
                const double* p = Ptab.data() + iu * (Lt + 1);
                const double* dp = dPtab.data() + iu * (Lt + 1);
                double Gv = 0.0, dGv = 0.0;
                for (int l = 0; l <= Lt - 1; ++l) {
                    Gv += coeff[static_cast<size_t>(l)] * p[l];
                    dGv += coeff[static_cast<size_t>(l)] * dp[l];
                }
                dprof[static_cast<size_t>(iu)] = -u / s * Gv + s * dGv;
            }
        } else {
            legendre_fit(prof, Lt);
            for (int iu = 0; iu < np; ++iu) {
                const double* dp = dPtab.data() + iu * (Lt + 1);
                double d = 0.0;
                for (int l = 1; l <= Lt; ++l) d += coeff[static_cast<size_t>(l)] * dp[l];
                dprof[static_cast<size_t>(iu)] = d;
            }
        }
        for (int iu = 0; iu < np; ++iu) {
            for (int ia = 0; ia < na; ++ia) {
                const double ph = grid.azimuth[static_cast<size_t>(iu * na + ia)];
                const double tr = sin_part ? std::sin(m * ph) : std::cos(m * ph);
                dFth[static_cast<size_t>(iu * na + ia)] += dprof[static_cast<size_t>(iu)] * tr;
            }
        }
    };

    for (int m = 0; m <= half; ++m) {
        accumulate_mode(m, false);
        if (m > 0 && !(na % 2 == 0 && m == half)) accumulate_mode(m, true);
    }

    for (int q = 0; q < nq; ++q)
        out[static_cast<size_t>(q)] = (-dFth[static_cast<size_t>(q)] + dFph[static_cast<size_t>(q)]) / area_density[static_cast<size_t>(q)];
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string shape_to_json_text(const RadialShape& shape) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"dimension\": " << shape.dim << ",\n";
    os << "  \"band_limit\": " << shape.band_limit << ",\n";
    os << "  \"coefficients\": [";
    for (size_t i = 0; i < shape.coeffs.size(); ++i) {
        if (i) os << ", ";
        os << format_double(shape.coeffs[i]);
    }
    os << "],\n";
    os << "  \"description\": " << nlohmann::json(shape.description).dump() << "\n";
    os << "}\n";
    return os.str();
}

RadialShape shape_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    RadialShape shape;
    shape.dim = j.at("dimension").get<int>();
    shape.band_limit = j.at("band_limit").get<int>();
    shape.coeffs = j.at("coefficients").get<std::vector<double>>();
    shape.description = j.value("description", std::string{});
    shape.validate();
    return shape;
}

RadialShape load_shape(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_shape: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return shape_from_json_text(ss.str());
}

void save_shape(const RadialShape& shape, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_shape: cannot open " + path);
    out << shape_to_json_text(shape);
}

}  // namespace hyperlab::surface
