#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyperlab/ambient.hpp"

namespace hyperlab::surface {

/// Star-shaped hypersurface as a radial graph r(theta) over S^{n-1},
/// represented by a truncated basis expansion.
///
/// n=2 layout (curve in H^2): [a0, a1, b1, ..., aL, bL] for
///   r(phi) = a0 + sum_l (a_l cos l phi + b_l sin l phi).
/// n=3 layout (surface in H^3): real orthonormal spherical harmonics,
///   coefficient of Y_{l,m} stored at index l^2 + l + m, m in [-l, l].
struct RadialShape {
    int dim = 3;
    int band_limit = 0;
    std::vector<double> coeffs;
    std::string description;

    static int coeff_count(int dim, int band_limit);
    static RadialShape sphere(int dim, double rho, int band_limit = 0);
    void validate() const;
};

/// Quadrature nodes and round-metric weights on S^{n-1}.
/// n=2: uniform periodic grid, N nodes, exact for trig degree <= N-1.
/// n=3: Gauss-Legendre in cos(theta) x uniform azimuth, N x N nodes;
///      poles are never nodes. Node index q = iu * n_azimuth + ia.
struct QuadratureGrid {
    int dim = 3;
    int resolution = 0;
    int n_polar = 0;
    int n_azimuth = 0;
    std::vector<double> polar_angle;  // per node; empty for n=2
    std::vector<double> polar_u;      // cos(theta) per node; empty for n=2
    std::vector<double> azimuth;      // per node
    std::vector<double> weight;       // per node; sums to |S^{n-1}|
    std::vector<double> gl_u, gl_w;   // n=3 Gauss-Legendre row data

    QuadratureGrid(int dim, int resolution);
    int node_count() const { return static_cast<int>(weight.size()); }
    Eigen::VectorXd node_direction(int q) const;
};

/// Chart jet of the radius function at a node. n=2 uses r, r_ph, r_phph.
struct ShapeJet {
    double r = 0, r_th = 0, r_ph = 0, r_thth = 0, r_thph = 0, r_phph = 0;
};

/// Precomputed basis tables for evaluating shapes (and their analytic chart
/// derivatives) at the nodes of one grid. Reusable across coefficient sets
/// with the same dimension and band limit.
class ShapeSynthesis {
  public:
    ShapeSynthesis(const QuadratureGrid& grid, int dim, int band_limit);

    void jets(std::span<const double> coeffs, std::vector<ShapeJet>& out) const;
    std::vector<double> values(std::span<const double> coeffs) const;

    /// Basis coefficients of a node-sampled function by quadrature projection;
    /// exact for band-limited input on a grid with resolution >= 2L+2.
    std::vector<double> analyze(std::span<const double> node_values) const;

    int band_limit() const { return band_limit_; }
    int dim() const { return dim_; }

  private:
    int dim_, band_limit_;
    int n_polar_ = 0, n_azimuth_ = 0, n_nodes_ = 0;
    // n=3: per polar row, packed (l,m) tables; n=2: trig tables per node
    std::vector<double> P_, dP_, d2P_;
    std::vector<double> cos_m_, sin_m_;  // per azimuth node, m = 0..L
    std::vector<double> weight_;
    std::vector<double> gl_w_;
};

/// Per-node geometric record of the discretized hypersurface.
struct SurfaceSample {
    double theta = 0, phi = 0;
    double r = 0;
    double V = 0;  // cosh r
    double p = 0;  // support function sinh(r)/W
    double W = 0;  // graph factor
    double area_weight = 0;
    double grad_r[2] = {0, 0};   // chart components of dr
    double grad_V[2] = {0, 0};   // tangential covariant gradient of V
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d g_inv = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d shape_op = Eigen::Matrix2d::Zero();
    double principal[2] = {0, 0};
    double normal_frame[3] = {0, 0, 0};  // outward normal in polar frame (radial, e_th, e_ph)
};

struct SurfaceGeometry {
    int dim = 3;
    int m = 2;  // hypersurface dimension n-1
    QuadratureGrid grid;
    std::vector<SurfaceSample> samples;
    double total_area = 0;
    double r_min = 0, r_max = 0, r_mean = 0;  // r_mean is area-weighted

    explicit SurfaceGeometry(QuadratureGrid g) : grid(std::move(g)) {}
    ambient::AmbientPoint position(int q) const;
    double radius_spread() const { return r_max - r_min; }
    /// Global relative spread of the principal curvatures over all nodes;
    /// near zero exactly on (discretized) geodesic spheres.
    double umbilicity_spread() const;
    /// True iff the principal tuple lies in Gamma_k at every node.
    bool garding_everywhere(int k) const;
    /// min over nodes of H_k.
    double min_Hk(int k) const;
};

/// Induced metric, shape operator, curvatures, potential and support data at
/// every quadrature node. Spectral derivatives of r are analytic in the basis;
/// the second fundamental form uses the radial-graph formula
///   h_ij = (1/W) (-Hess_sphere(r)_ij + sinh r cosh r sigma_ij
///                 + 2 coth r  r_i r_j),
/// with the outward orientation (centered spheres get principal curvatures
/// coth(rho) > 0).
SurfaceGeometry build_geometry(const RadialShape& shape, const QuadratureGrid& grid);
SurfaceGeometry build_geometry(const RadialShape& shape, const QuadratureGrid& grid,
                               const ShapeSynthesis& synthesis);

/// Single-node geometry from a chart jet (the build_geometry kernel).
SurfaceSample sample_from_jet(int dim, double theta, double phi, double weight, const ShapeJet& jet);

/// Independent shape-operator oracle: embeds the surface in the hyperboloid
/// model and computes g^{-1} h from central finite differences of the
/// embedding (Minkowski products), step h in the chart. Agrees with
/// build_geometry to O(h^2). Nodes within 2h of a pole are excluded (n=3).
std::optional<Eigen::MatrixXd> oracle_shape_operator(const RadialShape& shape, double theta, double phi,
                                                     double h);

/// Point evaluation of the radius function (slow path, used by the oracle).
double radius_at(const RadialShape& shape, double theta, double phi);

/// rho + amplitude * (random band-limited function of unit sup-norm).
/// Deterministic per seed; resamples (deterministically) until the principal
/// curvatures lie in Gamma_{n-1} at all nodes of the check grid.
RadialShape perturb_sphere(int dim, double rho, double amplitude, std::uint64_t seed, int band_limit);

/// Geodesic sphere (possibly off-center) projected onto the shape basis by
/// quadrature analysis of its exact radial function.
RadialShape project_sphere(const ambient::SphereSpec& spec, int dim, int band_limit);

/// Divergence of a tangent vector field w.r.t. the induced metric, from chart
/// components at the nodes, by spectral differentiation. area_density is the
/// per-node dmu/w (= sinh^m(r) W). The scheme integrates to zero exactly
/// against the area weights (discrete divergence theorem): the azimuthal mean
/// of the polar flux is represented with an explicit (1-u^2) factor so its
/// derivative telescopes under Gauss-Legendre quadrature.
std::vector<double> divergence(const QuadratureGrid& grid, std::span<const double> area_density,
                               std::span<const double> Y_theta, std::span<const double> Y_phi);

RadialShape shape_from_json_text(const std::string& text);
std::string shape_to_json_text(const RadialShape& shape);
RadialShape load_shape(const std::string& path);
void save_shape(const RadialShape& shape, const std::string& path);

}  // namespace hyperlab::surface
