#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "hyperlab/spectral.hpp"
#include "hyperlab/surface.hpp"
#include "hyperlab/symm.hpp"

using namespace hyperlab;
using surface::QuadratureGrid;
using surface::RadialShape;
using surface::ShapeSynthesis;

namespace {
constexpr double kPi = std::numbers::pi;

double sphere_surface_monomial(int a, int b, int c) {
    // int_{S^2} x^a y^b z^c dA; zero unless all exponents even
    if (a % 2 || b % 2 || c % 2) return 0.0;
    auto dfact = [](int n) {
        double p = 1.0;
        for (int i = n; i > 1; i -= 2) p *= i;
        return p;
    };
    return 4.0 * kPi * dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1);
}

RadialShape random_shape(int dim, int L, double rho, double amp, std::uint64_t seed) {
    return surface::perturb_sphere(dim, rho, amp, seed, L);
}

}  // namespace

TEST_CASE("quadrature weights sum to the sphere measure") {
    for (int res : {8, 16, 25, 48}) {
        QuadratureGrid g2(2, res);
        double s2 = 0;
        for (double w : g2.weight) s2 += w;
        CHECK(s2 == doctest::Approx(2 * kPi).epsilon(1e-14));

        QuadratureGrid g3(3, res);
        double s3 = 0;
        for (double w : g3.weight) s3 += w;
        CHECK(std::abs(s3 - 4 * kPi) < 1e-12);
    }
}

TEST_CASE("quadrature integrates spherical polynomials exactly") {
    const int res = 12;
    QuadratureGrid g3(3, res);
    // declared exactness degree: min(res - 1 azimuthal, 2 res - 1 polar) = 11
    for (int a = 0; a <= 11; ++a) {
        for (int b = 0; a + b <= 11; ++b) {
            for (int c = 0; a + b + c <= 11; ++c) {
                double acc = 0.0;
                for (int q = 0; q < g3.node_count(); ++q) {
                    const Eigen::VectorXd v = g3.node_direction(q);
                    acc += g3.weight[static_cast<size_t>(q)] * std::pow(v[0], a) * std::pow(v[1], b) * std::pow(v[2], c);
                }
                CHECK(std::abs(acc - sphere_surface_monomial(a, b, c)) < 1e-12);
            }
        }
    }

    QuadratureGrid g2(2, 12);
    // int cos^a sin^b over the circle: 2 pi (a-1)!!(b-1)!!/(a+b)!! for a, b
    // both even, zero otherwise; exact for trig degree <= 11
    auto dfact = [](int n) {
        double p = 1.0;
        for (int i = n; i > 1; i -= 2) p *= i;
        return p;
    };
    for (int a = 0; a <= 11; ++a) {
        for (int b = 0; a + b <= 11; ++b) {
            double acc = 0;
            for (int q = 0; q < g2.node_count(); ++q) {
                const double ph = g2.azimuth[static_cast<size_t>(q)];
                acc += g2.weight[static_cast<size_t>(q)] * std::pow(std::cos(ph), a) * std::pow(std::sin(ph), b);
            }
            const double expect =
                (a % 2 == 0 && b % 2 == 0) ? 2 * kPi * dfact(a - 1) * dfact(b - 1) / dfact(a + b) : 0.0;
            CHECK(std::abs(acc - expect) < 1e-12);
        }
    }
}

TEST_CASE("shape synthesis reconstructs band-limited node data exactly") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 0.05);
    for (int dim : {2, 3}) {
        const int L = 4;
        QuadratureGrid grid(dim, 2 * L + 2);
        ShapeSynthesis synth(grid, dim, L);
        std::vector<double> c(static_cast<size_t>(RadialShape::coeff_count(dim, L)));
        for (auto& x : c) x = gauss(rng);
        c[0] += (dim == 2) ? 1.0 : std::sqrt(4 * kPi);

        const auto vals = synth.values(c);
        const auto back = synth.analyze(vals);
        REQUIRE(back.size() == c.size());
        for (size_t i = 0; i < c.size(); ++i) CHECK(back[i] == doctest::Approx(c[i]).epsilon(1e-12));

        const auto vals2 = synth.values(back);
        for (size_t q = 0; q < vals.size(); ++q) CHECK(vals2[q] == doctest::Approx(vals[q]).epsilon(1e-12));
    }
}

TEST_CASE("analytic jets match finite differences of the point evaluator") {
    const int L = 5;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 0.05);
    for (int dim : {2, 3}) {
        RadialShape s;
        s.dim = dim;
        s.band_limit = L;
        s.coeffs.resize(static_cast<size_t>(RadialShape::coeff_count(dim, L)));
        for (auto& x : s.coeffs) x = gauss(rng);
        s.coeffs[0] += (dim == 2) ? 1.0 : std::sqrt(4 * kPi);

        QuadratureGrid grid(dim, 2 * L + 4);
        ShapeSynthesis synth(grid, dim, L);
        std::vector<surface::ShapeJet> jets;
        synth.jets(s.coeffs, jets);

        const double h = 1e-5;
        for (int q = 0; q < grid.node_count(); q += 7) {
            const double th = (dim == 3) ? grid.polar_angle[static_cast<size_t>(q)] : 0.0;
            const double ph = grid.azimuth[static_cast<size_t>(q)];
            const auto& jet = jets[static_cast<size_t>(q)];
            CHECK(jet.r == doctest::Approx(surface::radius_at(s, th, ph)).epsilon(1e-12));
            const double fd_ph =
                (surface::radius_at(s, th, ph + h) - surface::radius_at(s, th, ph - h)) / (2 * h);
            CHECK(jet.r_ph == doctest::Approx(fd_ph).epsilon(1e-6).scale(1.0));
            const double fd_phph = (surface::radius_at(s, th, ph + h) - 2 * jet.r + surface::radius_at(s, th, ph - h)) / (h * h);
            CHECK(jet.r_phph == doctest::Approx(fd_phph).epsilon(1e-4).scale(1.0));
            if (dim == 3) {
                const double fd_th =
                    (surface::radius_at(s, th + h, ph) - surface::radius_at(s, th - h, ph)) / (2 * h);
                CHECK(jet.r_th == doctest::Approx(fd_th).epsilon(1e-6).scale(1.0));
                const double fd_thth = (surface::radius_at(s, th + h, ph) - 2 * jet.r + surface::radius_at(s, th - h, ph)) / (h * h);
                CHECK(jet.r_thth == doctest::Approx(fd_thth).epsilon(1e-4).scale(1.0));
                const double fd_thph = (surface::radius_at(s, th + h, ph + h) - surface::radius_at(s, th + h, ph - h) -
                                        surface::radius_at(s, th - h, ph + h) + surface::radius_at(s, th - h, ph - h)) /
                                       (4 * h * h);
                CHECK(jet.r_thph == doctest::Approx(fd_thph).epsilon(1e-4).scale(1.0));
            }
        }
    }
}

TEST_CASE("centered spheres: every derived quantity matches its closed form") {
    for (int dim : {2, 3}) {
        const int m = dim - 1;
        for (double rho : {0.5, 1.0, 2.0}) {
            const RadialShape s = RadialShape::sphere(dim, rho);
            QuadratureGrid grid(dim, 16);
            const auto geo = surface::build_geometry(s, grid);
            const double coth = std::cosh(rho) / std::sinh(rho);
            const double area_expect = ((dim == 2) ? 2 * kPi : 4 * kPi) * std::pow(std::sinh(rho), m);
            CHECK(geo.total_area == doctest::Approx(area_expect).epsilon(1e-12));
            for (const auto& smp : geo.samples) {
                CHECK(smp.W == doctest::Approx(1.0).epsilon(1e-14));
                CHECK(smp.V == doctest::Approx(std::cosh(rho)).epsilon(1e-14));
                CHECK(smp.p == doctest::Approx(std::sinh(rho)).epsilon(1e-14));
                for (int i = 0; i < m; ++i) CHECK(smp.principal[i] == doctest::Approx(coth).epsilon(1e-12));
                CHECK(smp.normal_frame[0] == doctest::Approx(1.0).epsilon(1e-14));
            }
            CHECK(geo.radius_spread() < 1e-14);
            CHECK(geo.umbilicity_spread() < 1e-12);
        }
    }
    // sphere rho=1, n=3 frozen values
    const auto geo = surface::build_geometry(RadialShape::sphere(3, 1.0), QuadratureGrid(3, 16));
    CHECK(geo.total_area == doctest::Approx(17.355387381771433).epsilon(1e-12));
    CHECK(geo.samples[0].principal[0] == doctest::Approx(1.3130352854993312).epsilon(1e-12));
}

TEST_CASE("support identity p W = sinh r holds as computed") {
    for (int dim : {2, 3}) {
        const auto s = random_shape(dim, 4, 1.0, 0.1, 77);
        const auto geo = surface::build_geometry(s, QuadratureGrid(dim, 2 * 4 + 2));
        for (const auto& smp : geo.samples)
            CHECK(smp.p * smp.W == doctest::Approx(std::sinh(smp.r)).epsilon(1e-14));
    }
}

TEST_CASE("graph shape operator agrees with the hyperboloid oracle") {
    // centered sphere: oracle gives coth(rho) Id up to O(h^2)
    for (int dim : {2, 3}) {
        const RadialShape sph = RadialShape::sphere(dim, 1.0);
        const double h = 1e-3;
        const auto B = surface::oracle_shape_operator(sph, 1.1, 0.7, h);
        REQUIRE(B.has_value());
        const double coth1 = std::cosh(1.0) / std::sinh(1.0);
        for (int i = 0; i < dim - 1; ++i)
            for (int j = 0; j < dim - 1; ++j)
                CHECK((*B)(i, j) == doctest::Approx(i == j ? coth1 : 0.0).epsilon(1e-6).scale(1.0));
    }

    // random band-limited shapes: O(h^2) agreement and observed order >= 1.9
    std::mt19937_64 rng(1234);
    for (int dim : {2, 3}) {
        for (std::uint64_t seed : {11ULL, 22ULL, 33ULL}) {
            const auto s = random_shape(dim, 4, 1.0, 0.1, seed);
            QuadratureGrid grid(dim, 12);
            const auto geo = surface::build_geometry(s, grid);
            double err_h = 0.0, err_h2 = 0.0;
            int used = 0;
            const int stride = (dim == 3) ? 5 : 1;
            for (int q = 0; q < grid.node_count(); q += stride) {
                const double th = (dim == 3) ? grid.polar_angle[static_cast<size_t>(q)] : 0.0;
                const double ph = grid.azimuth[static_cast<size_t>(q)];
                const auto Bh = surface::oracle_shape_operator(s, th, ph, 1e-3);
                const auto Bh2 = surface::oracle_shape_operator(s, th, ph, 5e-4);
                if (!Bh || !Bh2) continue;
                ++used;
                const auto& smp = geo.samples[static_cast<size_t>(q)];
                for (int i = 0; i < dim - 1; ++i) {
                    for (int j = 0; j < dim - 1; ++j) {
                        err_h = std::max(err_h, std::abs((*Bh)(i, j) - smp.shape_op(i, j)));
                        err_h2 = std::max(err_h2, std::abs((*Bh2)(i, j) - smp.shape_op(i, j)));
                    }
                }
            }
            REQUIRE(used > 5);
            CHECK(err_h < 1e-4);
            const double order = std::log2(err_h / err_h2);
            CHECK(order >= 1.9);
        }
    }
}

TEST_CASE("oracle excludes nodes near the poles") {
    const RadialShape sph = RadialShape::sphere(3, 1.0);
    CHECK_FALSE(surface::oracle_shape_operator(sph, 1e-4, 0.0, 1e-3).has_value());
    CHECK_FALSE(surface::oracle_shape_operator(sph, kPi - 1e-4, 0.0, 1e-3).has_value());
}

TEST_CASE("umbilicity spread separates geodesic spheres from everything else") {
    for (int dim : {2, 3}) {
        // any geodesic sphere (centered or not) has near-zero spread
        const auto sph = surface::build_geometry(RadialShape::sphere(dim, 1.0), QuadratureGrid(dim, 16));
        CHECK(sph.umbilicity_spread() < 1e-12);

        ambient::SphereSpec spec;
        spec.radius = 1.0;
        spec.center_distance = 0.3;
        spec.center_direction = Eigen::VectorXd::Zero(dim);
        spec.center_direction[dim - 1] = 1.0;
        const int L = (dim == 2) ? 24 : 16;
        const auto off =
            surface::build_geometry(surface::project_sphere(spec, dim, L), QuadratureGrid(dim, 2 * L + 4));
        CHECK(off.umbilicity_spread() < 1e-7);

        // perturbed shapes have a clearly nonzero spread, curves included
        const auto pert =
            surface::build_geometry(random_shape(dim, 4, 1.0, 0.1, 21), QuadratureGrid(dim, 24));
        CHECK(pert.umbilicity_spread() > 1e-2);
    }
}

TEST_CASE("off-center spheres are umbilic with curvature coth(rho), spectrally in L") {
    ambient::SphereSpec spec;
    spec.radius = 1.0;
    spec.center_distance = 0.3;
    const double coth1 = std::cosh(1.0) / std::sinh(1.0);
    for (int dim : {2, 3}) {
        spec.center_direction = Eigen::VectorXd::Zero(dim);
        spec.center_direction[dim - 1] = 1.0;
        double prev = 1e300;
        for (int L : {4, 8, 16}) {
            const auto s = surface::project_sphere(spec, dim, L);
            const auto geo = surface::build_geometry(s, QuadratureGrid(dim, 2 * L + 4));
            double worst = 0.0;
            for (const auto& smp : geo.samples)
                for (int i = 0; i < dim - 1; ++i) worst = std::max(worst, std::abs(smp.principal[i] - coth1));
            CHECK(worst < prev);
            prev = worst;
        }
        CHECK(prev < 1e-8);  // L = 16
    }
}

TEST_CASE("perturb_sphere determinism and feasibility") {
    const auto a = surface::perturb_sphere(3, 1.0, 0.1, 7, 4);
    const auto b = surface::perturb_sphere(3, 1.0, 0.1, 7, 4);
    CHECK(a.coeffs == b.coeffs);
    const auto c = surface::perturb_sphere(3, 1.0, 0.1, 8, 4);
    CHECK(a.coeffs != c.coeffs);

    // amplitude 0 is the exact sphere
    const auto z = surface::perturb_sphere(3, 1.0, 0.0, 7, 4);
    for (size_t i = 1; i < z.coeffs.size(); ++i) CHECK(z.coeffs[i] == 0.0);

    // Gamma_{n-1} at all nodes for rho = 1
    for (int dim : {2, 3}) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const auto s = surface::perturb_sphere(dim, 1.0, 0.1, seed, 4);
            const auto geo = surface::build_geometry(s, QuadratureGrid(dim, 24));
            CHECK(geo.garding_everywhere(dim - 1));
        }
    }
    CHECK_THROWS(surface::perturb_sphere(3, 1.0, 0.6, 7, 4));
}

TEST_CASE("rotating fourier coefficients permutes node fields (n=2)") {
    const int L = 6, N = 24;
    const auto s = random_shape(2, L, 1.0, 0.1, 5);
    QuadratureGrid grid(2, N);
    const auto geo = surface::build_geometry(s, grid);

    const int shift = 5;  // grid steps
    const double delta = 2 * kPi * shift / N;
    RadialShape rot = s;
    for (int l = 1; l <= L; ++l) {
        const double al = s.coeffs[static_cast<size_t>(2 * l - 1)], bl = s.coeffs[static_cast<size_t>(2 * l)];
        rot.coeffs[static_cast<size_t>(2 * l - 1)] = al * std::cos(l * delta) + bl * std::sin(l * delta);
        rot.coeffs[static_cast<size_t>(2 * l)] = -al * std::sin(l * delta) + bl * std::cos(l * delta);
    }
    const auto geo_rot = surface::build_geometry(rot, grid);
    for (int q = 0; q < N; ++q) {
        const int qs = (q + shift) % N;
        CHECK(geo_rot.samples[static_cast<size_t>(q)].r ==
              doctest::Approx(geo.samples[static_cast<size_t>(qs)].r).epsilon(1e-10));
        CHECK(geo_rot.samples[static_cast<size_t>(q)].principal[0] ==
              doctest::Approx(geo.samples[static_cast<size_t>(qs)].principal[0]).epsilon(1e-8));
        CHECK(geo_rot.samples[static_cast<size_t>(q)].p ==
              doctest::Approx(geo.samples[static_cast<size_t>(qs)].p).epsilon(1e-10));
    }
}

TEST_CASE("total area stagnates once the grid resolves the band limit") {
    for (int dim : {2, 3}) {
        const auto s = random_shape(dim, 4, 1.0, 0.1, 13);
        const double a1 = surface::build_geometry(s, QuadratureGrid(dim, 48)).total_area;
        const double a2 = surface::build_geometry(s, QuadratureGrid(dim, 96)).total_area;
        CHECK(std::abs(a1 - a2) / a1 < 1e-10);
    }
}

TEST_CASE("spectral divergence: laplacian of spherical harmonics on a sphere") {
    // On r = rho the induced metric is sinh^2(rho) times the round metric, so
    // div(grad Y_lm) = -l(l+1) Y_lm / sinh^2(rho).
    const double rho = 1.0;
    const double s2 = std::sinh(rho) * std::sinh(rho);
    QuadratureGrid grid(3, 16);
    const int L = 4;
    ShapeSynthesis synth(grid, 3, L);
    const int nq = grid.node_count();

    for (int l : {1, 2, 3, 4}) {
        for (int mm : {-l, 0, l}) {
            std::vector<double> c(static_cast<size_t>((L + 1) * (L + 1)), 0.0);
            c[static_cast<size_t>(l * l + l + mm)] = 1.0;
            std::vector<surface::ShapeJet> jets;
            synth.jets(c, jets);

            std::vector<double> density(static_cast<size_t>(nq), s2);  // sinh^m(rho) W, m=2
            std::vector<double> Yth(static_cast<size_t>(nq)), Yph(static_cast<size_t>(nq));
            for (int q = 0; q < nq; ++q) {
                const double sth = std::sin(grid.polar_angle[static_cast<size_t>(q)]);
                Yth[static_cast<size_t>(q)] = jets[static_cast<size_t>(q)].r_th / s2;
                Yph[static_cast<size_t>(q)] = jets[static_cast<size_t>(q)].r_ph / (s2 * sth * sth);
            }
            const auto div = surface::divergence(grid, density, Yth, Yph);
            double integrated = 0.0, worst = 0.0;
            for (int q = 0; q < nq; ++q) {
                const double expect = -l * (l + 1.0) * jets[static_cast<size_t>(q)].r / s2;
                worst = std::max(worst, std::abs(div[static_cast<size_t>(q)] - expect));
                integrated += div[static_cast<size_t>(q)] * density[static_cast<size_t>(q)] * grid.weight[static_cast<size_t>(q)];
            }
            CHECK(worst < 1e-8);
            CHECK(std::abs(integrated) < 1e-12);  // discrete divergence theorem
        }
    }
}

TEST_CASE("spectral divergence integrates to zero on the circle") {
    QuadratureGrid grid(2, 16);
    const int nq = grid.node_count();
    std::vector<double> density(static_cast<size_t>(nq)), Y(static_cast<size_t>(nq));
    for (int q = 0; q < nq; ++q) {
        const double ph = grid.azimuth[static_cast<size_t>(q)];
        density[static_cast<size_t>(q)] = 1.3 + 0.2 * std::cos(ph);
        Y[static_cast<size_t>(q)] = std::sin(ph) + 0.3 * std::cos(2 * ph);
    }
    const auto div = surface::divergence(grid, density, {}, Y);
    double integrated = 0.0;
    for (int q = 0; q < nq; ++q)
        integrated += div[static_cast<size_t>(q)] * density[static_cast<size_t>(q)] * grid.weight[static_cast<size_t>(q)];
    CHECK(std::abs(integrated) < 1e-14);
}

TEST_CASE("shape json round trip is bit exact") {
    const auto s = random_shape(3, 4, 1.0, 0.1, 99);
    const std::string text = surface::shape_to_json_text(s);
    const auto back = surface::shape_from_json_text(text);
    CHECK(back.dim == s.dim);
    CHECK(back.band_limit == s.band_limit);
    REQUIRE(back.coeffs.size() == s.coeffs.size());
    for (size_t i = 0; i < s.coeffs.size(); ++i) CHECK(back.coeffs[i] == s.coeffs[i]);
    CHECK(surface::shape_to_json_text(back) == text);

    const std::string path = (std::filesystem::temp_directory_path() / "hyperlab_shape_test.json").string();
    surface::save_shape(s, path);
    const auto loaded = surface::load_shape(path);
    for (size_t i = 0; i < s.coeffs.size(); ++i) CHECK(loaded.coeffs[i] == s.coeffs[i]);
    std::filesystem::remove(path);
}

TEST_CASE("build_geometry rejects invalid shapes and grids") {
    RadialShape bad = RadialShape::sphere(3, 1.0, 0);
    bad.coeffs[0] = -1.0;
    CHECK_THROWS_AS(surface::build_geometry(bad, QuadratureGrid(3, 8)), std::domain_error);

    const auto s = random_shape(3, 4, 1.0, 0.1, 1);
    CHECK_THROWS_AS(surface::build_geometry(s, QuadratureGrid(3, 8)), std::invalid_argument);  // < 2L+2
}
