#include "hyperlab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyperlab::spectral {

GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi-style initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                // one polishing step
                p0 = 1.0;
                p1 = x;
                for (int l = 2; l <= n; ++l) {
                    const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                x -= p1 / dp;
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<size_t>(i)] = -x;  // guesses come out descending
        rule.weights[static_cast<size_t>(i)] = w;
        rule.nodes[static_cast<size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<size_t>(n / 2)] = 0.0;
    return rule;
}

void legendre_values(int L, double x, std::span<double> out) {
    if (out.size() != static_cast<size_t>(L + 1)) throw std::invalid_argument("legendre_values: bad span size");
    out[0] = 1.0;
    if (L >= 1) out[1] = x;
    for (int l = 2; l <= L; ++l)
        out[static_cast<size_t>(l)] =
            ((2.0 * l - 1.0) * x * out[static_cast<size_t>(l - 1)] - (l - 1.0) * out[static_cast<size_t>(l - 2)]) / l;
}

void legendre_values_and_derivatives(int L, double x, std::span<double> p, std::span<double> dp) {
    legendre_values(L, x, p);
    if (dp.size() != static_cast<size_t>(L + 1)) throw std::invalid_argument("legendre_values_and_derivatives: bad span size");
    dp[0] = 0.0;
    if (L >= 1) dp[1] = 1.0;
    const double om = 1.0 - x * x;
    for (int l = 2; l <= L; ++l) {
        // (1-x^2) P_l' = l (P_{l-1} - x P_l)
        dp[static_cast<size_t>(l)] = l * (p[static_cast<size_t>(l - 1)] - x * p[static_cast<size_t>(l)]) / om;
    }
}

void normalized_assoc_legendre(int L, double u, std::span<double> P) {
    const size_t n = static_cast<size_t>((L + 1) * (L + 2) / 2);
    if (P.size() != n) throw std::invalid_argument("normalized_assoc_legendre: bad span size");
    const double s = std::sqrt(std::max(0.0, 1.0 - u * u));  // sin(theta)

    P[0] = 0.28209479177387814;  // 1/sqrt(4 pi)
    for (int m = 1; m <= L; ++m)
        P[static_cast<size_t>(packed_lm(m, m))] =
            std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * P[static_cast<size_t>(packed_lm(m - 1, m - 1))];
    for (int m = 0; m < L; ++m)
        P[static_cast<size_t>(packed_lm(m + 1, m))] =
            std::sqrt(2.0 * m + 3.0) * u * P[static_cast<size_t>(packed_lm(m, m))];
    for (int m = 0; m <= L; ++m) {
        for (int l = m + 2; l <= L; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
            const double b = std::sqrt(((2.0 * l + 1.0) * ((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m)) /
                                       ((2.0 * l - 3.0) * (static_cast<double>(l) * l - static_cast<double>(m) * m)));
            P[static_cast<size_t>(packed_lm(l, m))] = a * u * P[static_cast<size_t>(packed_lm(l - 1, m))] -
                                                      b * P[static_cast<size_t>(packed_lm(l - 2, m))];
        }
    }
}

void normalized_assoc_legendre(int L, double u, std::span<double> P, std::span<double> dP, std::span<double> d2P) {
    normalized_assoc_legendre(L, u, P);
    const size_t n = static_cast<size_t>((L + 1) * (L + 2) / 2);
    if (dP.size() != n || d2P.size() != n)
        throw std::invalid_argument("normalized_assoc_legendre: bad span size");
    const double s = std::sqrt(std::max(1e-300, 1.0 - u * u));
    const double cot = u / s;
    for (int m = 0; m <= L; ++m) {
        for (int l = m; l <= L; ++l) {
            const size_t i = static_cast<size_t>(packed_lm(l, m));
            // (1-u^2) d/du Ptilde_lm = c_lm Ptilde_{l-1,m} - l u Ptilde_lm,
            // c_lm = sqrt((l^2-m^2)(2l+1)/(2l-1)); d/dtheta = -sin(theta) d/du.
            double c = 0.0, Pprev = 0.0;
            if (l > m) {
                c = std::sqrt((static_cast<double>(l) * l - static_cast<double>(m) * m) * (2.0 * l + 1.0) /
                              (2.0 * l - 1.0));
                Pprev = P[static_cast<size_t>(packed_lm(l - 1, m))];
            }
            const double dth = -(c * Pprev - static_cast<double>(l) * u * P[i]) / s;
            dP[i] = dth;
            d2P[i] = -cot * dth - (static_cast<double>(l) * (l + 1.0) - static_cast<double>(m) * m / (s * s)) * P[i];
        }
    }
}

}  // namespace hyperlab::spectral
