#pragma once

#include <span>
#include <vector>

namespace hyperlab::spectral {

struct GaussLegendreRule {
    std::vector<double> nodes;    // ascending in (-1, 1)
    std::vector<double> weights;  // sum = 2
};

/// n-point Gauss-Legendre rule on [-1, 1], by Newton iteration on P_n.
GaussLegendreRule gauss_legendre(int n);

/// Legendre polynomials P_0..P_L at x. out.size() must be L+1.
void legendre_values(int L, double x, std::span<double> out);

/// P_l and dP_l/dx for l = 0..L.
void legendre_values_and_derivatives(int L, double x, std::span<double> p, std::span<double> dp);

/// Packed index for orthonormal associated Legendre tables: (l, m) with
/// 0 <= m <= l <= L stored at l*(l+1)/2 + m.
inline int packed_lm(int l, int m) { return l * (l + 1) / 2 + m; }

/// Fully normalized associated Legendre functions
///   Ptilde_lm(u) = sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!) * P_l^m(u),
/// u = cos(theta), without the Condon-Shortley sign, together with first and
/// second theta-derivatives. Valid away from the poles (|u| < 1). The second
/// derivative comes from the spherical ODE
///   d2P/dtheta2 = -cot(theta) dP/dtheta - (l(l+1) - m^2/sin^2 theta) P.
/// Table spans must have size (L+1)(L+2)/2.
void normalized_assoc_legendre(int L, double u, std::span<double> P, std::span<double> dP_dtheta,
                               std::span<double> d2P_dtheta2);

/// Values only.
void normalized_assoc_legendre(int L, double u, std::span<double> P);

}  // namespace hyperlab::spectral
