#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hyperlab/symm.hpp"

using namespace hyperlab;
using symm::PrincipalTuple;

namespace {

// Test oracle: sigma_k by explicit enumeration of all k-subsets. Exponential,
// only for m <= 8; independent of the production accumulation scheme.
double sigma_bruteforce(const std::vector<double>& lam, int k) {
    const int m = static_cast<int>(lam.size());
    if (k == 0) return 1.0;
    double total = 0.0;
    std::vector<int> idx(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
    while (true) {
        double prod = 1.0;
        for (int i : idx) prod *= lam[static_cast<size_t>(i)];
        total += prod;
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<size_t>(pos)] == m - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<size_t>(pos)];
        for (int i = pos + 1; i < k; ++i) idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
    }
    return total;
}

std::vector<double> random_gamma_k_tuple(std::mt19937_64& rng, int m, int k) {
    std::uniform_real_distribution<double> uni(-0.5, 2.0);
    for (int tries = 0; tries < 10000; ++tries) {
        std::vector<double> lam(static_cast<size_t>(m));
        for (auto& x : lam) x = uni(rng);
        if (symm::garding_membership(PrincipalTuple(lam), k)) return lam;
    }
    // positive tuples are always in Gamma_k
    std::vector<double> lam(static_cast<size_t>(m));
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    for (auto& x : lam) x = pos(rng);
    return lam;
}

}  // namespace

TEST_CASE("sigma_k on frozen examples") {
    PrincipalTuple t({1.0, 2.0, 3.0});
    CHECK(symm::sigma_k(t, 2) == doctest::Approx(11.0).epsilon(1e-14));
    CHECK(symm::sigma_k(t, 0) == 1.0);
    CHECK(symm::sigma_k(t, 1) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(symm::sigma_k(t, 3) == doctest::Approx(6.0).epsilon(1e-14));

    // all-ones tuple: sigma_k = C(m, k)
    for (int m = 1; m <= 10; ++m) {
        PrincipalTuple ones(std::vector<double>(static_cast<size_t>(m), 1.0));
        for (int k = 0; k <= m; ++k)
            CHECK(symm::sigma_k(ones, k) == doctest::Approx(symm::binomial(m, k)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(symm::sigma_k(t, 4), std::domain_error);
    CHECK_THROWS_AS(symm::sigma_k(t, -1), std::domain_error);
}

TEST_CASE("sigma_k against the subset-enumeration oracle") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 8);
        std::vector<double> lam(static_cast<size_t>(m));
        for (auto& x : lam) x = uni(rng);
        PrincipalTuple t(lam);
        for (int k = 0; k <= m; ++k) {
            const double expect = sigma_bruteforce(lam, k);
            CHECK(symm::sigma_k(t, k) == doctest::Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("sigma_k permutation invariance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 6);
        std::vector<double> lam(static_cast<size_t>(m));
        for (auto& x : lam) x = uni(rng);
        std::vector<double> shuffled = lam;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (int k = 0; k <= m; ++k) {
            const double a = symm::sigma_k(PrincipalTuple(lam), k);
            const double b = symm::sigma_k(PrincipalTuple(shuffled), k);
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
        }
    }
}

TEST_CASE("normalized H_k examples") {
    PrincipalTuple t({1.0, 2.0, 3.0});
    CHECK(symm::normalized_Hk(t, 2) == doctest::Approx(11.0 / 3.0).epsilon(1e-14));
    CHECK(symm::normalized_Hk(t, 0) == 1.0);

    // constant tuple: H_k = c^k
    for (double c : {0.5, 1.3130352854993312, 2.0}) {
        PrincipalTuple ct({c, c, c, c});
        for (int k = 0; k <= 4; ++k)
            CHECK(symm::normalized_Hk(ct, k) == doctest::Approx(std::pow(c, k)).epsilon(1e-13));
    }

    // (coth 1, coth 1), k = 2 -> coth^2(1)
    const double coth1 = std::cosh(1.0) / std::sinh(1.0);
    PrincipalTuple sphere_tuple({coth1, coth1});
    CHECK(symm::normalized_Hk(sphere_tuple, 2) == doctest::Approx(coth1 * coth1).epsilon(1e-14));
    CHECK(symm::normalized_Hk(sphere_tuple, 2) == doctest::Approx(1.7240616609663102).epsilon(1e-12));
}

TEST_CASE("newton tensor on frozen examples") {
    Eigen::MatrixXd B = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
    const auto T1 = symm::newton_tensor(B, 1);
    CHECK(T1.entries(0, 0) == doctest::Approx(5.0));
    CHECK(T1.entries(1, 1) == doctest::Approx(4.0));
    CHECK(T1.entries(2, 2) == doctest::Approx(3.0));
    CHECK(std::abs(T1.entries(0, 1)) < 1e-14);

    const auto T0 = symm::newton_tensor(B, 0);
    CHECK((T0.entries - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-15);

    Eigen::MatrixXd B2 = Eigen::Vector2d(1.0, 1.0).asDiagonal();
    const auto T1b = symm::newton_tensor(B2, 1);
    CHECK((T1b.entries - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);

    CHECK_THROWS_AS(symm::newton_tensor(B, 3), std::domain_error);
}

TEST_CASE("newton tensor: diagonal entries drop one eigenvalue") {
    // For B = diag(lambda), (T_k)^i_i = sigma_k of the tuple with lambda_i removed.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 4);
        std::vector<double> lam(static_cast<size_t>(m));
        for (auto& x : lam) x = uni(rng);
        Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(lam.data(), m);
        Eigen::MatrixXd B = d.asDiagonal();
        for (int k = 0; k <= m - 1; ++k) {
            const auto T = symm::newton_tensor(B, k);
            for (int i = 0; i < m; ++i) {
                std::vector<double> rest;
                for (int s = 0; s < m; ++s)
                    if (s != i) rest.push_back(lam[static_cast<size_t>(s)]);
                const double expect = sigma_bruteforce(rest, k);
                CHECK(T.entries(i, i) == doctest::Approx(expect).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("newton tensor recursion, trace identity, derivative definition") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 4);  // m <= 5
        Eigen::MatrixXd A(m, m);
        for (int i = 0; i < m; ++i)
            for (int jj = 0; jj < m; ++jj) A(i, jj) = gauss(rng);
        Eigen::MatrixXd B = 0.5 * (A + A.transpose());
        const auto sig = symm::sigma_of_matrix(B);

        for (int k = 0; k <= m - 1; ++k) {
            const auto T = symm::newton_tensor(B, k);
            // recursion consistency
            if (k >= 1) {
                const auto Tprev = symm::newton_tensor(B, k - 1);
                const Eigen::MatrixXd rhs =
                    sig[static_cast<size_t>(k)] * Eigen::MatrixXd::Identity(m, m) - B * Tprev.entries;
                CHECK((T.entries - rhs).norm() < 1e-10);
            }
            // trace identity tr(T_k) = (m-k) sigma_k
            CHECK(T.entries.trace() ==
                  doctest::Approx((m - k) * sig[static_cast<size_t>(k)]).epsilon(1e-10));

            // derivative definition: centered differences of sigma_{k+1} in each entry
            const double h = 1e-5;
            for (int i = 0; i < m; ++i) {
                for (int jj = 0; jj < m; ++jj) {
                    Eigen::MatrixXd Bp = B, Bm = B;
                    Bp(i, jj) += h;
                    Bm(i, jj) -= h;
                    const double dp = symm::sigma_of_matrix(Bp)[static_cast<size_t>(k + 1)];
                    const double dm = symm::sigma_of_matrix(Bm)[static_cast<size_t>(k + 1)];
                    const double fd = (dp - dm) / (2.0 * h);
                    // d sigma_{k+1} / d b_ij = (T_k)_{ji}; B symmetric makes T symmetric
                    CHECK(T.entries(jj, i) == doctest::Approx(fd).epsilon(5e-7).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("sigma of matrix equals sigma of its eigenvalue tuple") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 5);
        Eigen::MatrixXd A(m, m);
        for (int i = 0; i < m; ++i)
            for (int jj = 0; jj < m; ++jj) A(i, jj) = gauss(rng);
        Eigen::MatrixXd B = 0.5 * (A + A.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
        std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + m);
        const auto sig = symm::sigma_of_matrix(B);
        for (int k = 0; k <= m; ++k)
            CHECK(sig[static_cast<size_t>(k)] ==
                  doctest::Approx(symm::sigma_k(PrincipalTuple(lam), k)).epsilon(1e-9));
    }
}

TEST_CASE("garding membership") {
    CHECK(symm::garding_membership(PrincipalTuple({1.0, 1.0, -0.1}), 2));
    CHECK_FALSE(symm::garding_membership(PrincipalTuple({1.0, 1.0, -0.1}), 3));
    for (int k = 1; k <= 3; ++k) CHECK(symm::garding_membership(PrincipalTuple({1.0, 1.0, 1.0}), k));
    CHECK_THROWS_AS(symm::garding_membership(PrincipalTuple({1.0}), 2), std::domain_error);
}

TEST_CASE("garding cone nesting") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> uni(-1.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 5);
        std::vector<double> lam(static_cast<size_t>(m));
        for (auto& x : lam) x = uni(rng);
        PrincipalTuple t(lam);
        for (int k = m; k >= 2; --k) {
            if (symm::garding_membership(t, k))
                for (int j = 1; j < k; ++j) CHECK(symm::garding_membership(t, j));
        }
    }
}

TEST_CASE("newton-maclaurin margin on frozen examples") {
    PrincipalTuple t({1.0, 2.0, 3.0});
    // H_1 - H_2^{1/2} = 2 - sqrt(11/3)
    CHECK(symm::newton_maclaurin_margin(t, 1, 2) ==
          doctest::Approx(2.0 - std::sqrt(11.0 / 3.0)).epsilon(1e-14));
    CHECK(symm::newton_maclaurin_margin(t, 1, 2) == doctest::Approx(0.0851457844873238).epsilon(1e-12));
    // H_2 - H_3^{2/3} = 11/3 - 6^{2/3}
    CHECK(symm::newton_maclaurin_margin(t, 2, 3) ==
          doctest::Approx(11.0 / 3.0 - std::pow(6.0, 2.0 / 3.0)).epsilon(1e-14));
    CHECK(symm::newton_maclaurin_margin(t, 2, 3) == doctest::Approx(0.3647394177720402).epsilon(1e-12));

    // equality case: constant tuples
    for (double c : {0.3, 1.0, 2.5}) {
        PrincipalTuple ct({c, c, c, c});
        for (int k = 2; k <= 4; ++k)
            for (int j = 1; j < k; ++j)
                CHECK(std::abs(symm::newton_maclaurin_margin(ct, j, k)) < 1e-13);
    }

    CHECK_THROWS_AS(symm::newton_maclaurin_margin(PrincipalTuple({1.0, 1.0, -0.1}), 1, 3), std::domain_error);
    CHECK_THROWS_AS(symm::newton_maclaurin_margin(t, 2, 2), std::domain_error);
}

TEST_CASE("newton-maclaurin margin nonnegative on 10^4 random Gamma_k tuples") {
    std::mt19937_64 rng(4242);
    int checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 5);  // m <= 6
        const int k = 2 + static_cast<int>(rng() % (m - 1));
        const auto lam = random_gamma_k_tuple(rng, m, k);
        PrincipalTuple t(lam);
        for (int j = 1; j < k; ++j) {
            const double margin = symm::newton_maclaurin_margin(t, j, k);
            CHECK(margin >= -1e-12);
            if (margin < 1e-10) {
                // near-equality only near constant tuples
                CHECK(symm::relative_spread(lam) < 1e-5);
            }
            ++checked;
        }
    }
    CHECK(checked > 10000);
}

TEST_CASE("newton tensor positive definite on Gamma_k tuples") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 4);
        const int k = 1 + static_cast<int>(rng() % m);
        const auto lam = random_gamma_k_tuple(rng, m, k);
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(lam.data(), m);
        Eigen::MatrixXd B = d.asDiagonal();
        const auto T = symm::newton_tensor(B, k - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.entries);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("umbilicity detection") {
    CHECK(symm::is_umbilic(PrincipalTuple({1.3, 1.3, 1.3})));
    CHECK(symm::is_umbilic(PrincipalTuple({1.3, 1.3 + 1e-9})));
    CHECK_FALSE(symm::is_umbilic(PrincipalTuple({1.3, 1.4})));
}
