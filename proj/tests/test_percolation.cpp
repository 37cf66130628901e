#include <cmath>
#include <iostream>

#include <gtest/gtest.h>

#include "hypc/error.hpp"
#include "hypc/percolation.hpp"

using namespace hypc;

TEST(Trial, ExtremeProbabilities) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        EXPECT_TRUE(percolation_trial({2, 30, 30, 1.0, seed}));
        EXPECT_FALSE(percolation_trial({2, 30, 30, 0.0, seed}));
    }
}

TEST(Trial, SubcriticalRarelyCrosses) {
    EXPECT_LT(crossing_fraction(2, 200, 200, 0.3, 200, 5), 0.1);
}

TEST(Trial, SupercriticalUsuallyCrosses) {
    EXPECT_GT(crossing_fraction(2, 100, 100, 0.7, 100, 5), 0.9);
}

TEST(Trial, Reproducible) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const LatticeSpec s{3, 40, 40, 0.38, seed};
        EXPECT_EQ(percolation_trial(s), percolation_trial(s));
    }
    EXPECT_EQ(crossing_fraction(2, 50, 50, 0.5, 60, 11), crossing_fraction(2, 50, 50, 0.5, 60, 11));
}

TEST(Trial, MonotoneInP) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        bool prev = false;
        for (double p = 0.0; p <= 1.0; p += 0.05) {
            const bool now = percolation_trial({2, 40, 40, p, seed});
            EXPECT_TRUE(now || !prev) << "seed " << seed << " p " << p;
            prev = now;
        }
    }
}

TEST(Trial, EdgeDrawsAreUnitUniform) {
    const LatticeSpec s{2, 50, 50, 0.5, 3};
    double sum = 0.0;
    int n = 0;
    for (int m = 0; m < 49; ++m) {
        for (int r = 0; r < 50; ++r) {
            for (int i = 0; i < 2; ++i) {
                const double d = edge_draw(3, s, m, r, i);
                ASSERT_GE(d, 0.0);
                ASSERT_LT(d, 1.0);
                sum += d;
                ++n;
            }
        }
    }
    EXPECT_NEAR(sum / n, 0.5, 0.02);
}

TEST(Trial, InvalidSpec) {
    EXPECT_THROW(percolation_trial({0, 10, 10, 0.5, 0}), DomainError);
    EXPECT_THROW(percolation_trial({2, 0, 10, 0.5, 0}), DomainError);
    EXPECT_THROW(percolation_trial({2, 10, 10, 1.5, 0}), DomainError);
}

TEST(P0, RootOfPolynomial) {
    const double p = solve_p0();
    EXPECT_NEAR(p, 0.4257867, 1e-5);
    EXPECT_LT(std::abs(2 * p + p * p - std::pow(p, 4) - 1), 1e-9);
}

TEST(P0, UniqueSignChangeOnUnitInterval) {
    auto f = [](double p) { return 2 * p + p * p - std::pow(p, 4) - 1; };
    int changes = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
        const double a = double(k) / n, b = double(k + 1) / n;
        if ((f(a) < 0) != (f(b) < 0)) ++changes;
    }
    EXPECT_EQ(changes, 1);
}

TEST(Isomorphism, ShearMapsKernelTwoToSquareLattice) {
    EXPECT_TRUE(check_g2_isomorphism(2));
    EXPECT_TRUE(check_g2_isomorphism(50));
}

TEST(Isomorphism, IdentityMapFails) {
    EXPECT_FALSE(check_lattice_map(5, [](long m, long n) { return std::pair{m, n}; }));
    EXPECT_FALSE(check_lattice_map(5, [](long, long n) { return std::pair{0L, n}; }));
    EXPECT_THROW(check_g2_isomorphism(1), DomainError);
}

TEST(Estimate, ArgumentChecks) {
    EXPECT_THROW(estimate_threshold(2, 20, 20, 49), DomainError);
    EXPECT_THROW(estimate_threshold(2, 20, 20, 50, 9), DomainError);
    EXPECT_THROW(estimate_threshold(0, 20, 20, 50), DomainError);
}

TEST(Estimate, BracketShrinksAndJson) {
    const auto e = estimate_threshold(2, 30, 30, 50, 12, 4);
    EXPECT_NEAR(e.hi - e.lo, 1.0 / 4096, 1e-12);
    EXPECT_GE(e.p_hat, e.lo);
    EXPECT_LE(e.p_hat, e.hi);
    const auto j = to_json(e);
    EXPECT_EQ(j.at("r").get<int>(), 2);
    EXPECT_EQ(j.at("interval").size(), 2u);
    EXPECT_EQ(j.at("p_hat").get<double>(), e.p_hat);
}

// Walks on G_r may step back a column, so the connective constant is only
// bounded by degree - 1 = 2r - 1. The measured r=3 threshold sits near 0.315.
TEST(Estimate, KernelThreeBetweenBounds) {
    const auto e3 = estimate_threshold(3, 120, 120, 100, 10, 1);
    std::cout << "r=3 p_hat " << e3.p_hat << "\n";
    EXPECT_GE(e3.p_hat, 1.0 / 5.0);
    EXPECT_LE(e3.p_hat, solve_p0() + 0.005);
    EXPECT_NEAR(e3.p_hat, 0.315, 0.01);
    const auto e4 = estimate_threshold(4, 120, 120, 100, 10, 1);
    std::cout << "r=4 p_hat " << e4.p_hat << "\n";
    EXPECT_GE(e4.p_hat, 1.0 / 7.0);
    EXPECT_LE(e4.p_hat, e3.p_hat + 0.02);
}
