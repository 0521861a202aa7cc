#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mfshift/invariant.hpp"

using namespace mfshift;

namespace {

Eigen::ArrayXd arr(std::initializer_list<double> xs) {
    Eigen::ArrayXd a(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) a[i++] = x;
    return a;
}

double entropy_of(const Eigen::ArrayXd& p) {
    double h = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] > 0) h -= p[i] * std::log(p[i]);
    return h;
}

// Dense scan over two-letter product measures p = (1-t, t): find sup of
// H(p)/log 2 over roots of beta1(t) beta2(t) = alpha by sign-change
// bisection between grid neighbours.
double brute_two_letter(const Eigen::ArrayXd& f, const Eigen::ArrayXd& g,
                        double alpha, double seed_t) {
    auto c = [&](double t) {
        const double b1 = (1 - t) * f[0] + t * f[1];
        const double b2 = (1 - t) * g[0] + t * g[1];
        return b1 * b2 - alpha;
    };
    auto h = [&](double t) {
        Eigen::ArrayXd p = arr({1 - t, t});
        return entropy_of(p) / std::log(2.0);
    };
    // seed_t is a known root of c, guarding against a tangential double
    // root slipping between grid nodes without a sign change.
    double best = h(seed_t);
    const int N = 10000;
    double prev = c(0.0);
    if (std::fabs(prev) < 1e-13) best = std::max(best, h(0.0));
    for (int i = 1; i <= N; ++i) {
        const double t = double(i) / N;
        const double cur = c(t);
        if (std::fabs(cur) < 1e-13) best = std::max(best, h(t));
        if ((prev < 0 && cur > 0) || (prev > 0 && cur < 0)) {
            double lo = double(i - 1) / N, hi = t;
            double clo = prev;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double cm = c(mid);
                if ((clo < 0) == (cm < 0)) {
                    lo = mid;
                    clo = cm;
                } else {
                    hi = mid;
                }
            }
            best = std::max(best, h(0.5 * (lo + hi)));
        }
        prev = cur;
    }
    return best;
}

}  // namespace

TEST_CASE("product table construction and factorization round trip") {
    ProductPotential pp{arr({0, 0.5, 1}), arr({0, 2, 4})};
    Potential p = to_potential(pp, 2);
    CHECK(p.params.m == 3);
    CHECK(p.params.ell == 2);
    CHECK(p.values[4] == doctest::Approx(1.0).epsilon(1e-14));  // f(1) g(1)
    CHECK(p.values[8] == doctest::Approx(4.0).epsilon(1e-14));  // f(2) g(2)

    ProductPotential back = factor_product(p);
    for (Eigen::Index a = 0; a < 3; ++a)
        for (Eigen::Index b = 0; b < 3; ++b)
            CHECK(back.f[a] * back.g[b] ==
                  doctest::Approx(pp.f[a] * pp.g[b]).scale(1.0).epsilon(1e-12));

    // The identity table is rank two: no product factorization exists.
    ShiftParams sp{2, 2, 2};
    Potential ident = make_potential(sp, arr({1, 0, 0, 1}));
    CHECK_THROWS(factor_product(ident));
}

TEST_CASE("entropy maximization at fixed means") {
    Eigen::ArrayXd e01 = arr({0, 1});

    MaxEntropyResult mid = max_entropy_given_means(e01, e01, 0.5, 0.5);
    REQUIRE(mid.feasible);
    CHECK(mid.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(mid.p[0] == doctest::Approx(0.5).epsilon(1e-9));

    MaxEntropyResult skew = max_entropy_given_means(e01, e01, 0.7, 0.7);
    REQUIRE(skew.feasible);
    CHECK(skew.entropy == doctest::Approx(0.6108643020548935).epsilon(1e-10));
    CHECK(skew.p[0] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(skew.p[1] == doctest::Approx(0.7).epsilon(1e-9));

    // Mean pair off the diagonal line {(t, 1-t)} spanned by f=(0,1), g=(1,0).
    MaxEntropyResult off = max_entropy_given_means(e01, arr({1, 0}), 0.3, 0.6);
    CHECK_FALSE(off.feasible);
}

TEST_CASE("entropy maximization on a three-letter alphabet") {
    Eigen::ArrayXd f = arr({0, 1, 2});
    Eigen::ArrayXd g = arr({0, 2, 1});

    MaxEntropyResult inner = max_entropy_given_means(f, g, 1.0, 1.0);
    REQUIRE(inner.feasible);
    CHECK(inner.entropy == doctest::Approx(std::log(3.0)).epsilon(1e-10));
    for (int i = 0; i < 3; ++i)
        CHECK(inner.p[i] == doctest::Approx(1.0 / 3).epsilon(1e-8));

    // (0.5, 1) sits on the hull edge between (f,g) points (0,0) and (1,2):
    // the maximizer lives on letters {0, 1} with p = (1/2, 1/2, 0).
    MaxEntropyResult edge = max_entropy_given_means(f, g, 0.5, 1.0);
    REQUIRE(edge.feasible);
    CHECK(edge.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(edge.p[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

    MaxEntropyResult outside = max_entropy_given_means(f, g, 2.0, 2.0);
    CHECK_FALSE(outside.feasible);
}

TEST_CASE("maximizer dominates random feasible measures") {
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> U(-2, 2);
    std::uniform_real_distribution<double> U01(0, 1);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 3);
        Eigen::ArrayXd f(m), g(m);
        for (int i = 0; i < m; ++i) {
            f[i] = U(rng);
            g[i] = U(rng);
        }
        Eigen::ArrayXd p(m);
        for (int i = 0; i < m; ++i) p[i] = 0.05 + U01(rng);
        p /= p.sum();
        const double b1 = (p * f).sum();
        const double b2 = (p * g).sum();

        MaxEntropyResult r = max_entropy_given_means(f, g, b1, b2);
        REQUIRE(r.feasible);
        CHECK(r.entropy >= entropy_of(p) - 1e-9);
        CHECK(std::fabs((r.p * f).sum() - b1) <= 1e-7);
        CHECK(std::fabs((r.p * g).sum() - b2) <= 1e-7);
        CHECK(r.p.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.p.minCoeff() >= -1e-12);
    }
}

TEST_CASE("spectrum agrees with a dense two-letter scan") {
    std::mt19937 rng(3141);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    int checked = 0;
    for (int trial = 0; trial < 60 && checked < 20; ++trial) {
        ProductPotential pp{arr({U(rng), U(rng)}), arr({U(rng), U(rng)})};
        // Stay clear of degenerate factors; those have dedicated branches.
        if (std::fabs(pp.f[0] - pp.f[1]) < 0.1) continue;
        if (std::fabs(pp.g[0] - pp.g[1]) < 0.1) continue;
        const double t = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
        const double alpha = ((1 - t) * pp.f[0] + t * pp.f[1]) *
                             ((1 - t) * pp.g[0] + t * pp.g[1]);
        InvariantPoint pt = invariant_spectrum(pp, alpha);
        const double brute = brute_two_letter(pp.f, pp.g, alpha, t);
        REQUIRE(pt.feasible);
        CHECK(pt.value == doctest::Approx(brute).scale(1.0).epsilon(1e-6));
        CHECK(pt.beta1 * pt.beta2 == doctest::Approx(alpha).scale(1.0).epsilon(1e-7));
        ++checked;
    }
    REQUIRE(checked == 20);
}

TEST_CASE("spectrum of the pair-indicator product") {
    // f = g = (0, 1): the constraint is beta^2 = alpha, optimum H(sqrt(alpha)).
    ProductPotential pp{arr({0, 1}), arr({0, 1})};

    InvariantPoint quarter = invariant_spectrum(pp, 0.25);
    REQUIRE(quarter.feasible);
    CHECK(quarter.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(quarter.beta1 == doctest::Approx(0.5).epsilon(1e-7));

    InvariantPoint skew = invariant_spectrum(pp, 0.49);
    REQUIRE(skew.feasible);
    CHECK(skew.value == doctest::Approx(0.8812908992306927).epsilon(1e-6));

    // Both means come from one measure, so alpha = 0 forces p(1) = 0.
    InvariantPoint zero = invariant_spectrum(pp, 0.0);
    REQUIRE(zero.feasible);
    CHECK(zero.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

    CHECK_FALSE(invariant_spectrum(pp, -0.25).feasible);
    CHECK_FALSE(invariant_spectrum(pp, 1.5).feasible);
}

TEST_CASE("spectrum of the sign product") {
    // f = g = (1, -1): beta in [-1, 1], alpha = beta^2 in [0, 1].
    ProductPotential pp{arr({1, -1}), arr({1, -1})};

    InvariantPoint one = invariant_spectrum(pp, 1.0);
    REQUIRE(one.feasible);
    CHECK(one.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

    InvariantPoint inner = invariant_spectrum(pp, 0.25);
    REQUIRE(inner.feasible);
    // beta = +-1/2 puts p = (3/4, 1/4): H(1/4) / log 2.
    const double want =
        (-(0.75) * std::log(0.75) - 0.25 * std::log(0.25)) / std::log(2.0);
    CHECK(inner.value == doctest::Approx(want).epsilon(1e-8));

    CHECK_FALSE(invariant_spectrum(pp, -0.25).feasible);
}

TEST_CASE("degenerate factors take the closed branches") {
    // Constant f: alpha pins beta2 = alpha / c directly.
    ProductPotential cf{arr({2, 2}), arr({0, 1})};
    InvariantPoint pt = invariant_spectrum(cf, 1.0);  // beta2 = 1/2
    REQUIRE(pt.feasible);
    CHECK(pt.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(invariant_spectrum(cf, 3.0).feasible);  // beta2 = 1.5 > max g

    // f = (-1, 1), g = (1, 3) are affinely dependent: g = f + 2.
    // alpha = 0 admits beta1 = 0 (uniform p), so the value is 1.
    ProductPotential aff{arr({-1, 1}), arr({1, 3})};
    InvariantPoint z = invariant_spectrum(aff, 0.0);
    REQUIRE(z.feasible);
    CHECK(z.value == doctest::Approx(1.0).epsilon(1e-9));

    // Zero constant f: alpha != 0 is impossible, alpha = 0 is free.
    ProductPotential zf{arr({0, 0}), arr({-1, 5})};
    CHECK_FALSE(invariant_spectrum(zf, 0.7).feasible);
    InvariantPoint free0 = invariant_spectrum(zf, 0.0);
    REQUIRE(free0.feasible);
    CHECK(free0.value == doctest::Approx(1.0).epsilon(1e-9));
}
