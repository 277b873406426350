#include <doctest.h>

#include <cmath>

#include "satorb/averaging.hpp"
#include "satorb/errors.hpp"

using namespace satorb;

// c_kappa references: mpmath quad at 30 digits, split at multiples of pi/|kappa|.
TEST_CASE("c_kappa against extended-precision quadrature") {
    struct Ref {
        int k;
        double c;
    };
    for (const Ref& r : {Ref{1, 17.546658937979821489}, Ref{2, 28.851945280992038071}, Ref{5, 91.747211454682766614},
                         Ref{-2, 1.4828188293835259524}, Ref{-3, 6.494976072747638999},
                         Ref{-7, 68.306331648332037617}})
        CHECK(c_kappa(r.k) == doctest::Approx(r.c).epsilon(1e-11));
}

TEST_CASE("c_kappa domain") {
    CHECK_THROWS_AS(c_kappa(0), DomainError);
    CHECK_THROWS_AS(c_kappa(-1), DomainError);
    CHECK(c_kappa_ext(1.5) == 0.0);
    CHECK(c_kappa_ext(2.0) == doctest::Approx(c_kappa(2)));
    CHECK(r_kappa(1.0) == doctest::Approx(std::cbrt(4.0)));
}

TEST_CASE("the square-root prefactor differs by sqrt(r_kappa)") {
    for (int k : {1, 3, -4})
        CHECK(c_kappa(k, 1e-13, CkPrefactor::SqrtRadius) ==
              doctest::Approx(c_kappa(k) / std::sqrt(r_kappa(k))).epsilon(1e-12));
}

TEST_CASE("c_kappa / kappa^2 is monotone on the tabulated range") {
    const AveragingCoefficients t = coefficient_table(-11, 10);
    for (int k = 1; k < 10; ++k) CHECK(t.cTable.at(k) / (k * k) > t.cTable.at(k + 1) / ((k + 1.0) * (k + 1)));
    for (int k = -2; k > -11; --k) CHECK(t.cTable.at(k) / (k * k) < t.cTable.at(k - 1) / ((k - 1.0) * (k - 1)));
    CHECK(t.cTable.count(0) == 0);
    CHECK(t.cTable.count(-1) == 0);
}

// Bessel references: mpmath besselk at 30 digits.
TEST_CASE("asymptotic constants: truncated quadrature vs Bessel closed form") {
    const AsymptoticConstants q = asymptotic_constants(1e-12);
    const AsymptoticConstants b = asymptotic_constants_bessel();
    CHECK(b.C1 == doctest::Approx(2.1504491292516538558).epsilon(1e-13));
    CHECK(b.C2 == doctest::Approx(1.9455200105891354221).epsilon(1e-13));
    CHECK(std::abs(q.C1 - b.C1) < 1e-10);
    CHECK(std::abs(q.C2 - b.C2) < 1e-10);
    CHECK(q.tailBound < 1e-11);
}

// kappa_ji = w_j / (w_i - w_j) = -(kappa_ij + 1).
TEST_CASE("kappa pairs") {
    CHECK(kappa_pair(0.5, 1.0) == doctest::Approx(1.0));
    CHECK(kappa_pair(1.0, 0.5) == doctest::Approx(-2.0));
    const Eigen::MatrixXd K = kappa_matrix({0.3, 0.5, 0.9});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(K(j, i) == doctest::Approx(-K(i, j) - 1.0));
    CHECK_THROWS_AS(kappa_pair(0.5, -0.5), DomainError);
}

TEST_CASE("unclosing masses") {
    // kappa = 1: the averaged force never vanishes on the torus.
    const UnclosingReport r = classify_masses({0.5, 0.5}, {0.5, 1.0});
    CHECK(r.unclosing);
    CHECK(r.inM);
    CHECK(r.inMsym);
    CHECK_FALSE(r.undecided);
    CHECK(r.minResidual > 0.1);

    // Non-integer kappa: every f_l vanishes identically.
    const UnclosingReport z = classify_masses({0.5, 0.5}, {0.4, 0.7});
    CHECK_FALSE(z.unclosing);
    CHECK_FALSE(z.inM);
    CHECK_FALSE(z.witnesses.empty());

    const auto f = unclosing_f({0.5, 0.5}, {0.5, 1.0}, {0.0, 0.4});
    REQUIRE(f.size() == 2);
    CHECK(std::abs(f[0]) > unclosing_tolerance({0.5, 0.5}, {0.5, 1.0}));
    CHECK_THROWS_AS(unclosing_test({0.5, 0.5}, {0.5, 1.0}, {0.0}), ParameterError);
}

TEST_CASE("averaged Hill data at the circular orbit") {
    const AveragedHillData d = averaged_hill(1.2, 0.8, 0.3, std::pow(0.3, -2.0 / 3.0));
    CHECK(d.gradient.norm() < 1e-9);
    CHECK(std::abs(d.hessian(0, 1)) < 1e-8);
    CHECK(d.etaSign == 1);
    // Both numerical diagonal entries scale like Omega_i0^2 I / Omega.
    const double pre = 0.09 * 1.2 / 0.8;
    CHECK(d.hessian(0, 0) / pre == doctest::Approx(-4.5).epsilon(1e-6));
    CHECK(d.hessian(1, 1) * 1.44 / pre == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(d.delta == doctest::Approx(-0.75 * 0.09 / 0.8).epsilon(1e-6));
    CHECK_THROWS_AS(averaged_hill(1.2, -0.8, 0.3, 2.0), DomainError);
}

TEST_CASE("averaged planet differential is nonzero for integer kappa and has the right phase dependence") {
    const std::vector<double> mbar = {0.5, 0.5}, w = {0.5, 1.0}, r = {std::cbrt(4.0), 1.0}, I = {0.63, 0.5};
    const PlanetCovector a0 = averaged_R0_differential({0.0, 0.0}, mbar, w, r);
    const PlanetCovector a1 = averaged_R0_differential({0.0, 0.7}, mbar, w, r);
    CHECK(a0.norm() > 0.1);
    CHECK(a1.norm() == doctest::Approx(a0.norm()).epsilon(1e-12));
    const PlanetCovector n0 = averaged_R0_numeric({0.0, 0.0}, mbar, w, r, I);
    const PlanetCovector n1 = averaged_R0_numeric({0.0, 0.7}, mbar, w, r, I);
    CHECK(n0.norm() > 0.01);
    CHECK(n1.norm() == doctest::Approx(n0.norm()).epsilon(1e-6));
    // Non-integer kappa: the closed form vanishes.
    CHECK(averaged_R0_differential({0.0, 0.3}, mbar, {0.4, 0.7}, r).norm() == 0.0);
}
