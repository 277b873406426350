#include <doctest.h>

#include <cmath>
#include <random>

#include "satorb/periodic.hpp"

using namespace satorb;

namespace {

struct Instance {
    MassModel m;
    ScaleParameters sc;
    FrequencySet fs;
    SystemModel sys;
    GeneratingTorus gt;
};

Instance sun_earth_moon(double omega) {
    Instance i;
    i.m.m = {1.0};
    i.m.mSat = {{1.0}};
    i.m.mu = 1e-3;
    i.m.nu = 1e-2;
    i.sc = derive_scales(omega, i.m.mu, i.m.nu);
    i.fs = make_resonant(omega, 1.0, 2 * M_PI / (1 - omega), {0}, {{1}}, 0.5);
    i.sys = make_full(i.m, i.sc);
    i.gt = generating_torus(i.fs, i.sys);
    return i;
}

Instance three_planets() {
    Instance i;
    i.m.m = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    i.m.mSat = {{}, {}, {}};
    i.m.mu = 1e-3;
    i.m.nu = 0.01;
    i.sc = derive_scales(0.05, i.m.mu, i.m.nu);
    i.fs = make_resonant(0.05, 0.35, 2 * M_PI / (0.2 * 0.05), {0, 1, 3}, {{}, {}, {}}, 0.2);
    i.sys = make_full(i.m, i.sc);
    i.gt = generating_torus(i.fs, i.sys);
    return i;
}

} // namespace

TEST_CASE("generating torus points are circular") {
    const Instance s = sun_earth_moon(0.05);
    const PhaseState x = s.gt.point({0.3, -1.0});
    for (int b = 0; b < 2; ++b) {
        const Vec4 n = s.gt.normalized(x.z, b);
        CHECK(n[1] == doctest::Approx(s.gt.actions[b]).epsilon(1e-13));
        CHECK(std::abs(n[2]) < 1e-13);
        CHECK(std::abs(n[3]) < 1e-13);
    }
}

TEST_CASE("one symmetric seed per parade class") {
    const Instance s = three_planets();
    const auto seeds = symmetric_seeds(s.gt);
    CHECK(seeds.size() == 2);  // 2^(N-2)
    for (const SymmetricSeed& seed : seeds) {
        CHECK(seed.pattern[0] == 0);
        for (int b = 0; b < s.gt.bodies(); ++b) CHECK(std::abs(s.gt.normalized(seed.state.z, b)[3]) < 1e-14);
        // J-symmetric: reflection with time reversal fixes the seed.
        CHECK((apply_involution(Involution::J, seed.state).z - seed.state.z).norm() < 1e-14);
    }
    CHECK(seeds[0].pattern != seeds[1].pattern);
}

TEST_CASE("shooting converges and the orbit closes") {
    const Instance s = sun_earth_moon(0.05);
    const auto seeds = symmetric_seeds(s.gt);
    REQUIRE(seeds.size() == 1);
    const PeriodicOrbit o = shoot_symmetric(s.sys, s.gt, seeds[0]);
    CHECK(o.converged);
    CHECK(o.residual < 1e-10);
    CHECK(closure_defect(s.sys, o, 1e-13) < 1e-9);
    CHECK(o.torusDistance < 0.05);
    CHECK(o.history.size() == static_cast<std::size_t>(o.iterations) + 1);
    CHECK(torus_distance(s.sys, s.gt, o.initial, o.T, 32) == doctest::Approx(o.torusDistance).epsilon(0.05));
}

TEST_CASE("succession map coordinates") {
    const Instance s = sun_earth_moon(0.05);
    const SuccessionMap A(s.sys, s.gt, s.fs.T, s.fs.alpha);
    Eigen::VectorXd n(8);
    n << 0.4, s.gt.actions[0], 0.01, -0.02, -1.1, s.gt.actions[1] * 1.01, 0.0, 0.03;
    const Eigen::VectorXd z = A.toCart(n);
    CHECK((A.toNormalized(z) - n).norm() < 1e-12);
    CHECK((A.toNormalizedJacobian(z) * A.toCartJacobian(n) - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-10);
    CHECK(A.weights()[0] == 1.0);
    CHECK(A.weights()[1] == doctest::Approx(s.sys.w));

    // Image tangents against central differences.
    const Eigen::MatrixXd dir = Eigen::MatrixXd::Identity(8, 8);
    Eigen::MatrixXd dimg;
    A.apply(n, &dir, &dimg);
    const double h = 1e-6;
    for (int k = 0; k < 8; ++k) {
        Eigen::VectorXd d = (A.apply(n + h * dir.col(k)) - A.apply(n - h * dir.col(k))) / (2 * h);
        for (int b = 0; b < 2; ++b) d[4 * b] = std::remainder(d[4 * b] * 2 * h, 2 * M_PI) / (2 * h);
        CHECK((d - dimg.col(k)).norm() < 1e-6 * std::max(1.0, d.norm()));
    }
}

TEST_CASE("loop integrals vanish for the weighted form but not for a unit-weight control") {
    const Instance s = sun_earth_moon(0.05);
    const SuccessionMap A(s.sys, s.gt, s.fs.T, s.fs.alpha);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N01;
    LoopCurve c;
    c.centre.resize(8);
    c.u.resize(8);
    c.v.resize(8);
    c.centre << 0.2, s.gt.actions[0], 0.0, 0.0, 1.0, s.gt.actions[1], 0.0, 0.0;
    for (int k = 0; k < 8; ++k) {
        c.u[k] = N01(rng);
        c.v[k] = N01(rng);
    }
    c.u.normalize();
    c.v -= c.v.dot(c.u) * c.u;
    c.v.normalize();
    c.radius = 0.05;
    const double exact = loop_integral(A, c, 32);
    CHECK(std::abs(exact) < 1e-10);

    // Same integrand with every slot weighted 1: the satellite block then
    // carries the wrong symplectic weight and the form is no longer closed.
    double control = 0.0;
    const int P = 32;
    for (int k = 0; k < P; ++k) {
        const double t = 2 * M_PI * k / P;
        const Eigen::VectorXd n = c.centre + c.radius * (std::cos(t) * c.u + std::sin(t) * c.v);
        const Eigen::MatrixXd xi = c.radius * (-std::sin(t) * c.u + std::cos(t) * c.v);
        Eigen::MatrixXd dn;
        const Eigen::VectorXd n1 = A.apply(n, &xi, &dn);
        for (int b = 0; b < 2; ++b) {
            const int o = 4 * b;
            control += (n1[o + 1] - n[o + 1]) * xi(o, 0) + (n1[o + 3] - n[o + 3]) * xi(o + 2, 0) +
                       std::remainder(n[o] - n1[o], 2 * M_PI) * dn(o + 1, 0) + (n[o + 2] - n1[o + 2]) * dn(o + 3, 0);
        }
    }
    control *= 2 * M_PI / P;
    MESSAGE("exact form " << exact << ", unit-weight control " << control);
    CHECK(std::abs(control) > 1e3 * std::max(std::abs(exact), 1e-14));
}

TEST_CASE("generating function starts at zero and is path independent") {
    const Instance s = sun_earth_moon(0.05);
    const SuccessionMap A(s.sys, s.gt, s.fs.T, s.fs.alpha);
    Eigen::VectorXd a(8), b(8), c(8);
    a << 0.1, s.gt.actions[0], 0.0, 0.0, 0.5, s.gt.actions[1], 0.0, 0.0;
    b = a;
    b[0] += 0.2;
    b[6] += 0.01;
    c = a;
    c[4] -= 0.3;
    const auto direct = generating_function(A, {a, b});
    const auto detour = generating_function(A, {a, c, b});
    CHECK(direct.front().psi == 0.0);
    CHECK(direct.back().psi == doctest::Approx(detour.back().psi).epsilon(1e-9));
}

TEST_CASE("continued torus and evenness in a planets-only instance") {
    const Instance s = three_planets();
    const SuccessionMap A(s.sys, s.gt, s.fs.T, s.fs.alpha);
    const LambdaPoint p = lambda_point(A, {0.3, -0.7, 1.1});
    CHECK(p.converged);
    CHECK(p.residual < 1e-10);
    // Reversibility: Delta I is odd in the angles.
    const LambdaPoint q = lambda_point(A, {-0.3, 0.7, -1.1});
    for (int b = 0; b < 3; ++b) CHECK(p.dI[b] == doctest::Approx(-q.dI[b]).epsilon(1e-6));
    const EvennessResult e = psi_evenness(A, {0.3, -0.7, 1.1}, 16);
    CHECK(std::abs(e.difference) < 1e-7);
    CHECK(e.nodes > 0);
}

TEST_CASE("section chart respects the resonance relation") {
    const Instance s = three_planets();
    const SectionChart c = section_chart(s.fs, s.gt.layout);
    CHECK(c.det != 0);
    const auto ints = s.fs.flatIntegers();
    for (int sheet = 0; sheet < std::abs(c.det); ++sheet) {
        const auto phi = c.angles({0.37}, sheet);
        double sum = 0.0, weighted = 0.0;
        for (int b = 0; b < 3; ++b) {
            sum += phi[b];
            weighted += ints[b] * phi[b];
        }
        CHECK(std::abs(std::remainder(sum, 2 * M_PI)) < 1e-12);
        CHECK(std::abs(std::remainder(weighted / s.fs.integerGcd(), 2 * M_PI)) < 1e-12);
    }
}
