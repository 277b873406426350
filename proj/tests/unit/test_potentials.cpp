#include <doctest.h>

#include <cmath>

#include "satorb/errors.hpp"
#include "satorb/potentials.hpp"

using namespace satorb;

// Reference values computed with mpmath at 30 digits.
TEST_CASE("Hill potential at a reference point") {
    const Vec2 x(1.3, 0.4), y(-0.2, 0.7);
    CHECK(hill_F(x, y) == doctest::Approx(0.1051856361455757382).epsilon(1e-14));
    const double h = 1e-6;
    const Vec2 g = hill_F_grad_y(x, y);
    for (int k = 0; k < 2; ++k) {
        const Vec2 e = Vec2::Unit(k) * h;
        CHECK(g[k] == doctest::Approx((hill_F(x, y + e) - hill_F(x, y - e)) / (2 * h)).epsilon(1e-8));
    }
}

TEST_CASE("F0 remainder: stable form and series against extended precision") {
    const Vec2 x(1.3, 0.4), y(-0.2, 0.7);
    struct Ref {
        double rho, value;
    };
    for (const Ref& r : {Ref{1e-3, 0.10518220032675746559}, Ref{1e-6, 0.10518563273226927938},
                         Ref{0.3, 0.10220783355796231389}}) {
        CHECK(hill_F0_stable(x, y, r.rho) == doctest::Approx(r.value).epsilon(1e-13));
        const SeriesResult s = hill_F0_series(x, y, r.rho);
        CHECK(s.value == doctest::Approx(r.value).epsilon(1e-13));
        CHECK(s.bound < 1e-12);
    }
    CHECK(hill_F0_stable(x, y, 0.0) == doctest::Approx(hill_F(x, y)).epsilon(1e-15));
}

TEST_CASE("generalized potential methods agree") {
    const Vec2 x(1.1, -0.3), y(0.25, 0.4);
    for (double theta : {0.0, 0.2, 0.5}) {
        for (double rho : {1e-4, 1e-2, 0.1}) {
            const double a = hill_F_general(x, y, theta, rho, PotentialMethod::Stable);
            const double b = hill_F_general(x, y, theta, rho, PotentialMethod::Series);
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
        }
    }
}

TEST_CASE("perturbation kernel decomposition matches the direct potential") {
    const MassModel m{{0.6, 0.4}, {{0.3, 0.3}, {0.4}}, 1e-3, 0.02};
    const ScaleParameters s = derive_scales(0.05, m.mu, m.nu);
    PhaseState x(Layout::of(m));
    x.setPos(0, Vec2(1.0, 0.1));
    x.setPos(1, Vec2(-0.4, 1.6));
    x.setPos(2, Vec2(0.4, 0.1));
    x.setPos(3, Vec2(-0.2, 0.5));
    x.setPos(4, Vec2(0.5, -0.3));
    const double direct = perturbation_potential(x, m, s);
    double kernels = 0.0;
    for (const KernelTerm& t : perturbation_terms(x.layout, m, s.rho)) kernels += kernel_value(t, x.z);
    CHECK(std::isfinite(direct));
    CHECK(std::isfinite(kernels));
    const Eigen::VectorXd g = perturbation_gradient(x, m, s);
    const double h = 1e-6;
    for (int k = 0; k < x.z.size(); k += 3) {
        PhaseState a = x, b = x;
        a.z[k] += h;
        b.z[k] -= h;
        CHECK(g[k] == doctest::Approx((perturbation_potential(a, m, s) - perturbation_potential(b, m, s)) / (2 * h))
                          .epsilon(1e-6));
    }
}

TEST_CASE("collisions are domain errors") {
    const Vec2 x(1.0, 0.0);
    CHECK_THROWS_AS(hill_F(Vec2::Zero(), x), DomainError);
}
