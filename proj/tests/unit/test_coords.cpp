#include <doctest.h>

#include <random>

#include "satorb/coords.hpp"
#include "satorb/errors.hpp"

using namespace satorb;

namespace {

MassModel five_body() { return MassModel{{0.6, 0.4}, {{0.3, 0.3}, {0.4}}, 1e-3, 0.02}; }

PhaseState random_state(const Layout& l, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    PhaseState x(l);
    for (int i = 0; i < l.planets(); ++i) {
        x.setPos(i, Vec2(1.0 + 0.7 * i + 0.1 * U(rng), 0.2 * U(rng)));
        x.setMom(i, Vec2(0.2 * U(rng), 0.8 + 0.1 * U(rng)));
    }
    for (int b = l.planets(); b < l.bodies(); ++b) {
        x.setPos(b, Vec2(0.4 + 0.1 * (b - l.planets()) + 0.05 * U(rng), 0.2 * U(rng)));
        x.setMom(b, Vec2(0.1 * U(rng), 1.0 + 0.1 * U(rng)));
    }
    return x;
}

} // namespace

TEST_CASE("layout slots") {
    const Layout l({2, 0, 1});
    CHECK(l.planets() == 3);
    CHECK(l.bodies() == 6);
    CHECK(l.satSlot(0, 1) == 4);
    CHECK(l.satSlot(2, 0) == 5);
    CHECK(l.parentOf(5) == 2);
    CHECK(l.satIndex(4) == 1);
    CHECK(l.isPlanet(2));
    CHECK_FALSE(l.isPlanet(3));
}

TEST_CASE("Poincare transformation round trip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Vec2> r(4), p(4);
    const std::vector<double> c = {1.0, 0.1, 0.3, 0.05};
    for (int i = 0; i < 4; ++i) {
        r[i] = Vec2(U(rng), U(rng));
        p[i] = Vec2(U(rng), U(rng));
    }
    const PoincareImage t = poincare_forward(r, p, c);
    const PoincareImage b = poincare_inverse(t.positions, t.impulses, c);
    for (int i = 0; i < 4; ++i) {
        CHECK((b.positions[i] - r[i]).norm() < 1e-14);
        CHECK((b.impulses[i] - p[i]).norm() < 1e-14);
    }
}

TEST_CASE("relative coordinates round trip and barycentric normalization") {
    const MassModel m = five_body();
    const ScaleParameters s = derive_scales(0.05, m.mu, m.nu);
    std::mt19937_64 rng(12);
    for (int k = 0; k < 10; ++k) {
        const PhaseState x = random_state(Layout::of(m), rng);
        const BarycentricConfig c = from_relative(x, m, s);
        CHECK(centre_of_mass(c).norm() < 1e-12);
        CHECK(total_impulse(c).norm() < 1e-12);
        const PhaseState y = to_relative(c, m, s);
        CHECK((y.z - x.z).norm() < 1e-10 * x.z.norm());
    }
}

TEST_CASE("coincident bodies are rejected") {
    const MassModel m = five_body();
    const ScaleParameters s = derive_scales(0.05, m.mu, m.nu);
    std::mt19937_64 rng(3);
    BarycentricConfig c = from_relative(random_state(Layout::of(m), rng), m, s);
    c.positions[2] = c.positions[1];
    CHECK_THROWS_AS(to_relative(c, m, s), DomainError);
}

TEST_CASE("Kepler normalization round trips") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const KeplerFactor f{0.5 + U(rng), 0.5 + U(rng)};
        const Vec4 n(-3.0 + 6.0 * U(rng), (U(rng) < 0.5 ? -1 : 1) * (0.5 + U(rng)), -0.4 + 0.8 * U(rng),
                     -0.4 + 0.8 * U(rng));
        const Vec4 c = kepler_to_cart(n, f);
        const Vec4 back = cart_to_kepler(c, f);
        CHECK(std::abs(std::remainder(back[0] - n[0], 2 * M_PI)) < 1e-12);
        CHECK((back.tail<3>() - n.tail<3>()).norm() < 1e-12);

        // Jacobians are mutually inverse and agree with central differences.
        const Mat4 J = kepler_to_cart_jacobian(n, f);
        const Mat4 K = cart_to_kepler_jacobian(c, f);
        CHECK((K * J - Mat4::Identity()).norm() < 1e-11);
        for (int j = 0; j < 4; ++j) {
            const double h = 1e-6;
            const Vec4 e = Vec4::Unit(j) * h;
            const Vec4 fd = (kepler_to_cart(n + e, f) - kepler_to_cart(n - e, f)) / (2 * h);
            CHECK((fd - J.col(j)).norm() < 1e-7);
        }
    }
    CHECK_THROWS_AS(kepler_normalize(0.0, 0.0, 1.0, 0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("circular orbits sit at q = p = 0") {
    const double k = 1.3, m = 0.7, I = 0.9;
    const double r = I * I / (k * m * m);
    const NormalizedKepler n = kepler_normalize(0.4, I, r, 0.0, k, m);
    CHECK(n.q == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(n.p == 0.0);
    const Eigen::Matrix3d H = kepler_energy_hessian(n, k, m);
    CHECK(std::abs(H(0, 1)) < 1e-12);
    CHECK(std::abs(H(1, 2)) < 1e-12);
}

TEST_CASE("involutions") {
    const MassModel m = five_body();
    std::mt19937_64 rng(14);
    const PhaseState x = random_state(Layout::of(m), rng);
    for (Involution w : {Involution::Sl, Involution::S, Involution::J}) {
        const PhaseState y = apply_involution(w, apply_involution(w, x, 0.3), 0.3);
        CHECK((y.z - x.z).norm() < 1e-14);
        const Eigen::MatrixXd M = involution_matrix(w, x.layout, 0.3);
        CHECK((M * x.z - apply_involution(w, x, 0.3).z).norm() < 1e-14);
    }
    const NormalizedKepler n{0.3, 1.1, 0.2, -0.4};
    const NormalizedKepler j = apply_involution(Involution::J, n);
    CHECK(j.phi == doctest::Approx(-0.3));
    CHECK(j.I == doctest::Approx(1.1));
    CHECK(j.q == doctest::Approx(0.2));
    CHECK(j.p == doctest::Approx(0.4));
}

TEST_CASE("rotation preserves angular momentum") {
    const MassModel m = five_body();
    std::mt19937_64 rng(15);
    const PhaseState x = random_state(Layout::of(m), rng);
    const PhaseState y = rotate(x, 0.77);
    std::vector<Vec2> q, p, q2, p2;
    for (int b = 0; b < x.layout.bodies(); ++b) {
        q.push_back(x.pos(b));
        p.push_back(x.mom(b));
        q2.push_back(y.pos(b));
        p2.push_back(y.mom(b));
    }
    CHECK(angular_momentum(q2, p2) == doctest::Approx(angular_momentum(q, p)).epsilon(1e-14));
    CHECK((rotation_matrix(x.layout, 0.77) * x.z - y.z).norm() < 1e-14);
}
