#include <doctest.h>

#include <cmath>

#include "satorb/dynamics.hpp"
#include "satorb/errors.hpp"

using namespace satorb;

namespace {

MassModel five_body() { return MassModel{{0.6, 0.4}, {{0.3, 0.3}, {0.4}}, 1e-3, 0.02}; }

PhaseState sample_state(const Layout& l) {
    PhaseState x(l);
    for (int i = 0; i < l.planets(); ++i) {
        x.setPos(i, Vec2(1.0 + 0.8 * i, 0.1 * i));
        x.setMom(i, Vec2(-0.05, 0.7 - 0.1 * i));
    }
    for (int b = l.planets(); b < l.bodies(); ++b) {
        x.setPos(b, Vec2(0.5 + 0.15 * (b - l.planets()), 0.05));
        x.setMom(b, Vec2(0.02, 1.1));
    }
    return x;
}

} // namespace

TEST_CASE("system kind names round trip") {
    for (SystemKind k : {SystemKind::Full, SystemKind::Unperturbed, SystemKind::Model, SystemKind::ThreeBody,
                         SystemKind::Hill})
        CHECK(system_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(system_kind_from_string("nbody"), ParameterError);
}

TEST_CASE("vector field is the Hamiltonian field of the weighted form") {
    const MassModel m = five_body();
    const ScaleParameters s = derive_scales(0.05, m.mu, m.nu);
    for (const SystemModel& sys : {make_full(m, s), make_model(m, 0.05), make_unperturbed(m, 0.05)}) {
        const PhaseState x = sample_state(sys.layout);
        const Eigen::VectorXd f = sys.field(x.z);
        const Eigen::VectorXd g = sys.gradH(x.z);
        const double h = 1e-6;
        for (int k = 0; k < sys.dim(); ++k) {
            Eigen::VectorXd a = x.z, b = x.z;
            a[k] += h;
            b[k] -= h;
            CHECK(g[k] == doctest::Approx((sys.hamiltonian(a) - sys.hamiltonian(b)) / (2 * h)).epsilon(1e-6));
        }
        // dH(f) = 0 and dI(f) = 0 along the field.
        CHECK(std::abs(g.dot(f)) < 1e-10 * g.norm() * f.norm());
        CHECK(std::abs(sys.gradI(x.z).dot(f)) < 1e-10 * sys.gradI(x.z).norm() * f.norm());
    }
}

TEST_CASE("full field solves omega(., f) = dH") {
    const MassModel m = five_body();
    const SystemModel sys = make_full(m, derive_scales(0.05, m.mu, m.nu));
    const PhaseState x = sample_state(sys.layout);
    const Eigen::MatrixXd W = sys.formMatrix();
    const Eigen::VectorXd f = sys.field(x.z);
    const Eigen::VectorXd g = sys.gradH(x.z);
    // With omega(u, v) = u^T W v, the Hamiltonian field satisfies W f = dH.
    CHECK((W * f - g).norm() < 1e-10 * g.norm());
}

TEST_CASE("field Jacobian agrees with central differences") {
    const MassModel m = five_body();
    const SystemModel sys = make_full(m, derive_scales(0.05, m.mu, m.nu));
    const PhaseState x = sample_state(sys.layout);
    const Eigen::MatrixXd J = sys.jacobian(x.z);
    const double h = 1e-6;
    for (int k = 0; k < sys.dim(); ++k) {
        Eigen::VectorXd a = x.z, b = x.z;
        a[k] += h;
        b[k] -= h;
        const Eigen::VectorXd fd = (sys.field(a) - sys.field(b)) / (2 * h);
        CHECK((fd - J.col(k)).norm() < 1e-6 * std::max(1.0, J.col(k).norm()));
    }
}

TEST_CASE("rotation field generates rigid rotations") {
    const MassModel m = five_body();
    const SystemModel sys = make_full(m, derive_scales(0.05, m.mu, m.nu));
    const PhaseState x = sample_state(sys.layout);
    const double h = 1e-6;
    const Eigen::VectorXd fd = (rotate(x, h).z - rotate(x, -h).z) / (2 * h);
    CHECK((fd - sys.rotationField(x.z)).norm() < 1e-8);
    // The Hamiltonian is rotation invariant.
    CHECK(sys.hamiltonian(rotate(x, 0.9).z) == doctest::Approx(sys.hamiltonian(x.z)).epsilon(1e-13));
}

TEST_CASE("circular states of the model system are relative equilibria") {
    MassModel m{{1.0}, {{1.0}}, 1e-3, 1e-2};
    const FrequencySet fs = make_resonant(0.05, 1.0, 2 * M_PI / 0.95, {0}, {{1}}, 0.5);
    const SystemModel sys = make_model(m, 0.05);
    const PhaseState x = circular_state(sys, fs, {0.2, -0.4});
    const PhaseState y = flow(sys, x, 1.7);
    // Each body advances by its own angular velocity.
    for (int b = 0; b < 2; ++b) {
        const double w = sys.timeScale[b] * slot_frequency(sys.layout, fs, b);
        const double a0 = std::atan2(x.pos(b).y(), x.pos(b).x());
        const double a1 = std::atan2(y.pos(b).y(), y.pos(b).x());
        CHECK(std::abs(std::remainder(a1 - a0 - w * 1.7, 2 * M_PI)) < 1e-9);
        CHECK(y.pos(b).norm() == doctest::Approx(x.pos(b).norm()).epsilon(1e-10));
    }
    const CircularOrbit c = circular_orbit(sys.factors[0], 1.0);
    CHECK(c.r > 0.0);
    CHECK(c.I == doctest::Approx(sys.factors[0].m * c.r * c.r));
}

TEST_CASE("integrate records drift and the requested end point") {
    const MassModel m = five_body();
    const SystemModel sys = make_full(m, derive_scales(0.05, m.mu, m.nu));
    const PhaseState x = sample_state(sys.layout);
    IntegrationOptions o;
    o.recordSteps = true;
    const Trajectory tr = integrate(sys, x, 5.0, o);
    CHECK(tr.t.back() == 5.0);
    CHECK(tr.t.size() > 2);
    CHECK(tr.energyDrift < 1e-9);
    CHECK(tr.momentumDrift < 1e-9);
    CHECK((tr.z.back() - flow(sys, x, 5.0).z).norm() < 1e-9);

    const auto zs = sample(sys, x, {0.0, 1.0, 2.5, 5.0});
    REQUIRE(zs.size() == 4);
    CHECK((zs[0] - x.z).norm() == 0.0);
    CHECK((zs[3] - tr.z.back()).norm() < 1e-9);
}

TEST_CASE("tangent flow agrees with finite differences of the flow") {
    MassModel m{{1.0}, {{1.0}}, 1e-3, 1e-2};
    const SystemModel sys = make_full(m, derive_scales(0.05, m.mu, m.nu));
    const FrequencySet fs = make_resonant(0.05, 1.0, 2 * M_PI / 0.95, {0}, {{1}}, 0.5);
    const PhaseState x = circular_state(sys, fs, {0.0, 0.3});
    TangentState ts{x, Eigen::MatrixXd::Identity(sys.dim(), sys.dim())};
    const TangentState out = integrate_with_tangent(sys, ts, 2.0, 1e-12);
    const double h = 1e-6;
    for (int k = 0; k < sys.dim(); ++k) {
        PhaseState a = x, b = x;
        a.z[k] += h;
        b.z[k] -= h;
        const Eigen::VectorXd fd = (flow(sys, a, 2.0, 1e-13).z - flow(sys, b, 2.0, 1e-13).z) / (2 * h);
        CHECK((fd - out.deviation.col(k)).norm() < 1e-6 * std::max(1.0, fd.norm()));
    }
}

TEST_CASE("collisions abort the integration") {
    MassModel m{{1.0}, {{1.0}}, 1e-3, 1e-2};
    const SystemModel sys = make_model(m, 0.05);
    PhaseState x(sys.layout);
    x.setPos(0, Vec2(1.0, 0.0));
    x.setMom(0, Vec2(0.0, 0.0));  // radial infall onto the Sun
    x.setPos(1, Vec2(0.5, 0.0));
    x.setMom(1, Vec2(0.0, 1.0));
    CHECK_THROWS_AS(flow(sys, x, 200.0), IntegrationError);
}

TEST_CASE("three-body and Hill systems share the layout") {
    const SystemModel h = make_hill(1.0, 0.05);
    const SystemModel t = make_threebody(0.3, 1.0, 1e-6, 0.05);
    CHECK(h.dim() == t.dim());
    CHECK(h.w == 0.0);
}
