// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance            run all criteria
//   acceptance 3 7        run the listed ones
// Exit status is 0 only when every requested criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "satorb/averaging.hpp"
#include "satorb/coords.hpp"
#include "satorb/dynamics.hpp"
#include "satorb/params.hpp"
#include "satorb/periodic.hpp"
#include "satorb/potentials.hpp"
#include "satorb/stability.hpp"

using namespace satorb;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string line(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string line(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Sun-Earth-Moon style instance: one planet, one satellite.
struct SunEarthMoon {
    MassModel m;
    ScaleParameters sc;
    FrequencySet fs;
    explicit SunEarthMoon(double omega) {
        m.m = {1.0};
        m.mSat = {{1.0}};
        m.mu = 1e-3;
        m.nu = 1e-2;
        sc = derive_scales(omega, m.mu, m.nu);
        fs = make_resonant(omega, 1.0, 2.0 * M_PI / (1.0 - omega), {0}, {{1}}, 0.5);
    }
};

// ---------------------------------------------------------------------------

Outcome criterion1() {
    const std::map<int, double> published = {
        {1, 17.55}, {2, 7.21},  {3, 5.04},  {4, 4.15},  {5, 3.67},   {6, 3.37},   {7, 3.17},
        {8, 3.03},  {9, 2.92},  {10, 2.84}, {-2, 0.37}, {-3, 0.72},  {-4, 0.97},  {-5, 1.16},
        {-6, 1.29}, {-7, 1.39}, {-8, 1.48}, {-9, 1.54}, {-10, 1.60}, {-11, 1.64}};
    const auto t0 = std::chrono::steady_clock::now();
    const AveragingCoefficients tab = coefficient_table(-11, 10);
    const double elapsed = seconds_since(t0);
    double worst = 0.0;
    int worstK = 0;
    for (const auto& [k, ref] : published) {
        const double v = tab.cTable.at(k) / (double(k) * k);
        if (std::abs(v - ref) > worst) {
            worst = std::abs(v - ref);
            worstK = k;
        }
    }
    return {worst <= 0.01 && elapsed < 10.0,
            line("c_k/k^2 table: max |err| %.4g at k=%d (tol 0.01), runtime %.3f s (limit 10 s)", worst, worstK,
                elapsed)};
}

Outcome criterion2() {
    const AsymptoticConstants a = asymptotic_constants(1e-12);
    const AsymptoticConstants b = asymptotic_constants_bessel();
    // 1e-9 already fixes c_1000 to ten digits; tighter panels only add cost.
    const double c1000 = c_kappa(1000, 1e-9) / 1e6;
    const double rel = std::abs(c1000 - a.C1) / a.C1;
    const bool inRange = a.C1 >= 2.16 && a.C1 <= 2.20;
    return {inRange && rel <= 0.005,
            line("asymC1 = %.6f (Bessel closed form %.6f), required [2.16, 2.20]: %s; c_1000/1e6 = %.6f, rel diff %.3e "
                "(tol 5e-3)",
                a.C1, b.C1, inRange ? "in range" : "OUT of range", c1000, rel)};
}

Outcome criterion3() {
    std::mt19937_64 rng(20241);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double gradMax = 0.0, hessRel = 0.0, deltaRel = 0.0;
    std::string draws;
    for (int d = 0; d < 3; ++d) {
        const int sign = U(rng) < 0.5 ? -1 : 1;
        const double I = sign * (0.5 + 1.5 * U(rng));
        const double Om0 = 0.2 + 0.3 * U(rng);
        const double Om = sign * (Om0 + (1.0 - Om0) * U(rng));
        const AveragedHillData h = averaged_hill(I, Om, Om0, std::pow(Om0, -2.0 / 3.0));
        const double pre = Om0 * Om0 * I / Om;
        Eigen::Matrix2d ref;
        ref << -29.0 / 8.0 * pre, 0.0, 0.0, 25.0 / (8.0 * I * I) * pre;
        const double dref = -Om0 * Om0 / (4.0 * Om);
        gradMax = std::max(gradMax, h.gradient.norm());
        hessRel = std::max(hessRel, (h.hessian - ref).norm() / ref.norm());
        deltaRel = std::max(deltaRel, std::abs(h.delta - dref) / std::abs(dref));
        draws += line(" [I=%.3f Om=%.3f: hess diag (%.4f, %.4f) vs (%.4f, %.4f), Delta*Om/Om0^2 = %.6f]", I, Om,
                     h.hessian(0, 0) / pre, h.hessian(1, 1) * I * I / pre, -29.0 / 8.0, 25.0 / 8.0,
                     h.delta * Om / (Om0 * Om0));
    }
    return {gradMax < 1e-8 && hessRel <= 1e-6 && deltaRel <= 1e-6,
            line("averaged Hill: |grad| %.2e (tol 1e-8), Hessian rel err %.3e (tol 1e-6), Delta rel err %.3e "
                "(tol 1e-6);",
                gradMax, hessRel, deltaRel) +
                draws};
}

Outcome criterion4() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Mat4 Wc = Mat4::Zero();  // dp ^ dq in (x, y, px, py)
    Wc(2, 0) = Wc(3, 1) = 1.0;
    Wc(0, 2) = Wc(1, 3) = -1.0;
    Mat4 Wn = Mat4::Zero();  // dI ^ dphi + dp ^ dq in (phi, I, q, p)
    Wn(1, 0) = Wn(3, 2) = 1.0;
    Wn(0, 1) = Wn(2, 3) = -1.0;
    double sym = 0.0, energy = 0.0, hess = 0.0;
    for (int s = 0; s < 100; ++s) {
        const KeplerFactor f{0.5 + 1.5 * U(rng), 0.5 + 1.5 * U(rng)};
        const double sign = U(rng) < 0.5 ? -1.0 : 1.0;
        const Vec4 n(-M_PI + 2 * M_PI * U(rng), sign * (0.5 + 1.5 * U(rng)), -0.5 + U(rng), -0.5 + U(rng));
        const Mat4 J = kepler_to_cart_jacobian(n, f);
        sym = std::max(sym, (J.transpose() * Wc * J - Wn).norm());

        const Vec4 c = kepler_to_cart(n, f);
        const double hc = 0.5 * c.tail<2>().squaredNorm() / f.m - f.k * f.m / c.head<2>().norm();
        const double hn = kepler_energy({n[0], n[1], n[2], n[3]}, f.k, f.m);
        energy = std::max(energy, std::abs(hc - hn) / std::abs(hc));

        const NormalizedKepler circ{n[0], n[1], 0.0, 0.0};
        const Eigen::Matrix3d H = kepler_energy_hessian(circ, f.k, f.m);
        const double r = n[1] * n[1] / (f.k * f.m * f.m);
        const double Om = n[1] / (f.m * r * r);
        const Eigen::Vector3d ref(-3.0 / (f.m * r * r), Om * n[1], Om / n[1]);
        Eigen::Matrix3d E = H;
        E.diagonal() -= ref;
        hess = std::max(hess, E.cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff());
    }
    return {sym < 1e-9 && energy <= 1e-12 && hess <= 1e-10,
            line("Kepler normalization over 100 points: symplectic defect %.2e (tol 1e-9), energy rel err %.2e "
                "(tol 1e-12), Hessian rel err %.2e (tol 1e-10)",
                sym, energy, hess)};
}

Outcome criterion5() {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double kin = 0.0, imp = 0.0, mom = 0.0;
    for (int s = 0; s < 100; ++s) {
        std::vector<Vec2> r(5), p(5);
        std::vector<double> c(5);
        c[0] = 1.0;
        for (int i = 1; i < 5; ++i) c[i] = 1e-3 + 0.5 * (1.0 + U(rng));
        for (int i = 0; i < 5; ++i) {
            r[i] = Vec2(3 * U(rng), 3 * U(rng));
            p[i] = Vec2(U(rng), U(rng));
        }
        const PoincareImage t = poincare_forward(r, p, c);
        double K = 0.0;
        Vec2 P = Vec2::Zero();
        for (int i = 0; i < 5; ++i) {
            K += p[i].squaredNorm() / (2 * c[i]);
            P += p[i];
        }
        const double k1 = kinetic_form_sum(t.impulses, c);
        const double k2 = kinetic_form_reduced(t.impulses, c);
        kin = std::max({kin, std::abs(k1 - K) / K, std::abs(k2 - K) / K});
        imp = std::max(imp, (t.impulses[0] - P).norm() / std::max(P.norm(), 1e-300));
        const double I0 = angular_momentum(r, p);
        const double I1 = angular_momentum(t.positions, t.impulses);
        double scale = 0.0;
        for (int i = 0; i < 5; ++i) scale += r[i].norm() * p[i].norm();
        mom = std::max(mom, std::abs(I1 - I0) / scale);
    }

    // Energy relation between physical and rescaled relative coordinates.
    MassModel m{{0.6, 0.4}, {{0.3, 0.3}, {0.4}}, 1e-3, 0.02};
    const ScaleParameters sc = derive_scales(0.05, m.mu, m.nu);
    const SystemModel full = make_full(m, sc);
    std::uniform_real_distribution<double> V(-1.0, 1.0);
    double energy = 0.0;
    for (int s = 0; s < 20; ++s) {
        PhaseState x(Layout::of(m));
        for (int i = 0; i < 2; ++i) {
            x.setPos(i, Vec2(1.0 + 0.5 * i + 0.1 * V(rng), 0.1 * V(rng)));
            x.setMom(i, Vec2(0.1 * V(rng), 0.8 + 0.1 * V(rng)));
        }
        for (int b = 2; b < 5; ++b) {
            x.setPos(b, Vec2(0.5 + 0.1 * V(rng), 0.3 * V(rng)));
            x.setMom(b, Vec2(0.1 * V(rng), 1.0 + 0.1 * V(rng)));
        }
        const double H = total_energy(from_relative(x, m, sc), sc.g);
        const double Ht = full.hamiltonian(x.z);
        energy = std::max(energy, std::abs(H - sc.rho / sc.omega * Ht) / std::abs(H));
    }
    const bool ok = kin < 1e-12 && imp < 1e-12 && mom < 1e-12 && energy <= 1e-10;
    return {ok, line("Poincare identities on 100 configurations: kinetic %.2e, impulse %.2e, angular momentum %.2e "
                    "(tol 1e-12); H = (rho/omega) H~ rel err %.2e (tol 1e-10)",
                    kin, imp, mom, energy)};
}

Outcome criterion6() {
    std::vector<double> dist;
    double worstRes = 0.0;
    std::size_t seedCount = 0;
    for (double om : {0.1, 0.05, 0.025}) {
        SunEarthMoon sem(om);
        const SystemModel full = make_full(sem.m, sem.sc);
        const GeneratingTorus gt = generating_torus(sem.fs, full);
        const auto seeds = symmetric_seeds(gt);
        seedCount = seeds.size();
        const PeriodicOrbit o = shoot_symmetric(full, gt, seeds.at(0));
        worstRes = std::max(worstRes, o.residual);
        dist.push_back(o.torusDistance);
    }
    const double r1 = dist[0] / dist[1];
    const double r2 = dist[1] / dist[2];
    const bool ratios = std::abs(r1 - 4.0) <= 1.0 && std::abs(r2 - 4.0) <= 1.0;
    return {seedCount == 1 && worstRes < 1e-9 && ratios,
            line("Sun-Earth-Moon: %zu seed, max residual %.2e (tol 1e-9); torusDistance %.4e, %.4e, %.4e, ratios "
                "%.3f, %.3f (4 +- 25%%)",
                seedCount, worstRes, dist[0], dist[1], dist[2], r1, r2)};
}

Outcome criterion7() {
    MassModel m;
    m.m = {1.0};
    m.mSat = {{0.5, 0.5}};
    std::vector<double> defects, windows;
    bool ok = true;
    std::string detail;
    for (double om : {0.05, 0.025}) {
        const FrequencySet fs = make_resonant(om, 0.3, 6 * M_PI, {0}, {{2, -3}}, 0.3);
        const SystemModel sys = make_unperturbed(m, om);
        const GeneratingTorus gt = generating_torus(fs, sys);
        const PeriodicOrbit o = shoot_symmetric(sys, gt, symmetric_seeds(gt).at(0));
        const BlockStructureReport r = block_structure_check(sys, gt, o);
        ok = ok && r.offStructure < r.offTolerance && r.planetAngleDefect < 1e-8 && r.satelliteAnglesOk;
        defects.push_back(r.satelliteAngleDefect);
        windows.push_back(r.satelliteWindow);
        detail += line(" [omega=%.3f: off %.2e < %.2e, planet %.2e, satellite %.3e window %.3e]", om, r.offStructure,
                      r.offTolerance, r.planetAngleDefect, r.satelliteAngleDefect, r.satelliteWindow);
    }
    // The defect has to shrink like the omega^3 window; 25% slack on the factor 8.
    const double ratio = defects[0] / defects[1];
    const bool scaling = ratio >= 6.0;
    return {ok && scaling, line("UNPERTURBED N=3 block structure, defect ratio per halving %.3f (>= 6);", ratio) + detail};
}

Outcome criterion8() {
    MassModel p;
    p.m = {0.5, 0.5};
    p.mSat = {{}, {}};
    p.mu = 1e-4;
    p.nu = 0.01;
    const double om = 0.1;
    const ScaleParameters sc = derive_scales(om, p.mu, p.nu);
    const FrequencySet fs = make_resonant(om, 0.5, 4 * M_PI / om, {0, 1}, {{}, {}}, 0.5);
    const SystemModel full = make_full(p, sc);
    const GeneratingTorus gt = generating_torus(fs, full);

    // Averaged interaction differential against direct averaging.
    const std::vector<double> phi = {0.3, 1.1};
    const std::vector<double> w = {gt.frequencies[0], gt.frequencies[1]};
    const std::vector<double> r = {gt.radii[0], gt.radii[1]};
    const std::vector<double> I = {gt.actions[0], gt.actions[1]};
    const PlanetCovector a = averaged_R0_differential(phi, p.m, w, r);
    const PlanetCovector b = averaged_R0_numeric(phi, p.m, w, r, I);
    double diff = 0.0;
    for (int i = 0; i < 2; ++i) diff = std::max(diff, (a.coeff[i] - b.coeff[i]).cwiseAbs().maxCoeff());
    const bool nonzero = a.norm() > 1e-8;
    const bool match = diff <= 1e-4;
    const UnclosingReport cm = classify_masses(p.m, {fs.Omega[0][0], fs.Omega[1][0]});

    // Shooting near the generating torus with alpha, T - T~ inside D mu.
    const auto seeds = symmetric_seeds(gt);
    const double D = 1.0;
    int accepted = 0, converged = 0, attempts = 0;
    for (int pair = 0; pair < 2; ++pair) {
        const double dT = pair == 0 ? 0.0 : 0.5 * D * p.mu;
        const double al = pair == 0 ? 0.0 : 0.5 * D * p.mu;
        for (int a5 = 0; a5 < 5; ++a5)
            for (int q5 = 0; q5 < 5; ++q5) {
                ++attempts;
                SymmetricSeed s = seeds.at(0);
                PhaseState st(gt.layout);
                for (int k = 0; k < 2; ++k) {
                    const Vec4 n(s.pattern[k] ? M_PI : 0.0, gt.actions[k] * (1.0 + 0.01 * (a5 - 2)), 0.01 * (q5 - 2),
                                 0.0);
                    st.setBlock(k, kepler_to_cart(n, gt.factors[k]));
                }
                s.state = st;
                ShootOptions o;
                o.T = fs.T + dT;
                o.alpha = al;
                try {
                    const PeriodicOrbit orb = shoot_symmetric(full, gt, s, o);
                    ++converged;
                    if (orb.torusDistance < 0.1 && std::abs(orb.T - fs.T) + std::abs(orb.alpha) <= D * p.mu)
                        ++accepted;
                } catch (const SearchFailure&) {
                }
            }
    }
    return {nonzero && match && accepted == 0,
            line("N=n=2, kappa=1: |dR0| %.4e (nonzero: %s), max diff to direct averaging %.3e (tol 1e-4); masses in M: "
                "%d; %d shooting attempts, %d converged, %d accepted (required 0)",
                a.norm(), nonzero ? "yes" : "no", diff, cm.inM ? 1 : 0, attempts, converged, accepted)};
}

Outcome criterion9() {
    // Loops in the Sun-Earth-Moon succession map.
    SunEarthMoon sem(0.05);
    const SystemModel full = make_full(sem.m, sem.sc);
    const GeneratingTorus gt = generating_torus(sem.fs, full);
    const SuccessionMap A(full, gt, sem.fs.T, sem.fs.alpha);
    std::mt19937_64 rng(909);
    std::normal_distribution<double> N01;
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    double loops = 0.0;
    const int d = gt.layout.dim();
    for (int l = 0; l < 20; ++l) {
        LoopCurve c;
        c.centre.resize(d);
        c.u.resize(d);
        c.v.resize(d);
        for (int b = 0; b < gt.bodies(); ++b) c.centre.segment<4>(4 * b) << ang(rng), gt.actions[b], 0.0, 0.0;
        for (int k = 0; k < d; ++k) {
            c.u[k] = N01(rng);
            c.v[k] = N01(rng);
        }
        c.u.normalize();
        c.v -= c.v.dot(c.u) * c.u;
        c.v.normalize();
        c.radius = 0.05;
        loops = std::max(loops, std::abs(loop_integral(A, c, 32)));
    }

    // Symmetric planets-only instance for the evenness of Psi.
    MassModel p;
    p.m = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    p.mSat = {{}, {}, {}};
    p.mu = 1e-3;
    p.nu = 0.01;
    const double om = 0.05;
    const FrequencySet f3 = make_resonant(om, 0.35, 2 * M_PI / (0.2 * om), {0, 1, 3}, {{}, {}, {}}, 0.2);
    const SystemModel F3 = make_full(p, derive_scales(om, p.mu, p.nu));
    const GeneratingTorus g3 = generating_torus(f3, F3);
    const SuccessionMap B(F3, g3, f3.T, f3.alpha);
    double even = 0.0;
    for (int s = 0; s < 3; ++s) {
        const std::vector<double> phi = {0.8 * ang(rng), 0.8 * ang(rng), 0.8 * ang(rng)};
        even = std::max(even, std::abs(psi_evenness(B, phi, 16).difference));
    }
    return {loops < 1e-8 && even < 1e-7,
            line("generating function: max |loop integral| over 20 loops %.2e (tol 1e-8); Psi evenness defect %.2e "
                "(tol 1e-7)",
                loops, even)};
}

Outcome criterion10() {
    SunEarthMoon sem(0.05);
    // Circular return in the model system.
    const SystemModel model = make_model(sem.m, sem.sc.omega);
    const PhaseState c0 = circular_state(model, sem.fs, {0.0, 0.0});
    double ret = 0.0;
    PhaseState cur = c0;
    for (int k = 1; k <= 10; ++k) {
        cur = flow(model, cur, k * sem.fs.T, 1e-12);
        const PhaseState back = rotate(cur, -k * sem.fs.alpha);
        ret = std::max(ret, (back.z - c0.z).norm() / c0.z.norm() / k);
    }

    // Energy and angular momentum drift over 1000 periods.
    const SystemModel full = make_full(sem.m, sem.sc);
    const GeneratingTorus gt = generating_torus(sem.fs, full);
    const PeriodicOrbit orb = shoot_symmetric(full, gt, symmetric_seeds(gt).at(0));
    PhaseState start = orb.initial;
    start.z[4] += 1e-3;  // off the periodic orbit
    start.t = 0.0;
    IntegrationOptions io;
    io.tol = 1e-12;
    const Trajectory tr = integrate(full, start, 1000 * sem.fs.T, io);

    // Reversibility.
    const double t = sem.fs.T;
    const PhaseState a = apply_involution(Involution::J, flow(full, apply_involution(Involution::J, start), t, 1e-13));
    const PhaseState b = flow(full, start, -t, 1e-13);
    const double rev = (a.z - b.z).norm() / b.z.norm();
    // J-conjugation is exact in floating point, so also require the forward
    // and backward flows to undo each other.
    const double roundTrip = (flow(full, b, 0.0, 1e-13).z - start.z).norm() / start.z.norm();

    const bool ok = ret < 1e-9 && tr.energyDrift < 1e-8 && tr.momentumDrift < 1e-8 && rev < 1e-9 && roundTrip < 1e-9;
    return {ok, line("integrator: circular return %.2e per period (tol 1e-9); drift over 1000 periods H %.2e, I %.2e "
                    "(tol 1e-8); reversibility %.2e, round trip %.2e (tol 1e-9)",
                    ret, tr.energyDrift, tr.momentumDrift, rev, roundTrip)};
}

Outcome criterion11() {
    const double om = 0.05;
    const SystemModel hill = make_hill(1.0, om);
    Eigen::VectorXd z(8);
    z << 1.3, 0.2, -0.1, 0.7, 0.4, -0.3, 0.25, 0.6;
    const Eigen::VectorXd fh = hill.field(z);
    bool ok = true;
    double cmax = 0.0, cmin = INFINITY;
    std::string detail;
    for (double th : {0.1, 0.5, 0.9}) {
        double d[2], rho[2];
        int idx = 0;
        for (double mu : {1e-6, 1e-9}) {
            const SystemModel tb = make_threebody(th, 1.0, mu, om);
            rho[idx] = std::cbrt(om * om * mu);
            d[idx] = (tb.field(z) - fh).norm();
            cmax = std::max(cmax, d[idx] / rho[idx]);
            cmin = std::min(cmin, d[idx] / rho[idx]);
            ++idx;
        }
        const double slope = std::log(d[1] / d[0]) / std::log(rho[1] / rho[0]);
        // The difference must shrink at least as fast as rho.
        ok = ok && slope >= 0.9;
        detail += line(" [theta=%.1f: |diff|/rho %.4e -> %.4e, slope %.3f]", th, d[0] / rho[0], d[1] / rho[1], slope);
    }
    return {ok, line("three-body vs Hill field, uniform bound |diff|/rho <= %.4e;", cmax) + detail};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7, criterion8,
                                                            criterion9, criterion10, criterion11};
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
            return 2;
        }
        which.push_back(k);
    }
    if (which.empty())
        for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) which.push_back(k);

    int failed = 0;
    for (int k : which) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d %s (%.2f s): %s\n", k, o.pass ? "PASS" : "FAIL", seconds_since(t0),
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
