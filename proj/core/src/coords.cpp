#include "satorb/coords.hpp"

#include <cmath>
#include <numeric>

#include "satorb/detail/dual.hpp"
#include "satorb/errors.hpp"

namespace satorb {

using detail::Dual;

Layout Layout::of(const MassModel& m) {
    std::vector<int> s(m.planets());
    for (int i = 0; i < m.planets(); ++i) s[i] = m.satellites(i);
    return Layout(s);
}

Layout Layout::of(const FrequencySet& fs) {
    std::vector<int> s(fs.planets());
    for (int i = 0; i < fs.planets(); ++i) s[i] = fs.satellites(i);
    return Layout(s);
}

int Layout::bodies() const { return planets() + std::accumulate(sats.begin(), sats.end(), 0); }

int Layout::satSlot(int i, int j) const {
    int s = planets();
    for (int a = 0; a < i; ++a) s += sats[a];
    return s + j;
}

int Layout::parentOf(int slot) const {
    if (slot < planets()) return slot;
    int s = slot - planets();
    for (int i = 0; i < planets(); ++i) {
        if (s < sats[i]) return i;
        s -= sats[i];
    }
    throw ParameterError("slot out of range");
}

int Layout::satIndex(int slot) const {
    int s = slot - planets();
    for (int i = 0; i < planets(); ++i) {
        if (s < sats[i]) return s;
        s -= sats[i];
    }
    throw ParameterError("slot out of range");
}

std::vector<double> body_masses(const MassModel& m) {
    std::vector<double> out{1.0};
    for (int i = 0; i < m.planets(); ++i) out.push_back(m.mu * m.m[i]);
    for (int i = 0; i < m.planets(); ++i)
        for (double mij : m.mSat[i]) out.push_back(m.mu * m.nu * mij);
    return out;
}

double kinetic_energy(const BarycentricConfig& c) {
    double e = 0.0;
    for (std::size_t i = 0; i < c.masses.size(); ++i) e += c.impulses[i].squaredNorm() / (2.0 * c.masses[i]);
    return e;
}

double angular_momentum(const std::vector<Vec2>& q, const std::vector<Vec2>& p) {
    double L = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) L += q[i].x() * p[i].y() - q[i].y() * p[i].x();
    return L;
}

Vec2 centre_of_mass(const BarycentricConfig& c) {
    Vec2 s = Vec2::Zero();
    double M = 0.0;
    for (std::size_t i = 0; i < c.masses.size(); ++i) {
        s += c.masses[i] * c.positions[i];
        M += c.masses[i];
    }
    return s / M;
}

Vec2 total_impulse(const BarycentricConfig& c) {
    Vec2 s = Vec2::Zero();
    for (const auto& p : c.impulses) s += p;
    return s;
}

double total_energy(const BarycentricConfig& c, double g) {
    double U = 0.0;
    const std::size_t n = c.masses.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = (c.positions[i] - c.positions[j]).norm();
            if (r == 0.0) throw DomainError("collision: two bodies share a position");
            U -= g * c.masses[i] * c.masses[j] / r;
        }
    return kinetic_energy(c) + U;
}

namespace {

void check_masses(const std::vector<double>& c) {
    if (c.empty()) throw ParameterError("empty mass list");
    for (double v : c)
        if (!(v > 0.0)) throw ParameterError("masses must be positive");
}

} // namespace

PoincareImage poincare_forward(const std::vector<Vec2>& r, const std::vector<Vec2>& p,
                               const std::vector<double>& c) {
    check_masses(c);
    const std::size_t n = c.size();
    const double cbar = std::accumulate(c.begin(), c.end(), 0.0);
    Vec2 C = Vec2::Zero();
    Vec2 P = Vec2::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        C += c[i] * r[i];
        P += p[i];
    }
    PoincareImage out;
    out.positions.push_back(C / cbar);
    out.impulses.push_back(P);
    for (std::size_t i = 1; i < n; ++i) {
        out.positions.push_back(r[i] - r[0]);
        out.impulses.push_back(p[i] - (c[i] / cbar) * P);
    }
    return out;
}

PoincareImage poincare_inverse(const std::vector<Vec2>& rt, const std::vector<Vec2>& pt,
                               const std::vector<double>& c) {
    check_masses(c);
    const std::size_t n = c.size();
    const double cbar = std::accumulate(c.begin(), c.end(), 0.0);
    Vec2 shift = Vec2::Zero();
    Vec2 S = Vec2::Zero();
    for (std::size_t i = 1; i < n; ++i) {
        shift += c[i] * rt[i];
        S += pt[i];
    }
    PoincareImage out;
    const Vec2 r0 = rt[0] - shift / cbar;
    out.positions.push_back(r0);
    out.impulses.push_back((c[0] / cbar) * pt[0] - S);
    for (std::size_t i = 1; i < n; ++i) {
        out.positions.push_back(r0 + rt[i]);
        out.impulses.push_back(pt[i] + (c[i] / cbar) * pt[0]);
    }
    return out;
}

double kinetic_form_sum(const std::vector<Vec2>& pt, const std::vector<double>& c) {
    check_masses(c);
    const double cbar = std::accumulate(c.begin(), c.end(), 0.0);
    double e = pt[0].squaredNorm() / (2.0 * cbar);
    Vec2 S = Vec2::Zero();
    for (std::size_t i = 1; i < c.size(); ++i) {
        e += pt[i].squaredNorm() / (2.0 * c[i]);
        S += pt[i];
    }
    return e + S.squaredNorm() / (2.0 * c[0]);
}

double kinetic_form_reduced(const std::vector<Vec2>& pt, const std::vector<double>& c) {
    check_masses(c);
    const double cbar = std::accumulate(c.begin(), c.end(), 0.0);
    double e = pt[0].squaredNorm() / (2.0 * cbar);
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double ct = c[0] * c[i] / (c[0] + c[i]);
        e += pt[i].squaredNorm() / (2.0 * ct);
        for (std::size_t j = i + 1; j < c.size(); ++j) e += pt[i].dot(pt[j]) / c[0];
    }
    return e;
}

PhaseState to_relative(const BarycentricConfig& c, const MassModel& m, const ScaleParameters& s) {
    const Layout L = Layout::of(m);
    if (static_cast<int>(c.positions.size()) != L.bodies() + 1)
        throw ParameterError("configuration size does not match the mass model");
    for (std::size_t a = 0; a < c.positions.size(); ++a)
        for (std::size_t b = a + 1; b < c.positions.size(); ++b)
            if (c.positions[a] == c.positions[b]) throw DomainError("collision: coincident positions");

    PhaseState x(L);
    const Vec2 M0 = c.positions[0];
    const double ximp = std::sqrt(s.R / s.mu);
    for (int i = 0; i < m.planets(); ++i) {
        const Vec2 Mi = c.positions[1 + i];
        Vec2 Ci = m.m[i] * Mi;
        Vec2 Pi = c.impulses[1 + i];
        for (int j = 0; j < m.satellites(i); ++j) {
            const int b = 1 + L.satSlot(i, j);
            Ci += m.nu * m.mSat[i][j] * c.positions[b];
            Pi += c.impulses[b];
        }
        Ci /= m.barM(i);
        x.setPos(i, (Ci - M0) / s.R);
        x.setMom(i, Pi * ximp);
        for (int j = 0; j < m.satellites(i); ++j) {
            const int slot = L.satSlot(i, j);
            const double frac = m.nu * m.mSat[i][j] / m.barM(i);
            x.setPos(slot, c.positions[1 + slot] - Mi);
            x.setMom(slot, (c.impulses[1 + slot] - frac * Pi) / (m.mu * m.nu));
        }
    }
    return x;
}

BarycentricConfig from_relative(const PhaseState& x, const MassModel& m, const ScaleParameters& s) {
    const Layout& L = x.layout;
    BarycentricConfig c;
    c.masses = body_masses(m);
    const int nb = L.bodies() + 1;
    c.positions.assign(nb, Vec2::Zero());
    c.impulses.assign(nb, Vec2::Zero());

    double mbar = 0.0;
    Vec2 wsum = Vec2::Zero();
    for (int i = 0; i < m.planets(); ++i) {
        mbar += m.barM(i);
        wsum += m.barM(i) * x.pos(i);
    }
    const Vec2 M0 = -s.mu * s.R * wsum / (1.0 + s.mu * mbar);
    c.positions[0] = M0;
    const double pimp = std::sqrt(s.mu / s.R);
    Vec2 Ptot = Vec2::Zero();
    for (int i = 0; i < m.planets(); ++i) {
        Vec2 delta = Vec2::Zero();
        for (int j = 0; j < m.satellites(i); ++j)
            delta += (m.mSat[i][j] / m.barM(i)) * x.pos(L.satSlot(i, j));
        const Vec2 Ci = M0 + s.R * x.pos(i);
        const Vec2 Mi = Ci - m.nu * delta;
        c.positions[1 + i] = Mi;
        const Vec2 Pi = pimp * x.mom(i);
        Vec2 pi = Pi;
        for (int j = 0; j < m.satellites(i); ++j) {
            const int slot = L.satSlot(i, j);
            c.positions[1 + slot] = Mi + x.pos(slot);
            const Vec2 pij = m.mu * m.nu * x.mom(slot) + (m.nu * m.mSat[i][j] / m.barM(i)) * Pi;
            c.impulses[1 + slot] = pij;
            pi -= pij;
        }
        c.impulses[1 + i] = pi;
        Ptot += Pi;
    }
    c.impulses[0] = -Ptot;
    return c;
}

NormalizedKepler kepler_normalize(double psi, double pPsi, double r, double pR, double k, double m) {
    if (pPsi == 0.0) throw DomainError("normalizing coordinates are singular at zero angular momentum");
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    NormalizedKepler n;
    n.phi = psi - 2.0 * r * pR / pPsi;
    n.I = pPsi;
    n.q = std::log(k * m * m * r / (pPsi * pPsi));
    n.p = r * pR;
    return n;
}

PolarKepler kepler_denormalize(const NormalizedKepler& n, double k, double m) {
    if (n.I == 0.0) throw DomainError("normalizing coordinates are singular at zero angular momentum");
    PolarKepler o;
    o.pPsi = n.I;
    o.r = n.I * n.I * std::exp(n.q) / (k * m * m);
    o.pR = n.p / o.r;
    o.psi = n.phi + 2.0 * n.p / n.I;
    return o;
}

namespace {

template <class S>
S kepler_energy_t(const S& I, const S& q, const S& p, double k, double m) {
    using std::exp;
    const S I2 = I * I;
    const S eq = exp(q);
    return k * k * m * m * m * ((I2 + p * p) / (2.0 * I2 * I2 * eq * eq) - 1.0 / (I2 * eq));
}

} // namespace

double kepler_energy(const NormalizedKepler& n, double k, double m) {
    return kepler_energy_t(n.I, n.q, n.p, k, m);
}

Eigen::Matrix3d kepler_energy_hessian(const NormalizedKepler& n, double k, double m) {
    using D1 = detail::Dual<double, 3>;
    using D2 = detail::Dual<D1, 3>;
    const double v[3] = {n.I, n.q, n.p};
    D2 x[3];
    for (int i = 0; i < 3; ++i) x[i] = D2(D1(v[i], i), i);
    const D2 e = kepler_energy_t(x[0], x[1], x[2], k, m);
    Eigen::Matrix3d h;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) h(i, j) = e.d[i].d[j];
    return h;
}

namespace {

template <class S>
std::array<S, 4> to_kepler_t(const std::array<S, 4>& b, double k, double m) {
    using std::atan2;
    using std::log;
    using std::sqrt;
    const S r2 = b[0] * b[0] + b[1] * b[1];
    const S r = sqrt(r2);
    const S pr = (b[0] * b[2] + b[1] * b[3]) / r;
    const S I = b[0] * b[3] - b[1] * b[2];
    const S psi = atan2(b[1], b[0]);
    return {psi - 2.0 * r * pr / I, I, log(k * m * m * r / (I * I)), r * pr};
}

template <class S>
std::array<S, 4> to_cart_t(const std::array<S, 4>& n, double k, double m) {
    using std::cos;
    using std::exp;
    using std::sin;
    const S& I = n[1];
    const S r = I * I * exp(n[2]) / (k * m * m);
    const S pr = n[3] / r;
    const S psi = n[0] + 2.0 * n[3] / I;
    const S c = cos(psi);
    const S s = sin(psi);
    const S pt = I / r;
    return {r * c, r * s, pr * c - pt * s, pr * s + pt * c};
}

void check_block(const Vec4& b) {
    if (b[0] == 0.0 && b[1] == 0.0) throw DomainError("normalizing coordinates undefined at the origin");
    if (b[0] * b[3] - b[1] * b[2] == 0.0)
        throw DomainError("normalizing coordinates are singular at zero angular momentum");
}

} // namespace

Vec4 cart_to_kepler(const Vec4& b, const KeplerFactor& f) {
    check_block(b);
    const auto o = to_kepler_t<double>({b[0], b[1], b[2], b[3]}, f.k, f.m);
    return {reduce_angle(o[0]), o[1], o[2], o[3]};
}

Vec4 kepler_to_cart(const Vec4& n, const KeplerFactor& f) {
    if (n[1] == 0.0) throw DomainError("normalizing coordinates are singular at zero angular momentum");
    const auto o = to_cart_t<double>({n[0], n[1], n[2], n[3]}, f.k, f.m);
    return {o[0], o[1], o[2], o[3]};
}

Mat4 cart_to_kepler_jacobian(const Vec4& b, const KeplerFactor& f) {
    check_block(b);
    using D = Dual<double, 4>;
    const auto o = to_kepler_t<D>({D(b[0], 0), D(b[1], 1), D(b[2], 2), D(b[3], 3)}, f.k, f.m);
    Mat4 J;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) J(r, c) = o[r].d[c];
    return J;
}

Mat4 kepler_to_cart_jacobian(const Vec4& n, const KeplerFactor& f) {
    using D = Dual<double, 4>;
    const auto o = to_cart_t<D>({D(n[0], 0), D(n[1], 1), D(n[2], 2), D(n[3], 3)}, f.k, f.m);
    Mat4 J;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) J(r, c) = o[r].d[c];
    return J;
}

NormalizedKepler apply_involution(Involution w, const NormalizedKepler& n) {
    switch (w) {
    case Involution::Sl: return {-n.phi, -n.I, n.q, n.p};
    case Involution::S: return {n.phi, -n.I, n.q, -n.p};
    case Involution::J: return {-n.phi, n.I, n.q, -n.p};
    }
    return n;
}

namespace {

Eigen::Matrix2d reflection(double axisAngle) {
    const double c = std::cos(2.0 * axisAngle);
    const double s = std::sin(2.0 * axisAngle);
    Eigen::Matrix2d R;
    R << c, s, s, -c;
    return R;
}

Eigen::Matrix4d slot_matrix(Involution w, double axisAngle) {
    Eigen::Matrix4d B = Eigen::Matrix4d::Zero();
    const Eigen::Matrix2d R = reflection(axisAngle);
    switch (w) {
    case Involution::Sl:
        B.topLeftCorner<2, 2>() = R;
        B.bottomRightCorner<2, 2>() = R;
        break;
    case Involution::S:
        B.topLeftCorner<2, 2>().setIdentity();
        B.bottomRightCorner<2, 2>() = -Eigen::Matrix2d::Identity();
        break;
    case Involution::J:
        B.topLeftCorner<2, 2>() = R;
        B.bottomRightCorner<2, 2>() = -R;
        break;
    }
    return B;
}

} // namespace

PhaseState apply_involution(Involution w, const PhaseState& x, double axisAngle) {
    const Eigen::Matrix4d B = slot_matrix(w, axisAngle);
    PhaseState y = x;
    for (int b = 0; b < x.layout.bodies(); ++b) y.setBlock(b, B * x.block(b));
    if (w != Involution::Sl) y.t = -x.t;
    return y;
}

Eigen::MatrixXd involution_matrix(Involution w, const Layout& l, double axisAngle) {
    const Eigen::Matrix4d B = slot_matrix(w, axisAngle);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(l.dim(), l.dim());
    for (int b = 0; b < l.bodies(); ++b) M.block<4, 4>(4 * b, 4 * b) = B;
    return M;
}

PhaseState rotate(const PhaseState& x, double angle) {
    PhaseState y = x;
    y.z = rotation_matrix(x.layout, angle) * x.z;
    return y;
}

Eigen::MatrixXd rotation_matrix(const Layout& l, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(l.dim(), l.dim());
    for (int b = 0; b < 2 * l.bodies(); ++b) M.block<2, 2>(2 * b, 2 * b) << c, -s, s, c;
    return M;
}

} // namespace satorb
