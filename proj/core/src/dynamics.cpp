#include "satorb/dynamics.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "satorb/errors.hpp"

namespace satorb {

namespace odeint = boost::numeric::odeint;
using StateVec = std::vector<double>;

std::string to_string(SystemKind k) {
    switch (k) {
    case SystemKind::Full: return "full";
    case SystemKind::Unperturbed: return "unperturbed";
    case SystemKind::Model: return "model";
    case SystemKind::ThreeBody: return "threebody";
    case SystemKind::Hill: return "hill";
    }
    return "unknown";
}

SystemKind system_kind_from_string(const std::string& s) {
    if (s == "full") return SystemKind::Full;
    if (s == "unperturbed") return SystemKind::Unperturbed;
    if (s == "model") return SystemKind::Model;
    if (s == "threebody") return SystemKind::ThreeBody;
    if (s == "hill") return SystemKind::Hill;
    throw ParameterError("unknown system kind '" + s + "'");
}

namespace {

Vec2 slot_pos(const Eigen::VectorXd& z, int slot) { return z.segment<2>(4 * slot); }
Vec2 slot_mom(const Eigen::VectorXd& z, int slot) { return z.segment<2>(4 * slot + 2); }

double newton_value(const NewtonTerm& t, const Eigen::VectorXd& z) {
    Vec2 d = slot_pos(z, t.a);
    if (t.b >= 0) d -= slot_pos(z, t.b);
    return -t.c / d.norm();
}

void newton_derivatives(const NewtonTerm& t, const Eigen::VectorXd& z, double guard, Eigen::VectorXd& g,
                        Eigen::MatrixXd* H) {
    Vec2 d = slot_pos(z, t.a);
    if (t.b >= 0) d -= slot_pos(z, t.b);
    const double r2 = d.squaredNorm();
    const double r = std::sqrt(r2);
    if (!(r > guard)) {
        std::ostringstream os;
        os << "collision guard: separation " << r << " between slots " << t.a << " and " << t.b;
        throw DomainError(os.str());
    }
    const double r3 = r2 * r;
    const Vec2 gd = t.c * d / r3;
    const int ia = 4 * t.a;
    g.segment<2>(ia) += gd;
    if (t.b >= 0) g.segment<2>(4 * t.b) -= gd;
    if (!H) return;
    const Eigen::Matrix2d h = t.c * (Eigen::Matrix2d::Identity() / r3 - 3.0 * d * d.transpose() / (r3 * r2));
    H->block<2, 2>(ia, ia) += h;
    if (t.b >= 0) {
        const int ib = 4 * t.b;
        H->block<2, 2>(ib, ib) += h;
        H->block<2, 2>(ia, ib) -= h;
        H->block<2, 2>(ib, ia) -= h;
    }
}

} // namespace

double SystemModel::slowEnergy(const Eigen::VectorXd& z) const {
    double e = 0.0;
    const int n = layout.planets();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) e += 0.5 * A(a, b) * slot_mom(z, a).dot(slot_mom(z, b));
    for (const auto& t : slowNewton) e += newton_value(t, z);
    return e;
}

double SystemModel::kernelEnergy(const Eigen::VectorXd& z) const {
    double e = 0.0;
    for (const auto& k : kernels) e += kernel_value(k, z);
    return e;
}

double SystemModel::fastEnergy(const Eigen::VectorXd& z) const {
    double e = 0.0;
    const int n = layout.planets();
    const int s = layout.bodies() - n;
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) e += 0.5 * B(a, b) * slot_mom(z, n + a).dot(slot_mom(z, n + b));
    for (const auto& t : fastNewton) e += newton_value(t, z);
    return e + kernelEnergy(z);
}

double SystemModel::angularMomentum(const Eigen::VectorXd& z) const {
    double L = 0.0;
    for (int b = 0; b < layout.bodies(); ++b) {
        const Vec2 q = slot_pos(z, b);
        const Vec2 p = slot_mom(z, b);
        L += (layout.isPlanet(b) ? 1.0 : w) * (q.x() * p.y() - q.y() * p.x());
    }
    return L;
}

void SystemModel::gradients(const Eigen::VectorXd& z, Eigen::VectorXd& gS, Eigen::VectorXd& gF,
                            Eigen::MatrixXd* HS, Eigen::MatrixXd* HF) const {
    const int d = dim();
    gS = Eigen::VectorXd::Zero(d);
    gF = Eigen::VectorXd::Zero(d);
    if (HS) *HS = Eigen::MatrixXd::Zero(d, d);
    if (HF) *HF = Eigen::MatrixXd::Zero(d, d);
    for (const auto& t : slowNewton) newton_derivatives(t, z, guard, gS, HS);
    for (const auto& t : fastNewton) newton_derivatives(t, z, guard, gF, HF);
    for (const auto& k : kernels) kernel_derivatives(k, z, gF, HF);
}

Eigen::VectorXd SystemModel::field(const Eigen::VectorXd& z) const {
    Eigen::VectorXd gS, gF;
    gradients(z, gS, gF, nullptr, nullptr);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(dim());
    const int n = layout.planets();
    const int s = layout.bodies() - n;
    for (int a = 0; a < n; ++a) {
        Vec2 v = Vec2::Zero();
        for (int b = 0; b < n; ++b) v += A(a, b) * slot_mom(z, b);
        f.segment<2>(4 * a) = v;
        f.segment<2>(4 * a + 2) = -gS.segment<2>(4 * a) - backReaction * gF.segment<2>(4 * a);
    }
    for (int a = 0; a < s; ++a) {
        Vec2 v = Vec2::Zero();
        for (int b = 0; b < s; ++b) v += B(a, b) * slot_mom(z, n + b);
        f.segment<2>(4 * (n + a)) = v;
        f.segment<2>(4 * (n + a) + 2) = -gF.segment<2>(4 * (n + a));
    }
    if (!f.allFinite()) throw DomainError("non-finite phase velocity (collision or kernel singularity)");
    return f;
}

void SystemModel::field(const double* z, double* out) const {
    const Eigen::Map<const Eigen::VectorXd> zm(z, dim());
    Eigen::Map<Eigen::VectorXd>(out, dim()) = field(Eigen::VectorXd(zm));
}

Eigen::MatrixXd SystemModel::jacobian(const Eigen::VectorXd& z) const {
    Eigen::VectorXd gS, gF;
    Eigen::MatrixXd HS, HF;
    gradients(z, gS, gF, &HS, &HF);
    const int d = dim();
    const int n = layout.planets();
    const int s = layout.bodies() - n;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) J.block<2, 2>(4 * a, 4 * b + 2) = A(a, b) * Eigen::Matrix2d::Identity();
        J.block(4 * a + 2, 0, 2, d) = -HS.block(4 * a, 0, 2, d) - backReaction * HF.block(4 * a, 0, 2, d);
    }
    for (int a = 0; a < s; ++a) {
        const int ra = 4 * (n + a);
        for (int b = 0; b < s; ++b) J.block<2, 2>(ra, 4 * (n + b) + 2) = B(a, b) * Eigen::Matrix2d::Identity();
        J.block(ra + 2, 0, 2, d) = -HF.block(ra, 0, 2, d);
    }
    // Hessian rows are indexed by positions; momentum columns stay zero.
    return J;
}

Eigen::MatrixXd SystemModel::formMatrix(double weight) const {
    const int d = dim();
    Eigen::MatrixXd O = Eigen::MatrixXd::Zero(d, d);
    for (int b = 0; b < layout.bodies(); ++b) {
        const double c = layout.isPlanet(b) ? 1.0 : weight;
        for (int k = 0; k < 2; ++k) {
            O(4 * b + 2 + k, 4 * b + k) = c;
            O(4 * b + k, 4 * b + 2 + k) = -c;
        }
    }
    return O;
}

Eigen::VectorXd SystemModel::gradH(const Eigen::VectorXd& z) const {
    Eigen::VectorXd gS, gF;
    gradients(z, gS, gF, nullptr, nullptr);
    Eigen::VectorXd g = gS + w * gF;
    const int n = layout.planets();
    const int s = layout.bodies() - n;
    for (int a = 0; a < n; ++a) {
        Vec2 v = Vec2::Zero();
        for (int b = 0; b < n; ++b) v += A(a, b) * slot_mom(z, b);
        g.segment<2>(4 * a + 2) = v;
    }
    for (int a = 0; a < s; ++a) {
        Vec2 v = Vec2::Zero();
        for (int b = 0; b < s; ++b) v += B(a, b) * slot_mom(z, n + b);
        g.segment<2>(4 * (n + a) + 2) = w * v;
    }
    return g;
}

Eigen::VectorXd SystemModel::gradI(const Eigen::VectorXd& z) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
    for (int b = 0; b < layout.bodies(); ++b) {
        const double c = layout.isPlanet(b) ? 1.0 : w;
        const Vec2 q = slot_pos(z, b);
        const Vec2 p = slot_mom(z, b);
        g.segment<4>(4 * b) << c * p.y(), -c * p.x(), -c * q.y(), c * q.x();
    }
    return g;
}

Eigen::VectorXd SystemModel::rotationField(const Eigen::VectorXd& z) const {
    Eigen::VectorXd r(dim());
    for (int k = 0; k < dim() / 2; ++k) {
        r[2 * k] = -z[2 * k + 1];
        r[2 * k + 1] = z[2 * k];
    }
    return r;
}

namespace {

SystemModel model_skeleton(const MassModel& m, double omega) {
    SystemModel s;
    s.layout = Layout::of(m);
    s.omega = omega;
    const int n = m.planets();
    const int ns = m.totalSatellites();
    s.A = Eigen::MatrixXd::Zero(n, n);
    s.B = Eigen::MatrixXd::Zero(ns, ns);
    s.factors.resize(s.layout.bodies());
    s.timeScale.resize(s.layout.bodies());
    for (int i = 0; i < n; ++i) {
        const double mt = m.tildeM(i);
        s.A(i, i) = omega / mt;
        s.slowNewton.push_back({i, -1, omega * m.barM(i)});
        s.factors[i] = {1.0 + m.mu * m.barM(i), mt};
        s.timeScale[i] = omega;
        for (int j = 0; j < m.satellites(i); ++j) {
            const int slot = s.layout.satSlot(i, j);
            const double mtj = m.tildeMSat(i, j);
            s.B(slot - n, slot - n) = 1.0 / mtj;
            s.fastNewton.push_back({slot, -1, m.m[i] * m.mSat[i][j]});
            s.factors[slot] = {m.m[i] + m.nu * m.mSat[i][j], mtj};
            s.timeScale[slot] = 1.0;
        }
    }
    return s;
}

} // namespace

SystemModel make_full(const MassModel& m, const ScaleParameters& sc) {
    m.validate(1e-9);
    SystemModel s = model_skeleton(m, sc.omega);
    s.kind = SystemKind::Full;
    s.w = sc.epsilon;
    s.backReaction = sc.epsilon;
    const int n = m.planets();
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) {
            s.A(i, k) = s.A(k, i) = sc.omega * m.mu;
            s.slowNewton.push_back({i, k, sc.omega * m.mu * m.barM(i) * m.barM(k)});
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m.satellites(i); ++j)
            for (int jj = j + 1; jj < m.satellites(i); ++jj) {
                const int a = s.layout.satSlot(i, j);
                const int b = s.layout.satSlot(i, jj);
                s.B(a - n, b - n) = s.B(b - n, a - n) = m.nu / m.m[i];
                s.fastNewton.push_back({a, b, m.nu * m.mSat[i][j] * m.mSat[i][jj]});
            }
    s.kernels = perturbation_terms(s.layout, m, sc.rho);
    for (auto& k : s.kernels) k.coeff *= sc.omega * sc.omega;
    return s;
}

SystemModel make_model(const MassModel& m, double omega) {
    SystemModel s = model_skeleton(m, omega);
    s.kind = SystemKind::Model;
    s.w = 1.0;
    s.backReaction = 0.0;
    return s;
}

SystemModel make_unperturbed(const MassModel& m, double omega) {
    SystemModel s = model_skeleton(m, omega);
    s.kind = SystemKind::Unperturbed;
    s.w = 0.0;
    s.backReaction = 0.0;
    for (int i = 0; i < m.planets(); ++i)
        for (int j = 0; j < m.satellites(i); ++j)
            s.kernels.push_back(
                {omega * omega * m.tildeMSat(i, j), 0.0, {{i, 1.0}}, {{s.layout.satSlot(i, j), 1.0}}});
    return s;
}

SystemModel make_threebody(double theta, double m, double mu, double omega) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ParameterError("theta must lie in [0, 1]");
    if (!(m > 0.0) || !(omega > 0.0) || !(mu >= 0.0)) throw ParameterError("need m > 0, omega > 0, mu >= 0");
    SystemModel s;
    s.kind = SystemKind::ThreeBody;
    s.layout = Layout({1});
    s.omega = omega;
    const double rho = std::cbrt(omega * omega * mu);
    s.A = Eigen::MatrixXd::Constant(1, 1, omega * (1.0 + mu * m) / m);
    s.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
    s.slowNewton.push_back({0, -1, omega * m});
    s.fastNewton.push_back({1, -1, m});
    const double w2 = omega * omega;
    if (theta > 0.0) s.kernels.push_back({w2 * theta, -theta * rho, {{0, 1.0}}, {{1, 1.0}}});
    if (theta < 1.0) s.kernels.push_back({w2 * (1.0 - theta), (1.0 - theta) * rho, {{0, 1.0}}, {{1, 1.0}}});
    s.w = rho * rho * m * theta * (1.0 - theta) / omega;
    s.backReaction = s.w;
    s.factors = {{1.0 + mu * m, m / (1.0 + mu * m)}, {m, 1.0}};
    s.timeScale = {omega, 1.0};
    return s;
}

SystemModel make_hill(double m, double omega) {
    if (!(m > 0.0) || !(omega > 0.0)) throw ParameterError("need m > 0 and omega > 0");
    SystemModel s;
    s.kind = SystemKind::Hill;
    s.layout = Layout({1});
    s.omega = omega;
    s.A = Eigen::MatrixXd::Constant(1, 1, omega / m);
    s.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
    s.slowNewton.push_back({0, -1, omega * m});
    s.fastNewton.push_back({1, -1, m});
    s.kernels.push_back({omega * omega, 0.0, {{0, 1.0}}, {{1, 1.0}}});
    s.w = 0.0;
    s.backReaction = 0.0;
    s.factors = {{1.0, m}, {m, 1.0}};
    s.timeScale = {omega, 1.0};
    return s;
}

CircularOrbit circular_orbit(const KeplerFactor& f, double Omega) {
    if (Omega == 0.0) throw DomainError("circular orbit needs a nonzero frequency");
    CircularOrbit c;
    c.r = std::cbrt(f.k / (Omega * Omega));
    c.I = f.m * Omega * c.r * c.r;
    return c;
}

double slot_frequency(const Layout& l, const FrequencySet& fs, int slot) {
    const int i = l.parentOf(slot);
    return l.isPlanet(slot) ? fs.Omega[i][0] : fs.Omega[i][1 + l.satIndex(slot)];
}

PhaseState circular_state(const SystemModel& sys, const FrequencySet& fs, const std::vector<double>& angles,
                          double t) {
    const Layout& l = sys.layout;
    if (static_cast<int>(angles.size()) != l.bodies()) throw ParameterError("need one angle per body");
    if (fs.planets() != l.planets()) throw ParameterError("frequency set does not match the system layout");
    PhaseState s(l);
    s.t = t;
    for (int b = 0; b < l.bodies(); ++b) {
        const CircularOrbit o = circular_orbit(sys.factors[b], slot_frequency(l, fs, b));
        const Vec2 e(std::cos(angles[b]), std::sin(angles[b]));
        const Vec2 e2(-e.y(), e.x());
        s.setPos(b, o.r * e);
        s.setMom(b, (o.I / o.r) * e2);
    }
    return s;
}

namespace {

struct Rhs {
    const SystemModel* sys;
    void operator()(const StateVec& x, StateVec& dx, double /*t*/) const {
        dx.resize(x.size());
        sys->field(x.data(), dx.data());
    }
};

struct TangentRhs {
    const SystemModel* sys;
    int k;
    void operator()(const StateVec& x, StateVec& dx, double /*t*/) const {
        const int d = sys->dim();
        dx.resize(x.size());
        const Eigen::Map<const Eigen::VectorXd> z(x.data(), d);
        const Eigen::VectorXd zz = z;
        Eigen::Map<Eigen::VectorXd>(dx.data(), d) = sys->field(zz);
        const Eigen::Map<const Eigen::MatrixXd> P(x.data() + d, d, k);
        Eigen::Map<Eigen::MatrixXd>(dx.data() + d, d, k) = sys->jacobian(zz) * P;
    }
};

double first_step(double t0, double t1, double h) {
    const double span = std::abs(t1 - t0);
    const double s = std::min(h, span > 0 ? span : h);
    return t1 >= t0 ? s : -s;
}

template <class System, class Observer>
void run_adaptive(System rhs, StateVec& x, double t0, double t1, double tol, double h, Observer obs) {
    if (t0 == t1) {
        obs(x, t0);
        return;
    }
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<StateVec>());
    odeint::integrate_adaptive(stepper, rhs, x, t0, t1, first_step(t0, t1, h), obs);
}

[[noreturn]] void rethrow_integration(const std::exception& e, double tLast) {
    std::ostringstream os;
    os << "integration failed at t = " << tLast << ": " << e.what();
    throw IntegrationError(os.str(), tLast);
}

double rel(double a, double ref) { return std::abs(a - ref) / std::max(std::abs(ref), 1e-300); }

} // namespace

Trajectory integrate(const SystemModel& sys, const PhaseState& state, double tEnd, const IntegrationOptions& opt) {
    if (!(opt.tol > 0.0)) throw ParameterError("tolerance must be positive");
    if (state.z.size() != sys.dim()) throw ParameterError("state dimension does not match the system");
    Trajectory tr;
    StateVec x(state.z.data(), state.z.data() + state.z.size());
    const double H0 = sys.hamiltonian(state.z);
    const double I0 = sys.angularMomentum(state.z);
    double tLast = state.t;
    auto obs = [&](const StateVec& s, double t) {
        tLast = t;
        const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
        tr.energyDrift = std::max(tr.energyDrift, rel(sys.hamiltonian(z), H0));
        tr.momentumDrift = std::max(tr.momentumDrift, rel(sys.angularMomentum(z), I0));
        if (opt.recordSteps || t == tEnd) {
            if (!tr.t.empty() && tr.t.back() == t) return;
            tr.t.push_back(t);
            tr.z.push_back(z);
        }
    };
    try {
        run_adaptive(Rhs{&sys}, x, state.t, tEnd, opt.tol, opt.firstStep, obs);
    } catch (const IntegrationError&) {
        throw;
    } catch (const std::exception& e) {
        rethrow_integration(e, tLast);
    }
    if (tr.t.empty() || tr.t.back() != tEnd) {
        tr.t.push_back(tEnd);
        tr.z.push_back(Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()));
    }
    return tr;
}

PhaseState flow(const SystemModel& sys, const PhaseState& state, double tEnd, double tol) {
    if (state.z.size() != sys.dim()) throw ParameterError("state dimension does not match the system");
    StateVec x(state.z.data(), state.z.data() + state.z.size());
    double tLast = state.t;
    try {
        run_adaptive(Rhs{&sys}, x, state.t, tEnd, tol, 1e-3, [&](const StateVec&, double t) { tLast = t; });
    } catch (const std::exception& e) {
        rethrow_integration(e, tLast);
    }
    PhaseState out(state.layout);
    out.z = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    out.t = tEnd;
    return out;
}

std::vector<Eigen::VectorXd> sample(const SystemModel& sys, const PhaseState& state, const std::vector<double>& times,
                                    double tol) {
    std::vector<Eigen::VectorXd> out;
    if (times.empty()) return out;
    StateVec x(state.z.data(), state.z.data() + state.z.size());
    double tLast = state.t;
    auto obs = [&](const StateVec& s, double t) {
        tLast = t;
        out.emplace_back(Eigen::Map<const Eigen::VectorXd>(s.data(), s.size()));
    };
    // Prepend the start time so the first requested sample is reached by integration.
    std::vector<double> ts;
    ts.push_back(state.t);
    ts.insert(ts.end(), times.begin(), times.end());
    const bool backward = times.back() < state.t;
    try {
        auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<StateVec>());
        odeint::integrate_times(stepper, Rhs{&sys}, x, ts.begin(), ts.end(), backward ? -1e-3 : 1e-3, obs);
    } catch (const std::exception& e) {
        rethrow_integration(e, tLast);
    }
    out.erase(out.begin());
    return out;
}

TangentState integrate_with_tangent(const SystemModel& sys, const TangentState& ts, double tEnd, double tol) {
    const int d = sys.dim();
    const int k = static_cast<int>(ts.deviation.cols());
    if (ts.deviation.rows() != d) throw ParameterError("deviation rows must match the state dimension");
    StateVec x(static_cast<std::size_t>(d) * (k + 1));
    Eigen::Map<Eigen::VectorXd>(x.data(), d) = ts.base.z;
    Eigen::Map<Eigen::MatrixXd>(x.data() + d, d, k) = ts.deviation;
    double tLast = ts.base.t;
    try {
        run_adaptive(TangentRhs{&sys, k}, x, ts.base.t, tEnd, tol, 1e-3,
                     [&](const StateVec&, double t) { tLast = t; });
    } catch (const std::exception& e) {
        rethrow_integration(e, tLast);
    }
    TangentState out;
    out.base = PhaseState(ts.base.layout);
    out.base.z = Eigen::Map<const Eigen::VectorXd>(x.data(), d);
    out.base.t = tEnd;
    out.deviation = Eigen::Map<const Eigen::MatrixXd>(x.data() + d, d, k);
    return out;
}

double rotating_energy(const SystemModel& sys, const PhaseState& s, double omega1) {
    return sys.rotatingEnergy(s.z, omega1);
}

} // namespace satorb
