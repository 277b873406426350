#include "satorb/averaging.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "satorb/coords.hpp"
#include "satorb/errors.hpp"
#include "satorb/potentials.hpp"

namespace satorb {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

bool is_admissible_integer(double kappa) {
    const double r = std::round(kappa);
    return std::abs(kappa - r) < 1e-9 && r != 0.0 && r != -1.0;
}

} // namespace

double r_kappa(double kappa) { return std::cbrt(std::pow((kappa + 1.0) / kappa, 2.0)); }

double c_kappa_integrand(double kappa, double t) {
    const double r = r_kappa(kappa);
    const double s = r + 1.0 / r;
    const double c = std::cos(t);
    const double den = s - 2.0 * c;
    return (s + (r + 3.0 * c) / (2.0 * kappa)) / (den * std::sqrt(den)) * std::cos(kappa * t);
}

double c_kappa(int kappa, double tol, CkPrefactor pref) {
    if (kappa == 0 || kappa == -1) throw DomainError("c_kappa is undefined for kappa in {-1, 0}");
    const double k = kappa;
    const int panels = std::abs(kappa);
    const double width = M_PI / panels;
    auto g = [k](double t) { return c_kappa_integrand(k, t); };
    double sum = 0.0;
    // The integrand is even; panels of one half-oscillation keep each piece smooth.
    for (int p = 0; p < panels; ++p) sum += GK::integrate(g, p * width, (p + 1) * width, 15, tol);
    const double r = r_kappa(k);
    const double pre = pref == CkPrefactor::Radius ? r : std::sqrt(r);
    return pre / M_PI * 2.0 * sum;
}

double c_kappa_ext(double kappa, double tol, CkPrefactor pref) {
    if (!is_admissible_integer(kappa)) return 0.0;
    return c_kappa(static_cast<int>(std::lround(kappa)), tol, pref);
}

AsymptoticConstants asymptotic_constants(double tol) {
    if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
    // |int_L^inf cos t g(t) dt| <= 2 g(L) for decreasing g; with g <= t^-3
    // the two-sided tail of (2/pi) int is at most 8/(pi L^3).
    const double L0 = std::cbrt(8.0 / (M_PI * tol));
    const int panels = static_cast<int>(std::ceil(L0 / M_PI));
    const double L = panels * M_PI;
    auto g1 = [](double t) { return std::cos(t) / std::pow(4.0 / 9.0 + t * t, 1.5); };
    auto g2 = [](double t) { return std::cos(t) / std::pow(4.0 / 9.0 + t * t, 2.5); };
    double s1 = 0.0;
    double s2 = 0.0;
    for (int p = 0; p < panels; ++p) {
        s1 += GK::integrate(g1, p * M_PI, (p + 1) * M_PI, 15, 1e-14);
        s2 += GK::integrate(g2, p * M_PI, (p + 1) * M_PI, 15, 1e-14);
    }
    AsymptoticConstants c;
    c.C1 = 2.0 / M_PI * 2.0 * s1;
    c.C2 = 1.0 / M_PI * 2.0 * s2;
    c.tailBound = 8.0 / (M_PI * L * L * L);
    return c;
}

AsymptoticConstants asymptotic_constants_bessel() {
    using boost::math::cyl_bessel_k;
    AsymptoticConstants c;
    c.C1 = 6.0 / M_PI * cyl_bessel_k(1, 2.0 / 3.0);
    c.C2 = 3.0 / (2.0 * M_PI) * cyl_bessel_k(2, 2.0 / 3.0);
    return c;
}

AveragingCoefficients coefficient_table(int kMin, int kMax, double tol, CkPrefactor pref) {
    AveragingCoefficients t;
    for (int k = kMin; k <= kMax; ++k)
        if (k != 0 && k != -1) t.cTable[k] = c_kappa(k, tol, pref);
    const AsymptoticConstants a = asymptotic_constants(1e-12);
    t.asymC1 = a.C1;
    t.asymC2 = a.C2;
    return t;
}

double kappa_pair(double wi, double wj) {
    if (std::abs(std::abs(wi) - std::abs(wj)) == 0.0) throw DomainError("planet frequencies with equal absolute values");
    return wi / (wj - wi);
}

Eigen::MatrixXd kappa_matrix(const std::vector<double>& w) {
    const int n = static_cast<int>(w.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) K(i, j) = kappa_pair(w[i], w[j]);
    return K;
}

namespace {

struct PairTable {
    Eigen::MatrixXd kappa;
    Eigen::MatrixXd kc;  // kappa * c_kappa
};

PairTable pair_table(const std::vector<double>& w) {
    PairTable t;
    t.kappa = kappa_matrix(w);
    const int n = static_cast<int>(w.size());
    t.kc = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) t.kc(i, j) = t.kappa(i, j) * c_kappa_ext(t.kappa(i, j));
    return t;
}

std::vector<std::complex<double>> f_values(const PairTable& t, const std::vector<double>& m,
                                           const std::vector<double>& phi) {
    const int n = static_cast<int>(m.size());
    std::vector<std::complex<double>> f(n, 0.0);
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            if (k != l && t.kc(l, k) != 0.0)
                f[l] += m[k] * t.kc(l, k) * std::polar(1.0, t.kappa(l, k) * (phi[k] - phi[l]));
    return f;
}

double tolerance_of(const PairTable& t, const std::vector<double>& m) {
    double s = 0.0;
    const int n = static_cast<int>(m.size());
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k)
            if (k != l) s += m[k] * std::abs(t.kc(l, k));
    return 1e-9 * s;
}

double max_abs(const std::vector<std::complex<double>>& f) {
    double v = 0.0;
    for (const auto& x : f) v = std::max(v, std::abs(x));
    return v;
}

void check_inputs(const std::vector<double>& m, const std::vector<double>& w) {
    if (m.size() != w.size() || m.empty()) throw ParameterError("masses and frequencies need equal nonzero length");
    for (double v : m)
        if (!(v > 0.0)) throw ParameterError("masses must be positive");
}

struct ClosingResidual {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const PairTable* table;
    const std::vector<double>* masses;
    double scale;

    int inputs() const { return static_cast<int>(masses->size()) - 1; }
    int values() const { return 2 * static_cast<int>(masses->size()); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
        std::vector<double> phi(masses->size(), 0.0);
        for (int i = 0; i < x.size(); ++i) phi[i + 1] = x[i];
        const auto f = f_values(*table, *masses, phi);
        for (std::size_t l = 0; l < f.size(); ++l) {
            fvec[2 * l] = f[l].real() / scale;
            fvec[2 * l + 1] = f[l].imag() / scale;
        }
        return 0;
    }
};

} // namespace

std::vector<std::complex<double>> unclosing_f(const std::vector<double>& masses, const std::vector<double>& w,
                                              const std::vector<double>& phi) {
    check_inputs(masses, w);
    return f_values(pair_table(w), masses, phi);
}

double unclosing_tolerance(const std::vector<double>& masses, const std::vector<double>& w) {
    check_inputs(masses, w);
    return tolerance_of(pair_table(w), masses);
}

UnclosingReport unclosing_test(const std::vector<double>& masses, const std::vector<double>& w,
                               const std::vector<double>& phi) {
    check_inputs(masses, w);
    if (phi.size() != masses.size()) throw ParameterError("phase point needs one angle per planet");
    const PairTable t = pair_table(w);
    UnclosingReport r;
    r.kappaMatrix = t.kappa;
    r.fValues = f_values(t, masses, phi);
    const double tol = tolerance_of(t, masses);
    r.unclosing = max_abs(r.fValues) > tol && tol > 0.0;
    return r;
}

UnclosingReport classify_masses(const std::vector<double>& masses, const std::vector<double>& w, int gridDensity) {
    check_inputs(masses, w);
    if (gridDensity < 1) throw ParameterError("grid density must be positive");
    const int n = static_cast<int>(masses.size());
    const PairTable t = pair_table(w);
    const double tol = tolerance_of(t, masses);
    UnclosingReport r;
    r.kappaMatrix = t.kappa;
    r.fValues = f_values(t, masses, std::vector<double>(n, 0.0));
    r.unclosing = tol > 0.0 && max_abs(r.fValues) > tol;

    r.inMsym = true;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<double> phi(n);
        for (int l = 0; l < n; ++l) phi[l] = (mask >> l & 1) ? M_PI : 0.0;
        const bool unclosing = tol > 0.0 && max_abs(f_values(t, masses, phi)) > tol;
        if (!unclosing) {
            r.inMsym = false;
            r.symmetricClosing.push_back(phi);
        }
    }

    if (tol == 0.0) {
        // Every f_l vanishes identically.
        r.inM = false;
        r.minResidual = 0.0;
        r.witnesses.push_back(std::vector<double>(n, 0.0));
        return r;
    }
    const double scale = tol / 1e-9;
    double best = INFINITY;
    std::vector<double> bestPhi(n, 0.0);
    if (n == 1) {
        best = max_abs(f_values(t, masses, bestPhi)) / scale;
    } else {
        const int dims = n - 1;
        long starts = 1;
        for (int d = 0; d < dims; ++d) starts *= gridDensity;
        for (long s = 0; s < starts; ++s) {
            Eigen::VectorXd x(dims);
            long idx = s;
            for (int d = 0; d < dims; ++d) {
                x[d] = 2.0 * M_PI * (idx % gridDensity) / gridDensity;
                idx /= gridDensity;
            }
            ClosingResidual fun{&t, &masses, scale};
            Eigen::NumericalDiff<ClosingResidual> nd(fun);
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ClosingResidual>> lm(nd);
            lm.parameters.xtol = 1e-15;
            lm.parameters.ftol = 1e-15;
            lm.parameters.maxfev = 2000;
            lm.minimize(x);
            std::vector<double> phi(n, 0.0);
            for (int d = 0; d < dims; ++d) phi[d + 1] = reduce_angle(x[d]);
            const double res = max_abs(f_values(t, masses, phi)) / scale;
            if (res < best) {
                best = res;
                bestPhi = phi;
            }
            if (res < 1e-10) r.witnesses.push_back(phi);
        }
    }
    r.minResidual = best;
    if (best < 1e-10) {
        r.inM = false;
    } else if (best < 1e-6) {
        r.inM = false;
        r.undecided = true;
    } else {
        r.inM = true;
    }
    return r;
}

double averaged_hill_value(double I, double OmegaSat, double xRadius, double q, double p, double phase) {
    if (I == 0.0 || OmegaSat == 0.0) throw DomainError("averaged Hill data needs nonzero action and frequency");
    if (I / OmegaSat <= 0.0) throw DomainError("action and frequency must share a sign");
    const double A = std::sqrt(I / OmegaSat);
    const double k = OmegaSat * OmegaSat * A * A * A;
    // Energy level of the circular orbit; solve the quadratic for u = 1/I'^2.
    const double e2q = std::exp(2.0 * q);
    const double a = p * p / (2.0 * e2q);
    const double b = 1.0 / (2.0 * e2q) - std::exp(-q);
    const double c = 1.0 / (2.0 * I * I);
    const double disc = b * b - 4.0 * a * c;
    if (!(b < 0.0) || disc < 0.0) throw DomainError("(q, p) leaves the bound energy level");
    const double u = 2.0 * c / (-b + std::sqrt(disc));
    const double Ip = std::copysign(1.0 / std::sqrt(u), I);

    const KeplerFactor f{k, 1.0};
    const Vec4 cart = kepler_to_cart(Vec4(0.0, Ip, q, p), f);
    const Vec2 r(cart[0], cart[1]);
    const Vec2 v(cart[2], cart[3]);
    const double rn = r.norm();
    const double E = 0.5 * v.squaredNorm() - k / rn;
    const double sma = -k / (2.0 * E);
    const Vec2 ev = ((v.squaredNorm() - k / rn) * r - r.dot(v) * v) / k;
    const double e = ev.norm();
    const double varpi = e > 0.0 ? std::atan2(ev.y(), ev.x()) : 0.0;
    const double cw = std::cos(varpi);
    const double sw = std::sin(varpi);
    const double bAxis = sma * std::sqrt(std::max(0.0, 1.0 - e * e));
    const Vec2 x(xRadius, 0.0);

    // Time average in the eccentric anomaly: dt ~ (1 - e cos E) dE. The
    // integrand is a trigonometric polynomial, so the trapezoid rule is exact.
    constexpr int M = 64;
    double sum = 0.0;
    for (int s = 0; s < M; ++s) {
        const double Ea = phase + 2.0 * M_PI * s / M;
        const double X = sma * (std::cos(Ea) - e);
        const double Y = bAxis * std::sin(Ea);
        const Vec2 y(cw * X - sw * Y, sw * X + cw * Y);
        sum += hill_F(x, y) * (1.0 - e * std::cos(Ea));
    }
    return sum / M;
}

AveragedHillData averaged_hill(double I, double OmegaSat, double OmegaPlanet, double xRadius) {
    if (OmegaPlanet == 0.0) throw DomainError("planet frequency must be nonzero");
    AveragedHillData d;
    const double hq = 2e-3;
    const double hp = 2e-3 * std::abs(I);
    auto f = [&](double q, double p) { return averaged_hill_value(I, OmegaSat, xRadius, q, p); };
    d.value = f(0.0, 0.0);
    auto first = [&](double h, bool alongQ) {
        auto D = [&](double s) {
            return alongQ ? (f(s, 0) - f(-s, 0)) / (2 * s) : (f(0, s) - f(0, -s)) / (2 * s);
        };
        return (4.0 * D(h / 2) - D(h)) / 3.0;
    };
    auto second = [&](double h, bool alongQ) {
        auto D = [&](double s) {
            return alongQ ? (f(s, 0) - 2 * d.value + f(-s, 0)) / (s * s) : (f(0, s) - 2 * d.value + f(0, -s)) / (s * s);
        };
        return (4.0 * D(h / 2) - D(h)) / 3.0;
    };
    auto mixed = [&](double s, double t) {
        return (f(s, t) - f(s, -t) - f(-s, t) + f(-s, -t)) / (4 * s * t);
    };
    d.gradient = Eigen::Vector2d(first(hq, true), first(hp, false));
    d.hessian(0, 0) = second(hq, true);
    d.hessian(1, 1) = second(hp, false);
    d.hessian(0, 1) = d.hessian(1, 0) = (4.0 * mixed(hq / 2, hp / 2) - mixed(hq, hp)) / 3.0;
    // Hessian of the Kepler factor in (q, p) at the circular orbit: diag(Omega I, Omega / I).
    d.delta = 0.5 * (d.hessian(0, 0) / I + I * d.hessian(1, 1));
    d.etaSign = I > 0 ? 1 : -1;
    const double pre = OmegaPlanet * OmegaPlanet * I / OmegaSat;
    d.hessianClosedForm << -29.0 / 8.0 * pre, 0.0, 0.0, 25.0 / (8.0 * I * I) * pre;
    d.deltaClosedForm = -OmegaPlanet * OmegaPlanet / (4.0 * OmegaSat);
    return d;
}

double PlanetCovector::norm() const {
    double s = 0.0;
    for (const auto& c : coeff) s += c.squaredNorm();
    return std::sqrt(s);
}

PlanetCovector averaged_R0_differential(const std::vector<double>& phi, const std::vector<double>& mbar,
                                        const std::vector<double>& w, const std::vector<double>& r,
                                        CkPrefactor pref) {
    const int n = static_cast<int>(w.size());
    if (static_cast<int>(phi.size()) != n || static_cast<int>(mbar.size()) != n || static_cast<int>(r.size()) != n)
        throw ParameterError("planet data vectors must have equal length");
    PlanetCovector out;
    out.coeff.assign(n, Eigen::Vector2d::Zero());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            const double kap = kappa_pair(w[i], w[k]);
            const double c = c_kappa_ext(kap, 1e-13, pref);
            if (c == 0.0) continue;
            const double a = mbar[i] / r[i] * mbar[k] * kap * c;
            const double arg = kap * (phi[i] - phi[k]);
            out.coeff[i] += a * Eigen::Vector2d(std::cos(arg), -std::sin(arg));
        }
    return out;
}

namespace {

// Smallest q <= 1000 with kappa * q integral (1 if none is found).
int rational_denominator(double kappa) {
    for (int q = 1; q <= 1000; ++q)
        if (std::abs(kappa * q - std::round(kappa * q)) < 1e-9) return q;
    return 1000;
}

} // namespace

PlanetCovector averaged_R0_numeric(const std::vector<double>& phi, const std::vector<double>& mbar,
                                   const std::vector<double>& w, const std::vector<double>& r,
                                   const std::vector<double>& I, int samplesPerTurn) {
    const int n = static_cast<int>(w.size());
    PlanetCovector out;
    out.coeff.assign(n, Eigen::Vector2d::Zero());
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) {
            const double kap = kappa_pair(w[i], w[k]);
            const int qd = rational_denominator(kap);
            const double T = 2.0 * M_PI * qd / std::abs(w[k] - w[i]);
            const int turns = static_cast<int>(std::ceil(std::max(std::abs(w[i]), std::abs(w[k])) * T / (2 * M_PI))) + qd;
            const int N = samplesPerTurn * std::max(1, turns);
            const double r1 = r[i];
            const double r2 = r[k];
            const double K = I[i] * I[k] / (r1 * r2);
            Eigen::Vector2d acc1 = Eigen::Vector2d::Zero();
            Eigen::Vector2d acc2 = Eigen::Vector2d::Zero();
            for (int s = 0; s < N; ++s) {
                const double t = T * s / N;
                const double p12 = phi[i] - phi[k] + (w[i] - w[k]) * t;
                const double cp = std::cos(p12);
                const double sp = std::sin(p12);
                const double r12 = std::sqrt(r1 * r1 + r2 * r2 - 2 * r1 * r2 * cp);
                const double c = mbar[i] * mbar[k] * r1 * r2 / (r12 * r12 * r12);
                const double Aq1 = c * (r1 / r2 - cp) - K * cp;
                const double Ap1 = 2.0 * c * sp - K * sp;
                const double Aq2 = c * (r2 / r1 - cp) - K * cp;
                const double Ap2 = -2.0 * c * sp + K * sp;
                const double c1 = std::cos(w[i] * t), s1 = std::sin(w[i] * t);
                const double c2 = std::cos(w[k] * t), s2 = std::sin(w[k] * t);
                acc1 += Eigen::Vector2d(Aq1 * c1 - Ap1 * s1, Aq1 * s1 + Ap1 * c1);
                acc2 += Eigen::Vector2d(Aq2 * c2 - Ap2 * s2, Aq2 * s2 + Ap2 * c2);
            }
            out.coeff[i] += acc1 / N;
            out.coeff[k] += acc2 / N;
        }
    return out;
}

} // namespace satorb
