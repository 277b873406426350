#include "satorb/periodic.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace satorb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

template <int N>
void gauss_rule(std::vector<double>& x, std::vector<double>& w) {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& b = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
        x.push_back(-a[i]);
        w.push_back(b[i]);
        x.push_back(a[i]);
        w.push_back(b[i]);
    }
}

// Nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& x, std::vector<double>& w) {
    x.clear();
    w.clear();
    switch (order) {
        case 4: gauss_rule<4>(x, w); break;
        case 8: gauss_rule<8>(x, w); break;
        case 16: gauss_rule<16>(x, w); break;
        case 24: gauss_rule<24>(x, w); break;
        case 32: gauss_rule<32>(x, w); break;
        default: throw ParameterError("Gauss-Legendre order must be one of 4, 8, 16, 24, 32");
    }
}

Vec4 circular_normalized(const GeneratingTorus& gt, int b, double phi) { return {phi, gt.actions[b], 0.0, 0.0}; }

} // namespace

PhaseState GeneratingTorus::point(const std::vector<double>& angles, double t) const {
    if (static_cast<int>(angles.size()) != bodies()) throw ParameterError("need one angle per body");
    PhaseState s(layout);
    s.t = t;
    for (int b = 0; b < bodies(); ++b) s.setBlock(b, kepler_to_cart(circular_normalized(*this, b, angles[b]), factors[b]));
    return s;
}

Vec4 GeneratingTorus::normalized(const Eigen::VectorXd& z, int b) const {
    return cart_to_kepler(z.segment<4>(4 * b), factors[b]);
}

GeneratingTorus generating_torus(const FrequencySet& fs, const SystemModel& sys) {
    fs.validate(1e-8);
    const Layout l = Layout::of(fs);
    if (l.sats != sys.layout.sats) throw ParameterError("frequency set does not match the system layout");
    GeneratingTorus gt;
    gt.layout = l;
    gt.fs = fs;
    gt.factors = sys.factors;
    gt.timeScale = sys.timeScale;
    gt.integers = fs.flatIntegers();
    for (int b = 0; b < l.bodies(); ++b) {
        const double Om = slot_frequency(l, fs, b);
        const CircularOrbit o = circular_orbit(sys.factors[b], Om);
        gt.frequencies.push_back(Om);
        gt.radii.push_back(o.r);
        gt.actions.push_back(o.I);
    }
    return gt;
}

GeneratingTorus generating_torus(const FrequencySet& fs, const MassModel& m) {
    return generating_torus(fs, make_model(m, fs.omega));
}

std::vector<SymmetricSeed> symmetric_seeds(const GeneratingTorus& gt) {
    const int N = gt.bodies();
    if (N < 2) throw ParameterError("symmetric seeds need at least two bodies");
    if (N > 30) throw ParameterError("too many bodies to enumerate parade types");
    const int g = gt.fs.integerGcd();
    unsigned long shift = 0;
    for (int b = 0; b < N; ++b)
        if (((std::abs(gt.integers[b]) / g) & 1) != 0) shift |= 1ul << b;
    std::set<unsigned long> reps;
    // Planet 1 sits at angle 0 (bit 0 clear); its integer is 0 so the shift
    // keeps bit 0 clear as well.
    for (unsigned long p = 0; p < (1ul << N); p += 2) reps.insert(std::min(p, p ^ shift));
    std::vector<SymmetricSeed> out;
    for (unsigned long p : reps) {
        SymmetricSeed s;
        std::vector<double> angles(N);
        for (int b = 0; b < N; ++b) {
            s.pattern.push_back(static_cast<int>((p >> b) & 1ul));
            angles[b] = s.pattern[b] ? kPi : 0.0;
        }
        s.state = gt.point(angles);
        out.push_back(std::move(s));
    }
    return out;
}

double torus_distance(const SystemModel& sys, const GeneratingTorus& gt, const PhaseState& x0, double T, int samples,
                      double tol) {
    std::vector<double> times;
    for (int k = 0; k <= samples; ++k) times.push_back(x0.t + T * k / samples);
    const auto zs = sample(sys, x0, times, tol);
    double d = 0.0;
    for (const auto& z : zs)
        for (int b = 0; b < gt.bodies(); ++b) {
            const Vec4 n = gt.normalized(z, b);
            const double I0 = std::abs(gt.actions[b]);
            const double dI = (n[1] - gt.actions[b]) / I0;
            d = std::max(d, std::sqrt(dI * dI + n[2] * n[2] + (n[3] / I0) * (n[3] / I0)));
        }
    return d;
}

double closure_defect(const SystemModel& sys, const PeriodicOrbit& orbit, double tol) {
    const PhaseState e = rotate(flow(sys, orbit.initial, orbit.initial.t + orbit.T, tol), -orbit.alpha);
    return (e.z - orbit.initial.z).norm();
}

namespace {

struct HalfPeriod {
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
};

HalfPeriod half_period_defect(const SystemModel& sys, const GeneratingTorus& gt, const ParadeType& pattern,
                              const Eigen::VectorXd& u, double T, double alpha, double tol) {
    const int N = gt.bodies();
    const int d = gt.layout.dim();
    PhaseState z0(gt.layout);
    Eigen::MatrixXd dev = Eigen::MatrixXd::Zero(d, 2 * N);
    for (int b = 0; b < N; ++b) {
        const Vec4 n(pattern[b] ? kPi : 0.0, u[2 * b], u[2 * b + 1], 0.0);
        z0.setBlock(b, kepler_to_cart(n, gt.factors[b]));
        const Mat4 Jc = kepler_to_cart_jacobian(n, gt.factors[b]);
        dev.block<4, 1>(4 * b, 2 * b) = Jc.col(1);
        dev.block<4, 1>(4 * b, 2 * b + 1) = Jc.col(2);
    }
    const TangentState ts = integrate_with_tangent(sys, {z0, dev}, T / 2.0, tol);
    const Eigen::MatrixXd Rm = rotation_matrix(gt.layout, -alpha / 2.0);
    const Eigen::VectorXd zh = Rm * ts.base.z;
    const Eigen::MatrixXd dz = Rm * ts.deviation;
    HalfPeriod h;
    h.r.resize(2 * N);
    h.J.resize(2 * N, 2 * N);
    for (int b = 0; b < N; ++b) {
        const Vec4 blk = zh.segment<4>(4 * b);
        const Vec4 n = cart_to_kepler(blk, gt.factors[b]);
        const Mat4 Jk = cart_to_kepler_jacobian(blk, gt.factors[b]);
        const double I0 = std::abs(gt.actions[b]);
        h.r[2 * b] = std::remainder(n[0], kPi);
        h.r[2 * b + 1] = n[3] / I0;
        h.J.row(2 * b) = Jk.row(0) * dz.middleRows<4>(4 * b);
        h.J.row(2 * b + 1) = Jk.row(3) * dz.middleRows<4>(4 * b) / I0;
    }
    return h;
}

} // namespace

PeriodicOrbit shoot_symmetric(const SystemModel& sys, const GeneratingTorus& gt, const SymmetricSeed& seed,
                              const ShootOptions& opt) {
    const int N = gt.bodies();
    if (static_cast<int>(seed.pattern.size()) != N) throw ParameterError("seed pattern does not match the torus");
    const double T = opt.T.value_or(gt.fs.T);
    const double alpha = opt.alpha.value_or(gt.fs.alpha);

    Eigen::VectorXd u(2 * N);
    for (int b = 0; b < N; ++b) {
        const Vec4 n = gt.normalized(seed.state.z, b);
        if (std::abs(n[3]) > 1e-9 * std::abs(gt.actions[b]) ||
            std::abs(std::remainder(n[0] - (seed.pattern[b] ? kPi : 0.0), kTwoPi)) > 1e-9)
            throw ParameterError("seed is not fixed by the reversing involution");
        u[2 * b] = n[1];
        u[2 * b + 1] = n[2];
    }

    PeriodicOrbit orbit;
    orbit.T = T;
    orbit.alpha = alpha;
    orbit.pattern = seed.pattern;

    HalfPeriod h = half_period_defect(sys, gt, seed.pattern, u, T, alpha, opt.integratorTol);
    double res = h.r.norm();
    orbit.history.push_back(res);
    int it = 0;
    while (res >= opt.tol && it < opt.maxIterations) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h.J);
        const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
        if (diag.minCoeff() <= opt.singularTol * std::max(diag.maxCoeff(), 1e-300)) {
            std::ostringstream os;
            os << "shooting Jacobian is singular (pivot ratio " << diag.minCoeff() / diag.maxCoeff()
               << ") after " << it << " iterations";
            throw DegenerateDirection(os.str(), orbit.history);
        }
        const Eigen::VectorXd step = qr.solve(-h.r);
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 10; ++k) {
            const Eigen::VectorXd trial = u + lambda * step;
            try {
                HalfPeriod ht = half_period_defect(sys, gt, seed.pattern, trial, T, alpha, opt.integratorTol);
                const double rt = ht.r.norm();
                if (std::isfinite(rt) && rt < res) {
                    u = trial;
                    h = std::move(ht);
                    res = rt;
                    accepted = true;
                    break;
                }
            } catch (const Error&) {
                // collision or singular normalization along the trial step
            }
            lambda *= 0.5;
        }
        ++it;
        orbit.history.push_back(res);
        if (!accepted) break;
    }
    orbit.iterations = it;
    orbit.residual = res;
    orbit.converged = res < opt.tol;
    if (!orbit.converged) {
        std::ostringstream os;
        os << "shooting did not converge: residual " << res << " after " << it << " iterations";
        throw ShootingFailure(os.str(), orbit.history);
    }
    PhaseState z0(gt.layout);
    for (int b = 0; b < N; ++b)
        z0.setBlock(b, kepler_to_cart(Vec4(seed.pattern[b] ? kPi : 0.0, u[2 * b], u[2 * b + 1], 0.0), gt.factors[b]));
    orbit.initial = z0;
    orbit.closureDefect = closure_defect(sys, orbit, opt.integratorTol);
    orbit.torusDistance = torus_distance(sys, gt, z0, T, opt.distanceSamples, opt.integratorTol);
    return orbit;
}

SuccessionMap::SuccessionMap(const SystemModel& sys, const GeneratingTorus& gt, double T, double alpha, double tol)
    : sys_(sys), gt_(gt), T_(T), alpha_(alpha), tol_(tol) {
    // Kinds without satellite back-reaction carry no satellite weight in
    // their form; the satellite blocks then use unit weight.
    const double ws = sys.w != 0.0 ? sys.w : 1.0;
    for (int b = 0; b < gt.bodies(); ++b) weights_.push_back(gt.layout.isPlanet(b) ? 1.0 : ws);
}

Eigen::VectorXd SuccessionMap::toCart(const Eigen::VectorXd& n) const {
    Eigen::VectorXd z(dim());
    for (int b = 0; b < gt_.bodies(); ++b) z.segment<4>(4 * b) = kepler_to_cart(n.segment<4>(4 * b), gt_.factors[b]);
    return z;
}

Eigen::VectorXd SuccessionMap::toNormalized(const Eigen::VectorXd& z) const {
    Eigen::VectorXd n(dim());
    for (int b = 0; b < gt_.bodies(); ++b) n.segment<4>(4 * b) = gt_.normalized(z, b);
    return n;
}

Eigen::MatrixXd SuccessionMap::toCartJacobian(const Eigen::VectorXd& n) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim(), dim());
    for (int b = 0; b < gt_.bodies(); ++b)
        J.block<4, 4>(4 * b, 4 * b) = kepler_to_cart_jacobian(n.segment<4>(4 * b), gt_.factors[b]);
    return J;
}

Eigen::MatrixXd SuccessionMap::toNormalizedJacobian(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim(), dim());
    for (int b = 0; b < gt_.bodies(); ++b)
        J.block<4, 4>(4 * b, 4 * b) = cart_to_kepler_jacobian(z.segment<4>(4 * b), gt_.factors[b]);
    return J;
}

Eigen::VectorXd SuccessionMap::apply(const Eigen::VectorXd& n, const Eigen::MatrixXd* dir,
                                     Eigen::MatrixXd* dimage) const {
    PhaseState s(gt_.layout);
    s.z = toCart(n);
    const Eigen::MatrixXd Rm = rotation_matrix(gt_.layout, -alpha_);
    if (!dir) {
        const PhaseState e = flow(sys_, s, T_, tol_);
        return toNormalized(Rm * e.z);
    }
    const Eigen::MatrixXd dz0 = toCartJacobian(n) * (*dir);
    const TangentState ts = integrate_with_tangent(sys_, {s, dz0}, T_, tol_);
    const Eigen::VectorXd z1 = Rm * ts.base.z;
    if (dimage) *dimage = toNormalizedJacobian(z1) * (Rm * ts.deviation);
    return toNormalized(z1);
}

double SuccessionMap::form(const Eigen::VectorXd& n, const Eigen::VectorXd& xi) const {
    Eigen::MatrixXd d = xi;
    Eigen::MatrixXd dn;
    const Eigen::VectorXd n1 = apply(n, &d, &dn);
    double acc = 0.0;
    for (int b = 0; b < gt_.bodies(); ++b) {
        const int o = 4 * b;
        const double dphi = std::remainder(n[o] - n1[o], kTwoPi);
        acc += weights_[b] * ((n1[o + 1] - n[o + 1]) * xi[o] + (n1[o + 3] - n[o + 3]) * xi[o + 2] +
                              dphi * dn(o + 1, 0) + (n[o + 2] - n1[o + 2]) * dn(o + 3, 0));
    }
    return acc;
}

std::vector<SuccessionMapSample> generating_function(const SuccessionMap& A, const std::vector<Eigen::VectorXd>& path,
                                                     int order) {
    if (path.empty()) return {};
    std::vector<double> x, w;
    gauss_legendre(order, x, w);
    std::vector<SuccessionMapSample> out;
    double psi = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (k > 0) {
            const Eigen::VectorXd& a = path[k - 1];
            const Eigen::VectorXd& b = path[k];
            const Eigen::VectorXd xi = b - a;
            double seg = 0.0;
            for (std::size_t q = 0; q < x.size(); ++q) seg += w[q] * A.form(a + 0.5 * (x[q] + 1.0) * xi, xi);
            psi += 0.5 * seg;
        }
        SuccessionMapSample s;
        s.base = path[k];
        s.image = A.apply(path[k]);
        s.psi = psi;
        out.push_back(std::move(s));
    }
    return out;
}

double loop_integral(const SuccessionMap& A, const LoopCurve& c, int points) {
    double acc = 0.0;
    for (int k = 0; k < points; ++k) {
        const double s = kTwoPi * k / points;
        const Eigen::VectorXd p = c.centre + c.radius * (std::cos(s) * c.u + std::sin(s) * c.v);
        const Eigen::VectorXd dp = c.radius * (-std::sin(s) * c.u + std::cos(s) * c.v);
        acc += A.form(p, dp);
    }
    return acc * kTwoPi / points;
}

LambdaPoint lambda_point(const SuccessionMap& A, const std::vector<double>& angles,
                         const std::optional<Eigen::VectorXd>& guess, double tol, int maxIterations) {
    const GeneratingTorus& gt = A.torus();
    const int N = gt.bodies();
    if (static_cast<int>(angles.size()) != N) throw ParameterError("need one angle per body");
    Eigen::VectorXd n(4 * N);
    for (int b = 0; b < N; ++b) {
        n.segment<4>(4 * b) = guess ? Vec4((*guess).segment<4>(4 * b)) : circular_normalized(gt, b, angles[b]);
        n[4 * b] = angles[b];
    }
    Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(4 * N, 3 * N);
    for (int b = 0; b < N; ++b)
        for (int k = 0; k < 3; ++k) dir(4 * b + 1 + k, 3 * b + k) = 1.0;

    auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J, Eigen::VectorXd& image) {
        Eigen::MatrixXd dn;
        image = A.apply(x, J ? &dir : nullptr, J ? &dn : nullptr);
        r.resize(3 * N);
        for (int b = 0; b < N; ++b) {
            const int o = 4 * b;
            const double I0 = std::abs(gt.actions[b]);
            r[3 * b] = std::remainder(image[o] - x[o], kTwoPi);
            r[3 * b + 1] = image[o + 2] - x[o + 2];
            r[3 * b + 2] = (image[o + 3] - x[o + 3]) / I0;
            if (J) {
                J->row(3 * b) = dn.row(o);
                J->row(3 * b + 1) = dn.row(o + 2);
                J->row(3 * b + 2) = dn.row(o + 3) / I0;
                (*J)(3 * b + 1, 3 * b + 1) -= 1.0;
                (*J)(3 * b + 2, 3 * b + 2) -= 1.0 / I0;
            }
        }
    };

    LambdaPoint lp;
    Eigen::VectorXd r, image;
    Eigen::MatrixXd J(3 * N, 3 * N);
    evaluate(n, r, &J, image);
    double res = r.norm();
    int it = 0;
    while (res >= tol && it < maxIterations) {
        const Eigen::VectorXd step = J.fullPivLu().solve(-r);
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 10 && !accepted; ++k, lambda *= 0.5) {
            Eigen::VectorXd trial = n;
            for (int b = 0; b < N; ++b) trial.segment<3>(4 * b + 1) += lambda * step.segment<3>(3 * b);
            try {
                Eigen::VectorXd rt, imt;
                Eigen::MatrixXd Jt(3 * N, 3 * N);
                evaluate(trial, rt, &Jt, imt);
                if (std::isfinite(rt.norm()) && rt.norm() < res) {
                    n = trial;
                    r = rt;
                    J = Jt;
                    image = imt;
                    res = rt.norm();
                    accepted = true;
                }
            } catch (const Error&) {
            }
        }
        ++it;
        if (!accepted) break;
    }
    lp.n = n;
    lp.residual = res;
    lp.iterations = it;
    lp.converged = res < tol;
    lp.dI.resize(N);
    for (int b = 0; b < N; ++b) lp.dI[b] = image[4 * b + 1] - n[4 * b + 1];
    return lp;
}

EvennessResult psi_evenness(const SuccessionMap& A, const std::vector<double>& angles, int order) {
    std::vector<double> x, w;
    gauss_legendre(order, x, w);
    const int N = A.torus().bodies();
    // Order nodes from -1 to 1 so each solve starts from its neighbour.
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    EvennessResult er;
    std::optional<Eigen::VectorXd> guess;
    for (std::size_t k : idx) {
        std::vector<double> phi(N);
        for (int b = 0; b < N; ++b) phi[b] = x[k] * angles[b];
        const LambdaPoint lp = lambda_point(A, phi, guess);
        if (!lp.converged) {
            std::ostringstream os;
            os << "continued torus point did not converge (residual " << lp.residual << ")";
            throw SearchFailure(os.str());
        }
        guess = lp.n;
        double f = 0.0;
        for (int b = 0; b < N; ++b) f += A.weights()[b] * lp.dI[b] * angles[b];
        er.difference += w[k] * f;
        er.scale += w[k] * std::abs(f);
        ++er.nodes;
    }
    return er;
}

SectionChart section_chart(const FrequencySet& fs, const Layout& l) {
    const int N = l.bodies();
    if (N < 2) throw ParameterError("the section needs at least two bodies");
    const int g = fs.integerGcd();
    SectionChart c;
    for (int v : fs.flatIntegers()) c.reduced.push_back(v / g);
    int best = 0;
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b) {
            const int d = c.reduced[b] - c.reduced[a];
            if (d != 0 && (best == 0 || std::abs(d) < std::abs(best))) {
                best = d;
                c.b1 = a;
                c.b2 = b;
            }
        }
    if (best == 0) throw ParameterError("resonance integers are all equal; the section is not transversal");
    c.det = best;
    for (int b = 0; b < N; ++b)
        if (b != c.b1 && b != c.b2) c.free.push_back(b);
    return c;
}

std::vector<double> SectionChart::angles(const std::vector<double>& s, int sheet) const {
    const int N = static_cast<int>(reduced.size());
    if (s.size() != free.size()) throw ParameterError("wrong number of section coordinates");
    std::vector<double> phi(N, 0.0);
    double A = 0.0;
    double B = kTwoPi * sheet;
    for (std::size_t k = 0; k < free.size(); ++k) {
        phi[free[k]] = s[k];
        A -= s[k];
        B -= reduced[free[k]] * s[k];
    }
    const double c1 = reduced[b1];
    const double c2 = reduced[b2];
    phi[b1] = (c2 * A - B) / det;
    phi[b2] = (B - c1 * A) / det;
    return phi;
}

std::vector<std::vector<double>> SectionChart::tangents() const {
    const int N = static_cast<int>(reduced.size());
    std::vector<std::vector<double>> t;
    for (int f : free) {
        std::vector<double> v(N, 0.0);
        v[f] = 1.0;
        v[b1] = static_cast<double>(reduced[f] - reduced[b2]) / det;
        v[b2] = static_cast<double>(reduced[b1] - reduced[f]) / det;
        t.push_back(v);
    }
    return t;
}

namespace {

struct SectionEval {
    bool ok = false;
    std::vector<double> angles;
    std::vector<double> gradient;
    Eigen::VectorXd n;
};

SectionEval section_eval(const SuccessionMap& A, const SectionChart& c, const std::vector<double>& s, int sheet,
                         const std::optional<Eigen::VectorXd>& guess) {
    SectionEval e;
    e.angles = c.angles(s, sheet);
    LambdaPoint lp;
    try {
        lp = lambda_point(A, e.angles, guess);
    } catch (const Error&) {
        return e;
    }
    if (!lp.converged) return e;
    e.ok = true;
    e.n = lp.n;
    for (const auto& t : c.tangents()) {
        double g = 0.0;
        for (std::size_t b = 0; b < t.size(); ++b) g += A.weights()[b] * lp.dI[b] * t[b];
        e.gradient.push_back(g);
    }
    return e;
}

double norm(const std::vector<double>& v) {
    double a = 0.0;
    for (double x : v) a += x * x;
    return std::sqrt(a);
}

bool is_symmetric(const std::vector<double>& phi) {
    for (double p : phi)
        if (std::abs(std::remainder(2.0 * p, kTwoPi)) > 1e-8) return false;
    return true;
}

void signature(const SuccessionMap& A, const SectionChart& c, CriticalPoint& cp, const Eigen::VectorXd& n) {
    const int D = static_cast<int>(cp.section.size());
    if (D == 0) return;
    const double h = 1e-4;
    Eigen::MatrixXd H(D, D);
    for (int k = 0; k < D; ++k) {
        std::vector<double> sp = cp.section, sm = cp.section;
        sp[k] += h;
        sm[k] -= h;
        const SectionEval ep = section_eval(A, c, sp, cp.sheet, n);
        const SectionEval em = section_eval(A, c, sm, cp.sheet, n);
        if (!ep.ok || !em.ok) return;
        for (int l = 0; l < D; ++l) H(l, k) = (ep.gradient[l] - em.gradient[l]) / (2.0 * h);
    }
    const Eigen::MatrixXd Hs = 0.5 * (H + H.transpose());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Hs).eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    for (int k = 0; k < D; ++k) {
        if (ev[k] < -1e-6 * scale) ++cp.negative;
        if (ev[k] > 1e-6 * scale) ++cp.positive;
    }
}

// Newton on the section gradient with a finite-difference Jacobian.
bool refine(const SuccessionMap& A, const SectionChart& c, int sheet, std::vector<double>& s, SectionEval& e,
            double tol) {
    const int D = static_cast<int>(s.size());
    const double h = 1e-5;
    for (int it = 0; it < 25; ++it) {
        if (norm(e.gradient) < tol) return true;
        Eigen::MatrixXd H(D, D);
        for (int k = 0; k < D; ++k) {
            std::vector<double> sp = s;
            sp[k] += h;
            const SectionEval ep = section_eval(A, c, sp, sheet, e.n);
            if (!ep.ok) return false;
            for (int l = 0; l < D; ++l) H(l, k) = (ep.gradient[l] - e.gradient[l]) / h;
        }
        const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(e.gradient.data(), D);
        Eigen::VectorXd step = H.fullPivLu().solve(-g);
        if (!step.allFinite()) return false;
        if (step.norm() > 0.5) step *= 0.5 / step.norm();
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 8 && !accepted; ++k, lambda *= 0.5) {
            std::vector<double> st = s;
            for (int l = 0; l < D; ++l) st[l] += lambda * step[l];
            const SectionEval et = section_eval(A, c, st, sheet, e.n);
            if (et.ok && norm(et.gradient) < norm(e.gradient)) {
                s = st;
                e = et;
                accepted = true;
            }
        }
        if (!accepted) return norm(e.gradient) < tol;
    }
    return norm(e.gradient) < tol;
}

} // namespace

SectionSearchResult section_search(const SuccessionMap& A, int gridDensity) {
    const GeneratingTorus& gt = A.torus();
    const SectionChart c = section_chart(gt.fs, gt.layout);
    const int D = static_cast<int>(c.free.size());
    if (D > 0 && gridDensity < 3) throw ParameterError("grid density must be at least 3");
    SectionSearchResult out;
    out.sheets = std::abs(c.det);
    const double gradTol = 1e-10;

    for (int sheet = 0; sheet < out.sheets; ++sheet) {
        if (D == 0) {
            const SectionEval e = section_eval(A, c, {}, sheet, std::nullopt);
            SectionGridNode node{{}, e.angles, 0.0, {}, e.ok};
            out.grid.push_back(node);
            if (!e.ok) {
                ++out.failedNodes;
                continue;
            }
            CriticalPoint cp;
            cp.angles = e.angles;
            cp.sheet = sheet;
            cp.symmetric = is_symmetric(e.angles);
            out.critical.push_back(cp);
            continue;
        }
        // Grid nodes in lexicographic order, last coordinate fastest.
        long total = 1;
        for (int k = 0; k < D; ++k) total *= gridDensity;
        const std::size_t base = out.grid.size();
        std::vector<SectionEval> evals(total);
        std::optional<Eigen::VectorXd> guess;
        for (long idx = 0; idx < total; ++idx) {
            std::vector<double> s(D);
            long r = idx;
            for (int k = D - 1; k >= 0; --k) {
                s[k] = kTwoPi * static_cast<double>(r % gridDensity) / gridDensity;
                r /= gridDensity;
            }
            evals[idx] = section_eval(A, c, s, sheet, guess);
            if (!evals[idx].ok) evals[idx] = section_eval(A, c, s, sheet, std::nullopt);
            if (evals[idx].ok) guess = evals[idx].n;
            SectionGridNode node{s, evals[idx].angles, 0.0, evals[idx].gradient, evals[idx].ok};
            if (!node.ok) ++out.failedNodes;
            out.grid.push_back(node);
        }
        // S-bar along grid lines by the trapezoid rule: first along the
        // leading axis at zero trailing coordinates, then along the last axis.
        const double hstep = kTwoPi / gridDensity;
        auto neighbour = [&](long idx, int k, int delta) {
            std::vector<long> digit(D);
            long r = idx;
            for (int l = D - 1; l >= 0; --l) {
                digit[l] = r % gridDensity;
                r /= gridDensity;
            }
            digit[k] = (digit[k] + delta + gridDensity) % gridDensity;
            long o = 0;
            for (int l = 0; l < D; ++l) o = o * gridDensity + digit[l];
            return o;
        };
        for (long idx = 1; idx < total; ++idx) {
            // step back along the last axis with a nonzero digit
            int axis = D - 1;
            long r = idx;
            while (r % gridDensity == 0) {
                r /= gridDensity;
                --axis;
            }
            const long prev = neighbour(idx, axis, -1);
            auto& cur = out.grid[base + idx];
            const auto& pv = out.grid[base + prev];
            if (cur.ok && pv.ok)
                cur.value = pv.value + 0.5 * hstep * (cur.gradient[axis] + pv.gradient[axis]);
            else
                cur.value = pv.value;
        }
        // Candidates: sign changes of the gradient (D = 1) or local minima of
        // the gradient norm (D > 1).
        std::vector<std::vector<double>> starts;
        std::vector<std::optional<Eigen::VectorXd>> guesses;
        for (long idx = 0; idx < total; ++idx) {
            if (!evals[idx].ok) continue;
            if (D == 1) {
                const long nx = neighbour(idx, 0, 1);
                if (!evals[nx].ok) continue;
                const double g0 = evals[idx].gradient[0];
                const double g1 = evals[nx].gradient[0];
                if (g0 == 0.0 || (g0 < 0.0) != (g1 < 0.0)) {
                    // secant start inside the bracket
                    const double t = g0 == g1 ? 0.0 : g0 / (g0 - g1);
                    starts.push_back({out.grid[base + idx].section[0] + t * hstep});
                    guesses.push_back(evals[idx].n);
                }
            } else {
                const double gn = norm(evals[idx].gradient);
                bool minimum = true;
                for (int k = 0; k < D && minimum; ++k)
                    for (int dlt : {-1, 1}) {
                        const long nb = neighbour(idx, k, dlt);
                        if (evals[nb].ok && norm(evals[nb].gradient) < gn) minimum = false;
                    }
                if (minimum) {
                    starts.push_back(out.grid[base + idx].section);
                    guesses.push_back(evals[idx].n);
                }
            }
        }
        for (std::size_t k = 0; k < starts.size(); ++k) {
            std::vector<double> s = starts[k];
            SectionEval e = section_eval(A, c, s, sheet, guesses[k]);
            if (!e.ok) continue;
            if (!refine(A, c, sheet, s, e, gradTol)) continue;
            for (double& v : s) v = std::remainder(v, kTwoPi);
            bool dup = false;
            for (const auto& cp : out.critical) {
                if (cp.sheet != sheet) continue;
                double d = 0.0;
                for (int l = 0; l < D; ++l) d = std::max(d, std::abs(std::remainder(cp.section[l] - s[l], kTwoPi)));
                if (d < 1e-6) dup = true;
            }
            if (dup) continue;
            CriticalPoint cp;
            cp.section = s;
            cp.angles = e.angles;
            cp.sheet = sheet;
            cp.gradientNorm = norm(e.gradient);
            cp.symmetric = is_symmetric(e.angles);
            // value from the nearest grid node along the section
            long nearest = 0;
            double best = 1e300;
            for (long idx = 0; idx < total; ++idx) {
                double d = 0.0;
                for (int l = 0; l < D; ++l)
                    d += std::pow(std::remainder(out.grid[base + idx].section[l] - s[l], kTwoPi), 2);
                if (d < best && evals[idx].ok) {
                    best = d;
                    nearest = idx;
                }
            }
            const auto& nd = out.grid[base + nearest];
            cp.value = nd.value;
            for (int l = 0; l < D; ++l)
                cp.value += 0.5 * std::remainder(s[l] - nd.section[l], kTwoPi) * (nd.gradient[l] + e.gradient[l]);
            signature(A, c, cp, e.n);
            out.critical.push_back(cp);
        }
    }
    std::stable_sort(out.critical.begin(), out.critical.end(),
                     [](const CriticalPoint& a, const CriticalPoint& b) { return a.sheet < b.sheet; });
    return out;
}

} // namespace satorb
