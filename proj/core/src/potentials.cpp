#include "satorb/potentials.hpp"

#include <cmath>
#include <sstream>

#include "satorb/detail/dual.hpp"
#include "satorb/errors.hpp"

namespace satorb {

using detail::Dual;

double newton_potential(const BarycentricConfig& c, double g) {
    double U = 0.0;
    const std::size_t n = c.masses.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = (c.positions[i] - c.positions[j]).norm();
            if (r == 0.0) throw DomainError("collision in Newtonian potential");
            U -= g * c.masses[i] * c.masses[j] / r;
        }
    return U;
}

double hill_F(const Vec2& x, const Vec2& y) {
    const double a2 = x.squaredNorm();
    if (a2 == 0.0) throw DomainError("Hill potential is singular at x = 0");
    const double xy = x.dot(y);
    const double a = std::sqrt(a2);
    return (a2 * y.squaredNorm() - 3.0 * xy * xy) / (2.0 * a2 * a2 * a);
}

Vec2 hill_F_grad_y(const Vec2& x, const Vec2& y) {
    const double a2 = x.squaredNorm();
    if (a2 == 0.0) throw DomainError("Hill potential is singular at x = 0");
    const double a = std::sqrt(a2);
    return (a2 * y - 3.0 * x.dot(y) * x) / (a2 * a2 * a);
}

namespace {

// y^2/(2a^3) - s^2 (2a+b) / (2 a^3 b (a+b)^2), s = 2<x,y> + sigma y^2.
template <class S>
S f0_kernel(const S& x0, const S& x1, const S& y0, const S& y1, double sigma) {
    using std::sqrt;
    const S a2 = x0 * x0 + x1 * x1;
    const S a = sqrt(a2);
    const S y2 = y0 * y0 + y1 * y1;
    const S s = 2.0 * (x0 * y0 + x1 * y1) + sigma * y2;
    const S b0 = x0 + sigma * y0;
    const S b1 = x1 + sigma * y1;
    const S b = sqrt(b0 * b0 + b1 * b1);
    const S a3 = a2 * a;
    const S ab = a + b;
    return y2 / (2.0 * a3) - s * s * (2.0 * a + b) / (2.0 * a3 * b * ab * ab);
}

void require_domain(const Vec2& x, const Vec2& y, double rho) {
    const double a = x.norm();
    if (a == 0.0) throw DomainError("potential is singular at x = 0");
    if (std::abs(rho) * y.norm() >= a) {
        std::ostringstream os;
        os << "analytic domain |x| > |rho||y| violated: |x| = " << a << ", |rho||y| = " << std::abs(rho) * y.norm();
        throw DomainError(os.str());
    }
}

double f0(const Vec2& x, const Vec2& y, double sigma, PotentialMethod m) {
    if (m == PotentialMethod::Series) return hill_F0_series(x, y, sigma).value;
    return f0_kernel<double>(x.x(), x.y(), y.x(), y.y(), sigma);
}

long double inv_norm(long double a, long double b) { return 1.0L / std::sqrt(a * a + b * b); }

} // namespace

double hill_F0_stable(const Vec2& x, const Vec2& y, double rho) {
    if (x.squaredNorm() == 0.0) throw DomainError("potential is singular at x = 0");
    if ((x + rho * y).squaredNorm() == 0.0) throw DomainError("collision: x + rho y = 0");
    return f0_kernel<double>(x.x(), x.y(), y.x(), y.y(), rho);
}

SeriesResult hill_F0_series(const Vec2& x, const Vec2& y, double rho, double relTol) {
    require_domain(x, y, rho);
    SeriesResult r;
    const double a = x.norm();
    const double yn = y.norm();
    if (yn == 0.0) return r;
    const double u = rho * yn / a;
    const double au = std::abs(u);
    const double t = -x.dot(y) / (a * yn);
    const double pref = yn * yn / (a * a * a);
    double Pkm1 = 1.0;  // P_0
    double Pk = t;      // P_1
    double sum = 0.0;
    double upow = 1.0;  // u^(k-2)
    for (int k = 1; k < 4000; ++k) {
        const double Pnext = ((2.0 * k + 1.0) * t * Pk - k * Pkm1) / (k + 1.0);
        Pkm1 = Pk;
        Pk = Pnext;  // now P_{k+1}
        sum += Pk * upow;
        r.terms = k;
        const double tail = std::pow(au, k) / (1.0 - au);
        upow *= u;
        if (tail <= relTol * std::abs(sum) || tail == 0.0) {
            r.bound = pref * tail;
            break;
        }
        r.bound = pref * tail;
    }
    r.value = -pref * sum;
    return r;
}

double hill_F_general(const Vec2& x, const Vec2& y, double theta, double rho, PotentialMethod method) {
    require_domain(x, y, rho);
    if (rho == 0.0) return hill_F(x, y);
    const bool interior = theta > 0.0 && theta < 1.0;
    if (method == PotentialMethod::Auto)
        method = (interior && std::abs(rho) * y.norm() / x.norm() >= 0.05) ? PotentialMethod::ClosedForm
                                                                          : PotentialMethod::Series;
    if (method == PotentialMethod::ClosedForm) {
        if (!interior) throw DomainError("closed form needs 0 < theta < 1");
        const long double th = theta;
        const long double r = rho;
        const long double a = inv_norm(x.x(), x.y());
        const long double b = inv_norm(x.x() - th * r * y.x(), x.y() - th * r * y.y());
        const long double c = inv_norm(x.x() + (1.0L - th) * r * y.x(), x.y() + (1.0L - th) * r * y.y());
        return static_cast<double>((a - (1.0L - th) * b - th * c) / (th * (1.0L - th) * r * r));
    }
    double v = 0.0;
    if (theta != 0.0) v += theta * f0(x, y, -theta * rho, method);
    if (theta != 1.0) v += (1.0 - theta) * f0(x, y, (1.0 - theta) * rho, method);
    return v;
}

Vec2 delta_vector(int i, const PhaseState& s, const MassModel& m) {
    Vec2 d = Vec2::Zero();
    for (int j = 0; j < m.satellites(i); ++j) d += (m.mSat[i][j] / m.barM(i)) * s.pos(s.layout.satSlot(i, j));
    return d;
}

std::vector<KernelTerm> perturbation_terms(const Layout& l, const MassModel& m, double rho) {
    std::vector<KernelTerm> out;
    const double nu = m.nu;
    auto deltaWeights = [&](int i, double scale, std::vector<std::pair<int, double>>& Y) {
        for (int j = 0; j < m.satellites(i); ++j) Y.emplace_back(l.satSlot(i, j), scale * m.mSat[i][j] / m.barM(i));
    };
    for (int i = 0; i < m.planets(); ++i) {
        if (m.satellites(i) == 0) continue;
        KernelTerm t{nu * m.m[i], nu * rho, {{i, 1.0}}, {}};
        deltaWeights(i, -1.0, t.Y);
        out.push_back(t);
        for (int j = 0; j < m.satellites(i); ++j) {
            KernelTerm s{m.mSat[i][j], rho, {{i, 1.0}}, {{l.satSlot(i, j), 1.0}}};
            deltaWeights(i, -nu, s.Y);
            out.push_back(s);
        }
    }
    for (int i = 0; i < m.planets(); ++i)
        for (int k = i + 1; k < m.planets(); ++k) {
            if (m.satellites(i) == 0 && m.satellites(k) == 0) continue;
            const std::vector<std::pair<int, double>> X{{i, 1.0}, {k, -1.0}};
            // -nu (delta_i - delta_k)
            std::vector<std::pair<int, double>> shift;
            deltaWeights(i, -nu, shift);
            deltaWeights(k, nu, shift);

            KernelTerm t{m.mu * nu * m.m[i] * m.m[k], nu * rho, X, {}};
            deltaWeights(i, -1.0, t.Y);
            deltaWeights(k, 1.0, t.Y);
            out.push_back(t);
            for (int j = 0; j < m.satellites(i); ++j) {
                KernelTerm s{m.mu * m.mSat[i][j] * m.m[k], rho, X, shift};
                s.Y.emplace_back(l.satSlot(i, j), 1.0);
                out.push_back(s);
            }
            for (int j = 0; j < m.satellites(k); ++j) {
                KernelTerm s{m.mu * m.m[i] * m.mSat[k][j], rho, X, shift};
                s.Y.emplace_back(l.satSlot(k, j), -1.0);
                out.push_back(s);
            }
            for (int j = 0; j < m.satellites(i); ++j)
                for (int jj = 0; jj < m.satellites(k); ++jj) {
                    KernelTerm s{m.mu * nu * m.mSat[i][j] * m.mSat[k][jj], rho, X, shift};
                    s.Y.emplace_back(l.satSlot(i, j), 1.0);
                    s.Y.emplace_back(l.satSlot(k, jj), -1.0);
                    out.push_back(s);
                }
        }
    return out;
}

namespace {

Vec2 combine(const std::vector<std::pair<int, double>>& w, const Eigen::VectorXd& z) {
    Vec2 v = Vec2::Zero();
    for (const auto& [slot, c] : w) v += c * z.segment<2>(4 * slot);
    return v;
}

} // namespace

double kernel_value(const KernelTerm& t, const Eigen::VectorXd& z) {
    const Vec2 X = combine(t.X, z);
    const Vec2 Y = combine(t.Y, z);
    return t.coeff * f0_kernel<double>(X.x(), X.y(), Y.x(), Y.y(), t.sigma);
}

void kernel_derivatives(const KernelTerm& t, const Eigen::VectorXd& z, Eigen::VectorXd& g,
                        Eigen::MatrixXd* H, double scale) {
    const Vec2 X = combine(t.X, z);
    const Vec2 Y = combine(t.Y, z);
    const double c = scale * t.coeff;
    // (row of the 4-vector (X, Y), index into z, weight)
    struct Entry {
        int row;
        int idx;
        double w;
    };
    std::vector<Entry> map;
    for (const auto& [slot, w] : t.X) {
        map.push_back({0, 4 * slot, w});
        map.push_back({1, 4 * slot + 1, w});
    }
    for (const auto& [slot, w] : t.Y) {
        map.push_back({2, 4 * slot, w});
        map.push_back({3, 4 * slot + 1, w});
    }
    if (!H) {
        using D = Dual<double, 4>;
        const D f = f0_kernel<D>(D(X.x(), 0), D(X.y(), 1), D(Y.x(), 2), D(Y.y(), 3), t.sigma);
        for (const auto& e : map) g[e.idx] += c * e.w * f.d[e.row];
        return;
    }
    using D1 = Dual<double, 4>;
    using D2 = Dual<D1, 4>;
    auto var = [](double v, int k) { return D2(D1(v, k), k); };
    const D2 f = f0_kernel<D2>(var(X.x(), 0), var(X.y(), 1), var(Y.x(), 2), var(Y.y(), 3), t.sigma);
    for (const auto& e : map) g[e.idx] += c * e.w * f.d[e.row].v;
    for (const auto& a : map)
        for (const auto& b : map) (*H)(a.idx, b.idx) += c * a.w * b.w * f.d[a.row].d[b.row];
}

double phi_i(const Vec2& x, const std::vector<Vec2>& ys, double mi, const std::vector<double>& mij,
             double nu, double rho, PotentialMethod method) {
    if (ys.empty()) return 0.0;
    double mbar = mi;
    for (double v : mij) mbar += nu * v;
    Vec2 delta = Vec2::Zero();
    for (std::size_t j = 0; j < ys.size(); ++j) delta += (mij[j] / mbar) * ys[j];

    if (method == PotentialMethod::ClosedForm) {
        const long double r = rho;
        const long double n = nu;
        long double acc = inv_norm(x.x(), x.y());
        acc -= (static_cast<long double>(mi) / mbar) * inv_norm(x.x() - n * r * delta.x(), x.y() - n * r * delta.y());
        for (std::size_t j = 0; j < ys.size(); ++j)
            acc -= n * (static_cast<long double>(mij[j]) / mbar) *
                   inv_norm(x.x() + r * ys[j].x() - r * n * delta.x(), x.y() + r * ys[j].y() - r * n * delta.y());
        return static_cast<double>(acc / (n * r * r));
    }
    double v = nu * mi * f0(x, -delta, nu * rho, method);
    for (std::size_t j = 0; j < ys.size(); ++j) v += mij[j] * f0(x, ys[j] - nu * delta, rho, method);
    return v / mbar;
}

double phi_ii(const Vec2& X, const std::vector<Vec2>& ys, const std::vector<Vec2>& ys2, double mi,
              const std::vector<double>& mij, double mi2, const std::vector<double>& mij2, double nu,
              double rho, PotentialMethod method) {
    if (ys.empty() && ys2.empty()) return 0.0;
    double mb = mi;
    for (double v : mij) mb += nu * v;
    double mb2 = mi2;
    for (double v : mij2) mb2 += nu * v;
    Vec2 d1 = Vec2::Zero();
    for (std::size_t j = 0; j < ys.size(); ++j) d1 += (mij[j] / mb) * ys[j];
    Vec2 d2 = Vec2::Zero();
    for (std::size_t j = 0; j < ys2.size(); ++j) d2 += (mij2[j] / mb2) * ys2[j];
    const Vec2 D = d1 - d2;

    if (method == PotentialMethod::ClosedForm) {
        const long double r = rho;
        const long double n = nu;
        auto inv = [&](long double a, long double b) { return inv_norm(a, b); };
        long double acc = static_cast<long double>(mb) * mb2 * inv(X.x(), X.y());
        for (std::size_t j = 0; j < ys.size(); ++j)
            acc -= n * mi2 * mij[j] *
                   inv(X.x() + r * ys[j].x() - r * n * D.x(), X.y() + r * ys[j].y() - r * n * D.y());
        acc -= static_cast<long double>(mi) * mi2 * inv(X.x() - n * r * D.x(), X.y() - n * r * D.y());
        for (std::size_t j = 0; j < ys2.size(); ++j)
            acc -= n * mi * mij2[j] *
                   inv(-X.x() + r * ys2[j].x() + r * n * D.x(), -X.y() + r * ys2[j].y() + r * n * D.y());
        for (std::size_t j = 0; j < ys.size(); ++j)
            for (std::size_t k = 0; k < ys2.size(); ++k)
                acc -= n * n * mij[j] * mij2[k] *
                       inv(X.x() + r * (ys[j].x() - ys2[k].x()) - r * n * D.x(),
                           X.y() + r * (ys[j].y() - ys2[k].y()) - r * n * D.y());
        return static_cast<double>(acc / (n * r * r * mb * mb2));
    }
    double v = nu * mi * mi2 * f0(X, -D, nu * rho, method);
    for (std::size_t j = 0; j < ys.size(); ++j) v += mij[j] * mi2 * f0(X, ys[j] - nu * D, rho, method);
    for (std::size_t j = 0; j < ys2.size(); ++j) v += mi * mij2[j] * f0(X, -ys2[j] - nu * D, rho, method);
    for (std::size_t j = 0; j < ys.size(); ++j)
        for (std::size_t k = 0; k < ys2.size(); ++k)
            v += nu * mij[j] * mij2[k] * f0(X, ys[j] - ys2[k] - nu * D, rho, method);
    return v / (mb * mb2);
}

void check_analyticity(const PhaseState& s, const MassModel& m, const ScaleParameters& sc) {
    const Layout& l = s.layout;
    for (int i = 0; i < m.planets(); ++i) {
        const double xi = s.pos(i).norm();
        if (xi == 0.0) throw DomainError("planet coordinate x_i vanishes");
        double w = 0.0;
        for (int j = 0; j < m.satellites(i); ++j) w += std::abs(m.barMSat(i, j));
        const double f = std::abs(sc.rho) * (1.0 + std::abs(m.nu) * w);
        double lim = xi;
        for (int k = 0; k < m.planets(); ++k)
            if (k != i) {
                const double d = (s.pos(i) - s.pos(k)).norm();
                if (d == 0.0) throw DomainError("planet coordinates coincide");
                lim = std::min(lim, d / 2.0);
            }
        for (int j = 0; j < m.satellites(i); ++j) {
            const double yn = s.pos(l.satSlot(i, j)).norm();
            if (yn == 0.0) throw DomainError("satellite coordinate y_ij vanishes");
            if (f * yn >= lim) {
                std::ostringstream os;
                os << "analyticity bound rho(1 + nu sum|m_ij/m_i|)|y_ij| < min(|x_i|, |x_i - x_i'|/2) violated for (" << i
                   << "," << j << ")";
                throw DomainError(os.str());
            }
        }
    }
}

namespace {

std::vector<Vec2> sat_positions(const PhaseState& s, int i) {
    std::vector<Vec2> ys;
    for (int j = 0; j < s.layout.sats[i]; ++j) ys.push_back(s.pos(s.layout.satSlot(i, j)));
    return ys;
}

} // namespace

double perturbation_potential(const PhaseState& s, const MassModel& m, const ScaleParameters& sc,
                              PotentialMethod method) {
    check_analyticity(s, m, sc);
    if (method == PotentialMethod::Auto) method = PotentialMethod::Stable;
    double v = 0.0;
    for (int i = 0; i < m.planets(); ++i)
        v += m.barM(i) * phi_i(s.pos(i), sat_positions(s, i), m.m[i], m.mSat[i], m.nu, sc.rho, method);
    for (int i = 0; i < m.planets(); ++i)
        for (int k = i + 1; k < m.planets(); ++k)
            v += m.mu * m.barM(i) * m.barM(k) *
                 phi_ii(s.pos(i) - s.pos(k), sat_positions(s, i), sat_positions(s, k), m.m[i], m.mSat[i], m.m[k],
                        m.mSat[k], m.nu, sc.rho, method);
    return v;
}

Eigen::VectorXd perturbation_gradient(const PhaseState& s, const MassModel& m, const ScaleParameters& sc) {
    check_analyticity(s, m, sc);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(s.z.size());
    for (const auto& t : perturbation_terms(s.layout, m, sc.rho)) kernel_derivatives(t, s.z, g);
    return g;
}

double perturbation_limit(const PhaseState& s, const MassModel& m, double mu) {
    double v = 0.0;
    for (int i = 0; i < m.planets(); ++i)
        for (int j = 0; j < m.satellites(i); ++j) {
            const Vec2 y = s.pos(s.layout.satSlot(i, j));
            v += m.mSat[i][j] * hill_F(s.pos(i), y);
            for (int k = 0; k < m.planets(); ++k)
                if (k != i) v += m.mSat[i][j] * mu * m.barM(k) * hill_F(s.pos(i) - s.pos(k), y);
        }
    return v;
}

} // namespace satorb
