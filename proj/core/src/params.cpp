#include "satorb/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "satorb/averaging.hpp"
#include "satorb/errors.hpp"

namespace satorb {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace

int MassModel::totalSatellites() const {
    int s = 0;
    for (const auto& v : mSat) s += static_cast<int>(v.size());
    return s;
}

double MassModel::barM(int i) const {
    double s = 0.0;
    for (double mij : mSat[i]) s += mij;
    return m[i] + nu * s;
}

double MassModel::tildeM(int i) const {
    const double b = barM(i);
    return b / (1.0 + mu * b);
}

double MassModel::barMSat(int i, int j) const { return mSat[i][j] / m[i]; }

double MassModel::tildeMSat(int i, int j) const {
    return mSat[i][j] * m[i] / (m[i] + nu * mSat[i][j]);
}

double MassModel::theta(int i) const {
    if (satellites(i) != 1) throw ParameterError("theta is defined for double planets only");
    return nu * mSat[i][0] / (m[i] + nu * mSat[i][0]);
}

void MassModel::validate(double tol) const {
    if (m.empty()) throw ParameterError("mass model has no planets");
    if (mSat.size() != m.size())
        throw ParameterError("satellite mass table must have one row per planet");
    if (!(mu > 0.0) || !(nu > 0.0)) throw ParameterError("mu and nu must be positive");
    double sum = 0.0;
    for (double mi : m) {
        if (!(mi > 0.0)) throw ParameterError("planet mass factors must be positive");
        sum += mi;
    }
    if (std::abs(sum - 1.0) > tol) throw ParameterError("planet mass factors must sum to 1");
    double minRatio = INFINITY;
    bool any = false;
    for (int i = 0; i < planets(); ++i) {
        if (mSat[i].empty()) continue;
        any = true;
        double r = 0.0;
        for (double mij : mSat[i]) {
            if (!(mij > 0.0)) throw ParameterError("satellite mass factors must be positive");
            if (nu * mij > m[i] * (1.0 + tol))
                throw ParameterError("a satellite may not outweigh its planet");
            r += mij / m[i];
        }
        minRatio = std::min(minRatio, r);
    }
    if (any && std::abs(minRatio - 1.0) > tol)
        throw ParameterError("min over planets of sum_j m_ij/m_i must equal 1");
}

ScaleParameters derive_scales(double omega, double mu, double nu) {
    auto inUnit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!inUnit(omega) || !inUnit(mu) || !inUnit(nu))
        throw ParameterError("omega, mu and nu must lie in (0, 1)");
    ScaleParameters s;
    s.omega = omega;
    s.mu = mu;
    s.nu = nu;
    s.rho = std::cbrt(omega * omega * mu);
    s.R = 1.0 / s.rho;
    s.g = 1.0 / mu;
    s.epsilon = nu * s.rho * s.rho / omega;
    return s;
}

double reduce_angle(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -M_PI) r += kTwoPi;
    return r;
}

int FrequencySet::bodies() const {
    int b = 0;
    for (const auto& row : Omega) b += static_cast<int>(row.size());
    return b;
}

std::vector<int> FrequencySet::flatIntegers() const {
    std::vector<int> out(k.begin(), k.end());
    for (const auto& row : K) out.insert(out.end(), row.begin(), row.end());
    return out;
}

int FrequencySet::integerGcd() const {
    int g = 0;
    for (int v : flatIntegers()) g = std::gcd(g, std::abs(v));
    return g == 0 ? 1 : g;
}

void FrequencySet::validate(double tol) const {
    const int n = planets();
    if (n == 0) throw ParameterError("frequency set has no planets");
    if (static_cast<int>(k.size()) != n || static_cast<int>(K.size()) != n)
        throw ParameterError("resonance integers do not match the frequency table");
    if (!(T > 0.0)) throw ParameterError("period T must be positive");
    if (!(omega > 0.0)) throw ParameterError("omega must be positive");
    if (k[0] != 0) throw ParameterError("k_1 must be 0 (omega_1 is the first planet)");
    const double step = kTwoPi / T;
    if (!close(omega1, omega * Omega[0][0], tol)) throw ParameterError("omega_1 != omega*Omega_10");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(K[i].size()) != satellites(i))
            throw ParameterError("satellite integers do not match the frequency table");
        if (!close(omega * Omega[i][0], omega1 + k[i] * step, tol))
            throw ParameterError("planet frequency violates the resonance relation");
        for (int j = 1; j <= satellites(i); ++j)
            if (!close(Omega[i][j], omega1 + K[i][j - 1] * step, tol))
                throw ParameterError("satellite frequency violates the resonance relation");
    }
    if (!(alpha > -M_PI && alpha <= M_PI)) throw ParameterError("alpha outside (-pi, pi]");
    if (!close(omega1 * T + kTwoPi * alphaShift, alpha, tol))
        throw ParameterError("alpha != omega_1 T + 2 pi k");
    if (!(c > 0.0 && c < 1.0)) throw ParameterError("separation constant c must lie in (0, 1)");
    const double slack = tol;
    for (int i = 0; i < n; ++i) {
        const double a0 = std::abs(Omega[i][0]);
        if (a0 < c - slack || a0 > 1.0 + slack)
            throw ParameterError("planet frequency factor outside [c, 1]");
        for (int j = 1; j <= satellites(i); ++j) {
            const double aj = std::abs(Omega[i][j]);
            if (aj < a0 - slack || aj > 1.0 + slack)
                throw ParameterError("satellite frequency outside [|Omega_i0|, 1]");
            for (int jj = j + 1; jj <= satellites(i); ++jj)
                if (std::abs(aj - std::abs(Omega[i][jj])) < c - slack)
                    throw ParameterError("satellite frequencies of one planet closer than c");
        }
        for (int ii = i + 1; ii < n; ++ii)
            if (std::abs(a0 - std::abs(Omega[ii][0])) < c - slack)
                throw ParameterError("planet frequency factors closer than c");
    }
}

FrequencySet make_resonant(double omega, double Omega10, double T, const std::vector<int>& k,
                           const std::vector<std::vector<int>>& K, double c) {
    if (k.size() != K.size()) throw ParameterError("k and K must have one entry per planet");
    if (k.empty() || k[0] != 0) throw ParameterError("k_1 must be 0");
    if (!(T > 0.0) || !(omega > 0.0)) throw ParameterError("omega and T must be positive");
    FrequencySet fs;
    fs.omega = omega;
    fs.T = T;
    fs.k = k;
    fs.K = K;
    fs.c = c;
    fs.omega1 = omega * Omega10;
    const double step = kTwoPi / T;
    fs.Omega.resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        fs.Omega[i].push_back(i == 0 ? Omega10 : (fs.omega1 + k[i] * step) / omega);
        for (int Kij : K[i]) fs.Omega[i].push_back(fs.omega1 + Kij * step);
    }
    const double raw = fs.omega1 * T;
    fs.alpha = reduce_angle(raw);
    fs.alphaShift = static_cast<int>(std::lround((fs.alpha - raw) / kTwoPi));
    return fs;
}

double design_b(double a) { return std::floor((6.0 * a - 7.0) / 14.0) / a + 0.5 / a; }

double design_c0(double a, int N, int n) {
    return std::min(1.0 / a, 1.0 / (14.0 * (N - n + 1)));
}

FrequencySet design_frequencies(const DesignInputs& in) {
    const int n = in.n;
    const int N = in.N;
    if (n < 1 || N < n) throw DesignInfeasible("need 1 <= n <= N");
    if (static_cast<int>(in.k.size()) != n - 1)
        throw DesignInfeasible("expected n-1 planet integers k_2..k_n");
    int kmax = 0;
    for (std::size_t i = 0; i < in.k.size(); ++i) {
        if (in.k[i] == 0) throw DesignInfeasible("planet integers must be nonzero");
        for (std::size_t j = i + 1; j < in.k.size(); ++j)
            if (std::abs(in.k[i]) == std::abs(in.k[j]))
                throw DesignInfeasible("planet integers must have distinct absolute values");
        kmax = std::max(kmax, std::abs(in.k[i]));
    }
    const int fibre = N - n + 1;
    const double a0 = std::max(7.0 * kmax, std::sqrt(7.0 * fibre));
    if (in.a < a0) {
        std::ostringstream os;
        os << "a = " << in.a << " violates a >= a0 = " << a0;
        throw DesignInfeasible(os.str());
    }
    const double w0 = 1.0 / (4.0 * in.a);
    if (!(in.omega > 0.0) || in.omega > w0) {
        std::ostringstream os;
        os << "omega = " << in.omega << " violates 0 < omega <= 1/(4a) = " << w0;
        throw DesignInfeasible(os.str());
    }

    std::vector<int> sats = in.satellitesPerPlanet;
    if (sats.empty()) {
        sats.assign(n, 0);
        for (int s = 0; s < N - n; ++s) ++sats[s % n];
    }
    if (static_cast<int>(sats.size()) != n) throw DesignInfeasible("satellite counts need one entry per planet");
    if (std::accumulate(sats.begin(), sats.end(), 0) != N - n)
        throw DesignInfeasible("satellite counts must sum to N - n");

    const double a = in.a;
    const double w = in.omega;
    const double b = design_b(a);
    const double c = design_c0(a, N, n);
    const auto ell = static_cast<long>(std::ceil(c * a / w - 1e-12));
    if (static_cast<double>(ell) > a / (7.0 * fibre * w) + 1e-12)
        throw DesignInfeasible("no admissible gap l in [ca/omega, a/(7(N-n+1)omega)]");
    const auto lo = static_cast<long>(std::ceil(5.0 * a / (7.0 * w) - 1e-12));
    const auto hi = static_cast<long>(std::floor(6.0 * a / (7.0 * w) + 1e-12));

    std::vector<int> k{0};
    k.insert(k.end(), in.k.begin(), in.k.end());
    std::vector<std::vector<int>> K(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < sats[i]; ++j) {
            const long v = lo + j * ell;
            if (v > hi) throw DesignInfeasible("not enough admissible satellite integers K_ij");
            K[i].push_back(static_cast<int>(v));
        }
    const double T = kTwoPi * a / w;
    FrequencySet fs = make_resonant(w, b, T, k, K, c);
    fs.validate(1e-9);
    return fs;
}

NondegeneracyReport check_nondegeneracy(const FrequencySet& fs,
                                        const std::optional<std::vector<std::vector<double>>>& delta,
                                        double C1, double C2) {
    NondegeneracyReport r;
    const double w = fs.omega;
    const double w2T = w * w * fs.T;
    const double w3T = w * w2T;
    const double absA = std::abs(reduce_angle(fs.alpha));

    r.marginNondegenerate = absA - w2T;
    r.nondegenerate = r.marginNondegenerate > 0.0;
    r.marginNondegenerateC1 = absA - C1 * w2T;
    r.nondegenerateC1 = r.marginNondegenerateC1 > 0.0;
    r.marginStrong = std::min(absA - w2T, M_PI - w2T - absA);
    r.strong = r.marginStrong > 0.0;

    r.delta.resize(fs.planets());
    double m = absA;  // alpha itself must avoid 2 pi Z
    for (int i = 0; i < fs.planets(); ++i) {
        for (int j = 1; j <= fs.satellites(i); ++j) {
            double d;
            if (delta) {
                d = (*delta).at(i).at(j - 1);
            } else {
                const double Om = fs.Omega[i][j];
                const double rx = std::pow(std::abs(fs.Omega[i][0]), -2.0 / 3.0);
                d = averaged_hill(Om > 0 ? 1.0 : -1.0, Om, fs.Omega[i][0], rx).delta;
            }
            r.delta[i].push_back(d);
            m = std::min(m, std::abs(reduce_angle(fs.alpha + d * w2T)) - C2 * w3T);
        }
    }
    r.marginDelicate = m;
    r.delicate = absA > 0.0 && m > 0.0;
    return r;
}

} // namespace satorb
