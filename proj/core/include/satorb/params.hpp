#pragma once

#include <optional>
#include <vector>

namespace satorb {

// Hierarchical masses. Sun has mass 1, planet i has mass mu*m_i and its
// j-th satellite mu*nu*m_ij.
struct MassModel {
    std::vector<double> m;
    std::vector<std::vector<double>> mSat;
    double mu = 0.0;
    double nu = 0.0;

    int planets() const { return static_cast<int>(m.size()); }
    int satellites(int i) const { return static_cast<int>(mSat[i].size()); }
    int totalSatellites() const;
    int bodies() const { return planets() + totalSatellites(); }

    double barM(int i) const;              // m_i + nu sum_j m_ij
    double tildeM(int i) const;            // barM / (1 + mu barM)
    double barMSat(int i, int j) const;    // m_ij / m_i
    double tildeMSat(int i, int j) const;  // m_ij m_i / (m_i + nu m_ij)
    double theta(int i) const;             // nu m_i1 / (m_i + nu m_i1), double planets only

    // Sum of m_i = 1, min_i sum_j m_ij/m_i = 1 when satellites exist,
    // positivity, and satellite mass not exceeding its planet.
    void validate(double tol = 1e-12) const;
};

struct ScaleParameters {
    double omega = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    double rho = 0.0;      // omega^(2/3) mu^(1/3)
    double epsilon = 0.0;  // omega^(1/3) mu^(2/3) nu
    double R = 0.0;        // 1/rho
    double g = 0.0;        // 1/mu
};

ScaleParameters derive_scales(double omega, double mu, double nu);

// Angular frequencies of a maximally resonant configuration.
// Omega[i][0] is the planet factor (omega_i = omega*Omega[i][0]), Omega[i][j]
// for j >= 1 the satellites. k[i] and K[i][j-1] are the resonance integers.
struct FrequencySet {
    double omega = 0.0;
    std::vector<std::vector<double>> Omega;
    std::vector<int> k;
    std::vector<std::vector<int>> K;
    double T = 0.0;
    double omega1 = 0.0;
    double alpha = 0.0;
    int alphaShift = 0;  // alpha = omega1*T + 2*pi*alphaShift
    double c = 0.0;

    int planets() const { return static_cast<int>(Omega.size()); }
    int satellites(int i) const { return static_cast<int>(Omega[i].size()) - 1; }
    int bodies() const;
    double planetFrequency(int i) const { return omega * Omega[i][0]; }

    // Resonance integer of body b in flat order (planets, then satellites).
    std::vector<int> flatIntegers() const;
    int integerGcd() const;
    double Tmin() const { return T / integerGcd(); }

    // Throws ParameterError naming the first violated relation.
    void validate(double tol = 1e-10) const;
};

// Builds the set from omega, Omega_10, T and the resonance integers; every
// frequency is then exactly resonant.
FrequencySet make_resonant(double omega, double Omega10, double T,
                           const std::vector<int>& k,
                           const std::vector<std::vector<int>>& K, double c);

double reduce_angle(double a);  // into (-pi, pi]

struct DesignInputs {
    std::vector<int> k;  // k_2..k_n
    double a = 0.0;
    int N = 0;
    int n = 0;
    double omega = 0.0;
    std::vector<int> satellitesPerPlanet;  // optional; empty -> spread evenly
};

double design_b(double a);
double design_c0(double a, int N, int n);
FrequencySet design_frequencies(const DesignInputs& in);

struct NondegeneracyReport {
    bool nondegenerate = false;   // |alpha| > omega^2 T
    bool nondegenerateC1 = false; // alpha outside [-C1 w^2 T, C1 w^2 T] + 2 pi Z
    bool delicate = false;        // alpha != 0 and shifted angles clear of C2 w^3 T windows
    bool strong = false;          // omega^2 T < |alpha| < pi - omega^2 T
    double marginNondegenerate = 0.0;
    double marginNondegenerateC1 = 0.0;
    double marginDelicate = 0.0;
    double marginStrong = 0.0;
    std::vector<std::vector<double>> delta;  // Delta_ij used
};

// delta[i][j-1] = Delta_ij; when absent it is computed by numerical averaging.
NondegeneracyReport check_nondegeneracy(
    const FrequencySet& fs,
    const std::optional<std::vector<std::vector<double>>>& delta = std::nullopt,
    double C1 = 1.0, double C2 = 1.0);

} // namespace satorb
