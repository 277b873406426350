#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "satorb/coords.hpp"
#include "satorb/dynamics.hpp"
#include "satorb/errors.hpp"
#include "satorb/params.hpp"

namespace satorb {

// Singular shooting Jacobian: the half-period condition has a degenerate
// direction (typical when alpha = 0).
class DegenerateDirection : public SearchFailure {
public:
    DegenerateDirection(const std::string& what, std::vector<double> history)
        : SearchFailure(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

class ShootingFailure : public SearchFailure {
public:
    ShootingFailure(const std::string& what, std::vector<double> history)
        : SearchFailure(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

// Circular Kepler data of every factor of the generating solutions.
struct GeneratingTorus {
    Layout layout;
    FrequencySet fs;
    std::vector<KeplerFactor> factors;
    std::vector<double> radii;
    std::vector<double> actions;
    std::vector<double> frequencies;  // Omega per slot in its own time scale
    std::vector<double> timeScale;
    std::vector<int> integers;        // resonance integer per slot

    int bodies() const { return layout.bodies(); }
    // Angular velocity of slot b in system time.
    double angularVelocity(int b) const { return timeScale[b] * frequencies[b]; }
    PhaseState point(const std::vector<double>& angles, double t = 0.0) const;
    // Normalized (phi, I, q, p) of slot b for given state.
    Vec4 normalized(const Eigen::VectorXd& z, int b) const;
};

GeneratingTorus generating_torus(const FrequencySet& fs, const MassModel& m);
GeneratingTorus generating_torus(const FrequencySet& fs, const SystemModel& sys);

// Parade type: 0 or 1 per slot (angle 0 or pi at t = 0).
using ParadeType = std::vector<int>;

struct SymmetricSeed {
    ParadeType pattern;
    PhaseState state;
};

// One representative per class of parade patterns under global rotation by
// pi and the half-step time shift; 2^(N-2) seeds.
std::vector<SymmetricSeed> symmetric_seeds(const GeneratingTorus& gt);

struct ShootOptions {
    double tol = 1e-10;
    int maxIterations = 30;
    double integratorTol = 1e-13;
    std::optional<double> T;      // default fs.T
    std::optional<double> alpha;  // default fs.alpha
    int distanceSamples = 64;
    double singularTol = 1e-11;   // relative pivot threshold
};

struct PeriodicOrbit {
    PhaseState initial;
    double T = 0.0;
    double alpha = 0.0;
    ParadeType pattern;
    double residual = 0.0;       // half-period defect
    double closureDefect = 0.0;  // |R(-alpha) flow(T) z0 - z0|
    double torusDistance = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

PeriodicOrbit shoot_symmetric(const SystemModel& sys, const GeneratingTorus& gt, const SymmetricSeed& seed,
                              const ShootOptions& opt = {});

// Sup over samples and factors of the normalized distance to the circular
// torus: sqrt(((I - I0)/I0)^2 + q^2 + (p/I0)^2).
double torus_distance(const SystemModel& sys, const GeneratingTorus& gt, const PhaseState& x0, double T,
                      int samples = 64, double tol = 1e-12);
// Re-integrates at the given tolerance and returns the closure defect.
double closure_defect(const SystemModel& sys, const PeriodicOrbit& orbit, double tol);

// Succession map A = R(-alpha) o flow(T) in normalized coordinates.
struct SuccessionMapSample {
    Eigen::VectorXd base;    // normalized coordinates, 4 per slot
    Eigen::VectorXd image;
    double psi = 0.0;
};

class SuccessionMap {
public:
    SuccessionMap(const SystemModel& sys, const GeneratingTorus& gt, double T, double alpha, double tol = 1e-12);

    int dim() const { return gt_.layout.dim(); }
    Eigen::VectorXd toCart(const Eigen::VectorXd& n) const;
    Eigen::VectorXd toNormalized(const Eigen::VectorXd& z) const;
    Eigen::MatrixXd toCartJacobian(const Eigen::VectorXd& n) const;
    Eigen::MatrixXd toNormalizedJacobian(const Eigen::VectorXd& z) const;

    // Image of a normalized point; with dir set, also the image of the
    // tangent vectors (columns) in normalized coordinates.
    Eigen::VectorXd apply(const Eigen::VectorXd& n, const Eigen::MatrixXd* dir = nullptr,
                          Eigen::MatrixXd* dimage = nullptr) const;

    // alpha(n) xi = sum_b w_b [(I'-I) dphi + (p'-p) dq + (phi-phi') dI' + (q-q') dp'].
    double form(const Eigen::VectorXd& n, const Eigen::VectorXd& xi) const;
    // Slot weights of the form (1 for planets, the satellite form weight).
    const std::vector<double>& weights() const { return weights_; }

    const SystemModel& system() const { return sys_; }
    const GeneratingTorus& torus() const { return gt_; }
    double T() const { return T_; }
    double alpha() const { return alpha_; }

private:
    const SystemModel& sys_;
    GeneratingTorus gt_;
    double T_;
    double alpha_;
    double tol_;
    std::vector<double> weights_;
};

// Psi along a polyline of normalized points; Psi(first point) = 0. Each
// segment uses Gauss-Legendre quadrature with the given order.
std::vector<SuccessionMapSample> generating_function(const SuccessionMap& A,
                                                     const std::vector<Eigen::VectorXd>& path,
                                                     int order = 8);

// Integral of the form around a closed curve c(s), s in [0, 2 pi), by the
// periodic trapezoid rule; c and its derivative supplied together.
struct LoopCurve {
    Eigen::VectorXd centre;
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double radius = 0.0;
};
double loop_integral(const SuccessionMap& A, const LoopCurve& c, int points = 32);

// Point of the continued torus at fixed angles: the actions and (q, p)
// solve phi' = phi, q' = q, p' = p (angles mod 2 pi).
struct LambdaPoint {
    Eigen::VectorXd n;       // normalized coordinates
    Eigen::VectorXd dI;      // I' - I per slot
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};
LambdaPoint lambda_point(const SuccessionMap& A, const std::vector<double>& angles,
                         const std::optional<Eigen::VectorXd>& guess = std::nullopt, double tol = 1e-11,
                         int maxIterations = 30);

// Psi(phi*) - Psi(-phi*) on the continued torus along the straight path.
struct EvennessResult {
    double difference = 0.0;
    double scale = 0.0;  // sum of |integrand| weights, for context
    int nodes = 0;
};
EvennessResult psi_evenness(const SuccessionMap& A, const std::vector<double>& angles, int order = 16);

struct CriticalPoint {
    std::vector<double> angles;  // full torus angles
    std::vector<double> section; // free section coordinates
    double value = 0.0;          // S-bar relative to the first grid node
    double gradientNorm = 0.0;
    int negative = 0;            // Hessian signature
    int positive = 0;
    int sheet = 0;
    bool symmetric = false;      // angles equal to -angles mod 2 pi
};

struct SectionGridNode {
    std::vector<double> section;
    std::vector<double> angles;
    double value = 0.0;
    std::vector<double> gradient;
    bool ok = false;
};

struct SectionSearchResult {
    std::vector<CriticalPoint> critical;
    std::vector<SectionGridNode> grid;
    int failedNodes = 0;
    int sheets = 1;
};

// Full torus angles on a sheet of the section for the given free angles.
struct SectionChart {
    int b1 = 0;
    int b2 = 1;
    std::vector<int> free;  // slots carrying the free coordinates
    std::vector<int> reduced;  // integers / gcd
    int det = 1;
    std::vector<double> angles(const std::vector<double>& s, int sheet) const;
    // d angles / d s_k
    std::vector<std::vector<double>> tangents() const;
};
SectionChart section_chart(const FrequencySet& fs, const Layout& l);

SectionSearchResult section_search(const SuccessionMap& A, int gridDensity = 12);

} // namespace satorb
