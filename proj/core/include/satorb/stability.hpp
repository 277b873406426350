#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "satorb/dynamics.hpp"
#include "satorb/periodic.hpp"

namespace satorb {

struct Classification {
    bool OSSL = false;  // reduced operator structurally stable
    bool OSL = false;   // operator on the transversal surface stable
    bool OSLI = false;  // reduced operator stable
    bool IN = false;    // 1 outside the reduced spectrum
    bool undecided = false;
    double conditionNumber = 0.0;  // eigenvector matrix of the reduced operator
    double unitMargin = 0.0;       // max | |lambda| - 1 |
    double ellipticMargin = 0.0;   // min |eigenvalue of the Hermitian form| (signed definiteness gap)
    double inMargin = 0.0;         // min |lambda - 1|
    bool implicationsHold = true;  // OSSL => IN and OSSL => OSL
    std::vector<bool> ellipticFlags;
};

struct MonodromyReport {
    std::string frame = "cartesian";
    Eigen::MatrixXd matrix;          // d(R(-alpha) o flow(T)) at the orbit point
    Eigen::MatrixXd form;            // symplectic form used, omega(u, v) = u^T form v
    double formWeight = 0.0;
    double symplecticDefect = 0.0;   // |M^T W M - W| / |W|
    double determinant = 0.0;
    std::vector<std::complex<double>> eigenvalues;

    Eigen::MatrixXd reducedMatrix;   // (d - 4) x (d - 4)
    Eigen::MatrixXd reducedForm;
    double reducedSymplecticDefect = 0.0;
    std::vector<std::complex<double>> reducedEigenvalues;
    Eigen::MatrixXd transversalMatrix;  // (d - 2) x (d - 2), operator on the transversal surface
    Eigen::MatrixXd transversalForm;
    bool reduced = false;

    std::vector<double> blockAngles;  // fitted alpha per factor (normalized frames)
    Classification classification;
};

// Eigen-decomposition helpers.
std::vector<std::complex<double>> eigenvalues_of(const Eigen::MatrixXd& M);
// max over lambda of min over mu of |lambda * mu - 1| (reciprocal pairing).
double reciprocal_pairing_defect(const std::vector<std::complex<double>>& ev);

// Form weight used for kinds without a satellite form weight.
double stability_form_weight(const SystemModel& sys);

MonodromyReport monodromy(const SystemModel& sys, const PeriodicOrbit& orbit, double tol = 1e-12);
// Fills the reduced part; throws DomainError when dH and dI are dependent or
// the kind has no Hamiltonian satellite form.
void reduced_monodromy(const SystemModel& sys, const PeriodicOrbit& orbit, MonodromyReport& report);

// Stability flags of a symplectic operator with respect to a form.
struct OperatorStability {
    bool stable = false;
    bool structurallyStable = false;
    bool undecided = false;
    double conditionNumber = 0.0;
    double unitMargin = 0.0;
    double ellipticMargin = 0.0;
    double oneDistance = 0.0;
    std::vector<bool> elliptic;
};
OperatorStability operator_stability(const Eigen::MatrixXd& M, const Eigen::MatrixXd& form, double tolUnit = 1e-6,
                                     double condMax = 1e8);

Classification classify(const MonodromyReport& report, double tolUnit = 1e-6, double condMax = 1e8);

struct FactorFrame {
    Eigen::Matrix4d E;      // columns e1..e4 in scaled normalized coordinates
    double deviation = 0.0; // max distance from (d/dphi, d/dI, d/dq, d/dp)
    double shear = 0.0;
    double angle = 0.0;
    bool ok = false;
};

struct BlockStructureReport {
    Eigen::MatrixXd normalizedMonodromy;  // scaled normalized coordinates per factor
    double offStructure = 0.0;            // largest forbidden coupling
    double offTolerance = 0.0;            // omega
    std::vector<double> fittedAngles;
    std::vector<double> predictedAngles;
    std::vector<double> angleDefects;
    std::vector<int> eta;
    std::vector<double> delta;            // per slot, 0 for planets
    double planetAngleDefect = 0.0;
    double planetBlockDefect = 0.0;       // planet diagonal blocks vs the displayed form
    double satelliteAngleDefect = 0.0;
    double satelliteWindow = 0.0;         // C2 omega^3 T
    double satelliteFrameDeviation = 0.0; // fitted frames vs coordinate frames
    std::vector<FactorFrame> frames;
    bool symmetric = false;
    double reversibilityDefect = 0.0;     // |dJ M dJ M - 1|
    double jFrameDefect = 0.0;            // dJ vs diag(-1, 1, 1, -1) per factor
    bool offStructureOk = false;
    bool planetAnglesOk = false;
    bool satelliteAnglesOk = false;
    bool passes() const { return offStructureOk && planetAnglesOk && satelliteAnglesOk; }
};

// Per-satellite Delta defaults to numerical averaging of the Hill potential.
BlockStructureReport block_structure_check(const SystemModel& sys, const GeneratingTorus& gt,
                                           const PeriodicOrbit& orbit, double C2 = 1.0,
                                           const std::optional<std::vector<double>>& delta = std::nullopt,
                                           double tol = 1e-12);

} // namespace satorb
