#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

namespace satorb {

// Prefactor in front of the c_kappa integral. Radius (r_kappa / pi) reproduces
// the tabulated c_kappa/kappa^2 values; SqrtRadius (sqrt(r_kappa) / pi) is the
// alternative normalization whose 1/kappa correction matches the asymptotic
// expansion.
enum class CkPrefactor { Radius, SqrtRadius };

double r_kappa(double kappa);
// Integrand g_kappa(t) of the c_kappa integral (without prefactor).
double c_kappa_integrand(double kappa, double t);
double c_kappa(int kappa, double tol = 1e-13, CkPrefactor pref = CkPrefactor::Radius);
// Extended to real kappa: zero unless kappa is an integer outside {-1, 0}.
double c_kappa_ext(double kappa, double tol = 1e-13, CkPrefactor pref = CkPrefactor::Radius);

struct AsymptoticConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double tailBound = 0.0;
};
AsymptoticConstants asymptotic_constants(double tol = 1e-12);
// Closed forms through modified Bessel functions: C1 = 6 K_1(2/3)/pi,
// C2 = 3 K_2(2/3)/(2 pi).
AsymptoticConstants asymptotic_constants_bessel();

struct AveragingCoefficients {
    std::map<int, double> cTable;
    double asymC1 = 0.0;
    double asymC2 = 0.0;
};
AveragingCoefficients coefficient_table(int kMin, int kMax, double tol = 1e-13,
                                        CkPrefactor pref = CkPrefactor::Radius);

// kappa_ii' = w_i / (w_i' - w_i).
double kappa_pair(double wi, double wj);
Eigen::MatrixXd kappa_matrix(const std::vector<double>& w);

struct UnclosingReport {
    Eigen::MatrixXd kappaMatrix;
    std::vector<std::complex<double>> fValues;  // f_l at the probed phase point
    bool unclosing = false;                     // some |f_l| above tolerance at that point
    bool inM = false;
    bool inMsym = false;
    bool undecided = false;  // inM search ended in the grey band
    double minResidual = 0.0;
    std::vector<std::vector<double>> witnesses;  // phase points where all f_l vanish
    std::vector<std::vector<double>> symmetricClosing;
};

std::vector<std::complex<double>> unclosing_f(const std::vector<double>& masses, const std::vector<double>& w,
                                              const std::vector<double>& phi);
double unclosing_tolerance(const std::vector<double>& masses, const std::vector<double>& w);
UnclosingReport unclosing_test(const std::vector<double>& masses, const std::vector<double>& w,
                               const std::vector<double>& phi);
UnclosingReport classify_masses(const std::vector<double>& masses, const std::vector<double>& w,
                                int gridDensity = 8);

struct AveragedHillData {
    Eigen::Vector2d gradient = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();  // in (q, p)
    double delta = 0.0;
    int etaSign = 0;
    Eigen::Matrix2d hessianClosedForm = Eigen::Matrix2d::Zero();
    double deltaClosedForm = 0.0;
    double value = 0.0;  // <F> at the circular orbit
};

// Satellite (unit mass) on the level of its circular orbit with action I and
// frequency OmegaSat, planet frozen at (xRadius, 0). Section phi = 0.
double averaged_hill_value(double I, double OmegaSat, double xRadius, double q, double p, double phase = 0.0);
AveragedHillData averaged_hill(double I, double OmegaSat, double OmegaPlanet, double xRadius);

// Differential of the averaged planet interaction on the generating torus,
// per planet (coefficient of dq_i, coefficient of dp_i / I_i).
struct PlanetCovector {
    std::vector<Eigen::Vector2d> coeff;
    double norm() const;
};
PlanetCovector averaged_R0_differential(const std::vector<double>& phi, const std::vector<double>& mbar,
                                        const std::vector<double>& w, const std::vector<double>& r,
                                        CkPrefactor pref = CkPrefactor::Radius);
// Independent evaluation: time average of the pair differential along the
// linearized model flow.
PlanetCovector averaged_R0_numeric(const std::vector<double>& phi, const std::vector<double>& mbar,
                                   const std::vector<double>& w, const std::vector<double>& r,
                                   const std::vector<double>& I, int samplesPerTurn = 4096);

} // namespace satorb
