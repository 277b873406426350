#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "satorb/coords.hpp"
#include "satorb/params.hpp"
#include "satorb/potentials.hpp"

namespace satorb {

enum class SystemKind { Full, Unperturbed, Model, ThreeBody, Hill };

std::string to_string(SystemKind k);
SystemKind system_kind_from_string(const std::string& s);

// Attraction -c/|z_a - z_b| (b = -1 means the origin).
struct NewtonTerm {
    int a = 0;
    int b = -1;
    double c = 0.0;
};

// H = S + w F1 with form d xi ^ dx + w d eta ^ dy.
// S depends on planet slots only; F1 holds the satellite Kepler parts, the
// satellite pair couplings and the tidal kernel terms.
struct SystemModel {
    SystemKind kind = SystemKind::Model;
    Layout layout;
    double omega = 0.0;
    double w = 0.0;            // form weight of the satellite blocks
    double backReaction = 0.0; // multiplier of dF1/dx in the planet equations
    Eigen::MatrixXd A;         // planet kinetic matrix: S_kin = 1/2 sum A_ab <xi_a, xi_b>
    Eigen::MatrixXd B;         // satellite kinetic matrix over satellite indices
    std::vector<NewtonTerm> slowNewton;
    std::vector<NewtonTerm> fastNewton;
    std::vector<KernelTerm> kernels;
    std::vector<KeplerFactor> factors;  // per slot
    std::vector<double> timeScale;      // per slot: omega for planets, 1 for satellites
    double guard = 1e-6;                // collision guard radius

    int dim() const { return layout.dim(); }

    double slowEnergy(const Eigen::VectorXd& z) const;  // S
    double fastEnergy(const Eigen::VectorXd& z) const;  // F1
    double kernelEnergy(const Eigen::VectorXd& z) const;
    double hamiltonian(const Eigen::VectorXd& z) const { return slowEnergy(z) + w * fastEnergy(z); }
    double angularMomentum(const Eigen::VectorXd& z) const;  // I_0 + w I_1
    double rotatingEnergy(const Eigen::VectorXd& z, double omega1) const {
        return hamiltonian(z) - omega1 * angularMomentum(z);
    }

    Eigen::VectorXd field(const Eigen::VectorXd& z) const;
    void field(const double* z, double* out) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const;

    // Symplectic form matrix Omega with omega(u, v) = u^T Omega v.
    Eigen::MatrixXd formMatrix(double weight) const;
    Eigen::MatrixXd formMatrix() const { return formMatrix(w); }
    // Gradient of H and of the angular momentum with respect to z.
    Eigen::VectorXd gradH(const Eigen::VectorXd& z) const;
    Eigen::VectorXd gradI(const Eigen::VectorXd& z) const;
    Eigen::VectorXd rotationField(const Eigen::VectorXd& z) const;  // d/dangle of the rigid rotation

private:
    void gradients(const Eigen::VectorXd& z, Eigen::VectorXd& gS, Eigen::VectorXd& gF, Eigen::MatrixXd* HS,
                   Eigen::MatrixXd* HF) const;
};

SystemModel make_full(const MassModel& m, const ScaleParameters& s);
// Decoupled Kepler factors with the same masses as the full system.
SystemModel make_model(const MassModel& m, double omega);
// Model system plus the tidal Hill forcing of each satellite by its planet,
// without back-reaction on the planets.
SystemModel make_unperturbed(const MassModel& m, double omega);
// Sun, planet and one satellite, theta = satellite mass fraction of the pair.
SystemModel make_threebody(double theta, double m, double mu, double omega);
SystemModel make_hill(double m, double omega);

// Each body on its circular Kepler orbit with the angular velocity from fs,
// at the given polar angles (one per slot).
PhaseState circular_state(const SystemModel& sys, const FrequencySet& fs, const std::vector<double>& angles,
                          double t = 0.0);
// Radius and angular momentum of the circular orbit of a factor.
struct CircularOrbit {
    double r = 0.0;
    double I = 0.0;
};
CircularOrbit circular_orbit(const KeplerFactor& f, double Omega);
// Frequency of body slot b taken from fs (planet factors use Omega[i][0]).
double slot_frequency(const Layout& l, const FrequencySet& fs, int slot);

struct IntegrationOptions {
    double tol = 1e-12;
    bool recordSteps = false;
    double firstStep = 1e-3;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> z;
    double energyDrift = 0.0;    // relative
    double momentumDrift = 0.0;  // relative
};

// Integrate from state.t to tEnd (backwards if tEnd < state.t).
Trajectory integrate(const SystemModel& sys, const PhaseState& state, double tEnd,
                     const IntegrationOptions& opt = {});
PhaseState flow(const SystemModel& sys, const PhaseState& state, double tEnd, double tol = 1e-12);
// Sampled states at the requested times (ascending or descending).
std::vector<Eigen::VectorXd> sample(const SystemModel& sys, const PhaseState& state,
                                    const std::vector<double>& times, double tol = 1e-12);

struct TangentState {
    PhaseState base;
    Eigen::MatrixXd deviation;  // dim x k
};

TangentState integrate_with_tangent(const SystemModel& sys, const TangentState& ts, double tEnd,
                                    double tol = 1e-12);

double rotating_energy(const SystemModel& sys, const PhaseState& s, double omega1);

} // namespace satorb
