#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "satorb/coords.hpp"
#include "satorb/params.hpp"

namespace satorb {

double newton_potential(const BarycentricConfig& c, double g);

// Hill potential F(x, y) = (x^2 y^2 - 3<x,y>^2) / (2|x|^5).
double hill_F(const Vec2& x, const Vec2& y);
Vec2 hill_F_grad_y(const Vec2& x, const Vec2& y);

// F_{0,rho}: the rho^2 coefficient remainder of -1/|x + rho y|, i.e.
// 1/|x + rho y| = 1/|x| - rho <x,y>/|x|^3 - rho^2 F_{0,rho}(x, y).
// The rationalized form stays accurate for rho -> 0 and any sign of rho.
double hill_F0_stable(const Vec2& x, const Vec2& y, double rho);

struct SeriesResult {
    double value = 0.0;
    double bound = 0.0;  // rigorous bound on the neglected tail
    int terms = 0;
};
// Legendre expansion, truncated once the tail bound drops below relTol*|value|.
SeriesResult hill_F0_series(const Vec2& x, const Vec2& y, double rho, double relTol = 1e-16);

enum class PotentialMethod { Auto, ClosedForm, Series, Stable };

// Generalized Hill potential F_{theta,rho}. Auto takes the closed
// difference form when rho|y|/|x| >= 0.05 and the series otherwise.
double hill_F_general(const Vec2& x, const Vec2& y, double theta, double rho,
                      PotentialMethod method = PotentialMethod::Auto);

Vec2 delta_vector(int i, const PhaseState& s, const MassModel& m);

// One summand c * F_{0,sigma}(X, Y) where X and Y are linear combinations of
// slot positions: X = sum w x_slot, Y = sum w y_slot.
struct KernelTerm {
    double coeff = 0.0;
    double sigma = 0.0;
    std::vector<std::pair<int, double>> X;
    std::vector<std::pair<int, double>> Y;
};

// Exact decomposition of the perturbation potential into kernel terms.
std::vector<KernelTerm> perturbation_terms(const Layout& l, const MassModel& m, double rho);

double kernel_value(const KernelTerm& t, const Eigen::VectorXd& z);
// Accumulates c * grad (into g) and optionally c * Hessian (into H) with
// respect to the flat state z; momentum slots receive nothing.
void kernel_derivatives(const KernelTerm& t, const Eigen::VectorXd& z, Eigen::VectorXd& g,
                        Eigen::MatrixXd* H = nullptr, double scale = 1.0);

// Phi_i evaluated at an arbitrary planet argument x, satellites ys of planet i.
double phi_i(const Vec2& x, const std::vector<Vec2>& ys, double mi, const std::vector<double>& mij,
             double nu, double rho, PotentialMethod method = PotentialMethod::Stable);
// Phi_ii' with X = x_i - x_i'.
double phi_ii(const Vec2& X, const std::vector<Vec2>& ys, const std::vector<Vec2>& ys2, double mi,
              const std::vector<double>& mij, double mi2, const std::vector<double>& mij2, double nu,
              double rho, PotentialMethod method = PotentialMethod::Stable);

// Analyticity region of the perturbation potential; throws DomainError
// naming the violated bound.
void check_analyticity(const PhaseState& s, const MassModel& m, const ScaleParameters& sc);

double perturbation_potential(const PhaseState& s, const MassModel& m, const ScaleParameters& sc,
                              PotentialMethod method = PotentialMethod::Stable);
Eigen::VectorXd perturbation_gradient(const PhaseState& s, const MassModel& m, const ScaleParameters& sc);

// Limit nu = rho = 0: Hill potentials only.
double perturbation_limit(const PhaseState& s, const MassModel& m, double mu);

struct PotentialContext {
    MassModel model;
    ScaleParameters scales;

    double Phi(const PhaseState& s, PotentialMethod method = PotentialMethod::Stable) const {
        return perturbation_potential(s, model, scales, method);
    }
    Vec2 delta(int i, const PhaseState& s) const { return delta_vector(i, s, model); }
};

} // namespace satorb
