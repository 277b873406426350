#pragma once

#include <Eigen/Dense>
#include <vector>

#include "satorb/params.hpp"

namespace satorb {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// Slot layout of the flat state: planets first (slot i), then satellites
// (i, j) in lexicographic order. Each slot holds [pos_x, pos_y, mom_x, mom_y].
struct Layout {
    std::vector<int> sats;

    Layout() = default;
    explicit Layout(std::vector<int> satellitesPerPlanet) : sats(std::move(satellitesPerPlanet)) {}
    static Layout of(const MassModel& m);
    static Layout of(const FrequencySet& fs);

    int planets() const { return static_cast<int>(sats.size()); }
    int bodies() const;
    int dim() const { return 4 * bodies(); }
    int planetSlot(int i) const { return i; }
    int satSlot(int i, int j) const;
    bool isPlanet(int slot) const { return slot < planets(); }
    int parentOf(int slot) const;  // planet index owning a satellite slot
    int satIndex(int slot) const;  // j of a satellite slot
};

struct PhaseState {
    Layout layout;
    Eigen::VectorXd z;
    double t = 0.0;

    PhaseState() = default;
    explicit PhaseState(Layout l) : layout(std::move(l)), z(Eigen::VectorXd::Zero(layout.dim())) {}

    Vec2 pos(int slot) const { return z.segment<2>(4 * slot); }
    Vec2 mom(int slot) const { return z.segment<2>(4 * slot + 2); }
    void setPos(int slot, const Vec2& v) { z.segment<2>(4 * slot) = v; }
    void setMom(int slot, const Vec2& v) { z.segment<2>(4 * slot + 2) = v; }
    Vec4 block(int slot) const { return z.segment<4>(4 * slot); }
    void setBlock(int slot, const Vec4& b) { z.segment<4>(4 * slot) = b; }
};

// Positions and impulses of N+1 point masses, Sun first, then planets, then
// satellites (i, j) lexicographic.
struct BarycentricConfig {
    std::vector<Vec2> positions;
    std::vector<Vec2> impulses;
    std::vector<double> masses;
};

std::vector<double> body_masses(const MassModel& m);
double kinetic_energy(const BarycentricConfig& c);
double angular_momentum(const std::vector<Vec2>& q, const std::vector<Vec2>& p);
Vec2 centre_of_mass(const BarycentricConfig& c);
Vec2 total_impulse(const BarycentricConfig& c);
double total_energy(const BarycentricConfig& c, double g);

// Poincare transformation with body 0 as the heaviest particle:
// positions (C, r_1 - r_0, ...), impulses (P, p_1 - c_1 P / sum c, ...).
struct PoincareImage {
    std::vector<Vec2> positions;
    std::vector<Vec2> impulses;
};
PoincareImage poincare_forward(const std::vector<Vec2>& r, const std::vector<Vec2>& p,
                               const std::vector<double>& c);
PoincareImage poincare_inverse(const std::vector<Vec2>& rt, const std::vector<Vec2>& pt,
                               const std::vector<double>& c);
// Kinetic energy written in transformed impulses, two equivalent layouts.
double kinetic_form_sum(const std::vector<Vec2>& pt, const std::vector<double>& c);
double kinetic_form_reduced(const std::vector<Vec2>& pt, const std::vector<double>& c);

PhaseState to_relative(const BarycentricConfig& c, const MassModel& m, const ScaleParameters& s);
BarycentricConfig from_relative(const PhaseState& x, const MassModel& m, const ScaleParameters& s);

// Kepler factor H = p^2/(2m) - k m/|q|.
struct KeplerFactor {
    double k = 1.0;
    double m = 1.0;
};

struct NormalizedKepler {
    double phi = 0.0;
    double I = 0.0;
    double q = 0.0;
    double p = 0.0;
};

struct PolarKepler {
    double psi = 0.0;
    double pPsi = 0.0;
    double r = 0.0;
    double pR = 0.0;
};

NormalizedKepler kepler_normalize(double psi, double pPsi, double r, double pR, double k, double m);
PolarKepler kepler_denormalize(const NormalizedKepler& n, double k, double m);
double kepler_energy(const NormalizedKepler& n, double k, double m);
// Second derivatives in (I, q, p); phi is cyclic.
Eigen::Matrix3d kepler_energy_hessian(const NormalizedKepler& n, double k, double m);

// Cartesian block [x, y, px, py] <-> (phi, I, q, p). phi is the principal
// value in (-pi, pi]; callers unwrap when they need continuous lifts.
Vec4 cart_to_kepler(const Vec4& b, const KeplerFactor& f);
Vec4 kepler_to_cart(const Vec4& n, const KeplerFactor& f);
Mat4 cart_to_kepler_jacobian(const Vec4& b, const KeplerFactor& f);
Mat4 kepler_to_cart_jacobian(const Vec4& n, const KeplerFactor& f);

enum class Involution { Sl, S, J };

NormalizedKepler apply_involution(Involution w, const NormalizedKepler& n);
// Reflection across the line through the origin at axisAngle, time reversal,
// and their composition.
PhaseState apply_involution(Involution w, const PhaseState& x, double axisAngle = 0.0);
Eigen::MatrixXd involution_matrix(Involution w, const Layout& l, double axisAngle = 0.0);

PhaseState rotate(const PhaseState& x, double angle);
Eigen::MatrixXd rotation_matrix(const Layout& l, double angle);

} // namespace satorb
