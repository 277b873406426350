#include "satorb/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "satorb/averaging.hpp"

namespace satorb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

using CMat = Eigen::MatrixXcd;
using cd = std::complex<double>;

double rel_defect(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W) {
    return (M.transpose() * W * M - W).norm() / std::max(W.norm(), 1e-300);
}

// omega(u, v) = (u_I v_phi - u_phi v_I) + (u_p v_q - u_q v_p) on one factor.
double factor_form(const Eigen::Vector4d& u, const Eigen::Vector4d& v) {
    return (u[1] * v[0] - u[0] * v[1]) + (u[3] * v[2] - u[2] * v[3]);
}

// Canonical frame of a symplectic 4x4 block with spectrum {1, 1, e^(+-i a)}:
// e1 spans the fixed line, e2 completes the shear pair, (e3, e4) span the
// rotation plane with e3 aligned to d/dq.
FactorFrame fit_frame(const Eigen::Matrix4d& B) {
    FactorFrame f;
    Eigen::EigenSolver<Eigen::Matrix4d> es(B);
    if (es.info() != Eigen::Success) return f;
    const auto vals = es.eigenvalues();
    int k = 0;
    for (int i = 1; i < 4; ++i)
        if (std::abs(vals[i] - 1.0) > std::abs(vals[k] - 1.0)) k = i;
    if (std::abs(vals[k].imag()) < 1e-12) return f;  // angle 0 or pi: no rotation plane
    const Eigen::Vector4cd v = es.eigenvectors().col(k);
    Eigen::Vector4d a = v.real();
    Eigen::Vector4d b = v.imag();
    double s = factor_form(b, a);
    if (s < 0) {
        b = -b;
        s = -s;
    }
    a /= std::sqrt(s);
    b /= std::sqrt(s);
    const double psi = std::atan2(b[2], a[2]);
    const Eigen::Vector4d e3 = std::cos(psi) * a + std::sin(psi) * b;
    const Eigen::Vector4d e4 = -std::sin(psi) * a + std::cos(psi) * b;

    const Eigen::Matrix4d Bm = B - Eigen::Matrix4d::Identity();
    Eigen::JacobiSVD<Eigen::Matrix4d> svd2(Bm * Bm, Eigen::ComputeFullV);
    const Eigen::Matrix<double, 4, 2> U = svd2.matrixV().rightCols<2>();
    Eigen::JacobiSVD<Eigen::Matrix<double, 4, 2>> svd1(Bm * U, Eigen::ComputeFullV);
    Eigen::Vector4d e1 = U * svd1.matrixV().col(1);
    if (std::abs(e1[0]) < 1e-12) return f;
    e1 /= e1[0];
    Eigen::Matrix2d C;
    C << factor_form(U.col(0), e1), factor_form(U.col(1), e1), U(0, 0), U(0, 1);
    const Eigen::Vector2d y = C.fullPivLu().solve(Eigen::Vector2d(1.0, 0.0));
    const Eigen::Vector4d e2 = U * y;

    f.E.col(0) = e1;
    f.E.col(1) = e2;
    f.E.col(2) = e3;
    f.E.col(3) = e4;
    const Eigen::Matrix4d K = f.E.fullPivLu().solve(B * f.E);
    f.shear = K(0, 1);
    f.angle = std::atan2(K(2, 3), K(2, 2));
    f.deviation = (f.E - Eigen::Matrix4d::Identity()).colwise().norm().maxCoeff();
    f.ok = f.E.allFinite();
    return f;
}

} // namespace

std::vector<cd> eigenvalues_of(const Eigen::MatrixXd& M) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    if (es.info() != Eigen::Success) throw DomainError("eigenvalue computation failed");
    std::vector<cd> out(es.eigenvalues().data(), es.eigenvalues().data() + M.rows());
    std::sort(out.begin(), out.end(), [](cd a, cd b) {
        return std::arg(a) != std::arg(b) ? std::arg(a) < std::arg(b) : std::abs(a) < std::abs(b);
    });
    return out;
}

double reciprocal_pairing_defect(const std::vector<cd>& ev) {
    double worst = 0.0;
    for (const cd& l : ev) {
        double best = 1e300;
        for (const cd& m : ev) best = std::min(best, std::abs(l * m - 1.0));
        worst = std::max(worst, best);
    }
    return worst;
}

double stability_form_weight(const SystemModel& sys) { return sys.w != 0.0 ? sys.w : 1.0; }

MonodromyReport monodromy(const SystemModel& sys, const PeriodicOrbit& orbit, double tol) {
    const int d = sys.dim();
    MonodromyReport r;
    const TangentState ts =
        integrate_with_tangent(sys, {orbit.initial, Eigen::MatrixXd::Identity(d, d)}, orbit.initial.t + orbit.T, tol);
    r.matrix = rotation_matrix(sys.layout, -orbit.alpha) * ts.deviation;
    r.formWeight = stability_form_weight(sys);
    r.form = sys.formMatrix(r.formWeight);
    r.symplecticDefect = rel_defect(r.matrix, r.form);
    r.determinant = r.matrix.determinant();
    r.eigenvalues = eigenvalues_of(r.matrix);

    // Fitted rotation angle per factor in scaled normalized coordinates.
    const Eigen::VectorXd& z0 = orbit.initial.z;
    for (int b = 0; b < sys.layout.bodies(); ++b) {
        const Vec4 blk = z0.segment<4>(4 * b);
        const Vec4 n = cart_to_kepler(blk, sys.factors[b]);
        const double s = std::sqrt(std::abs(n[1]));
        const Eigen::Vector4d D(1.0, 1.0, s, 1.0 / s);
        const Eigen::Matrix4d Bn = cart_to_kepler_jacobian(blk, sys.factors[b]) *
                                   r.matrix.block<4, 4>(4 * b, 4 * b) * kepler_to_cart_jacobian(n, sys.factors[b]);
        const Eigen::Matrix4d Bs = D.asDiagonal() * Bn * D.cwiseInverse().asDiagonal();
        const FactorFrame f = fit_frame(Bs);
        r.blockAngles.push_back(f.ok ? f.angle : std::atan2(Bs(2, 3), Bs(2, 2)));
    }
    return r;
}

void reduced_monodromy(const SystemModel& sys, const PeriodicOrbit& orbit, MonodromyReport& r) {
    if (sys.w == 0.0)
        throw DomainError("reduction needs a Hamiltonian kind; " + to_string(sys.kind) +
                          " has no satellite form weight");
    const int d = sys.dim();
    const Eigen::VectorXd& z0 = orbit.initial.z;
    const Eigen::VectorXd gH = sys.gradH(z0);
    const Eigen::VectorXd gI = sys.gradI(z0);
    Eigen::MatrixXd G(d, 2);
    G << gH, gI;
    const Eigen::JacobiSVD<Eigen::MatrixXd> sg(G);
    if (sg.singularValues()[1] <= 1e-10 * sg.singularValues()[0])
        throw DomainError("dH and dI are linearly dependent at the orbit point");

    Eigen::MatrixXd V(d, 2);
    V << sys.field(z0), sys.rotationField(z0);
    // Orthonormal basis of ker dH and ker dI.
    Eigen::JacobiSVD<Eigen::MatrixXd> sk(G.transpose(), Eigen::ComputeFullV);
    const Eigen::MatrixXd Wb = sk.matrixV().rightCols(d - 2);
    const Eigen::MatrixXd Vw = Wb.transpose() * V;
    if ((Wb * Vw - V).norm() > 1e-6 * V.norm())
        throw DomainError("flow and rotation directions leave the common level of H and I");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Vw);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d - 2, d - 2);
    const Eigen::MatrixXd C = Wb * Q.rightCols(d - 4);

    Eigen::MatrixXd E(d, d);
    E << V, C, G;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
    if (!lu.isInvertible()) throw DomainError("reduction basis is singular");
    const Eigen::MatrixXd X = lu.solve(r.matrix * E);

    r.reducedMatrix = X.block(2, 2, d - 4, d - 4);
    r.reducedForm = C.transpose() * r.form * C;
    r.reducedSymplecticDefect = rel_defect(r.reducedMatrix, r.reducedForm);
    r.reducedEigenvalues = eigenvalues_of(r.reducedMatrix);
    r.transversalMatrix = X.block(2, 2, d - 2, d - 2);
    const Eigen::MatrixXd CG = E.rightCols(d - 2);
    r.transversalForm = CG.transpose() * r.form * CG;
    r.reduced = true;
}

OperatorStability operator_stability(const Eigen::MatrixXd& M, const Eigen::MatrixXd& form, double tolUnit,
                                     double condMax) {
    OperatorStability s;
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) {
        s.undecided = true;
        return s;
    }
    const Eigen::VectorXcd vals = es.eigenvalues();
    const CMat vecs = es.eigenvectors();
    const int n = static_cast<int>(vals.size());
    const Eigen::JacobiSVD<CMat> sv(vecs);
    const double smin = sv.singularValues()[n - 1];
    s.conditionNumber = smin > 0 ? sv.singularValues()[0] / smin : 1e300;
    s.oneDistance = 1e300;
    for (int i = 0; i < n; ++i) {
        s.unitMargin = std::max(s.unitMargin, std::abs(std::abs(vals[i]) - 1.0));
        s.oneDistance = std::min(s.oneDistance, std::abs(vals[i] - 1.0));
    }
    const bool onCircle = s.unitMargin <= tolUnit;
    s.stable = onCircle && s.conditionNumber < condMax;
    s.undecided = onCircle && !s.stable;

    // Clusters of nearby eigenvalues share one eigenspace.
    const double clusterTol = 1e-5;
    std::vector<int> cluster(n, -1);
    int nc = 0;
    for (int i = 0; i < n; ++i) {
        if (cluster[i] >= 0) continue;
        cluster[i] = nc;
        for (int j = i + 1; j < n; ++j)
            if (cluster[j] < 0 && std::abs(vals[j] - vals[i]) < clusterTol) cluster[j] = nc;
        ++nc;
    }
    s.elliptic.assign(n, false);
    s.ellipticMargin = 1e300;
    const CMat Fc = form.cast<cd>();
    const double fscale = std::max(form.norm(), 1e-300);
    for (int c = 0; c < nc; ++c) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (cluster[i] == c) idx.push_back(i);
        CMat Vc(n, idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) Vc.col(k) = vecs.col(idx[k]);
        const CMat H = (Vc.transpose() * Fc * Vc.conjugate()) / cd(0.0, 2.0);
        const CMat Hs = 0.5 * (H + H.adjoint());
        const Eigen::VectorXd he = Eigen::SelfAdjointEigenSolver<CMat>(Hs).eigenvalues();
        const double lo = he.minCoeff();
        const double hi = he.maxCoeff();
        const bool definite = (lo > 0.0 || hi < 0.0);
        const double gap = definite ? std::min(std::abs(lo), std::abs(hi)) / fscale : 0.0;
        const bool unit = std::abs(std::abs(vals[idx[0]]) - 1.0) <= tolUnit;
        const bool ell = unit && definite && gap > 1e-9;
        s.ellipticMargin = std::min(s.ellipticMargin, ell ? gap : -gap);
        for (int i : idx) s.elliptic[i] = ell;
    }
    s.structurallyStable = std::all_of(s.elliptic.begin(), s.elliptic.end(), [](bool b) { return b; });
    return s;
}

Classification classify(const MonodromyReport& r, double tolUnit, double condMax) {
    Classification c;
    if (!r.reduced) {
        c.undecided = true;
        return c;
    }
    const OperatorStability red = operator_stability(r.reducedMatrix, r.reducedForm, tolUnit, condMax);
    c.OSLI = red.stable;
    c.OSSL = red.structurallyStable;
    c.IN = red.oneDistance > tolUnit;
    c.undecided = red.undecided;
    c.conditionNumber = red.conditionNumber;
    c.unitMargin = red.unitMargin;
    c.ellipticMargin = red.ellipticMargin;
    c.inMargin = red.oneDistance;
    c.ellipticFlags = red.elliptic;
    const int d2 = static_cast<int>(r.transversalMatrix.rows());
    if (d2 > 0) {
        const OperatorStability tr = operator_stability(r.transversalMatrix, r.transversalForm, tolUnit, condMax);
        c.OSL = tr.stable;
    }
    if (c.OSSL && !c.IN) c.implicationsHold = false;
    if (c.OSSL && !c.OSL) c.implicationsHold = false;
    return c;
}

BlockStructureReport block_structure_check(const SystemModel& sys, const GeneratingTorus& gt,
                                           const PeriodicOrbit& orbit, double C2,
                                           const std::optional<std::vector<double>>& delta, double tol) {
    if (sys.kind != SystemKind::Unperturbed) throw ParameterError("block structure check needs the UNPERTURBED kind");
    const Layout& l = sys.layout;
    const int N = l.bodies();
    const int d = 4 * N;
    const double omega = sys.omega;
    const double T = orbit.T;
    const double alpha = orbit.alpha;
    BlockStructureReport rep;

    const TangentState ts =
        integrate_with_tangent(sys, {orbit.initial, Eigen::MatrixXd::Identity(d, d)}, orbit.initial.t + T, tol);
    const Eigen::MatrixXd M = rotation_matrix(l, -alpha) * ts.deviation;
    const Eigen::VectorXd& z0 = orbit.initial.z;

    Eigen::MatrixXd Jk = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd Jc = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd D(d);
    std::vector<Vec4> n0(N);
    for (int b = 0; b < N; ++b) {
        const Vec4 blk = z0.segment<4>(4 * b);
        n0[b] = cart_to_kepler(blk, sys.factors[b]);
        Jk.block<4, 4>(4 * b, 4 * b) = cart_to_kepler_jacobian(blk, sys.factors[b]);
        Jc.block<4, 4>(4 * b, 4 * b) = kepler_to_cart_jacobian(n0[b], sys.factors[b]);
        const double s = std::sqrt(std::abs(n0[b][1]));
        D.segment<4>(4 * b) << 1.0, 1.0, s, 1.0 / s;
    }
    const Eigen::MatrixXd Mn = D.asDiagonal() * (Jk * M * Jc) * D.cwiseInverse().asDiagonal();
    rep.normalizedMonodromy = Mn;

    // (i) forbidden couplings
    rep.offTolerance = omega;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            if (a == b) continue;
            if (!l.isPlanet(a) && l.isPlanet(b) && l.parentOf(a) == b) continue;
            rep.offStructure = std::max(rep.offStructure, Mn.block<4, 4>(4 * a, 4 * b).cwiseAbs().maxCoeff());
        }
    rep.offStructureOk = rep.offStructure < rep.offTolerance;

    // (ii), (iii) diagonal blocks
    rep.satelliteWindow = C2 * omega * omega * omega * T;
    for (int b = 0; b < N; ++b) {
        const int i = l.parentOf(b);
        const double Om = slot_frequency(l, gt.fs, b);
        const int eta = Om > 0 ? 1 : -1;
        rep.eta.push_back(eta);
        const Eigen::Matrix4d B = Mn.block<4, 4>(4 * b, 4 * b);
        const FactorFrame f = fit_frame(B);
        rep.frames.push_back(f);
        if (l.isPlanet(b)) {
            const double fitted = std::atan2(B(2, 3), B(2, 2));
            rep.fittedAngles.push_back(fitted);
            rep.predictedAngles.push_back(eta * alpha);
            rep.delta.push_back(0.0);
            const double def = std::abs(std::remainder(fitted - eta * alpha, kTwoPi));
            rep.angleDefects.push_back(def);
            rep.planetAngleDefect = std::max(rep.planetAngleDefect, def);
            const KeplerFactor& kf = sys.factors[b];
            const double I = n0[b][1];
            const double shear = sys.timeScale[b] * T * (-3.0 * kf.k * kf.k * kf.m * kf.m * kf.m / std::pow(I, 4));
            Eigen::Matrix4d expect = Eigen::Matrix4d::Identity();
            expect(0, 1) = shear;
            expect(2, 2) = expect(3, 3) = std::cos(fitted);
            expect(2, 3) = std::sin(fitted);
            expect(3, 2) = -std::sin(fitted);
            rep.planetBlockDefect =
                std::max(rep.planetBlockDefect, (B - expect).cwiseAbs().maxCoeff() / std::max(1.0, std::abs(shear)));
        } else {
            double Dij;
            if (delta) {
                Dij = (*delta).at(b - l.planets());
            } else {
                const double rx = std::pow(std::abs(gt.fs.Omega[i][0]), -2.0 / 3.0);
                Dij = averaged_hill(Om > 0 ? 1.0 : -1.0, Om, gt.fs.Omega[i][0], rx).delta;
            }
            rep.delta.push_back(Dij);
            const double fitted = f.ok ? f.angle : std::atan2(B(2, 3), B(2, 2));
            const double pred = eta * (alpha + Dij * omega * omega * T);
            rep.fittedAngles.push_back(fitted);
            rep.predictedAngles.push_back(pred);
            const double def = std::abs(std::remainder(fitted - pred, kTwoPi));
            rep.angleDefects.push_back(def);
            rep.satelliteAngleDefect = std::max(rep.satelliteAngleDefect, def);
            rep.satelliteFrameDeviation = std::max(rep.satelliteFrameDeviation, f.ok ? f.deviation : 1e300);
        }
    }
    rep.planetAnglesOk = rep.planetAngleDefect < 1e-8;
    rep.satelliteAnglesOk = rep.satelliteAngleDefect <= rep.satelliteWindow;

    // Reversibility of the linearization and the involution frame.
    const Eigen::MatrixXd dJ = involution_matrix(Involution::J, l, 0.0);
    const PhaseState jz = apply_involution(Involution::J, orbit.initial, 0.0);
    rep.symmetric = (jz.z - z0).norm() < 1e-8 * std::max(1.0, z0.norm());
    if (rep.symmetric) {
        rep.reversibilityDefect = (dJ * M * dJ * M - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
        const Eigen::MatrixXd Jn = D.asDiagonal() * (Jk * dJ * Jc) * D.cwiseInverse().asDiagonal();
        Eigen::VectorXd pattern(d);
        for (int b = 0; b < N; ++b) pattern.segment<4>(4 * b) << -1.0, 1.0, 1.0, -1.0;
        rep.jFrameDefect = (Jn - Eigen::MatrixXd(pattern.asDiagonal())).cwiseAbs().maxCoeff();
    }
    return rep;
}

} // namespace satorb
