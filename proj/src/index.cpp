#include "loopmorse/index.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/MatrixFunctions>

namespace loopmorse {

MatrixXd standard_J(int n) {
    MatrixXd J = MatrixXd::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = MatrixXd::Identity(n, n);
    J.bottomLeftCorner(n, n) = -MatrixXd::Identity(n, n);
    return J;
}

double omega_pairing(const MatrixXd& J0, const VectorXd& x, const VectorXd& y) {
    return (J0 * x).dot(y);
}

double SymplecticPath::symplectic_residual() const {
    if (samples.empty()) return 0;
    MatrixXd J0 = standard_J(n);
    double worst = 0;
    for (const auto& g : samples)
        worst = std::max(worst, (g.transpose() * J0 * g - J0).cwiseAbs().maxCoeff());
    return worst;
}

double SymplecticPath::endpoint_margin() const {
    const MatrixXd& g = samples.back();
    Eigen::EigenSolver<MatrixXd> es(g);
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.rows(); ++i)
        m = std::min(m, std::abs(es.eigenvalues()[i] - std::complex<double>(1, 0)));
    return m;
}

double LagrangianPath::isotropy_residual() const {
    MatrixXd J0 = standard_J(n);
    double worst = 0;
    for (const auto& f : frames)
        worst = std::max(worst, (f.transpose() * J0 * f).cwiseAbs().maxCoeff());
    return worst;
}

LagrangianPath vertical_lagrangian_constant(int n, int samples) {
    LagrangianPath lp;
    lp.n = n;
    MatrixXd f = MatrixXd::Zero(2 * n, n);
    f.bottomRows(n) = MatrixXd::Identity(n, n);
    lp.frames.assign(samples, f);
    return lp;
}

namespace {

constexpr double kCrossTol = 1e-7;     // sigma_min threshold declaring a crossing
constexpr double kKernelFactor = 50.0; // sigma < max(tol, factor*f_min) joins the kernel
constexpr double kFormRegTol = 1e-7;   // crossing-form eigenvalue regularity floor

double sigma_min(const MatrixXd& m) {
    Eigen::JacobiSVD<MatrixXd> svd(m);
    return svd.singularValues().minCoeff();
}

// golden-section minimization of a unimodal dip
template <typename F>
double golden_min(F f, double a, double b, int iters = 80) {
    const double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && (b - a) > 1e-14; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct Crossing {
    double t;
    int signature;
    int kernel_dim;
};

// signature of the symmetric form restricted to the kernel basis V
int restricted_signature(const MatrixXd& S, const MatrixXd& V) {
    MatrixXd form = V.transpose() * S * V;
    form = 0.5 * (form + form.transpose().eval());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(form);
    double scale = std::max(1.0, S.norm());
    int sig = 0;
    for (int i = 0; i < form.rows(); ++i) {
        double lam = es.eigenvalues()[i];
        if (std::abs(lam) < kFormRegTol * scale)
            throw ResolutionError("degenerate crossing form; refine the path sampling");
        sig += (lam > 0) ? 1 : -1;
    }
    return sig;
}

} // namespace

int conley_zehnder(const SymplecticPath& path) {
    const int nseg = static_cast<int>(path.samples.size()) - 1;
    if (nseg < 8) throw std::invalid_argument("conley_zehnder: too few samples");
    const int dim = static_cast<int>(path.samples[0].rows());
    const MatrixXd J0 = standard_J(path.n);
    if (path.symplectic_residual() > 1e-6)
        throw std::invalid_argument("conley_zehnder: path not symplectic");
    if ((path.samples[0] - MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("conley_zehnder: path must start at the identity");
    if (path.endpoint_margin() < 1e-8)
        throw DegeneracyError("conley_zehnder: endpoint has eigenvalue 1 within margin");

    const double h = 1.0 / nseg;

    // per-segment exponential interpolation gamma_i exp(tau X_i); S is constant
    // on each segment
    std::vector<MatrixXd> X(nseg), S(nseg);
    for (int i = 0; i < nseg; ++i) {
        MatrixXd trans = path.samples[i].partialPivLu().solve(path.samples[i + 1]);
        X[i] = trans.log();
        MatrixXd Sseg = -J0 * path.samples[i] * X[i] * path.samples[i].inverse() / h;
        S[i] = 0.5 * (Sseg + Sseg.transpose().eval());
    }

    auto gamma_at = [&](double t) -> MatrixXd {
        if (t <= 0) return path.samples[0];
        if (t >= 1) return path.samples[nseg];
        int i = std::min(nseg - 1, static_cast<int>(t * nseg));
        double tau = t * nseg - i;
        return path.samples[i] * (tau * X[i]).exp();
    };
    auto f = [&](double t) { return sigma_min(gamma_at(t) - MatrixXd::Identity(dim, dim)); };

    // half contribution of the forced crossing at t = 0
    double mu2 = 0; // index in half units
    {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S[0]);
        double scale = std::max(1.0, S[0].norm());
        for (int i = 0; i < dim; ++i) {
            if (std::abs(es.eigenvalues()[i]) < kFormRegTol * scale)
                throw ResolutionError("conley_zehnder: singular form at t = 0");
            mu2 += (es.eigenvalues()[i] > 0) ? 1 : -1;
        }
    }

    // interior crossings: scan a refined grid for local minima of the
    // eigenvalue-one distance, polish each, test against the threshold
    const int per_seg = 4;
    const int gridn = nseg * per_seg;
    std::vector<double> ts(gridn + 1), fs(gridn + 1);
    for (int i = 0; i <= gridn; ++i) {
        ts[i] = static_cast<double>(i) / gridn;
        fs[i] = f(ts[i]);
    }
    std::vector<double> crossing_times;
    for (int i = 1; i < gridn; ++i) {
        if (fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1]) {
            double t0 = golden_min(f, ts[i - 1], ts[i + 1]);
            if (t0 <= 2e-9 || t0 >= 1.0 - 2e-9) continue;
            if (f(t0) < kCrossTol * std::max(1.0, path.samples[i / per_seg].norm())) {
                bool dup = false;
                for (double tc : crossing_times)
                    if (std::abs(tc - t0) < 1e-8) dup = true;
                if (!dup) crossing_times.push_back(t0);
            }
        }
    }

    for (double tc : crossing_times) {
        MatrixXd g = gamma_at(tc);
        Eigen::JacobiSVD<MatrixXd> svd(g - MatrixXd::Identity(dim, dim),
                                       Eigen::ComputeFullV);
        double fmin = svd.singularValues().minCoeff();
        double thresh = std::max(kCrossTol, kKernelFactor * fmin);
        int kdim = 0;
        for (int i = 0; i < dim; ++i)
            if (svd.singularValues()[i] < thresh) ++kdim;
        MatrixXd V = svd.matrixV().rightCols(kdim);
        int seg = std::min(nseg - 1, static_cast<int>(tc * nseg));
        mu2 += 2 * restricted_signature(S[seg], V);
    }

    double mu = 0.5 * mu2;
    double rounded = std::round(mu);
    if (std::abs(mu - rounded) > 1e-9)
        throw ResolutionError("conley_zehnder: non-integer total; degenerate data");
    return static_cast<int>(rounded);
}

namespace {

// intersection data of a Lagrangian pair at one time
struct PairFrames {
    const LagrangianPath* l1;
    const LagrangianPath* l2;
    int n;

    MatrixXd frame1(double t) const { return interp(*l1, t); }
    MatrixXd frame2(double t) const { return interp(*l2, t); }

    static MatrixXd interp(const LagrangianPath& l, double t) {
        int nseg = static_cast<int>(l.frames.size()) - 1;
        if (t <= 0) return l.frames[0];
        if (t >= 1) return l.frames[nseg];
        double x = t * nseg;
        int i = std::min(nseg - 1, static_cast<int>(x));
        double tau = x - i;
        return (1.0 - tau) * l.frames[i] + tau * l.frames[i + 1];
    }

    double gap(double t) const {
        MatrixXd C(2 * n, 2 * n);
        C << frame1(t), frame2(t);
        return sigma_min(C);
    }
};

} // namespace

double relative_maslov(const LagrangianPath& l1, const LagrangianPath& l2) {
    if (l1.n != l2.n || l1.frames.size() != l2.frames.size())
        throw std::invalid_argument("relative_maslov: mismatched paths");
    const int n = l1.n;
    const int nseg = static_cast<int>(l1.frames.size()) - 1;
    if (nseg < 8) throw std::invalid_argument("relative_maslov: too few samples");
    if (l1.isotropy_residual() > 1e-8 || l2.isotropy_residual() > 1e-8)
        throw std::invalid_argument("relative_maslov: frames not Lagrangian");
    const MatrixXd J0 = standard_J(n);

    PairFrames pf{&l1, &l2, n};

    // reject everywhere-degenerate input (convention-dependent value)
    {
        int low = 0;
        for (int i = 0; i <= nseg; ++i)
            if (pf.gap(static_cast<double>(i) / nseg) < kCrossTol) ++low;
        if (low > nseg / 2)
            throw std::invalid_argument(
                "relative_maslov: paths intersect at all times; value is convention-dependent");
    }

    const int per_seg = 4;
    const int gridn = nseg * per_seg;
    std::vector<double> ts(gridn + 1), fs(gridn + 1);
    for (int i = 0; i <= gridn; ++i) {
        ts[i] = static_cast<double>(i) / gridn;
        fs[i] = pf.gap(ts[i]);
    }

    std::vector<double> crossings;
    auto add_crossing = [&](double t) {
        for (double tc : crossings)
            if (std::abs(tc - t) < 1e-8) return;
        crossings.push_back(t);
    };
    if (fs[0] < kCrossTol) add_crossing(0.0);
    if (fs[gridn] < kCrossTol) add_crossing(1.0);
    for (int i = 1; i < gridn; ++i)
        if (fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1]) {
            double t0 = golden_min([&](double t) { return pf.gap(t); }, ts[i - 1], ts[i + 1]);
            if (pf.gap(t0) < kCrossTol) {
                if (t0 < 1e-9) t0 = 0.0;
                if (t0 > 1 - 1e-9) t0 = 1.0;
                add_crossing(t0);
            }
        }

    double mu2 = 0; // in half units
    const double fd = 0.5 / gridn;
    for (double tc : crossings) {
        MatrixXd F1 = pf.frame1(tc), F2 = pf.frame2(tc);
        MatrixXd C(2 * n, 2 * n);
        C << F1, F2;
        Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullV);
        double fmin = svd.singularValues().minCoeff();
        double thresh = std::max(kCrossTol, kKernelFactor * fmin);
        int kdim = 0;
        for (int i = 0; i < 2 * n; ++i)
            if (svd.singularValues()[i] < thresh) ++kdim;
        MatrixXd null = svd.matrixV().rightCols(kdim); // (a; b) columns

        // crossing form Gamma(v_i, v_j) = omega(v_i, F1dot a_j + F2dot b_j)
        double lo = std::max(0.0, tc - fd), hi = std::min(1.0, tc + fd);
        MatrixXd F1d = (pf.frame1(hi) - pf.frame1(lo)) / (hi - lo);
        MatrixXd F2d = (pf.frame2(hi) - pf.frame2(lo)) / (hi - lo);
        MatrixXd form(kdim, kdim);
        std::vector<VectorXd> vs(kdim), ws(kdim);
        for (int j = 0; j < kdim; ++j) {
            VectorXd a = null.col(j).head(n), b = null.col(j).tail(n);
            vs[j] = F1 * a;
            ws[j] = F1d * a + F2d * b;
        }
        for (int i = 0; i < kdim; ++i)
            for (int j = 0; j < kdim; ++j) form(i, j) = omega_pairing(J0, vs[i], ws[j]);
        form = 0.5 * (form + form.transpose().eval());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(form);
        double scale = std::max(1.0, form.norm());
        int sig = 0;
        for (int i = 0; i < kdim; ++i) {
            if (std::abs(es.eigenvalues()[i]) < kFormRegTol * scale)
                throw ResolutionError("relative_maslov: crossing unresolved at this resolution");
            sig += (es.eigenvalues()[i] > 0) ? 1 : -1;
        }
        bool endpoint = (tc == 0.0 || tc == 1.0);
        mu2 += endpoint ? sig : 2 * sig;
    }

    double mu = 0.5 * mu2;
    double twice = std::round(2 * mu);
    if (std::abs(2 * mu - twice) > 1e-9)
        throw ResolutionError("relative_maslov: result not a half-integer");
    return 0.5 * twice;
}

// --- trivializations -------------------------------------------------------------

MatrixXd Trivialization::chart_frame(int i) const {
    const int n = static_cast<int>(R[i].rows());
    MatrixXd U = MatrixXd::Zero(2 * n, 2 * n);
    U.topLeftCorner(n, n) = R[i];
    U.bottomRightCorner(n, n) = R[i];
    return N[i].inverse() * U;
}

double Trivialization::unitarity_residual() const {
    double worst = 0;
    for (const auto& r : R)
        worst = std::max(
            worst,
            (r.transpose() * r - MatrixXd::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff());
    return worst;
}

double Trivialization::verticality_residual() const {
    double worst = 0;
    for (int i = 0; i < samples(); ++i) {
        const int n = static_cast<int>(R[i].rows());
        MatrixXd phi = chart_frame(i);
        worst = std::max(worst, phi.topRightCorner(n, n).cwiseAbs().maxCoeff());
    }
    return worst;
}

bool Trivialization::orientation_positive() const {
    for (const auto& r : R)
        if (r.determinant() <= 0) return false;
    return true;
}

Trivialization vertical_trivialization(const ManifoldModel& m,
                                       const Eigen::MatrixXd& base_nodes, OrbitBoundary bc) {
    const int n = m.dim();
    const int N = static_cast<int>(base_nodes.rows());
    FrameLoop fl = (bc == OrbitBoundary::Periodic) ? periodic_orthonormal_frame(m, base_nodes)
                                                   : transported_frame(m, base_nodes);
    Trivialization tv;
    tv.periodic = (bc == OrbitBoundary::Periodic);
    tv.N.resize(N);
    tv.R.resize(N);
    for (int i = 0; i < N; ++i) {
        MatrixXd G = m.metric(base_nodes.row(i));
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
        MatrixXd Gh = es.operatorSqrt();
        MatrixXd Ghi = Gh.inverse();
        tv.N[i] = MatrixXd::Zero(2 * n, 2 * n);
        tv.N[i].topLeftCorner(n, n) = Gh;
        tv.N[i].bottomRightCorner(n, n) = Ghi;
        tv.R[i] = Gh * fl.frames[i];
    }
    if (!tv.orientation_positive())
        throw ConstructionError("vertical_trivialization: frame orientation not positive");
    return tv;
}

SymplecticPath conjugate_by_trivialization(const std::vector<MatrixXd>& dphi_path,
                                           const Trivialization& triv) {
    if (static_cast<int>(dphi_path.size()) != triv.samples())
        throw std::invalid_argument("conjugate_by_trivialization: grid mismatch");
    const int n = static_cast<int>(triv.R[0].rows());
    SymplecticPath sp;
    sp.n = n;
    sp.samples.resize(dphi_path.size());
    MatrixXd phi0 = triv.chart_frame(0);
    for (size_t i = 0; i < dphi_path.size(); ++i) {
        MatrixXd phii = triv.chart_frame(static_cast<int>(i));
        sp.samples[i] = phii.partialPivLu().solve(dphi_path[i] * phi0);
    }
    // exact identity at t = 0 guards the CZ precondition
    sp.samples[0] = MatrixXd::Identity(2 * n, 2 * n);
    return sp;
}

int maslov_of_orbit(const std::vector<MatrixXd>& dphi_path, const Trivialization& triv,
                    OrbitBoundary bc) {
    SymplecticPath gp = conjugate_by_trivialization(dphi_path, triv);
    if (bc == OrbitBoundary::Periodic) return conley_zehnder(gp);

    const int n = gp.n;
    LagrangianPath lam;
    lam.n = n;
    lam.frames.resize(gp.samples.size());
    MatrixXd vert = MatrixXd::Zero(2 * n, n);
    vert.bottomRows(n) = MatrixXd::Identity(n, n);
    for (size_t i = 0; i < gp.samples.size(); ++i) lam.frames[i] = gp.samples[i] * vert;
    LagrangianPath lam0 = vertical_lagrangian_constant(n, static_cast<int>(gp.samples.size()));
    double mu = relative_maslov(lam, lam0) - 0.5 * n;
    double rounded = std::round(mu);
    if (std::abs(mu - rounded) > 1e-8)
        throw ResolutionError("maslov_of_orbit: fixed-ends index not an integer");
    return static_cast<int>(rounded);
}

} // namespace loopmorse
