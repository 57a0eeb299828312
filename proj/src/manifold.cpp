#include "loopmorse/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace loopmorse {

namespace {
constexpr double kSphereChartBound = 1e6;

// conformal factor of the south-pole stereographic chart of the unit sphere
double conf(const VectorXd& u) {
    double r2 = u.squaredNorm();
    double d = 1.0 + r2;
    return 4.0 / (d * d);
}
} // namespace

ManifoldModel ManifoldModel::flat_torus(int n) {
    if (n < 1 || n > 4) throw std::invalid_argument("flat_torus: dim must be 1..4");
    return ManifoldModel(ManifoldKind::FlatTorus, n, n);
}

ManifoldModel ManifoldModel::sphere2() {
    return ManifoldModel(ManifoldKind::EmbeddedSphere, 2, 3);
}

bool ManifoldModel::in_chart(const VectorXd& q) const {
    if (q.size() != n_) return false;
    if (kind_ == ManifoldKind::FlatTorus) return q.allFinite();
    return q.allFinite() && q.norm() < kSphereChartBound;
}

void ManifoldModel::require_chart(const VectorXd& q) const {
    if (!in_chart(q)) throw DomainError("point outside chart domain");
}

MatrixXd ManifoldModel::metric(const VectorXd& q) const {
    require_chart(q);
    if (kind_ == ManifoldKind::FlatTorus) return MatrixXd::Identity(n_, n_);
    return conf(q) * MatrixXd::Identity(2, 2);
}

MatrixXd ManifoldModel::metric_dq(const VectorXd& q, int k) const {
    require_chart(q);
    if (kind_ == ManifoldKind::FlatTorus) return MatrixXd::Zero(n_, n_);
    double d = 1.0 + q.squaredNorm();
    // d/du_k [4 d^-2] = -16 u_k d^-3
    return (-16.0 * q[k] / (d * d * d)) * MatrixXd::Identity(2, 2);
}

MatrixXd ManifoldModel::metric_dqq(const VectorXd& q, int k, int l) const {
    require_chart(q);
    if (kind_ == ManifoldKind::FlatTorus) return MatrixXd::Zero(n_, n_);
    double d = 1.0 + q.squaredNorm();
    double v = 96.0 * q[k] * q[l] / (d * d * d * d);
    if (k == l) v += -16.0 / (d * d * d);
    return v * MatrixXd::Identity(2, 2);
}

std::vector<MatrixXd> ManifoldModel::christoffel(const VectorXd& q) const {
    require_chart(q);
    std::vector<MatrixXd> gamma(n_, MatrixXd::Zero(n_, n_));
    if (kind_ == ManifoldKind::FlatTorus) return gamma;
    // generic formula from the metric; for the conformal chart this reduces
    // to delta-combinations of d(log sqrt(lambda))
    MatrixXd G = metric(q);
    MatrixXd Gi = G.inverse();
    std::vector<MatrixXd> dG(n_);
    for (int k = 0; k < n_; ++k) dG[k] = metric_dq(q, k);
    for (int k = 0; k < n_; ++k)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double s = 0;
                for (int m = 0; m < n_; ++m)
                    s += Gi(k, m) * (dG[j](m, i) + dG[i](m, j) - dG[m](i, j));
                gamma[k](i, j) = 0.5 * s;
            }
    return gamma;
}

VectorXd ManifoldModel::embed(const VectorXd& q) const {
    require_chart(q);
    if (kind_ == ManifoldKind::FlatTorus) return q;
    double r2 = q.squaredNorm();
    VectorXd z(3);
    z[0] = 2.0 * q[0] / (1.0 + r2);
    z[1] = 2.0 * q[1] / (1.0 + r2);
    z[2] = (1.0 - r2) / (1.0 + r2);
    z /= z.norm(); // projection step, |z| = 1 to rounding
    return z;
}

double ManifoldModel::chart_distance(const VectorXd& a, const VectorXd& b) const {
    VectorXd d = a - b;
    if (kind_ == ManifoldKind::FlatTorus)
        for (int i = 0; i < d.size(); ++i) d[i] -= std::round(d[i]);
    return d.norm();
}

namespace {

// RHS of the transport ODE in the chart: vdot^k = -Gamma^k_{ij} qdot^i v^j
VectorXd transport_rhs(const ManifoldModel& m, const VectorXd& q, const VectorXd& qdot,
                       const VectorXd& v) {
    auto gamma = m.christoffel(q);
    VectorXd out = VectorXd::Zero(v.size());
    for (int k = 0; k < v.size(); ++k) out[k] = -qdot.dot(gamma[k] * v);
    return out;
}

} // namespace

VectorXd parallel_transport(const ManifoldModel& m, const Eigen::MatrixXd& nodes,
                            const VectorXd& v0, int substeps) {
    const int nseg = static_cast<int>(nodes.rows()) - 1;
    VectorXd v = v0;
    for (int s = 0; s < nseg; ++s) {
        VectorXd a = nodes.row(s), b = nodes.row(s + 1);
        VectorXd qdot = b - a; // segment parameterized on [0,1]
        double h = 1.0 / substeps;
        for (int j = 0; j < substeps; ++j) {
            double tau = j * h;
            auto q_at = [&](double t) -> VectorXd { return a + t * qdot; };
            VectorXd k1 = transport_rhs(m, q_at(tau), qdot, v);
            VectorXd k2 = transport_rhs(m, q_at(tau + 0.5 * h), qdot, v + 0.5 * h * k1);
            VectorXd k3 = transport_rhs(m, q_at(tau + 0.5 * h), qdot, v + 0.5 * h * k2);
            VectorXd k4 = transport_rhs(m, q_at(tau + h), qdot, v + h * k3);
            v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!v.allFinite()) throw ConstructionError("parallel transport: non-finite state");
    }
    return v;
}

namespace {

// G-orthonormalize the identity frame at q (Gram-Schmidt in the G inner product)
MatrixXd start_frame(const ManifoldModel& m, const VectorXd& q) {
    const int n = m.dim();
    MatrixXd G = m.metric(q);
    MatrixXd F = MatrixXd::Identity(n, n);
    for (int j = 0; j < n; ++j) {
        VectorXd c = F.col(j);
        for (int i = 0; i < j; ++i) c -= (F.col(i).dot(G * c)) * F.col(i);
        double nn = std::sqrt(c.dot(G * c));
        F.col(j) = c / nn;
    }
    return F;
}

MatrixXd transport_frame_step(const ManifoldModel& m, const Eigen::MatrixXd& seg,
                              const MatrixXd& F) {
    MatrixXd out(F.rows(), F.cols());
    for (int j = 0; j < F.cols(); ++j) out.col(j) = parallel_transport(m, seg, F.col(j));
    return out;
}

} // namespace

FrameLoop transported_frame(const ManifoldModel& m, const Eigen::MatrixXd& nodes) {
    const int N = static_cast<int>(nodes.rows());
    FrameLoop fl;
    fl.periodic = false;
    fl.frames.resize(N);
    fl.frames[0] = start_frame(m, nodes.row(0));
    for (int i = 1; i < N; ++i) {
        Eigen::MatrixXd seg(2, nodes.cols());
        seg.row(0) = nodes.row(i - 1);
        seg.row(1) = nodes.row(i);
        fl.frames[i] = transport_frame_step(m, seg, fl.frames[i - 1]);
        // re-orthonormalize against drift
        MatrixXd G = m.metric(nodes.row(i));
        MatrixXd M = fl.frames[i].transpose() * G * fl.frames[i];
        fl.frames[i] = fl.frames[i] * M.llt().matrixL().toDenseMatrix().transpose().inverse();
    }
    return fl;
}

FrameLoop periodic_orthonormal_frame(const ManifoldModel& m, const Eigen::MatrixXd& nodes) {
    const int N = static_cast<int>(nodes.rows());
    if (N < 2 || m.chart_distance(nodes.row(0), nodes.row(N - 1)) > 1e-9)
        throw ConstructionError("periodic_orthonormal_frame: loop must close");
    FrameLoop fl = transported_frame(m, nodes);

    // holonomy F_0^{-1} F_end is G(q0)-orthogonal; kill it by a geodesic
    // rotation spread linearly in t
    MatrixXd T = fl.frames[0].inverse() * fl.frames[N - 1];
    if (T.determinant() < 0)
        throw ConstructionError("holonomy not in SO(n): model not orientable along loop");
    MatrixXd W = T.log(); // principal log, skew for orthogonal T near SO(n)
    W = 0.5 * (W - W.transpose().eval());
    for (int i = 0; i < N; ++i) {
        double t = static_cast<double>(i) / (N - 1);
        MatrixXd corr = (-t * W).exp();
        fl.frames[i] = fl.frames[i] * corr;
    }
    fl.frames[N - 1] = fl.frames[0]; // closure enforced exactly
    fl.periodic = true;
    return fl;
}

double frame_orthonormality_residual(const ManifoldModel& m, const Eigen::MatrixXd& nodes,
                                     const FrameLoop& fl) {
    double worst = 0;
    for (size_t i = 0; i < fl.frames.size(); ++i) {
        MatrixXd G = m.metric(nodes.row(static_cast<int>(i)));
        MatrixXd R = fl.frames[i].transpose() * G * fl.frames[i] -
                     MatrixXd::Identity(m.dim(), m.dim());
        worst = std::max(worst, R.cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace loopmorse
