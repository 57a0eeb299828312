#include "loopmorse/systems.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace loopmorse {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double trig(double x, bool is_sin) { return is_sin ? std::sin(x) : std::cos(x); }
double dtrig(double x, bool is_sin) { return is_sin ? std::cos(x) : -std::sin(x); }
double ddtrig(double x, bool is_sin) { return is_sin ? -std::sin(x) : -std::cos(x); }
} // namespace

TrigField::TrigField(int dim, std::vector<TrigTerm> terms)
    : dim_(dim), terms_(std::move(terms)) {
    for (auto& term : terms_) {
        if (term.kq.size() == 0) term.kq = Eigen::VectorXi::Zero(dim_);
        if (term.q_sin.empty()) term.q_sin.assign(dim_, false);
        if (term.kq.size() != dim_ || static_cast<int>(term.q_sin.size()) != dim_)
            throw std::invalid_argument("TrigField: term arity mismatch");
    }
}

TrigField TrigField::constant(int dim, double value) {
    TrigTerm t;
    t.c = value;
    return TrigField(dim, {t});
}

double TrigField::eval(double t, const VectorXd& q) const {
    double s = 0;
    for (const auto& term : terms_) {
        double f = term.c * trig(kTwoPi * term.kt * t, term.t_sin);
        for (int d = 0; d < dim_; ++d) f *= trig(kTwoPi * term.kq[d] * q[d], term.q_sin[d]);
        s += f;
    }
    return s;
}

double TrigField::dt(double t, const VectorXd& q) const {
    double s = 0;
    for (const auto& term : terms_) {
        double f = term.c * kTwoPi * term.kt * dtrig(kTwoPi * term.kt * t, term.t_sin);
        for (int d = 0; d < dim_; ++d) f *= trig(kTwoPi * term.kq[d] * q[d], term.q_sin[d]);
        s += f;
    }
    return s;
}

VectorXd TrigField::dq(double t, const VectorXd& q) const {
    VectorXd g = VectorXd::Zero(dim_);
    for (const auto& term : terms_) {
        double base = term.c * trig(kTwoPi * term.kt * t, term.t_sin);
        for (int k = 0; k < dim_; ++k) {
            double f = base;
            for (int d = 0; d < dim_; ++d) {
                double x = kTwoPi * term.kq[d] * q[d];
                f *= (d == k) ? kTwoPi * term.kq[d] * dtrig(x, term.q_sin[d])
                              : trig(x, term.q_sin[d]);
            }
            g[k] += f;
        }
    }
    return g;
}

MatrixXd TrigField::dqq(double t, const VectorXd& q) const {
    MatrixXd h = MatrixXd::Zero(dim_, dim_);
    for (const auto& term : terms_) {
        double base = term.c * trig(kTwoPi * term.kt * t, term.t_sin);
        for (int k = 0; k < dim_; ++k)
            for (int l = k; l < dim_; ++l) {
                double f = base;
                for (int d = 0; d < dim_; ++d) {
                    double x = kTwoPi * term.kq[d] * q[d];
                    double w = kTwoPi * term.kq[d];
                    if (d == k && d == l) f *= w * w * ddtrig(x, term.q_sin[d]);
                    else if (d == k || d == l) f *= w * dtrig(x, term.q_sin[d]);
                    else f *= trig(x, term.q_sin[d]);
                }
                h(k, l) += f;
                if (l != k) h(l, k) += f;
            }
    }
    return h;
}

// --- LagrangianSystem ---------------------------------------------------------

LagrangianSystem::LagrangianSystem(ManifoldModel m, TrigField V,
                                   std::vector<TrigField> A,
                                   std::vector<std::vector<TrigField>> T)
    : manifold_(std::move(m)), V_(std::move(V)), A_(std::move(A)), T_(std::move(T)) {
    const int n = manifold_.dim();
    if (!A_.empty() && static_cast<int>(A_.size()) != n)
        throw std::invalid_argument("LagrangianSystem: A must have n components");
    if (!T_.empty() &&
        (static_cast<int>(T_.size()) != n || static_cast<int>(T_[0].size()) != n))
        throw std::invalid_argument("LagrangianSystem: T must be n x n");
}

MatrixXd LagrangianSystem::T_at(double t, const VectorXd& q) const {
    const int n = dim();
    if (T_.empty()) return MatrixXd::Identity(n, n);
    MatrixXd T(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) T(i, j) = T_[i][j].eval(t, q);
    return T;
}

VectorXd LagrangianSystem::A_at(double t, const VectorXd& q) const {
    const int n = dim();
    if (A_.empty()) return VectorXd::Zero(n);
    VectorXd A(n);
    for (int i = 0; i < n; ++i) A[i] = A_[i].eval(t, q);
    return A;
}

MatrixXd LagrangianSystem::T_dq(double t, const VectorXd& q, int k) const {
    const int n = dim();
    MatrixXd D = MatrixXd::Zero(n, n);
    for (int i = 0; i < n && !T_.empty(); ++i)
        for (int j = 0; j < n; ++j) D(i, j) = T_[i][j].dq(t, q)[k];
    return D;
}

MatrixXd LagrangianSystem::T_dqq(double t, const VectorXd& q, int k, int l) const {
    const int n = dim();
    MatrixXd D = MatrixXd::Zero(n, n);
    for (int i = 0; i < n && !T_.empty(); ++i)
        for (int j = 0; j < n; ++j) D(i, j) = T_[i][j].dqq(t, q)(k, l);
    return D;
}

VectorXd LagrangianSystem::A_dq(double t, const VectorXd& q, int k) const {
    const int n = dim();
    VectorXd D = VectorXd::Zero(n);
    for (int i = 0; i < n && !A_.empty(); ++i) D[i] = A_[i].dq(t, q)[k];
    return D;
}

VectorXd LagrangianSystem::A_dqq(double t, const VectorXd& q, int k, int l) const {
    const int n = dim();
    VectorXd D = VectorXd::Zero(n);
    for (int i = 0; i < n && !A_.empty(); ++i) D[i] = A_[i].dqq(t, q)(k, l);
    return D;
}

namespace {

MatrixXd mat_dq(const std::vector<std::vector<TrigField>>& T, int n, double t,
                const VectorXd& q, int k) {
    MatrixXd D = MatrixXd::Zero(n, n);
    for (int i = 0; i < n && !T.empty(); ++i)
        for (int j = 0; j < n; ++j) D(i, j) = T[i][j].dq(t, q)[k];
    return D;
}

MatrixXd mat_dt(const std::vector<std::vector<TrigField>>& T, int n, double t,
                const VectorXd& q) {
    MatrixXd D = MatrixXd::Zero(n, n);
    for (int i = 0; i < n && !T.empty(); ++i)
        for (int j = 0; j < n; ++j) D(i, j) = T[i][j].dt(t, q);
    return D;
}

MatrixXd mat_dqq(const std::vector<std::vector<TrigField>>& T, int n, double t,
                 const VectorXd& q, int k, int l) {
    MatrixXd D = MatrixXd::Zero(n, n);
    for (int i = 0; i < n && !T.empty(); ++i)
        for (int j = 0; j < n; ++j) D(i, j) = T[i][j].dqq(t, q)(k, l);
    return D;
}

VectorXd vec_dq(const std::vector<TrigField>& A, int n, double t, const VectorXd& q, int k) {
    VectorXd D = VectorXd::Zero(n);
    for (int i = 0; i < n && !A.empty(); ++i) D[i] = A[i].dq(t, q)[k];
    return D;
}

VectorXd vec_dt(const std::vector<TrigField>& A, int n, double t, const VectorXd& q) {
    VectorXd D = VectorXd::Zero(n);
    for (int i = 0; i < n && !A.empty(); ++i) D[i] = A[i].dt(t, q);
    return D;
}

VectorXd vec_dqq(const std::vector<TrigField>& A, int n, double t, const VectorXd& q, int k,
                 int l) {
    VectorXd D = VectorXd::Zero(n);
    for (int i = 0; i < n && !A.empty(); ++i) D[i] = A[i].dqq(t, q)(k, l);
    return D;
}

} // namespace

double LagrangianSystem::L(double t, const VectorXd& q, const VectorXd& v) const {
    VectorXd w = T_at(t, q) * v - A_at(t, q);
    return 0.5 * w.dot(manifold_.metric(q) * w) - V_.eval(t, q);
}

VectorXd LagrangianSystem::Lv(double t, const VectorXd& q, const VectorXd& v) const {
    MatrixXd T = T_at(t, q);
    VectorXd w = T * v - A_at(t, q);
    return T.transpose() * (manifold_.metric(q) * w);
}

MatrixXd LagrangianSystem::Lvv(double t, const VectorXd& q, const VectorXd& v) const {
    (void)v;
    MatrixXd T = T_at(t, q);
    return T.transpose() * manifold_.metric(q) * T;
}

VectorXd LagrangianSystem::Lq(double t, const VectorXd& q, const VectorXd& v) const {
    const int n = dim();
    MatrixXd G = manifold_.metric(q);
    VectorXd w = T_at(t, q) * v - A_at(t, q);
    VectorXd dV = V_.dq(t, q);
    VectorXd out(n);
    for (int k = 0; k < n; ++k) {
        VectorXd wk = mat_dq(T_, n, t, q, k) * v - vec_dq(A_, n, t, q, k);
        out[k] = 0.5 * w.dot(manifold_.metric_dq(q, k) * w) + wk.dot(G * w) - dV[k];
    }
    return out;
}

MatrixXd LagrangianSystem::Lqv(double t, const VectorXd& q, const VectorXd& v) const {
    const int n = dim();
    MatrixXd T = T_at(t, q);
    MatrixXd G = manifold_.metric(q);
    VectorXd w = T * v - A_at(t, q);
    MatrixXd out(n, n);
    for (int k = 0; k < n; ++k) {
        MatrixXd Tk = mat_dq(T_, n, t, q, k);
        VectorXd wk = Tk * v - vec_dq(A_, n, t, q, k);
        out.col(k) = Tk.transpose() * (G * w) +
                     T.transpose() * (manifold_.metric_dq(q, k) * w) + T.transpose() * (G * wk);
    }
    return out;
}

MatrixXd LagrangianSystem::Lqq(double t, const VectorXd& q, const VectorXd& v) const {
    const int n = dim();
    MatrixXd G = manifold_.metric(q);
    VectorXd w = T_at(t, q) * v - A_at(t, q);
    MatrixXd hV = V_.dqq(t, q);
    std::vector<VectorXd> wk(n);
    std::vector<MatrixXd> Gk(n);
    for (int k = 0; k < n; ++k) {
        wk[k] = mat_dq(T_, n, t, q, k) * v - vec_dq(A_, n, t, q, k);
        Gk[k] = manifold_.metric_dq(q, k);
    }
    MatrixXd out(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
            VectorXd wkl = mat_dqq(T_, n, t, q, k, l) * v - vec_dqq(A_, n, t, q, k, l);
            double s = 0.5 * w.dot(manifold_.metric_dqq(q, k, l) * w);
            s += wk[l].dot(Gk[k] * w) + wk[k].dot(Gk[l] * w);
            s += wkl.dot(G * w) + wk[k].dot(G * wk[l]);
            s -= hV(k, l);
            out(k, l) = s;
            out(l, k) = s;
        }
    return out;
}

VectorXd LagrangianSystem::Ltv(double t, const VectorXd& q, const VectorXd& v) const {
    const int n = dim();
    MatrixXd T = T_at(t, q);
    MatrixXd G = manifold_.metric(q);
    VectorXd w = T * v - A_at(t, q);
    MatrixXd Tt = mat_dt(T_, n, t, q);
    VectorXd wt = Tt * v - vec_dt(A_, n, t, q);
    return Tt.transpose() * (G * w) + T.transpose() * (G * wt);
}

// --- HamiltonianSystem ----------------------------------------------------------

HamiltonianSystem::HamiltonianSystem(std::shared_ptr<const LagrangianSystem> dual)
    : dual_(std::move(dual)) {
    if (!dual_) throw std::invalid_argument("HamiltonianSystem: null dual");
}

namespace {

// The dual data H = 1/2 p.K p + p.b + V with K = M^{-1}, M = T^T G T,
// b = T^{-1} A, together with first and second q-derivatives of M and b.
struct DualData {
    MatrixXd M, K, Ti;
    VectorXd b;
    double V;
    std::vector<MatrixXd> Mk;
    std::vector<VectorXd> bk;
    VectorXd Vk;
    // second derivatives filled on demand
};

class DualEval {
public:
    DualEval(const LagrangianSystem& L, double t, const VectorXd& q) : L_(L), t_(t), q_(q) {
        n_ = L.dim();
        T0 = L.T_at(t, q);
        G0 = L.manifold().metric(q);
        M = T0.transpose() * G0 * T0;
        K = M.inverse();
        Ti = L.has_T() ? MatrixXd(T0.inverse()) : MatrixXd::Identity(n_, n_);
        b = Ti * L.A_at(t, q);
    }

    MatrixXd Tk(int k) const { return mat_dq_outer(k); }

    MatrixXd Mk(int k) const {
        MatrixXd tk = mat_dq_outer(k);
        MatrixXd gk = L_.manifold().metric_dq(q_, k);
        return tk.transpose() * G0 * T0 + T0.transpose() * gk * T0 + T0.transpose() * G0 * tk;
    }

    MatrixXd Mkl(int k, int l) const {
        MatrixXd tk = mat_dq_outer(k), tl = mat_dq_outer(l), tkl = mat_dqq_outer(k, l);
        MatrixXd gk = L_.manifold().metric_dq(q_, k), gl = L_.manifold().metric_dq(q_, l);
        MatrixXd gkl = L_.manifold().metric_dqq(q_, k, l);
        MatrixXd s = tkl.transpose() * G0 * T0 + tk.transpose() * gl * T0 +
                     tk.transpose() * G0 * tl + tl.transpose() * gk * T0 +
                     T0.transpose() * gkl * T0 + T0.transpose() * gk * tl +
                     tl.transpose() * G0 * tk + T0.transpose() * gl * tk +
                     T0.transpose() * G0 * tkl;
        return s;
    }

    VectorXd bk(int k) const {
        return Ti * (vec_dq_outer(k) - mat_dq_outer(k) * b);
    }

    VectorXd bkl(int k, int l) const {
        VectorXd bk_ = bk(k), bl_ = bk(l);
        return -Ti * (mat_dq_outer(l) * bk_) +
               Ti * (vec_dqq_outer(k, l) - mat_dqq_outer(k, l) * b - mat_dq_outer(k) * bl_);
    }

    int n() const { return n_; }
    MatrixXd T0, G0, M, K, Ti;
    VectorXd b;

private:
    MatrixXd mat_dq_outer(int k) const { return L_.T_dq(t_, q_, k); }
    MatrixXd mat_dqq_outer(int k, int l) const { return L_.T_dqq(t_, q_, k, l); }
    VectorXd vec_dq_outer(int k) const { return L_.A_dq(t_, q_, k); }
    VectorXd vec_dqq_outer(int k, int l) const { return L_.A_dqq(t_, q_, k, l); }

    const LagrangianSystem& L_;
    double t_;
    VectorXd q_;
    int n_;
};

} // namespace

double HamiltonianSystem::H(double t, const VectorXd& q, const VectorXd& p) const {
    DualEval d(*dual_, t, q);
    return 0.5 * p.dot(d.K * p) + p.dot(d.b) + dual_->V_at(t, q);
}

VectorXd HamiltonianSystem::Hp(double t, const VectorXd& q, const VectorXd& p) const {
    DualEval d(*dual_, t, q);
    return d.K * p + d.b;
}

MatrixXd HamiltonianSystem::Hpp(double t, const VectorXd& q, const VectorXd& p) const {
    (void)p;
    DualEval d(*dual_, t, q);
    return d.K;
}

VectorXd HamiltonianSystem::Hq(double t, const VectorXd& q, const VectorXd& p) const {
    DualEval d(*dual_, t, q);
    const int n = d.n();
    VectorXd Kp = d.K * p;
    VectorXd out = dual_->V_dq(t, q);
    for (int k = 0; k < n; ++k)
        out[k] += -0.5 * Kp.dot(d.Mk(k) * Kp) + p.dot(d.bk(k));
    return out;
}

MatrixXd HamiltonianSystem::Hqp(double t, const VectorXd& q, const VectorXd& p) const {
    DualEval d(*dual_, t, q);
    const int n = d.n();
    VectorXd Kp = d.K * p;
    MatrixXd out(n, n);
    for (int k = 0; k < n; ++k) out.col(k) = -d.K * (d.Mk(k) * Kp) + d.bk(k);
    return out;
}

MatrixXd HamiltonianSystem::Hqq(double t, const VectorXd& q, const VectorXd& p) const {
    DualEval d(*dual_, t, q);
    const int n = d.n();
    VectorXd Kp = d.K * p;
    MatrixXd out = dual_->V_dqq(t, q);
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
            // d_l [ -1/2 (Kp). Mk (Kp) + p.bk ]
            VectorXd dKp_l = -d.K * (d.Mk(l) * Kp);
            double s = -Kp.dot(d.Mk(k) * dKp_l) - 0.5 * Kp.dot(d.Mkl(k, l) * Kp) +
                       p.dot(d.bkl(k, l));
            out(k, l) += s;
            if (l != k) out(l, k) += s;
        }
    return out;
}

void HamiltonianSystem::vector_field(double t, const VectorXd& q, const VectorXd& p,
                                     VectorXd& qdot, VectorXd& pdot) const {
    qdot = Hp(t, q, p);
    pdot = -Hq(t, q, p);
}

MatrixXd HamiltonianSystem::hessian(double t, const VectorXd& q, const VectorXd& p) const {
    const int n = dim();
    MatrixXd h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = Hqq(t, q, p);
    MatrixXd qp = Hqp(t, q, p);
    h.topRightCorner(n, n) = qp;
    h.bottomLeftCorner(n, n) = qp.transpose();
    h.bottomRightCorner(n, n) = Hpp(t, q, p);
    return 0.5 * (h + h.transpose().eval());
}

// --- pointwise transforms -------------------------------------------------------

LegendrePoint legendre(const LagrangianSystem& L, double t, const VectorXd& q,
                       const VectorXd& v) {
    LegendrePoint out;
    out.p = L.Lv(t, q, v);
    out.H_value = out.p.dot(v) - L.L(t, q, v);
    return out;
}

VectorXd inverse_legendre(const HamiltonianSystem& H, double t, const VectorXd& q,
                          const VectorXd& p, int max_iter) {
    const LagrangianSystem& L = H.dual();
    // closed-form start for the physical family, then Newton on p - Lv(v) = 0
    VectorXd v = H.Hp(t, q, p);
    for (int it = 0; it < max_iter; ++it) {
        VectorXd r = p - L.Lv(t, q, v);
        if (r.lpNorm<Eigen::Infinity>() < 1e-13) return v;
        MatrixXd J = L.Lvv(t, q, v);
        Eigen::LDLT<MatrixXd> ldlt(J);
        if (ldlt.info() != Eigen::Success)
            throw ConvexityError("inverse_legendre: fiber Hessian not positive definite");
        v += ldlt.solve(r);
    }
    VectorXd r = p - L.Lv(t, q, v);
    if (r.lpNorm<Eigen::Infinity>() < 1e-10) return v;
    throw ConvexityError("inverse_legendre: Newton failed to converge");
}

VectorXd euler_lagrange_accel(const LagrangianSystem& L, double t, const VectorXd& q,
                              const VectorXd& v) {
    MatrixXd Lvv = L.Lvv(t, q, v);
    Eigen::LDLT<MatrixXd> ldlt(Lvv);
    if (ldlt.info() != Eigen::Success)
        throw ConvexityError("euler_lagrange_accel: singular fiber Hessian");
    VectorXd rhs = L.Lq(t, q, v) - L.Lqv(t, q, v) * v - L.Ltv(t, q, v);
    return ldlt.solve(rhs);
}

// --- actions ----------------------------------------------------------------------

double action_lagrangian(const LagrangianSystem& L, const DiscretizedLoop& loop) {
    const int N = loop.segments();
    if (N < 8) throw std::invalid_argument("action_lagrangian: need at least 8 nodes");
    const double h = 1.0 / N;
    double E = 0;
    for (int j = 0; j < N; ++j) {
        double tm = (j + 0.5) * h;
        VectorXd qm = 0.5 * (loop.q.row(j) + loop.q.row(j + 1));
        VectorXd vm = (loop.q.row(j + 1) - loop.q.row(j)) / h;
        E += h * L.L(tm, qm, vm);
    }
    return E;
}

double action_hamiltonian(const HamiltonianSystem& H, const PhaseLoop& x) {
    const int N = x.segments();
    const double h = 1.0 / N;
    double A = 0;
    for (int j = 0; j < N; ++j) {
        double tm = (j + 0.5) * h;
        VectorXd qm = 0.5 * (x.q.row(j) + x.q.row(j + 1));
        VectorXd dq = x.q.row(j + 1) - x.q.row(j);
        VectorXd pj = x.pmid.row(j);
        A += pj.dot(dq) - h * H.H(tm, qm, pj);
    }
    return A;
}

double duality_gap(const LagrangianSystem& L, const HamiltonianSystem& H,
                   const PhaseLoop& x) {
    DiscretizedLoop base;
    base.bc = x.bc;
    base.q = x.q;
    return action_lagrangian(L, base) - action_hamiltonian(H, x);
}

PhaseLoop legendre_lift_loop(const LagrangianSystem& L, const DiscretizedLoop& loop) {
    const int N = loop.segments();
    const double h = 1.0 / N;
    PhaseLoop x;
    x.bc = loop.bc;
    x.q = loop.q;
    x.pmid.resize(N, loop.dim());
    for (int j = 0; j < N; ++j) {
        double tm = (j + 0.5) * h;
        VectorXd qm = 0.5 * (loop.q.row(j) + loop.q.row(j + 1));
        VectorXd vm = (loop.q.row(j + 1) - loop.q.row(j)) / h;
        x.pmid.row(j) = L.Lv(tm, qm, vm);
    }
    return x;
}

// --- growth certificates ------------------------------------------------------------

GrowthReport check_growth_lagrangian(const LagrangianDensity& L, int dim,
                                     const GrowthGrid& grid) {
    GrowthReport rep;
    double l0 = std::numeric_limits<double>::infinity();
    double l1 = 0;
    for (int it = 0; it < grid.t_samples; ++it) {
        double t = static_cast<double>(it) / grid.t_samples;
        // q over the unit cell, v over radial shells up to P_max
        int qn = grid.q_samples_per_dim;
        long qtotal = 1;
        for (int d = 0; d < dim; ++d) qtotal *= qn;
        for (long qi = 0; qi < qtotal; ++qi) {
            VectorXd q(dim);
            long rem = qi;
            for (int d = 0; d < dim; ++d) {
                q[d] = static_cast<double>(rem % qn) / qn;
                rem /= qn;
            }
            for (int vi = 0; vi < grid.v_samples; ++vi) {
                double r = grid.P_max * (vi + 1) / grid.v_samples;
                VectorXd v = VectorXd::Zero(dim);
                v[vi % dim] = (vi % 2 == 0) ? r : -r;
                if (dim > 1) v[(vi + 1) % dim] = 0.5 * r;
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(L.Lvv(t, q, v));
                double lam = es.eigenvalues().minCoeff();
                if (lam < l0) {
                    l0 = lam;
                    rep.worst_t = t;
                    rep.worst_q = q;
                    rep.worst_fiber = v;
                }
                double nv = v.norm();
                l1 = std::max(l1, L.Lvv(t, q, v).norm());
                l1 = std::max(l1, L.Lqv(t, q, v).norm() / (1.0 + nv));
                l1 = std::max(l1, L.Lqq(t, q, v).norm() / (1.0 + nv * nv));
            }
        }
    }
    rep.l0 = l0;
    rep.l1 = l1;
    rep.ok = l0 > 0;
    if (!rep.ok) rep.message = "(L1) violated: fiber Hessian not positive at sample";
    rep.worst_margin = l0;
    return rep;
}

GrowthReport check_growth_hamiltonian(const HamiltonianSystem& H, const GrowthGrid& grid) {
    GrowthReport rep;
    const int n = H.dim();
    double h0 = std::numeric_limits<double>::infinity();
    double h1 = 0, h2 = 0;
    // candidate h0 from the fiber quadratic form, h1 from the potential sup;
    // then verify dH[eta] - H >= h0 |p|^2 - h1 on every sample
    struct Sample {
        double t;
        VectorXd q, p;
    };
    std::vector<Sample> samples;
    for (int it = 0; it < grid.t_samples; ++it) {
        double t = static_cast<double>(it) / grid.t_samples;
        int qn = grid.q_samples_per_dim;
        long qtotal = 1;
        for (int d = 0; d < n; ++d) qtotal *= qn;
        for (long qi = 0; qi < qtotal; ++qi) {
            VectorXd q(n);
            long rem = qi;
            for (int d = 0; d < n; ++d) {
                q[d] = static_cast<double>(rem % qn) / qn;
                rem /= qn;
            }
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(H.Hpp(t, q, VectorXd::Zero(n)));
            h0 = std::min(h0, 0.5 * es.eigenvalues().minCoeff());
            for (int pi = 0; pi < grid.v_samples; ++pi) {
                double r = grid.P_max * (pi + 1) / grid.v_samples;
                VectorXd p = VectorXd::Zero(n);
                p[pi % n] = (pi % 2 == 0) ? r : -r;
                if (n > 1) p[(pi + 1) % n] = -0.4 * r;
                samples.push_back({t, q, p});
            }
            samples.push_back({t, q, VectorXd::Zero(n)});
        }
    }
    // h1: smallest constant making the candidate inequality hold on samples
    double need_h1 = 0;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        double r = s.p.dot(H.Hp(s.t, s.q, s.p)) - H.H(s.t, s.q, s.p);
        need_h1 = std::max(need_h1, h0 * s.p.squaredNorm() - r);
        double np = s.p.norm();
        h2 = std::max(h2, H.Hq(s.t, s.q, s.p).norm() / (1.0 + np * np));
        h2 = std::max(h2, H.Hp(s.t, s.q, s.p).norm() / (1.0 + np));
    }
    h1 = std::max(0.0, need_h1);
    for (const auto& s : samples) {
        double r = s.p.dot(H.Hp(s.t, s.q, s.p)) - H.H(s.t, s.q, s.p);
        double margin = r - (h0 * s.p.squaredNorm() - h1);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_t = s.t;
            rep.worst_q = s.q;
            rep.worst_fiber = s.p;
        }
    }
    rep.h0 = h0;
    rep.h1 = h1;
    rep.h2 = h2;
    rep.ok = h0 > 0 && rep.worst_margin > -1e-10;
    if (!rep.ok) rep.message = "(H1) violated on sampling grid";
    return rep;
}

} // namespace loopmorse
