#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "loopmorse/manifold.hpp"

namespace loopmorse {

// Trigonometric-polynomial scalar field on T x T^n (or T x chart):
//   f(t,q) = sum_terms c * trig(2 pi kt t) * prod_d trig(2 pi kq_d q_d)
// Derivatives are exact, no symbolic engine involved.
struct TrigTerm {
    double c = 0.0;
    int kt = 0;
    bool t_sin = false; // cos by default
    Eigen::VectorXi kq;                // per-dimension wave numbers
    std::vector<bool> q_sin;           // per-dimension cos/sin selector
};

class TrigField {
public:
    TrigField() = default;
    TrigField(int dim, std::vector<TrigTerm> terms);
    static TrigField constant(int dim, double value);

    int dim() const { return dim_; }
    bool empty() const { return terms_.empty(); }

    double eval(double t, const VectorXd& q) const;
    double dt(double t, const VectorXd& q) const;
    VectorXd dq(double t, const VectorXd& q) const;
    MatrixXd dqq(double t, const VectorXd& q) const;

    const std::vector<TrigTerm>& terms() const { return terms_; }

private:
    int dim_ = 0;
    std::vector<TrigTerm> terms_;
};

// Generic fiberwise Lagrangian density, the interface the growth checker
// works against.  The physical T/A/V systems implement it; tests may supply
// deliberately bad densities.
class LagrangianDensity {
public:
    virtual ~LagrangianDensity() = default;
    virtual int dim() const = 0;
    virtual double L(double t, const VectorXd& q, const VectorXd& v) const = 0;
    virtual VectorXd Lv(double t, const VectorXd& q, const VectorXd& v) const = 0;
    virtual MatrixXd Lvv(double t, const VectorXd& q, const VectorXd& v) const = 0;
    virtual VectorXd Lq(double t, const VectorXd& q, const VectorXd& v) const = 0;
    virtual MatrixXd Lqv(double t, const VectorXd& q, const VectorXd& v) const = 0; // d/dq of Lv, column k = d_k Lv
    virtual MatrixXd Lqq(double t, const VectorXd& q, const VectorXd& v) const = 0;
    virtual VectorXd Ltv(double t, const VectorXd& q, const VectorXd& v) const = 0; // d/dt of Lv
};

// Physical Lagrangian L(t,q,v) = 1/2 |T v - A|_G^2 - V in chart coordinates,
// with T, A, V trigonometric-polynomial fields and G the chart metric.
class LagrangianSystem final : public LagrangianDensity {
public:
    LagrangianSystem(ManifoldModel m, TrigField V,
                     std::vector<TrigField> A = {},
                     std::vector<std::vector<TrigField>> T = {});

    const ManifoldModel& manifold() const { return manifold_; }
    int dim() const override { return manifold_.dim(); }

    double L(double t, const VectorXd& q, const VectorXd& v) const override;
    VectorXd Lv(double t, const VectorXd& q, const VectorXd& v) const override;
    MatrixXd Lvv(double t, const VectorXd& q, const VectorXd& v) const override;
    VectorXd Lq(double t, const VectorXd& q, const VectorXd& v) const override;
    MatrixXd Lqv(double t, const VectorXd& q, const VectorXd& v) const override;
    MatrixXd Lqq(double t, const VectorXd& q, const VectorXd& v) const override;
    VectorXd Ltv(double t, const VectorXd& q, const VectorXd& v) const override;

    MatrixXd T_at(double t, const VectorXd& q) const;
    VectorXd A_at(double t, const VectorXd& q) const;
    double V_at(double t, const VectorXd& q) const { return V_.eval(t, q); }
    MatrixXd T_dq(double t, const VectorXd& q, int k) const;
    MatrixXd T_dqq(double t, const VectorXd& q, int k, int l) const;
    VectorXd A_dq(double t, const VectorXd& q, int k) const;
    VectorXd A_dqq(double t, const VectorXd& q, int k, int l) const;
    VectorXd V_dq(double t, const VectorXd& q) const { return V_.dq(t, q); }
    MatrixXd V_dqq(double t, const VectorXd& q) const { return V_.dqq(t, q); }
    bool has_T() const { return !T_.empty(); }
    bool has_A() const { return !A_.empty(); }

private:
    ManifoldModel manifold_;
    TrigField V_;
    std::vector<TrigField> A_;               // n fields or empty
    std::vector<std::vector<TrigField>> T_;  // n x n fields or empty (identity)
};

// Legendre-dual Hamiltonian H(t,q,p) = 1/2 p^T K p + p.b + V,
// K = (T^T G T)^{-1}, b = T^{-1} A.  Derivatives are analytic.
class HamiltonianSystem {
public:
    explicit HamiltonianSystem(std::shared_ptr<const LagrangianSystem> dual);

    const LagrangianSystem& dual() const { return *dual_; }
    const ManifoldModel& manifold() const { return dual_->manifold(); }
    int dim() const { return dual_->dim(); }

    double H(double t, const VectorXd& q, const VectorXd& p) const;
    VectorXd Hp(double t, const VectorXd& q, const VectorXd& p) const;
    VectorXd Hq(double t, const VectorXd& q, const VectorXd& p) const;
    MatrixXd Hpp(double t, const VectorXd& q, const VectorXd& p) const;
    MatrixXd Hqp(double t, const VectorXd& q, const VectorXd& p) const; // column k = d_{q_k} Hp
    MatrixXd Hqq(double t, const VectorXd& q, const VectorXd& p) const;

    // (qdot, pdot) = (Hp, -Hq)
    void vector_field(double t, const VectorXd& q, const VectorXd& p,
                      VectorXd& qdot, VectorXd& pdot) const;

    // symmetric Hessian in (q,p) block order, for the variational equation
    MatrixXd hessian(double t, const VectorXd& q, const VectorXd& p) const;

private:
    std::shared_ptr<const LagrangianSystem> dual_;
};

struct ConvexityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fiberwise Legendre transform at a point: p = dL/dv, value = p.v - L.
struct LegendrePoint {
    VectorXd p;
    double H_value;
};
LegendrePoint legendre(const LagrangianSystem& L, double t, const VectorXd& q,
                       const VectorXd& v);

// Inverse transform by Newton iteration on the strictly convex fiber problem.
VectorXd inverse_legendre(const HamiltonianSystem& H, double t, const VectorXd& q,
                          const VectorXd& p, int max_iter = 50);

// Chart acceleration a = Lvv^{-1} (Lq - Lqv v - Ltv); the Euler-Lagrange
// equation as a second-order ODE in the chart.
VectorXd euler_lagrange_accel(const LagrangianSystem& L, double t, const VectorXd& q,
                              const VectorXd& v);

// --- discretized loops ------------------------------------------------------

enum class BoundaryClass { Periodic, FixedEnds };

// Broken-curve loop: nodes q.row(j) at t_j = j/N, j = 0..N, chart coordinates
// kept unwrapped so the torus winding is q.row(N) - q.row(0).
struct DiscretizedLoop {
    BoundaryClass bc = BoundaryClass::Periodic;
    Eigen::MatrixXd q;

    int segments() const { return static_cast<int>(q.rows()) - 1; }
    int dim() const { return static_cast<int>(q.cols()); }
    Eigen::VectorXd winding() const { return q.row(segments()) - q.row(0); }
};

// Loop in T*M on the same grid: q at nodes, p at segment midpoints.  The
// midpoint slots are exactly the quadrature slots of the two actions, which
// is what makes the duality gap vanish identically on Legendre lifts.
struct PhaseLoop {
    BoundaryClass bc = BoundaryClass::Periodic;
    Eigen::MatrixXd q;     // (N+1) x n
    Eigen::MatrixXd pmid;  // N x n

    int segments() const { return static_cast<int>(pmid.rows()); }
    int dim() const { return static_cast<int>(q.cols()); }
};

// midpoint-rule action integrals, O(N^-2) on smooth data
double action_lagrangian(const LagrangianSystem& L, const DiscretizedLoop& loop);
double action_hamiltonian(const HamiltonianSystem& H, const PhaseLoop& x);

// g = E(q-component) - A(x) >= 0 term by term (Fenchel-Young at matched nodes)
double duality_gap(const LagrangianSystem& L, const HamiltonianSystem& H,
                   const PhaseLoop& x);

// nodewise Legendre lift; A(result) == E(loop) up to rounding
PhaseLoop legendre_lift_loop(const LagrangianSystem& L, const DiscretizedLoop& loop);

// --- growth-condition certificates ------------------------------------------

struct GrowthGrid {
    int t_samples = 8;
    int q_samples_per_dim = 8;
    int v_samples = 24;   // radial+direction samples
    double P_max = 10.0;  // fiber bound
};

struct GrowthReport {
    bool ok = true;
    // Lagrangian constants
    double l0 = 0, l1 = 0;
    // Hamiltonian constants
    double h0 = 0, h1 = 0, h2 = 0;
    double worst_margin = 0;
    double worst_t = 0;
    VectorXd worst_q, worst_fiber;
    std::string message;
};

GrowthReport check_growth_lagrangian(const LagrangianDensity& L, int dim,
                                     const GrowthGrid& grid);
GrowthReport check_growth_hamiltonian(const HamiltonianSystem& H, const GrowthGrid& grid);

} // namespace loopmorse
