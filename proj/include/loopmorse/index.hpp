#pragma once

#include <vector>

#include "loopmorse/manifold.hpp"

namespace loopmorse {

struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// standard complex structure [[0, I], [-I, 0]] in (q,p) block order
MatrixXd standard_J(int n);
// omega(x,y) = (J0 x) . y, the dp ^ dq pairing
double omega_pairing(const MatrixXd& J0, const VectorXd& x, const VectorXd& y);

// Path in Sp(2n) sampled uniformly on [0,1], gamma(0) = I.
struct SymplecticPath {
    int n = 1;
    std::vector<MatrixXd> samples;

    double symplectic_residual() const;
    double endpoint_margin() const; // min |eig(gamma(1)) - 1|
};

// Path of Lagrangian frames: 2n x n, full rank, isotropic.
struct LagrangianPath {
    int n = 1;
    std::vector<MatrixXd> frames;

    double isotropy_residual() const;
};

LagrangianPath vertical_lagrangian_constant(int n, int samples);

// Conley-Zehnder index by the crossing-form method: at each time where
// gamma(t) has eigenvalue 1, the form <S(t) v, v> on the kernel with
// S = -J0 gamma' gamma^{-1}; interior crossings count their full signature,
// t = 0 counts half.  Calibrated against the two normalization families and
// additive under loop multiplication.
int conley_zehnder(const SymplecticPath& path);

// Relative Maslov index of a pair of Lagrangian paths; the result is a
// half-integer returned as double (0.5, -0.5, 1.5, ...).
double relative_maslov(const LagrangianPath& l1, const LagrangianPath& l2);

// Vertical-preserving unitary trivialization along a base loop.  In chart
// coordinates Phi(t) = N(t)^{-1} diag(R(t), R(t)) where N = blockdiag(G^{1/2},
// G^{-1/2}) normalizes the metric and R in SO(n) comes from the transported
// orthonormal frame; Phi is symplectic, unitary in the normalized coordinates,
// and maps lambda_0 to the vertical subspace by block structure.
struct Trivialization {
    std::vector<MatrixXd> N;        // 2n x 2n normalizers per sample
    std::vector<MatrixXd> R;        // n x n rotations per sample
    bool periodic = true;

    int samples() const { return static_cast<int>(R.size()); }
    MatrixXd chart_frame(int i) const;      // Phi(t_i) in chart coordinates
    double unitarity_residual() const;      // max |R^T R - I|
    double verticality_residual() const;    // max |upper-right block of Phi|
    bool orientation_positive() const;      // det R > 0 throughout
};

enum class OrbitBoundary { Periodic, FixedEnds };

// base_nodes: (N+1) x n chart points of the underlying loop/path
Trivialization vertical_trivialization(const ManifoldModel& m,
                                       const Eigen::MatrixXd& base_nodes,
                                       OrbitBoundary bc);

// Maslov index of an orbit from its sampled linearized flow Dphi^t (chart
// coordinates, same grid as the trivialization).  Periodic: Conley-Zehnder of
// the conjugated path.  Fixed ends: relative Maslov of the vertical image
// minus n/2 (an integer by the nondegeneracy of the endpoint).
int maslov_of_orbit(const std::vector<MatrixXd>& dphi_path, const Trivialization& triv,
                    OrbitBoundary bc);

// conjugated path gamma_Phi(t) = Phi(t)^{-1} Dphi^t Phi(0)
SymplecticPath conjugate_by_trivialization(const std::vector<MatrixXd>& dphi_path,
                                           const Trivialization& triv);

} // namespace loopmorse
