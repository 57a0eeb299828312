#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace loopmorse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ManifoldKind { FlatTorus, EmbeddedSphere };

// Geometry backend. Supported models: flat torus T^n (n <= 4) with the unit
// period lattice, and the round S^2 embedded in R^3.  Charts are global for
// the torus; the sphere uses the stereographic chart from the south pole,
// which covers everything except the north pole.
class ManifoldModel {
public:
    static ManifoldModel flat_torus(int n);
    static ManifoldModel sphere2();

    ManifoldKind kind() const { return kind_; }
    int dim() const { return n_; }
    int embed_dim() const { return embed_dim_; }

    bool in_chart(const VectorXd& q) const;
    void require_chart(const VectorXd& q) const;

    // chart metric G(q), its first and second partial derivatives
    MatrixXd metric(const VectorXd& q) const;
    MatrixXd metric_dq(const VectorXd& q, int k) const;
    MatrixXd metric_dqq(const VectorXd& q, int k, int l) const;

    // Gamma[k](i,j) = Gamma^k_{ij}, Levi-Civita in the chart
    std::vector<MatrixXd> christoffel(const VectorXd& q) const;

    // sphere: chart -> unit vector in R^3 (|result| = 1 exactly up to rounding);
    // torus: identity
    VectorXd embed(const VectorXd& q) const;

    // nodewise chart distance accounting for the torus lattice
    double chart_distance(const VectorXd& a, const VectorXd& b) const;

private:
    ManifoldModel(ManifoldKind k, int n, int ed) : kind_(k), n_(n), embed_dim_(ed) {}

    ManifoldKind kind_;
    int n_;
    int embed_dim_;
};

// Orthonormal tangent frames along a loop: frames[i] is n x n, columns are
// G-orthonormal tangent vectors at nodes[i].
struct FrameLoop {
    bool periodic = true;
    std::vector<MatrixXd> frames;
};

// Parallel transport of v0 along the sampled chart curve (rows of `nodes`);
// fixed-step RK4 per segment at the curve's own resolution.
VectorXd parallel_transport(const ManifoldModel& m, const Eigen::MatrixXd& nodes,
                            const VectorXd& v0, int substeps = 8);

// G-orthonormal periodic frame along a closed sampled loop
// (nodes.row(last) is identified with nodes.row(0)): parallel transport of a
// Gram-Schmidt start frame followed by a t-interpolated rotation that kills
// the holonomy.  Requires the holonomy to land in SO(n), which orientability
// guarantees.
FrameLoop periodic_orthonormal_frame(const ManifoldModel& m, const Eigen::MatrixXd& nodes);

// Free-endpoint variant (no closure correction).
FrameLoop transported_frame(const ManifoldModel& m, const Eigen::MatrixXd& nodes);

// worst orthonormality residual max_i |F_i^T G F_i - I|
double frame_orthonormality_residual(const ManifoldModel& m, const Eigen::MatrixXd& nodes,
                                     const FrameLoop& fl);

} // namespace loopmorse
