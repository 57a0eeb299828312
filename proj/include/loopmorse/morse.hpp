#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "loopmorse/orbits.hpp"
#include "loopmorse/smith.hpp"

namespace loopmorse {

struct TransversalityWarning {
    int from_gen = -1;
    int to_gen = -1;
    std::string note;
};

struct FlowParams {
    double r0 = 1e-3;              // unstable-sphere radius in the W^{1,2} norm
    double armijo = 1e-4;
    double grad_tol = 1e-8;
    double match_tol = 1e-5;       // basin attribution distance
    double saddle_visit_tol = 1e-4;
    int max_steps = 400000;
    double step0 = 0.5;
    int sphere_samples = 64;       // S^1 resolution for index-2 sources
    int bisect_depth = 40;
    double action_floor = -1e9;    // exiting the window counts as divergent
    double precond_scale = 1.0;    // flow metric knob: (I + scale * A)
    int snapshot_every = 25;
    bool serial = false;
};

// factorized W^{1,2} preconditioner (I + s A) for one grid
class W12Preconditioner {
public:
    W12Preconditioner(int N, BoundaryClass bc, double scale);

    // stacked free-node field -> preconditioned field
    VectorXd apply(const VectorXd& g, int ndim) const;
    int free_count() const { return nf_; }
    double grid_h() const { return h_; }

private:
    int nf_;
    double h_;
    Eigen::PartialPivLU<MatrixXd> lu_;
};

// gradient of E with respect to the discrete <<.,.>>_1 metric
VectorXd w12_gradient(const LagrangianSystem& L, const DiscretizedLoop& loop,
                      const W12Preconditioner& P);
double w12_norm(const DiscretizedLoop& loop, const VectorXd& field);
double loop_w12_distance(const ManifoldModel& m, const DiscretizedLoop& a,
                         const DiscretizedLoop& b);

struct FlowSnapshot {
    double E;
    Eigen::MatrixXd q;
};

struct FlowOutcome {
    enum class Kind { Converged, Unmatched, Divergent, Budget } kind = Kind::Budget;
    int generator = -1;       // index into the generator list when matched
    double final_grad = 0;
    double final_E = 0;
    double accumulated_drop = 0;
    long steps = 0;
    std::vector<FlowSnapshot> snapshots; // sparse, strictly decreasing E
};

FlowOutcome flow_to_limit(const LagrangianSystem& L, DiscretizedLoop loop,
                          const std::vector<CriticalPoint>& generators,
                          const FlowParams& params, const W12Preconditioner& P);

struct FlowLine {
    int source = -1;
    int target = -1;
    int sign = 0;
    double energy_drop = 0;
    std::vector<FlowSnapshot> snapshots;
};

struct CountResult {
    long long count = 0;       // n(x,y)
    std::vector<FlowLine> witnesses;
    std::vector<TransversalityWarning> warnings;
};

// signed count of isolated connecting flow lines from x (index k) to y (index
// k-1); sphere sampling + bisection on basin boundaries for k = 2
CountResult count_connecting_orbits(const LagrangianSystem& L, int x_id, int y_id,
                                    const std::vector<CriticalPoint>& generators,
                                    const FlowParams& params);

struct MorseComplexData {
    struct ClassBlock {
        Eigen::VectorXi homotopy;
        std::vector<int> gen_ids;            // sorted by (action, lex)
        int top_index = 0;
        std::vector<long> ranks;             // per degree 0..top_index
        std::vector<IntMatrix> boundary;     // boundary[k]: CM_k -> CM_{k-1}
    };

    std::vector<CriticalPoint> generators;
    std::vector<ClassBlock> classes;
    std::vector<FlowLine> witnesses;
    std::vector<TransversalityWarning> warnings;
    int Nt = 0;
    double precond_scale = 1.0;
    std::uint64_t seed = 0;
};

struct BoundarySquareError : std::runtime_error {
    std::string offending_chain;
    BoundarySquareError(const std::string& msg, std::string chain)
        : std::runtime_error(msg), offending_chain(std::move(chain)) {}
};

MorseComplexData assemble_complex(const LagrangianSystem& L,
                                  const std::vector<CriticalPoint>& generators,
                                  const FlowParams& params);

struct ClassHomology {
    Eigen::VectorXi homotopy;
    std::vector<HomologyGroup> groups; // per degree
};

std::vector<ClassHomology> homology(const MorseComplexData& data);

MorseComplexData filtered_subcomplex(const MorseComplexData& data, double a);

std::string homotopy_key(const Eigen::VectorXi& h);

} // namespace loopmorse
