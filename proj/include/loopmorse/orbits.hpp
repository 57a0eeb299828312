#pragma once

#include <optional>
#include <vector>

#include "loopmorse/index.hpp"
#include "loopmorse/systems.hpp"

namespace loopmorse {

struct EscapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed-step RK4 flow of X_H with the variational equation riding along.
struct FlowWithMonodromy {
    std::vector<VectorXd> x;      // phase points (2n), sampled at every step
    std::vector<MatrixXd> dphi;   // Dphi^t at the same times
    double t0 = 0, t1 = 1;

    const VectorXd& endpoint() const { return x.back(); }
    const MatrixXd& monodromy() const { return dphi.back(); }
};

FlowWithMonodromy integrate_with_monodromy(const HamiltonianSystem& H, const VectorXd& x0,
                                           double t0, double t1, int steps,
                                           double escape_bound = 1e6);

double symplecticity_residual(const MatrixXd& dphi, int n);

// A certified generator of the Morse complex.
struct CriticalPoint {
    DiscretizedLoop loop;
    Eigen::VectorXi homotopy;     // winding vector (periodic) or path class (fixed ends)
    double action = 0;            // E
    int morse_index = -1;
    bool index_stable = false;
    double nondeg_margin = 0;
    double residual = 0;          // discrete EL residual, h-scaled sup norm
    MatrixXd monodromy;           // Dphi^1 along the Legendre lift
    std::vector<MatrixXd> dphi_path;
    Eigen::MatrixXd flow_base;    // base points of the lift at the dphi sampling grid
    PhaseLoop lift;
    double lift_action = 0;       // A of the lift
    double hamilton_residual = 0;
};

struct QuarantinedCandidate {
    DiscretizedLoop loop;
    Eigen::VectorXi homotopy;
    double action = 0;
    double nondeg_margin = 0;
    std::string reason;
};

struct OrbitSearchConfig {
    int Nt = 64;
    int seed_count = 48;
    double action_bound = 10.0;
    std::uint64_t rng_seed = 0;
    int monodromy_steps = 512;
    double quarantine_margin = 1e-6;
    double newton_tol = 1e-11;      // h-scaled discrete EL residual target
    int newton_max_iter = 120;
    double merge_distance = 1e-6;
    double hamilton_cert_tol = 1e-6;
    bool serial = false;
};

struct OrbitSearchResult {
    std::vector<CriticalPoint> generators; // sorted by (action, lexicographic nodes)
    std::vector<QuarantinedCandidate> quarantined;
    int seeds_converged = 0;
};

// Multi-start damped Newton on the discrete Euler-Lagrange system over the
// broken-curve loops of a given winding class, then monodromy certification.
// Flat-torus charts only.
OrbitSearchResult find_periodic_orbits(const LagrangianSystem& L, const HamiltonianSystem& H,
                                       const Eigen::VectorXi& winding,
                                       const OrbitSearchConfig& cfg);

// Shooting on the initial momentum followed by a discrete polish, for the
// fixed-endpoint problem q(0) = q0, q(1) = q1 + class (unwrapped chart target).
OrbitSearchResult find_bvp_solutions(const LagrangianSystem& L, const HamiltonianSystem& H,
                                     const VectorXd& q0, const VectorXd& q1,
                                     const Eigen::VectorXi& path_class,
                                     const OrbitSearchConfig& cfg);

// --- discrete second variation ----------------------------------------------

// discrete EL residual vector (free node slots only) and Hessian of E
VectorXd discrete_el_residual(const LagrangianSystem& L, const DiscretizedLoop& loop);
MatrixXd discrete_el_hessian(const LagrangianSystem& L, const DiscretizedLoop& loop);

struct MorseIndexResult {
    int index = -1;
    bool stable = false;
    double smallest_abs_eig = 0;
};

// negative-eigenvalue count of the discrete second variation, declared stable
// when one dyadic refinement agrees; near-zero eigenvalues at both
// resolutions raise DegeneracyError
MorseIndexResult morse_index(const LagrangianSystem& L, const DiscretizedLoop& loop,
                             double zero_tol = 1e-8);

// Newton polish of a loop toward the discrete critical point; returns the
// achieved residual
double newton_polish(const LagrangianSystem& L, DiscretizedLoop& loop, double tol,
                     int max_iter);

// --- index verification -------------------------------------------------------

struct IndexTheoremReport {
    int m = 0;
    int mu = 0;
    bool equal = false;
};

IndexTheoremReport verify_index_theorem(const LagrangianSystem& L,
                                        const HamiltonianSystem& H, const CriticalPoint& cp);

// Maslov index of a certified critical point (conjugates the monodromy path by
// the vertical trivialization along the lift).
int orbit_maslov(const HamiltonianSystem& H, const CriticalPoint& cp);

} // namespace loopmorse
