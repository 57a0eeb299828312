#pragma once

#include <complex>
#include <string>
#include <vector>

#include "loopmorse/index.hpp"

namespace loopmorse {

enum class CRDomain { Cylinder, Strip, HalfCylinder, HalfStrip };

// s-dependent symmetric coefficient family with L-infinity limits; the
// acceptance families are all t-independent
struct CoefficientFamily {
    MatrixXd Sm, Sp; // limits at s = -inf / +inf (equal for constant families)

    static CoefficientFamily constant(const MatrixXd& S) { return {S, S}; }
    static CoefficientFamily theta_id(int n, double theta);
    static CoefficientFamily q_alpha(double alpha); // n = 1 hyperbolic block
    static CoefficientFamily interpolated(const MatrixXd& Sm, const MatrixXd& Sp) {
        return {Sm, Sp};
    }

    MatrixXd eval(double s) const; // tanh step between the limits
    bool is_constant() const { return (Sp - Sm).norm() == 0; }
};

struct OperatorSpec {
    CRDomain domain = CRDomain::HalfCylinder;
    int n = 1;
    CoefficientFamily S;
    int K = 8;          // temporal modes
    double S0 = 8.0;    // s-interval half-width (full) or length (half)
    double h = 1.0 / 16; // s-grid step

    std::string label;
};

// one temporal mode of the block-diagonalized truncation
struct ModeBlock {
    int mode = 0;
    int weight = 1; // complex cylinder modes k >= 1 represent a +/-k pair
    Eigen::MatrixXcd A;
};

struct AssembledOperator {
    OperatorSpec spec;
    std::vector<ModeBlock> blocks;
    std::vector<double> s_grid;
    long rows = 0, cols = 0; // weighted totals

    // nondegeneracy margins of the limit paths
    double limit_margin_minus = 0, limit_margin_plus = 0;
};

AssembledOperator assemble(const OperatorSpec& spec);

// plain-text sparse triplets (row col value), real representation per mode
void dump_operator(const AssembledOperator& op, const std::string& path);

struct NumericIndexResult {
    int dim_ker = 0;
    int dim_coker = 0;
    long index = 0;
    bool clear_gap = true;
    double gap_ratio = 0;      // first kept / last dropped singular value
    double sigma_below = 0;    // largest singular value counted as zero
    double sigma_above = 0;    // smallest singular value counted as nonzero
    bool stable = false;       // unchanged under the 50% refinement
};

NumericIndexResult numeric_index(const OperatorSpec& spec, bool check_stability = true);

// index predicted by the asymptotic-path formulas, via the index module
int predicted_index(const OperatorSpec& spec);

// analytic kernel dimension/burst for the theta families (the constant
// coefficient claims); used by tests and the kernel subspace check
int analytic_kernel_dim(const OperatorSpec& spec);
int analytic_cokernel_dim(const OperatorSpec& spec);

// principal angle (radians) between the numeric kernel and the closed-form
// kernel sampled on the same grid; throws on dimension mismatch
double kernel_basis_check(const OperatorSpec& spec);

// smallest pooled singular value of the assembled truncation
double smallest_singular_value(const OperatorSpec& spec);

} // namespace loopmorse
