#include "loopmorse/fredholm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

namespace loopmorse {

namespace {
using Cplx = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;
constexpr double kHyperbolicityMargin = 1e-6;
} // namespace

CoefficientFamily CoefficientFamily::theta_id(int n, double theta) {
    MatrixXd S = theta * MatrixXd::Identity(2 * n, 2 * n);
    return {S, S};
}

CoefficientFamily CoefficientFamily::q_alpha(double alpha) {
    MatrixXd S(2, 2);
    S << 0, alpha, alpha, 0;
    return {S, S};
}

MatrixXd CoefficientFamily::eval(double s) const {
    if (is_constant()) return Sp;
    double sigma = 0.5 * (1.0 + std::tanh(s));
    return Sm + sigma * (Sp - Sm);
}

namespace {

bool is_half(CRDomain d) { return d == CRDomain::HalfCylinder || d == CRDomain::HalfStrip; }
bool is_strip(CRDomain d) { return d == CRDomain::Strip || d == CRDomain::HalfStrip; }

// complex mode matrix: cylinder mode k gives 2pi k J0 rotation; strip mode h
// gives the sine/cosine coupling [[S11, -h pi I], [-h pi I, S22]]
Eigen::MatrixXcd mode_matrix(const OperatorSpec& spec, int mode, const MatrixXd& S) {
    const int n = spec.n;
    if (!is_strip(spec.domain)) {
        MatrixXd J0 = standard_J(n);
        return S.cast<Cplx>() + Cplx(0, 2 * kPi * mode) * J0.cast<Cplx>();
    }
    if (mode == 0) return S.bottomRightCorner(n, n).cast<Cplx>();
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    B.topLeftCorner(n, n) = S.topLeftCorner(n, n).cast<Cplx>();
    B.bottomRightCorner(n, n) = S.bottomRightCorner(n, n).cast<Cplx>();
    B.topRightCorner(n, n) = Cplx(-mode * kPi, 0) * Eigen::MatrixXcd::Identity(n, n);
    B.bottomLeftCorner(n, n) = Cplx(-mode * kPi, 0) * Eigen::MatrixXcd::Identity(n, n);
    return B;
}

void require_block_diag_for_strip(const OperatorSpec& spec) {
    if (!is_strip(spec.domain)) return;
    const int n = spec.n;
    for (const MatrixXd* S : {&spec.S.Sm, &spec.S.Sp}) {
        if (S->topRightCorner(n, n).cwiseAbs().maxCoeff() > 0 ||
            S->bottomLeftCorner(n, n).cwiseAbs().maxCoeff() > 0)
            throw std::invalid_argument(
                "strip domains require block-diagonal S (sine/cosine basis decoupling)");
    }
}

// rows annihilating the forbidden spectral components of the limit matrix:
// want_unstable selects Re > 0 (the components that must vanish for decay as
// s -> +inf); !want_unstable selects Re < 0 (decay as s -> -inf)
Eigen::MatrixXcd spectral_rows(const Eigen::MatrixXcd& B, bool want_unstable,
                               double& margin) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(B);
    Eigen::MatrixXcd Vi = es.eigenvectors().inverse();
    std::vector<int> pick;
    margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < B.rows(); ++i) {
        double re = es.eigenvalues()[i].real();
        margin = std::min(margin, std::abs(re));
        if ((want_unstable && re > 0) || (!want_unstable && re < 0)) pick.push_back(i);
    }
    Eigen::MatrixXcd rows(static_cast<int>(pick.size()), B.cols());
    for (size_t i = 0; i < pick.size(); ++i) rows.row(static_cast<int>(i)) = Vi.row(pick[i]);
    return rows;
}

} // namespace

AssembledOperator assemble(const OperatorSpec& spec) {
    require_block_diag_for_strip(spec);
    AssembledOperator out;
    out.spec = spec;

    const double s_lo = is_half(spec.domain) ? 0.0 : -spec.S0;
    const double s_hi = spec.S0;
    const int Ms = std::max(4, static_cast<int>(std::lround((s_hi - s_lo) / spec.h)));
    out.s_grid.resize(Ms + 1);
    for (int m = 0; m <= Ms; ++m) out.s_grid[m] = s_lo + (s_hi - s_lo) * m / Ms;
    const double h = (s_hi - s_lo) / Ms;

    // limit-path nondegeneracy margins, reported on rejection
    {
        auto gamma_margin = [&](const MatrixXd& S) -> double {
            MatrixXd J0 = standard_J(spec.n);
            int steps = 512;
            MatrixXd g = MatrixXd::Identity(2 * spec.n, 2 * spec.n);
            for (int i = 0; i < steps; ++i) {
                auto rhs = [&](const MatrixXd& gg) -> MatrixXd { return J0 * S * gg; };
                MatrixXd k1 = rhs(g), k2 = rhs(g + 0.5 / steps * k1),
                         k3 = rhs(g + 0.5 / steps * k2), k4 = rhs(g + 1.0 / steps * k3);
                g += (1.0 / steps / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
            }
            if (!is_strip(spec.domain)) {
                Eigen::EigenSolver<MatrixXd> es(g);
                double m = std::numeric_limits<double>::infinity();
                for (int i = 0; i < 2 * spec.n; ++i)
                    m = std::min(m, std::abs(es.eigenvalues()[i] - Cplx(1, 0)));
                return m;
            }
            Eigen::JacobiSVD<MatrixXd> svd(g.topRightCorner(spec.n, spec.n));
            return svd.singularValues().minCoeff();
        };
        out.limit_margin_minus = gamma_margin(spec.S.Sm);
        out.limit_margin_plus = gamma_margin(spec.S.Sp);
        double worst = std::min(out.limit_margin_minus, out.limit_margin_plus);
        if (worst < 1e-6)
            throw DegeneracyError("assemble: degenerate limit path, margin " +
                                  std::to_string(worst));
    }

    const int mode_lo = 0;
    const int mode_hi = spec.K;
    for (int mode = mode_lo; mode <= mode_hi; ++mode) {
        const bool strip = is_strip(spec.domain);
        const int bdim = (strip && mode == 0) ? spec.n : 2 * spec.n;

        Eigen::MatrixXcd Bp = mode_matrix(spec, mode, spec.S.eval(1e9)).topLeftCorner(bdim, bdim);
        Eigen::MatrixXcd Bm = mode_matrix(spec, mode, spec.S.eval(-1e9)).topLeftCorner(bdim, bdim);

        double margin_p = 0, margin_m = 0;
        Eigen::MatrixXcd far_rows = spectral_rows(Bp, /*want_unstable=*/true, margin_p);
        Eigen::MatrixXcd near_rows;
        if (!is_half(spec.domain)) near_rows = spectral_rows(Bm, /*want_unstable=*/false, margin_m);
        if (margin_p < kHyperbolicityMargin ||
            (!is_half(spec.domain) && margin_m < kHyperbolicityMargin))
            throw DegeneracyError("assemble: limit matrix not hyperbolic at mode " +
                                  std::to_string(mode));

        // lambda_0 boundary rows at s = 0 for the half domains: first
        // components vanish (u_1(0,t) = 0); strip mode 0 carries no u_1 part
        int bc0 = 0;
        if (is_half(spec.domain)) bc0 = (strip && mode == 0) ? 0 : spec.n;

        const long rows = static_cast<long>(bdim) * Ms + bc0 + far_rows.rows() +
                          (is_half(spec.domain) ? 0 : near_rows.rows());
        const long cols = static_cast<long>(bdim) * (Ms + 1);
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, cols);

        // box scheme: midpoint collocation on each s-interval
        for (int m = 0; m < Ms; ++m) {
            double smid = 0.5 * (out.s_grid[m] + out.s_grid[m + 1]);
            Eigen::MatrixXcd B = mode_matrix(spec, mode, spec.S.eval(smid)).topLeftCorner(bdim, bdim);
            for (int r = 0; r < bdim; ++r) {
                for (int c = 0; c < bdim; ++c) {
                    Cplx coupled = -0.5 * B(r, c);
                    A(m * bdim + r, m * bdim + c) += coupled - (r == c ? 1.0 / h : 0.0);
                    A(m * bdim + r, (m + 1) * bdim + c) += coupled + (r == c ? 1.0 / h : 0.0);
                }
            }
        }
        long row0 = static_cast<long>(bdim) * Ms;
        for (int j = 0; j < bc0; ++j) A(row0 + j, j) = 1.0; // u_1 components at s = 0
        row0 += bc0;
        if (!is_half(spec.domain)) {
            for (int r = 0; r < near_rows.rows(); ++r)
                for (int c = 0; c < bdim; ++c) A(row0 + r, c) = near_rows(r, c);
            row0 += near_rows.rows();
        }
        for (int r = 0; r < far_rows.rows(); ++r)
            for (int c = 0; c < bdim; ++c) A(row0 + r, Ms * bdim + c) = far_rows(r, c);

        ModeBlock blk;
        blk.mode = mode;
        blk.weight = (!strip && mode >= 1) ? 2 : 1;
        blk.A = std::move(A);
        out.rows += blk.weight * rows;
        out.cols += blk.weight * cols;
        out.blocks.push_back(std::move(blk));
    }
    return out;
}

void dump_operator(const AssembledOperator& op, const std::string& path) {
    std::ofstream f(path);
    long row_off = 0, col_off = 0;
    for (const auto& blk : op.blocks) {
        const long R = blk.A.rows(), C = blk.A.cols();
        // real representation [[Re, -Im], [Im, Re]] per mode block
        for (long i = 0; i < R; ++i)
            for (long j = 0; j < C; ++j) {
                Cplx v = blk.A(i, j);
                if (v.real() != 0) {
                    f << row_off + i << " " << col_off + j << " " << v.real() << "\n";
                    f << row_off + R + i << " " << col_off + C + j << " " << v.real() << "\n";
                }
                if (v.imag() != 0) {
                    f << row_off + i << " " << col_off + C + j << " " << -v.imag() << "\n";
                    f << row_off + R + i << " " << col_off + j << " " << v.imag() << "\n";
                }
            }
        row_off += 2 * R;
        col_off += 2 * C;
    }
}

namespace {

struct PooledSpectrum {
    std::vector<double> sigmas; // weighted multiset, ascending
    long rows = 0, cols = 0;
};

PooledSpectrum pooled_singular_values(const AssembledOperator& op) {
    PooledSpectrum ps;
    ps.rows = op.rows;
    ps.cols = op.cols;
    std::vector<std::vector<double>> per_block(op.blocks.size());
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < static_cast<int>(op.blocks.size()); ++b) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(op.blocks[b].A);
        const auto& sv = svd.singularValues();
        auto& list = per_block[b];
        for (int i = 0; i < sv.size(); ++i)
            for (int w = 0; w < op.blocks[b].weight; ++w) list.push_back(sv[i]);
    }
    for (auto& list : per_block)
        ps.sigmas.insert(ps.sigmas.end(), list.begin(), list.end());
    std::sort(ps.sigmas.begin(), ps.sigmas.end());
    return ps;
}

struct GapCount {
    int small_count = 0;
    bool clear = true;
    double ratio = 0, below = 0, above = 0;
};

// numerical rank by the largest relative gap among singular values below the
// 1e-3 relative threshold
GapCount gap_detect(const std::vector<double>& sig) {
    GapCount out;
    if (sig.empty()) return out;
    double smax = sig.back();
    double cutoff = 1e-3 * smax;
    int cand = 0;
    while (cand < static_cast<int>(sig.size()) && sig[cand] < cutoff) ++cand;
    if (cand == 0) {
        out.small_count = 0;
        out.clear = true;
        out.above = sig.front();
        return out;
    }
    // largest relative jump within the candidate range, including the jump out
    double best = -1;
    int best_i = 0;
    for (int i = 0; i < cand; ++i) {
        double lo = std::max(sig[i], 1e-300);
        double hi = (i + 1 < static_cast<int>(sig.size())) ? sig[i + 1] : smax;
        double r = hi / lo;
        if (r >= best) {
            best = r;
            best_i = i;
        }
    }
    out.small_count = best_i + 1;
    out.ratio = best;
    out.below = sig[best_i];
    out.above = (best_i + 1 < static_cast<int>(sig.size())) ? sig[best_i + 1] : smax;
    out.clear = best > 1e3;
    return out;
}

NumericIndexResult numeric_index_once(const OperatorSpec& spec) {
    AssembledOperator op = assemble(spec);
    PooledSpectrum ps = pooled_singular_values(op);
    GapCount gc = gap_detect(ps.sigmas);
    NumericIndexResult res;
    long rank = std::min(ps.rows, ps.cols) - gc.small_count;
    res.dim_ker = static_cast<int>(ps.cols - rank);
    res.dim_coker = static_cast<int>(ps.rows - rank);
    res.index = res.dim_ker - res.dim_coker;
    res.clear_gap = gc.clear;
    res.gap_ratio = gc.ratio;
    res.sigma_below = gc.below;
    res.sigma_above = gc.above;
    return res;
}

OperatorSpec refined(const OperatorSpec& spec) {
    OperatorSpec r = spec;
    r.K = (spec.K * 3 + 1) / 2;
    r.S0 = spec.S0 * 1.5;
    r.h = spec.h / 1.5;
    return r;
}

} // namespace

NumericIndexResult numeric_index(const OperatorSpec& spec, bool check_stability) {
    NumericIndexResult res = numeric_index_once(spec);
    if (!res.clear_gap)
        throw ResolutionError("numeric_index: no clear spectral gap, result indeterminate");
    if (check_stability) {
        NumericIndexResult fine = numeric_index_once(refined(spec));
        res.stable = fine.clear_gap && fine.dim_ker == res.dim_ker &&
                     fine.dim_coker == res.dim_coker && fine.index == res.index;
    }
    return res;
}

int predicted_index(const OperatorSpec& spec) {
    const int n = spec.n;
    const MatrixXd J0 = standard_J(n);
    auto gamma_path = [&](const MatrixXd& S) -> SymplecticPath {
        SymplecticPath p;
        p.n = n;
        int steps = 1024;
        p.samples.resize(steps + 1);
        MatrixXd g = MatrixXd::Identity(2 * n, 2 * n);
        p.samples[0] = g;
        double h = 1.0 / steps;
        for (int i = 0; i < steps; ++i) {
            auto rhs = [&](const MatrixXd& gg) -> MatrixXd { return J0 * S * gg; };
            MatrixXd k1 = rhs(g), k2 = rhs(g + 0.5 * h * k1), k3 = rhs(g + 0.5 * h * k2),
                     k4 = rhs(g + h * k3);
            g += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
            p.samples[i + 1] = g;
        }
        return p;
    };
    auto maslov_vert = [&](const SymplecticPath& g) -> double {
        LagrangianPath lam;
        lam.n = n;
        lam.frames.resize(g.samples.size());
        MatrixXd vert = MatrixXd::Zero(2 * n, n);
        vert.bottomRows(n) = MatrixXd::Identity(n, n);
        for (size_t i = 0; i < g.samples.size(); ++i) lam.frames[i] = g.samples[i] * vert;
        return relative_maslov(lam, vertical_lagrangian_constant(n, static_cast<int>(
                                                                        g.samples.size())));
    };

    switch (spec.domain) {
        case CRDomain::HalfCylinder:
            return -conley_zehnder(gamma_path(spec.S.Sp));
        case CRDomain::Cylinder:
            return conley_zehnder(gamma_path(spec.S.Sm)) -
                   conley_zehnder(gamma_path(spec.S.Sp));
        case CRDomain::HalfStrip: {
            double mu = maslov_vert(gamma_path(spec.S.Sp));
            double idx = 0.5 * n - mu;
            return static_cast<int>(std::lround(idx));
        }
        case CRDomain::Strip: {
            double mu_m = maslov_vert(gamma_path(spec.S.Sm));
            double mu_p = maslov_vert(gamma_path(spec.S.Sp));
            return static_cast<int>(std::lround(mu_m - mu_p));
        }
    }
    throw std::logic_error("predicted_index: unknown domain");
}

namespace {

bool theta_family(const OperatorSpec& spec, double& theta) {
    if (!spec.S.is_constant() || spec.n != 1) return false;
    MatrixXd S = spec.S.Sp;
    MatrixXd diff = S - S(0, 0) * MatrixXd::Identity(S.rows(), S.cols());
    if (diff.cwiseAbs().maxCoeff() > 0) return false;
    theta = S(0, 0);
    return true;
}

} // namespace

int analytic_kernel_dim(const OperatorSpec& spec) {
    double th;
    if (!theta_family(spec, th))
        throw std::invalid_argument("analytic kernel known for the theta families only");
    if (spec.domain == CRDomain::HalfCylinder)
        return th > 0 ? 0 : 1 - 2 * static_cast<int>(std::ceil(th / (2 * kPi)));
    if (spec.domain == CRDomain::HalfStrip)
        return th > 0 ? 0 : 1 - static_cast<int>(std::ceil(th / kPi));
    throw std::invalid_argument("analytic kernel known for half domains only");
}

int analytic_cokernel_dim(const OperatorSpec& spec) {
    double th;
    if (!theta_family(spec, th))
        throw std::invalid_argument("analytic cokernel known for the theta families only");
    if (spec.domain == CRDomain::HalfCylinder)
        return th < 0 ? 0 : 1 - 2 * static_cast<int>(std::ceil(-th / (2 * kPi)));
    if (spec.domain == CRDomain::HalfStrip)
        return th < 0 ? 0 : static_cast<int>(std::floor(th / kPi));
    throw std::invalid_argument("analytic cokernel known for half domains only");
}

namespace {

// real-space sampling of a mode-coefficient vector on the (s,t) grid
VectorXd reconstruct_real(const OperatorSpec& spec, const AssembledOperator& op, int block_id,
                          const Eigen::VectorXcd& zhat, int Tt) {
    const int n = spec.n;
    const bool strip = is_strip(spec.domain);
    const int mode = op.blocks[block_id].mode;
    const int bdim = (strip && mode == 0) ? n : 2 * n;
    const int Mpts = static_cast<int>(op.s_grid.size());
    VectorXd out = VectorXd::Zero(static_cast<long>(Mpts) * Tt * 2 * n);
    for (int m = 0; m < Mpts; ++m) {
        Eigen::VectorXcd z = zhat.segment(static_cast<long>(m) * bdim, bdim);
        for (int j = 0; j < Tt; ++j) {
            double t = strip ? static_cast<double>(j) / (Tt - 1) : static_cast<double>(j) / Tt;
            VectorXd u = VectorXd::Zero(2 * n);
            if (!strip) {
                if (mode == 0)
                    for (int c = 0; c < 2 * n; ++c) u[c] = z[c].real();
                else
                    for (int c = 0; c < 2 * n; ++c) {
                        Cplx w = std::exp(Cplx(0, 2 * kPi * mode * t)) * z[c];
                        u[c] = 2 * w.real();
                    }
            } else {
                if (mode == 0)
                    for (int c = 0; c < n; ++c) u[n + c] = z[c].real();
                else
                    for (int c = 0; c < n; ++c) {
                        u[c] = z[c].real() * std::sin(mode * kPi * t);
                        u[n + c] = z[n + c].real() * std::cos(mode * kPi * t);
                    }
            }
            for (int c = 0; c < 2 * n; ++c)
                out[(static_cast<long>(m) * Tt + j) * 2 * n + c] = u[c];
        }
    }
    return out;
}

VectorXd sample_function(const OperatorSpec& spec, const AssembledOperator& op, int Tt,
                         const std::function<VectorXd(double, double)>& f) {
    const int n = spec.n;
    const bool strip = is_strip(spec.domain);
    const int Mpts = static_cast<int>(op.s_grid.size());
    VectorXd out(static_cast<long>(Mpts) * Tt * 2 * n);
    for (int m = 0; m < Mpts; ++m)
        for (int j = 0; j < Tt; ++j) {
            double t = strip ? static_cast<double>(j) / (Tt - 1) : static_cast<double>(j) / Tt;
            VectorXd u = f(op.s_grid[m], t);
            for (int c = 0; c < 2 * n; ++c)
                out[(static_cast<long>(m) * Tt + j) * 2 * n + c] = u[c];
        }
    return out;
}

} // namespace

double kernel_basis_check(const OperatorSpec& spec) {
    double th;
    if (!theta_family(spec, th))
        throw std::invalid_argument("kernel_basis_check: theta family required");
    const int expected = analytic_kernel_dim(spec);

    AssembledOperator op = assemble(spec);
    const int Tt = 64;

    // numeric kernel, reconstructed in real space
    std::vector<VectorXd> numeric;
    for (size_t b = 0; b < op.blocks.size(); ++b) {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(op.blocks[b].A,
                                            Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        double smax = sv.maxCoeff();
        for (int i = 0; i < sv.size(); ++i) {
            if (sv[i] < 1e-3 * smax) {
                Eigen::VectorXcd zhat = svd.matrixV().col(i);
                numeric.push_back(reconstruct_real(spec, op, static_cast<int>(b), zhat, Tt));
                if (op.blocks[b].weight == 2) {
                    // the conjugate-mode partner: multiply by i
                    numeric.push_back(reconstruct_real(spec, op, static_cast<int>(b),
                                                       Cplx(0, 1) * zhat, Tt));
                }
            }
        }
    }
    if (static_cast<int>(numeric.size()) != expected) {
        throw ResolutionError("kernel_basis_check: numeric kernel dim " +
                              std::to_string(numeric.size()) + " vs analytic " +
                              std::to_string(expected));
    }
    if (expected == 0) return 0.0;

    // analytic kernel per the closed-form expansions
    std::vector<VectorXd> analytic;
    auto rot = [&](double ang, const Eigen::Vector2d& z) -> Eigen::Vector2d {
        Eigen::Vector2d out;
        out << std::cos(ang) * z[0] + std::sin(ang) * z[1],
            -std::sin(ang) * z[0] + std::cos(ang) * z[1];
        return out;
    };
    if (spec.domain == CRDomain::HalfCylinder) {
        analytic.push_back(sample_function(spec, op, Tt, [&](double s, double) {
            return VectorXd((Eigen::Vector2d() << 0.0, std::exp(th * s)).finished());
        }));
        int H = -static_cast<int>(std::ceil(th / (2 * kPi)));
        for (int h = 1; h <= H; ++h)
            for (int which = 0; which < 2; ++which) {
                Eigen::Vector2d zeta = which == 0 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
                Eigen::Vector2d zeta2 =
                    which == 0 ? Eigen::Vector2d(-1, 0) : Eigen::Vector2d(0, 1);
                analytic.push_back(sample_function(spec, op, Tt, [&](double s, double t) {
                    Eigen::Vector2d u = std::exp((th - 2 * kPi * h) * s) * rot(2 * kPi * h * t, zeta) +
                                        std::exp((th + 2 * kPi * h) * s) * rot(-2 * kPi * h * t, zeta2);
                    return VectorXd(u);
                }));
            }
    } else if (spec.domain == CRDomain::HalfStrip) {
        analytic.push_back(sample_function(spec, op, Tt, [&](double s, double) {
            return VectorXd((Eigen::Vector2d() << 0.0, std::exp(th * s)).finished());
        }));
        int H = -static_cast<int>(std::ceil(th / kPi));
        for (int h = 1; h <= H; ++h)
            analytic.push_back(sample_function(spec, op, Tt, [&](double s, double t) {
                Eigen::Vector2d e01(0, 1);
                Eigen::Vector2d u = std::exp((th - h * kPi) * s) * rot(h * kPi * t, e01) +
                                    std::exp((th + h * kPi) * s) * rot(-h * kPi * t, e01);
                return VectorXd(u);
            }));
    }

    // principal angle between the two subspaces
    auto orth = [](const std::vector<VectorXd>& v) -> MatrixXd {
        MatrixXd M(v[0].size(), static_cast<long>(v.size()));
        for (size_t i = 0; i < v.size(); ++i) M.col(static_cast<long>(i)) = v[i];
        Eigen::HouseholderQR<MatrixXd> qr(M);
        MatrixXd Q = qr.householderQ() * MatrixXd::Identity(M.rows(), M.cols());
        return Q;
    };
    MatrixXd Q1 = orth(numeric), Q2 = orth(analytic);
    Eigen::BDCSVD<MatrixXd> svd(Q1.transpose() * Q2);
    double cmin = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
    return std::acos(cmin);
}

double smallest_singular_value(const OperatorSpec& spec) {
    AssembledOperator op = assemble(spec);
    PooledSpectrum ps = pooled_singular_values(op);
    return ps.sigmas.empty() ? 0.0 : ps.sigmas.front();
}

} // namespace loopmorse
