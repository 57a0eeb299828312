#include "loopmorse/orbits.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "loopmorse/rng.hpp"

namespace loopmorse {

namespace {

void require_flat(const ManifoldModel& m, const char* who) {
    if (m.kind() != ManifoldKind::FlatTorus)
        throw std::invalid_argument(std::string(who) + ": orbit search runs on FlatTorus models");
}

} // namespace

FlowWithMonodromy integrate_with_monodromy(const HamiltonianSystem& H, const VectorXd& x0,
                                           double t0, double t1, int steps,
                                           double escape_bound) {
    const int n = H.dim();
    const MatrixXd J0 = standard_J(n);
    FlowWithMonodromy out;
    out.t0 = t0;
    out.t1 = t1;
    out.x.reserve(steps + 1);
    out.dphi.reserve(steps + 1);

    VectorXd z = x0;
    MatrixXd M = MatrixXd::Identity(2 * n, 2 * n);
    out.x.push_back(z);
    out.dphi.push_back(M);

    const double h = (t1 - t0) / steps;
    auto rhs = [&](double t, const VectorXd& zz, const MatrixXd& MM, VectorXd& dz,
                   MatrixXd& dM) {
        VectorXd q = zz.head(n), p = zz.tail(n), qdot, pdot;
        H.vector_field(t, q, p, qdot, pdot);
        dz.resize(2 * n);
        dz << qdot, pdot;
        dM = J0 * H.hessian(t, q, p) * MM;
    };

    VectorXd k1z, k2z, k3z, k4z;
    MatrixXd k1M, k2M, k3M, k4M;
    for (int s = 0; s < steps; ++s) {
        double t = t0 + s * h;
        rhs(t, z, M, k1z, k1M);
        rhs(t + 0.5 * h, z + 0.5 * h * k1z, M + 0.5 * h * k1M, k2z, k2M);
        rhs(t + 0.5 * h, z + 0.5 * h * k2z, M + 0.5 * h * k2M, k3z, k3M);
        rhs(t + h, z + h * k3z, M + h * k3M, k4z, k4M);
        z += (h / 6.0) * (k1z + 2 * k2z + 2 * k3z + k4z);
        M += (h / 6.0) * (k1M + 2 * k2M + 2 * k3M + k4M);
        if (!z.allFinite() || z.tail(n).norm() > escape_bound)
            throw EscapeError("integrate_with_monodromy: trajectory escaped the p-bound");
        out.x.push_back(z);
        out.dphi.push_back(M);
    }
    return out;
}

double symplecticity_residual(const MatrixXd& dphi, int n) {
    MatrixXd J0 = standard_J(n);
    return (dphi.transpose() * J0 * dphi - J0).cwiseAbs().maxCoeff();
}

// --- discrete Euler-Lagrange system ----------------------------------------------

namespace {

struct SegmentDerivs {
    VectorXd dA, dB;          // gradient blocks w.r.t. left/right node
    MatrixXd dAA, dAB, dBB;   // Hessian blocks
};

// per-segment derivatives of h * L(t_mid, (a+b)/2, (b-a)/h)
SegmentDerivs segment_derivs(const LagrangianSystem& L, double tmid, double h,
                             const VectorXd& a, const VectorXd& b, bool with_hessian) {
    SegmentDerivs out;
    VectorXd qm = 0.5 * (a + b);
    VectorXd v = (b - a) / h;
    VectorXd Lq = L.Lq(tmid, qm, v);
    VectorXd Lv = L.Lv(tmid, qm, v);
    out.dA = 0.5 * h * Lq - Lv;
    out.dB = 0.5 * h * Lq + Lv;
    if (with_hessian) {
        MatrixXd Lqq = L.Lqq(tmid, qm, v);
        MatrixXd Lqv = L.Lqv(tmid, qm, v); // column k = d_k Lv
        MatrixXd Lvv = L.Lvv(tmid, qm, v);
        MatrixXd LqvT = Lqv.transpose();
        out.dAA = 0.25 * h * Lqq - 0.5 * LqvT - 0.5 * Lqv + Lvv / h;
        out.dBB = 0.25 * h * Lqq + 0.5 * LqvT + 0.5 * Lqv + Lvv / h;
        out.dAB = 0.25 * h * Lqq + 0.5 * LqvT - 0.5 * Lqv - Lvv / h;
    }
    return out;
}

int free_nodes(const DiscretizedLoop& loop) {
    return loop.bc == BoundaryClass::Periodic ? loop.segments() : loop.segments() - 1;
}

// map free-slot index to node index
int node_of_slot(const DiscretizedLoop& loop, int s) {
    return loop.bc == BoundaryClass::Periodic ? s : s + 1;
}

} // namespace

VectorXd discrete_el_residual(const LagrangianSystem& L, const DiscretizedLoop& loop) {
    const int N = loop.segments();
    const int n = loop.dim();
    const double h = 1.0 / N;
    const int nf = free_nodes(loop);
    VectorXd F = VectorXd::Zero(nf * n);
    for (int j = 0; j < N; ++j) {
        SegmentDerivs sd =
            segment_derivs(L, (j + 0.5) * h, h, loop.q.row(j), loop.q.row(j + 1), false);
        // scatter into free slots; periodic case identifies node N with node 0
        auto add = [&](int node, const VectorXd& g) {
            if (loop.bc == BoundaryClass::Periodic) {
                int slot = node % N;
                F.segment(slot * n, n) += g;
            } else if (node >= 1 && node <= N - 1) {
                F.segment((node - 1) * n, n) += g;
            }
        };
        add(j, sd.dA);
        add(j + 1, sd.dB);
    }
    return F;
}

MatrixXd discrete_el_hessian(const LagrangianSystem& L, const DiscretizedLoop& loop) {
    const int N = loop.segments();
    const int n = loop.dim();
    const double h = 1.0 / N;
    const int nf = free_nodes(loop);
    MatrixXd Hm = MatrixXd::Zero(nf * n, nf * n);
    auto slot = [&](int node) -> int {
        if (loop.bc == BoundaryClass::Periodic) return node % N;
        if (node >= 1 && node <= N - 1) return node - 1;
        return -1;
    };
    for (int j = 0; j < N; ++j) {
        SegmentDerivs sd =
            segment_derivs(L, (j + 0.5) * h, h, loop.q.row(j), loop.q.row(j + 1), true);
        int sa = slot(j), sb = slot(j + 1);
        if (sa >= 0) Hm.block(sa * n, sa * n, n, n) += sd.dAA;
        if (sb >= 0) Hm.block(sb * n, sb * n, n, n) += sd.dBB;
        if (sa >= 0 && sb >= 0) {
            Hm.block(sa * n, sb * n, n, n) += sd.dAB;
            Hm.block(sb * n, sa * n, n, n) += sd.dAB.transpose();
        }
    }
    return Hm;
}

double newton_polish(const LagrangianSystem& L, DiscretizedLoop& loop, double tol,
                     int max_iter) {
    const int N = loop.segments();
    const int n = loop.dim();
    const double h = 1.0 / N;
    const int nf = free_nodes(loop);

    auto apply_delta = [&](DiscretizedLoop& lp, const VectorXd& d) {
        for (int s = 0; s < nf; ++s)
            lp.q.row(node_of_slot(lp, s)) += d.segment(s * n, n).transpose();
        if (lp.bc == BoundaryClass::Periodic)
            lp.q.row(N) = lp.q.row(0) + loop.winding().transpose();
    };

    Eigen::VectorXd w = loop.winding();
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        VectorXd F = discrete_el_residual(L, loop);
        double r = F.lpNorm<Eigen::Infinity>() / h;
        if (r < tol) return r;
        MatrixXd Hm = discrete_el_hessian(L, loop);
        if (lambda > 0) Hm += lambda * MatrixXd::Identity(nf * n, nf * n);
        Eigen::PartialPivLU<MatrixXd> lu(Hm);
        VectorXd d = lu.solve(-F);
        if (!d.allFinite()) {
            lambda = std::max(1e-6, 10 * lambda);
            continue;
        }
        // backtracking on the residual norm
        double base = F.norm();
        double alpha = 1.0;
        DiscretizedLoop trial = loop;
        bool accepted = false;
        for (int bt = 0; bt < 30; ++bt) {
            trial = loop;
            apply_delta(trial, alpha * d);
            VectorXd Ft = discrete_el_residual(L, trial);
            if (Ft.norm() < (1.0 - 1e-4 * alpha) * base) {
                loop = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            lambda = (lambda == 0) ? 1e-8 : lambda * 10;
            if (lambda > 1e4) break;
        } else {
            lambda *= 0.3;
            if (lambda < 1e-12) lambda = 0;
        }
        (void)w;
    }
    return discrete_el_residual(L, loop).lpNorm<Eigen::Infinity>() / h;
}

MorseIndexResult morse_index(const LagrangianSystem& L, const DiscretizedLoop& loop,
                             double zero_tol) {
    auto count_neg = [&](const DiscretizedLoop& lp, double& small) {
        MatrixXd Hm = discrete_el_hessian(L, lp);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hm);
        int neg = 0;
        small = std::numeric_limits<double>::infinity();
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            double lam = es.eigenvalues()[i];
            small = std::min(small, std::abs(lam));
            if (lam < 0) ++neg;
        }
        return neg;
    };

    MorseIndexResult out;
    double small_coarse;
    int coarse = count_neg(loop, small_coarse);

    // dyadic refinement: midpoint insertion plus a short re-polish
    DiscretizedLoop fine;
    fine.bc = loop.bc;
    const int N = loop.segments();
    fine.q.resize(2 * N + 1, loop.dim());
    for (int j = 0; j < N; ++j) {
        fine.q.row(2 * j) = loop.q.row(j);
        fine.q.row(2 * j + 1) = 0.5 * (loop.q.row(j) + loop.q.row(j + 1));
    }
    fine.q.row(2 * N) = loop.q.row(N);
    newton_polish(L, fine, 1e-11, 60);

    double small_fine;
    int refined = count_neg(fine, small_fine);
    if (small_coarse < zero_tol && small_fine < zero_tol)
        throw DegeneracyError("morse_index: near-zero second-variation eigenvalue persists");

    out.index = coarse;
    out.stable = (coarse == refined);
    out.smallest_abs_eig = std::min(small_coarse, small_fine);
    return out;
}

// --- candidate certification ------------------------------------------------------

namespace {

// initial nodal velocity: centered difference through the periodic extension,
// one-sided at fixed ends
VectorXd initial_velocity(const DiscretizedLoop& loop) {
    const int N = loop.segments();
    const double h = 1.0 / N;
    if (loop.bc == BoundaryClass::Periodic) {
        VectorXd prev = loop.q.row(N - 1).transpose() - loop.winding();
        VectorXd next = loop.q.row(1);
        return (next - prev) / (2 * h);
    }
    VectorXd a = loop.q.row(0), b = loop.q.row(1), c = loop.q.row(2);
    return (-3 * a + 4 * b - c) / (2 * h);
}

struct Certification {
    bool nondegenerate = false;
    double margin = 0;
    MatrixXd monodromy;
    std::vector<MatrixXd> dphi;
    Eigen::MatrixXd base;
    double hamilton_residual = 0;
};

Certification certify(const LagrangianSystem& L, const HamiltonianSystem& H,
                      const DiscretizedLoop& loop, const OrbitSearchConfig& cfg) {
    Certification out;
    const int n = loop.dim();
    VectorXd q0 = loop.q.row(0);
    VectorXd v0 = initial_velocity(loop);
    VectorXd p0 = L.Lv(0.0, q0, v0);
    VectorXd x0(2 * n);
    x0 << q0, p0;
    FlowWithMonodromy flow = integrate_with_monodromy(H, x0, 0.0, 1.0, cfg.monodromy_steps);
    out.monodromy = flow.monodromy();
    out.dphi = flow.dphi;
    out.base.resize(flow.x.size(), n);
    for (size_t i = 0; i < flow.x.size(); ++i) out.base.row(i) = flow.x[i].head(n);

    if (loop.bc == BoundaryClass::Periodic) {
        Eigen::EigenSolver<MatrixXd> es(out.monodromy);
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 2 * n; ++i)
            m = std::min(m, std::abs(es.eigenvalues()[i] - std::complex<double>(1, 0)));
        out.margin = m;
    } else {
        // vertical transversality: the upper-right block must be invertible
        MatrixXd B = out.monodromy.topRightCorner(n, n);
        Eigen::JacobiSVD<MatrixXd> svd(B);
        out.margin = svd.singularValues().minCoeff();
    }
    out.nondegenerate = out.margin > cfg.quarantine_margin;

    // discrete Hamilton residual of the staggered lift
    PhaseLoop lift = legendre_lift_loop(L, loop);
    const int N = loop.segments();
    const double h = 1.0 / N;
    double worst = 0;
    for (int j = 0; j < N; ++j) {
        double tm = (j + 0.5) * h;
        VectorXd qm = 0.5 * (lift.q.row(j) + lift.q.row(j + 1));
        VectorXd pm = lift.pmid.row(j);
        VectorXd vq = (lift.q.row(j + 1) - lift.q.row(j)) / h;
        worst = std::max(worst, (vq - H.Hp(tm, qm, pm)).lpNorm<Eigen::Infinity>());
    }
    for (int j = 1; j < N; ++j) {
        VectorXd pl = lift.pmid.row(j - 1), pr = lift.pmid.row(j);
        VectorXd pdot = (pr - pl) / h;
        VectorXd pbar = 0.5 * (pl + pr);
        VectorXd qj = lift.q.row(j);
        worst = std::max(worst,
                         (pdot + H.Hq(j * h, qj, pbar)).lpNorm<Eigen::Infinity>());
    }
    if (loop.bc == BoundaryClass::Periodic && N >= 2) {
        VectorXd pl = lift.pmid.row(N - 1), pr = lift.pmid.row(0);
        VectorXd pdot = (pr - pl) / h;
        VectorXd pbar = 0.5 * (pl + pr);
        worst = std::max(worst,
                         (pdot + H.Hq(0.0, lift.q.row(0), pbar)).lpNorm<Eigen::Infinity>());
    }
    out.hamilton_residual = worst;
    return out;
}

bool loops_match(const ManifoldModel& m, const DiscretizedLoop& a, const DiscretizedLoop& b,
                 double tol) {
    if (a.segments() != b.segments()) return false;
    for (int j = 0; j <= a.segments(); ++j)
        if (m.chart_distance(a.q.row(j), b.q.row(j)) > tol) return false;
    return true;
}

bool lex_less(const DiscretizedLoop& a, const DiscretizedLoop& b) {
    for (int j = 0; j < a.q.rows() && j < b.q.rows(); ++j)
        for (int d = 0; d < a.q.cols(); ++d) {
            double x = a.q(j, d), y = b.q(j, d);
            if (x != y) return x < y;
        }
    return false;
}

void finalize_candidates(const LagrangianSystem& L, const HamiltonianSystem& H,
                         std::vector<DiscretizedLoop>& converged,
                         const Eigen::VectorXi& homotopy, const OrbitSearchConfig& cfg,
                         OrbitSearchResult& out) {
    const ManifoldModel& M = L.manifold();
    // deterministic merge order
    std::sort(converged.begin(), converged.end(),
              [](const DiscretizedLoop& a, const DiscretizedLoop& b) { return lex_less(a, b); });
    std::vector<DiscretizedLoop> unique;
    for (const auto& lp : converged) {
        bool dup = false;
        for (const auto& u : unique)
            if (loops_match(M, lp, u, cfg.merge_distance)) dup = true;
        if (!dup) unique.push_back(lp);
    }

    for (const auto& lp : unique) {
        double E = action_lagrangian(L, lp);
        if (E > cfg.action_bound) continue;
        Certification cert = certify(L, H, lp, cfg);
        if (!cert.nondegenerate) {
            QuarantinedCandidate qc;
            qc.loop = lp;
            qc.homotopy = homotopy;
            qc.action = E;
            qc.nondeg_margin = cert.margin;
            qc.reason = "nondegeneracy margin below threshold";
            out.quarantined.push_back(qc);
            continue;
        }
        CriticalPoint cp;
        cp.loop = lp;
        cp.homotopy = homotopy;
        cp.action = E;
        cp.residual = discrete_el_residual(L, lp).lpNorm<Eigen::Infinity>() * lp.segments();
        cp.nondeg_margin = cert.margin;
        cp.monodromy = cert.monodromy;
        cp.dphi_path = cert.dphi;
        cp.flow_base = cert.base;
        cp.lift = legendre_lift_loop(L, lp);
        cp.lift_action = action_hamiltonian(H, cp.lift);
        cp.hamilton_residual = cert.hamilton_residual;
        try {
            MorseIndexResult mi = morse_index(L, lp);
            cp.morse_index = mi.index;
            cp.index_stable = mi.stable;
        } catch (const DegeneracyError&) {
            QuarantinedCandidate qc;
            qc.loop = lp;
            qc.homotopy = homotopy;
            qc.action = E;
            qc.nondeg_margin = cert.margin;
            qc.reason = "second variation numerically degenerate";
            out.quarantined.push_back(qc);
            continue;
        }
        out.generators.push_back(std::move(cp));
    }

    std::sort(out.generators.begin(), out.generators.end(),
              [](const CriticalPoint& a, const CriticalPoint& b) {
                  if (a.action != b.action) return a.action < b.action;
                  return lex_less(a.loop, b.loop);
              });
}

} // namespace

OrbitSearchResult find_periodic_orbits(const LagrangianSystem& L, const HamiltonianSystem& H,
                                       const Eigen::VectorXi& winding,
                                       const OrbitSearchConfig& cfg) {
    require_flat(L.manifold(), "find_periodic_orbits");
    const int n = L.dim();
    const int N = cfg.Nt;

    // seeds: constant loops on a lattice plus random low-frequency Fourier loops
    std::vector<DiscretizedLoop> seeds;
    int grid = (n == 1) ? 8 : 4;
    long total = 1;
    for (int d = 0; d < n; ++d) total *= grid;
    for (long g = 0; g < total; ++g) {
        DiscretizedLoop lp;
        lp.bc = BoundaryClass::Periodic;
        lp.q.resize(N + 1, n);
        long rem = g;
        VectorXd base(n);
        for (int d = 0; d < n; ++d) {
            base[d] = static_cast<double>(rem % grid) / grid;
            rem /= grid;
        }
        for (int j = 0; j <= N; ++j) {
            double t = static_cast<double>(j) / N;
            for (int d = 0; d < n; ++d) lp.q(j, d) = base[d] + winding[d] * t;
        }
        seeds.push_back(lp);
    }
    for (int s = 0; s < cfg.seed_count; ++s) {
        StreamRng rng(cfg.rng_seed, rng_stage::kOrbitSeeds, static_cast<std::uint64_t>(s));
        DiscretizedLoop lp;
        lp.bc = BoundaryClass::Periodic;
        lp.q.resize(N + 1, n);
        const int kmax = 4;
        std::vector<double> c0(n), a, b;
        for (int d = 0; d < n; ++d) c0[d] = rng.next_double();
        a.resize(n * kmax);
        b.resize(n * kmax);
        for (auto& v : a) v = rng.symmetric();
        for (auto& v : b) v = rng.symmetric();
        for (int j = 0; j <= N; ++j) {
            double t = static_cast<double>(j) / N;
            for (int d = 0; d < n; ++d) {
                double x = c0[d] + winding[d] * t;
                for (int k = 1; k <= kmax; ++k)
                    x += 0.3 * (a[d * kmax + k - 1] * std::cos(2 * M_PI * k * t) +
                                b[d * kmax + k - 1] * std::sin(2 * M_PI * k * t)) /
                         (k * k);
                lp.q(j, d) = x;
            }
        }
        seeds.push_back(lp);
    }

    // independent Newton runs, embarrassingly parallel
    std::vector<int> ok(seeds.size(), 0);
#pragma omp parallel for schedule(dynamic) if (!cfg.serial)
    for (int i = 0; i < static_cast<int>(seeds.size()); ++i) {
        double r = newton_polish(L, seeds[i], cfg.newton_tol, cfg.newton_max_iter);
        ok[i] = (r < cfg.newton_tol) ? 1 : 0;
    }

    OrbitSearchResult out;
    std::vector<DiscretizedLoop> converged;
    for (size_t i = 0; i < seeds.size(); ++i) {
        if (!ok[i]) continue;
        Eigen::VectorXd w = seeds[i].winding();
        bool same_class = true;
        for (int d = 0; d < n; ++d)
            if (std::lround(w[d]) != winding[d]) same_class = false;
        if (!same_class) continue; // class preserved by construction, guard anyway
        converged.push_back(seeds[i]);
        ++out.seeds_converged;
    }
    finalize_candidates(L, H, converged, winding, cfg, out);
    return out;
}

OrbitSearchResult find_bvp_solutions(const LagrangianSystem& L, const HamiltonianSystem& H,
                                     const VectorXd& q0, const VectorXd& q1,
                                     const Eigen::VectorXi& path_class,
                                     const OrbitSearchConfig& cfg) {
    require_flat(L.manifold(), "find_bvp_solutions");
    const int n = L.dim();
    const int N = cfg.Nt;
    VectorXd target = q1;
    for (int d = 0; d < n; ++d) target[d] += path_class[d];

    // shooting seeds around the straight-line momentum
    std::vector<VectorXd> p0s;
    VectorXd vline = target - q0;
    p0s.push_back(L.Lv(0.0, q0, vline));
    for (int s = 0; s < cfg.seed_count; ++s) {
        StreamRng rng(cfg.rng_seed, rng_stage::kOrbitSeeds, 1000 + static_cast<std::uint64_t>(s));
        VectorXd p = p0s[0];
        for (int d = 0; d < n; ++d) p[d] += 2.0 * rng.symmetric();
        p0s.push_back(p);
    }

    std::vector<DiscretizedLoop> converged(p0s.size());
    std::vector<int> ok(p0s.size(), 0);
#pragma omp parallel for schedule(dynamic) if (!cfg.serial)
    for (int i = 0; i < static_cast<int>(p0s.size()); ++i) {
        VectorXd p = p0s[i];
        bool good = false;
        try {
            for (int it = 0; it < 60; ++it) {
                VectorXd x0(2 * n);
                x0 << q0, p;
                FlowWithMonodromy flow =
                    integrate_with_monodromy(H, x0, 0.0, 1.0, cfg.monodromy_steps);
                VectorXd miss = flow.endpoint().head(n) - target;
                if (miss.lpNorm<Eigen::Infinity>() < 1e-11) {
                    // sample the trajectory onto the broken-curve grid and polish
                    DiscretizedLoop lp;
                    lp.bc = BoundaryClass::FixedEnds;
                    lp.q.resize(N + 1, n);
                    int steps = static_cast<int>(flow.x.size()) - 1;
                    for (int j = 0; j <= N; ++j) {
                        int s2 = static_cast<int>(std::lround(static_cast<double>(j) * steps / N));
                        lp.q.row(j) = flow.x[s2].head(n);
                    }
                    lp.q.row(0) = q0;
                    lp.q.row(N) = target;
                    double r = newton_polish(L, lp, cfg.newton_tol, cfg.newton_max_iter);
                    if (r < cfg.newton_tol) {
                        converged[i] = lp;
                        good = true;
                    }
                    break;
                }
                MatrixXd B = flow.monodromy().topRightCorner(n, n);
                VectorXd dp = B.partialPivLu().solve(-miss);
                if (!dp.allFinite()) break;
                double lim = 10.0;
                if (dp.norm() > lim) dp *= lim / dp.norm();
                p += dp;
            }
        } catch (const EscapeError&) {
            good = false;
        }
        ok[i] = good ? 1 : 0;
    }

    OrbitSearchResult out;
    std::vector<DiscretizedLoop> keep;
    for (size_t i = 0; i < p0s.size(); ++i) {
        if (!ok[i]) continue;
        keep.push_back(converged[i]);
        ++out.seeds_converged;
    }
    finalize_candidates(L, H, keep, path_class, cfg, out);
    return out;
}

// --- index verification --------------------------------------------------------------

int orbit_maslov(const HamiltonianSystem& H, const CriticalPoint& cp) {
    OrbitBoundary bc = (cp.loop.bc == BoundaryClass::Periodic) ? OrbitBoundary::Periodic
                                                               : OrbitBoundary::FixedEnds;
    Trivialization tv = vertical_trivialization(H.manifold(), cp.flow_base, bc);
    return maslov_of_orbit(cp.dphi_path, tv, bc);
}

IndexTheoremReport verify_index_theorem(const LagrangianSystem& L,
                                        const HamiltonianSystem& H,
                                        const CriticalPoint& cp) {
    (void)L;
    IndexTheoremReport rep;
    rep.m = cp.morse_index;
    rep.mu = orbit_maslov(H, cp);
    rep.equal = (rep.m == rep.mu);
    return rep;
}

} // namespace loopmorse
