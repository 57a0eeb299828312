#include "loopmorse/morse.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace loopmorse {

W12Preconditioner::W12Preconditioner(int N, BoundaryClass bc, double scale) {
    nf_ = (bc == BoundaryClass::Periodic) ? N : N - 1;
    h_ = 1.0 / N;
    MatrixXd A = MatrixXd::Zero(nf_, nf_);
    double w = scale / (h_ * h_);
    for (int j = 0; j < nf_; ++j) {
        A(j, j) = 2 * w;
        if (bc == BoundaryClass::Periodic) {
            A(j, (j + 1) % nf_) -= w;
            A(j, (j + nf_ - 1) % nf_) -= w;
        } else {
            if (j + 1 < nf_) A(j, j + 1) -= w;
            if (j - 1 >= 0) A(j, j - 1) -= w;
        }
    }
    A += MatrixXd::Identity(nf_, nf_);
    lu_ = Eigen::PartialPivLU<MatrixXd>(A);
}

VectorXd W12Preconditioner::apply(const VectorXd& g, int ndim) const {
    VectorXd out(g.size());
    VectorXd comp(nf_);
    for (int d = 0; d < ndim; ++d) {
        for (int j = 0; j < nf_; ++j) comp[j] = g[j * ndim + d];
        VectorXd sol = lu_.solve(comp);
        for (int j = 0; j < nf_; ++j) out[j * ndim + d] = sol[j];
    }
    return out;
}

VectorXd w12_gradient(const LagrangianSystem& L, const DiscretizedLoop& loop,
                      const W12Preconditioner& P) {
    const int N = loop.segments();
    VectorXd F = discrete_el_residual(L, loop); // dE against nodal variations
    VectorXd g = F * static_cast<double>(N);    // L^2 representative: F / h
    return P.apply(g, loop.dim());
}

double w12_norm(const DiscretizedLoop& loop, const VectorXd& field) {
    const int N = loop.segments();
    const int n = loop.dim();
    const double h = 1.0 / N;
    const int nf = (loop.bc == BoundaryClass::Periodic) ? N : N - 1;
    auto at = [&](int j, int d) -> double {
        if (loop.bc == BoundaryClass::Periodic) return field[(j % nf) * n + d];
        if (j <= 0 || j >= N) return 0.0; // pinned ends
        return field[(j - 1) * n + d];
    };
    double s = 0;
    for (int j = 0; j < N; ++j)
        for (int d = 0; d < n; ++d) {
            double x = at(j, d);
            double dx = (at(j + 1, d) - x) / h;
            s += h * (x * x + dx * dx);
        }
    return std::sqrt(s);
}

double loop_w12_distance(const ManifoldModel& m, const DiscretizedLoop& a,
                         const DiscretizedLoop& b) {
    if (a.segments() != b.segments() || a.dim() != b.dim())
        return std::numeric_limits<double>::infinity();
    const int N = a.segments();
    const int n = a.dim();
    const double h = 1.0 / N;
    // lattice alignment for the torus: shift by the rounded mean difference
    VectorXd shift = VectorXd::Zero(n);
    if (m.kind() == ManifoldKind::FlatTorus) {
        for (int d = 0; d < n; ++d) {
            double acc = 0;
            for (int j = 0; j <= N; ++j) acc += a.q(j, d) - b.q(j, d);
            shift[d] = std::round(acc / (N + 1));
        }
    }
    double s = 0;
    for (int j = 0; j < N; ++j)
        for (int d = 0; d < n; ++d) {
            double x = a.q(j, d) - b.q(j, d) - shift[d];
            double xn = a.q(j + 1, d) - b.q(j + 1, d) - shift[d];
            s += h * (x * x + ((xn - x) / h) * ((xn - x) / h));
        }
    return std::sqrt(s);
}

namespace {

void apply_field(DiscretizedLoop& loop, const VectorXd& field, double alpha) {
    const int N = loop.segments();
    const int n = loop.dim();
    Eigen::VectorXd w = loop.winding();
    if (loop.bc == BoundaryClass::Periodic) {
        for (int j = 0; j < N; ++j)
            for (int d = 0; d < n; ++d) loop.q(j, d) += alpha * field[j * n + d];
        loop.q.row(N) = loop.q.row(0) + w.transpose();
    } else {
        for (int j = 1; j < N; ++j)
            for (int d = 0; d < n; ++d) loop.q(j, d) += alpha * field[(j - 1) * n + d];
    }
}

} // namespace

FlowOutcome flow_to_limit(const LagrangianSystem& L, DiscretizedLoop loop,
                          const std::vector<CriticalPoint>& generators,
                          const FlowParams& params, const W12Preconditioner& P) {
    FlowOutcome out;
    const ManifoldModel& M = L.manifold();
    double E = action_lagrangian(L, loop);
    double alpha = params.step0;
    out.snapshots.push_back({E, loop.q});

    for (long step = 0; step < params.max_steps; ++step) {
        VectorXd u = w12_gradient(L, loop, P);
        // <<u,u>>_1 = h u.(I+A)u = u . F with F the nodal first variation
        double m2 = u.dot(discrete_el_residual(L, loop));
        double gn = std::sqrt(std::max(0.0, m2));
        if (gn < params.grad_tol) {
            out.kind = FlowOutcome::Kind::Unmatched;
            out.final_grad = gn;
            out.final_E = E;
            out.steps = step;
            for (size_t i = 0; i < generators.size(); ++i) {
                if (generators[i].loop.bc != loop.bc) continue;
                if (loop_w12_distance(M, loop, generators[i].loop) < params.match_tol) {
                    out.kind = FlowOutcome::Kind::Converged;
                    out.generator = static_cast<int>(i);
                    break;
                }
            }
            out.snapshots.push_back({E, loop.q});
            return out;
        }

        // backtracking line search, E strictly decreasing along the flow
        bool moved = false;
        for (int bt = 0; bt < 50; ++bt) {
            DiscretizedLoop trial = loop;
            apply_field(trial, u, -alpha);
            double Et = action_lagrangian(L, trial);
            if (Et <= E - params.armijo * alpha * m2) {
                out.accumulated_drop += E - Et;
                loop = trial;
                E = Et;
                moved = true;
                alpha = std::min(alpha * 1.6, 1e3);
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) {
            out.kind = FlowOutcome::Kind::Budget;
            out.final_grad = gn;
            out.final_E = E;
            out.steps = step;
            out.snapshots.push_back({E, loop.q});
            return out;
        }
        if (E < params.action_floor) {
            out.kind = FlowOutcome::Kind::Divergent;
            out.final_E = E;
            out.steps = step;
            out.snapshots.push_back({E, loop.q});
            return out;
        }
        if (step % params.snapshot_every == 0) out.snapshots.push_back({E, loop.q});
    }
    out.kind = FlowOutcome::Kind::Budget;
    out.final_E = E;
    out.steps = params.max_steps;
    return out;
}

namespace {

// ordered negative eigenbasis of the discrete second variation at x:
// descending magnitude, first nonzero component positive
std::vector<VectorXd> unstable_basis(const LagrangianSystem& L, const CriticalPoint& x) {
    MatrixXd Hm = discrete_el_hessian(L, x.loop);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hm);
    std::vector<std::pair<double, VectorXd>> neg;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] < 0) neg.push_back({es.eigenvalues()[i], es.eigenvectors().col(i)});
    std::sort(neg.begin(), neg.end(),
              [](const auto& a, const auto& b) { return std::abs(a.first) > std::abs(b.first); });
    std::vector<VectorXd> basis;
    for (auto& [lam, v] : neg) {
        for (int i = 0; i < v.size(); ++i) {
            if (std::abs(v[i]) > 1e-12) {
                if (v[i] < 0) v = -v;
                break;
            }
        }
        basis.push_back(v);
    }
    return basis;
}

DiscretizedLoop sphere_start(const CriticalPoint& x, const std::vector<VectorXd>& basis,
                             const VectorXd& weights, double r0) {
    VectorXd dir = VectorXd::Zero(basis[0].size());
    for (int i = 0; i < weights.size(); ++i) dir += weights[i] * basis[i];
    DiscretizedLoop lp = x.loop;
    double nn = w12_norm(lp, dir);
    apply_field(lp, dir, r0 / nn);
    return lp;
}

struct UnstableFlowData {
    std::vector<FlowOutcome> outcomes; // per sphere sample
    std::vector<VectorXd> weights;     // sphere coordinates per sample
};

UnstableFlowData flow_unstable_sphere(const LagrangianSystem& L, const CriticalPoint& x,
                                      const std::vector<CriticalPoint>& gens,
                                      const std::vector<VectorXd>& basis,
                                      const FlowParams& params, const W12Preconditioner& P) {
    const int k = static_cast<int>(basis.size());
    UnstableFlowData data;
    if (k == 1) {
        data.weights.push_back((VectorXd(1) << 1.0).finished());
        data.weights.push_back((VectorXd(1) << -1.0).finished());
    } else if (k == 2) {
        for (int i = 0; i < params.sphere_samples; ++i) {
            double th = 2 * M_PI * i / params.sphere_samples;
            data.weights.push_back((VectorXd(2) << std::cos(th), std::sin(th)).finished());
        }
    } else {
        throw ResolutionError("count_connecting_orbits: unstable spheres of dim > 1 unsupported");
    }
    data.outcomes.resize(data.weights.size());
#pragma omp parallel for schedule(dynamic) if (!params.serial)
    for (int i = 0; i < static_cast<int>(data.weights.size()); ++i) {
        DiscretizedLoop start = sphere_start(x, basis, data.weights[i], params.r0);
        data.outcomes[i] = flow_to_limit(L, start, gens, params, P);
    }
    return data;
}

// closest approach of a trajectory to a generator, from the sparse snapshots
double closest_approach(const ManifoldModel& m, const FlowOutcome& fo,
                        const CriticalPoint& gen) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& snap : fo.snapshots) {
        DiscretizedLoop lp = gen.loop;
        lp.q = snap.q;
        best = std::min(best, loop_w12_distance(m, lp, gen.loop));
    }
    return best;
}

// position of the trajectory where E first drops below level
Eigen::MatrixXd slice_at_level(const FlowOutcome& fo, double level) {
    for (const auto& snap : fo.snapshots)
        if (snap.E <= level) return snap.q;
    return fo.snapshots.back().q;
}

} // namespace

CountResult count_connecting_orbits(const LagrangianSystem& L, int x_id, int y_id,
                                    const std::vector<CriticalPoint>& generators,
                                    const FlowParams& params) {
    const CriticalPoint& x = generators[x_id];
    const CriticalPoint& y = generators[y_id];
    if (x.morse_index - y.morse_index != 1)
        throw std::invalid_argument("count_connecting_orbits: index difference must be 1");
    const ManifoldModel& M = L.manifold();
    W12Preconditioner P(x.loop.segments(), x.loop.bc, params.precond_scale);
    std::vector<VectorXd> basis = unstable_basis(L, x);
    if (static_cast<int>(basis.size()) != x.morse_index)
        throw ResolutionError("count_connecting_orbits: unstable dimension mismatch");

    CountResult res;
    UnstableFlowData data = flow_unstable_sphere(L, x, generators, basis, params, P);
    const int k = x.morse_index;

    if (k == 1) {
        // the unstable manifold is the two rays; a ray hitting y is a flow line
        for (int i = 0; i < 2; ++i) {
            const FlowOutcome& fo = data.outcomes[i];
            if (fo.kind == FlowOutcome::Kind::Converged && fo.generator >= 0) {
                const CriticalPoint& tgt = generators[fo.generator];
                if (tgt.morse_index >= x.morse_index && fo.generator != x_id)
                    res.warnings.push_back({x_id, fo.generator,
                                            "flow line into generator of equal or larger index"});
                if (fo.generator == y_id) {
                    int sign = (data.weights[i][0] > 0) ? +1 : -1;
                    FlowLine fl;
                    fl.source = x_id;
                    fl.target = y_id;
                    fl.sign = sign;
                    fl.energy_drop = x.action - tgt.action;
                    fl.snapshots = fo.snapshots;
                    res.witnesses.push_back(std::move(fl));
                    res.count += sign;
                }
            }
        }
        return res;
    }

    // k == 2: basin boundaries on the unstable circle are the flow lines into
    // index-1 generators; locate them by bisection between adjacent samples
    const int S = static_cast<int>(data.weights.size());
    auto basin_of = [&](const FlowOutcome& fo) -> int {
        if (fo.kind != FlowOutcome::Kind::Converged) return -2;
        return fo.generator;
    };
    auto flow_angle = [&](double th) -> FlowOutcome {
        VectorXd w(2);
        w << std::cos(th), std::sin(th);
        DiscretizedLoop start = sphere_start(x, basis, w, params.r0);
        return flow_to_limit(L, start, generators, params, P);
    };

    for (int i = 0; i < S; ++i) {
        int j = (i + 1) % S;
        int bi = basin_of(data.outcomes[i]);
        int bj = basin_of(data.outcomes[j]);
        if (bi == bj) {
            // interior samples should reach index-0 minima; anything else is a
            // transversality concern
            if (bi >= 0 && generators[bi].morse_index >= x.morse_index)
                res.warnings.push_back({x_id, bi, "sphere sample reached an index >= k generator"});
            continue;
        }
        double lo = 2 * M_PI * i / S, hi = 2 * M_PI * (i + 1) / S;
        FlowOutcome fo_lo = data.outcomes[i];
        for (int depth = 0; depth < params.bisect_depth; ++depth) {
            double mid = 0.5 * (lo + hi);
            FlowOutcome fm = flow_angle(mid);
            if (basin_of(fm) == bi) {
                lo = mid;
                fo_lo = fm;
            } else {
                hi = mid;
            }
        }
        // boundary trajectory: does it pass by y?
        double mid = 0.5 * (lo + hi);
        FlowOutcome fb = flow_angle(mid);
        double approach = closest_approach(M, fb, y);
        if (approach > params.saddle_visit_tol) continue; // boundary into some other saddle

        // sign: counterclockwise scan orientation times the side ordering of
        // the flanking trajectories along the unstable direction of y at a
        // mid-action slice
        double dth = std::max(hi - lo, 1e-12);
        FlowOutcome f_plus = flow_angle(mid + dth);
        FlowOutcome f_minus = flow_angle(mid - dth);
        double level = y.action + 0.25 * (x.action - y.action);
        Eigen::MatrixXd qp = slice_at_level(f_plus, level);
        Eigen::MatrixXd qm = slice_at_level(f_minus, level);
        std::vector<VectorXd> ybasis = unstable_basis(L, y);
        if (ybasis.size() != 1)
            throw ResolutionError("count_connecting_orbits: target unstable basis mismatch");
        // stack the difference on the free slots of y's grid
        const int nfy = (y.loop.bc == BoundaryClass::Periodic) ? y.loop.segments()
                                                               : y.loop.segments() - 1;
        const int n = y.loop.dim();
        VectorXd diff(nfy * n);
        for (int s = 0; s < nfy; ++s) {
            int node = (y.loop.bc == BoundaryClass::Periodic) ? s : s + 1;
            for (int d = 0; d < n; ++d) diff[s * n + d] = qp(node, d) - qm(node, d);
        }
        double proj = diff.dot(ybasis[0]);
        int sign = (proj > 0) ? +1 : -1;

        FlowLine fl;
        fl.source = x_id;
        fl.target = y_id;
        fl.sign = sign;
        fl.energy_drop = x.action - y.action;
        fl.snapshots = fb.snapshots;
        res.witnesses.push_back(std::move(fl));
        res.count += sign;
    }
    return res;
}

std::string homotopy_key(const Eigen::VectorXi& h) {
    std::ostringstream os;
    for (int i = 0; i < h.size(); ++i) {
        if (i) os << ",";
        os << h[i];
    }
    return os.str();
}

MorseComplexData assemble_complex(const LagrangianSystem& L,
                                  const std::vector<CriticalPoint>& generators,
                                  const FlowParams& params) {
    MorseComplexData data;
    data.generators = generators;
    data.precond_scale = params.precond_scale;
    if (!generators.empty()) data.Nt = generators[0].loop.segments();

    // group by homotopy class, deterministic order
    std::map<std::string, std::vector<int>> byclass;
    for (size_t i = 0; i < generators.size(); ++i)
        byclass[homotopy_key(generators[i].homotopy)].push_back(static_cast<int>(i));

    for (auto& [key, ids] : byclass) {
        MorseComplexData::ClassBlock blk;
        blk.homotopy = generators[ids[0]].homotopy;
        blk.gen_ids = ids; // generators arrive action-sorted
        blk.top_index = 0;
        for (int id : ids) blk.top_index = std::max(blk.top_index, generators[id].morse_index);
        blk.ranks.assign(blk.top_index + 1, 0);
        std::vector<std::vector<int>> graded(blk.top_index + 1);
        for (int id : ids) {
            graded[generators[id].morse_index].push_back(id);
            blk.ranks[generators[id].morse_index]++;
        }
        blk.boundary.resize(blk.top_index + 1);
        for (int k = 1; k <= blk.top_index; ++k) {
            IntMatrix d(static_cast<int>(graded[k - 1].size()),
                        static_cast<int>(graded[k].size()));
            for (size_t cx = 0; cx < graded[k].size(); ++cx)
                for (size_t ry = 0; ry < graded[k - 1].size(); ++ry) {
                    int xid = graded[k][cx], yid = graded[k - 1][ry];
                    CountResult cr = count_connecting_orbits(L, xid, yid, generators, params);
                    // filtration invariant: boundary decreases the action
                    if (cr.count != 0 &&
                        generators[yid].action >= generators[xid].action)
                        throw BoundarySquareError(
                            "filtration violated: n(x,y) != 0 with E(y) >= E(x)",
                            homotopy_key(blk.homotopy));
                    d.at(static_cast<int>(ry), static_cast<int>(cx)) = cr.count;
                    for (auto& w : cr.witnesses) data.witnesses.push_back(std::move(w));
                    for (auto& w : cr.warnings) data.warnings.push_back(w);
                }
            blk.boundary[k] = std::move(d);
        }

        // exact dd = 0, integer arithmetic
        for (int k = 2; k <= blk.top_index; ++k) {
            const IntMatrix& a = blk.boundary[k - 1];
            const IntMatrix& b = blk.boundary[k];
            for (int i = 0; i < a.rows; ++i)
                for (int j = 0; j < b.cols; ++j) {
                    BigInt s = 0;
                    for (int m = 0; m < a.cols; ++m) s += a.at(i, m) * b.at(m, j);
                    if (s != 0) {
                        std::ostringstream os;
                        os << "dd != 0 at class " << key << " degree " << k << " entry (" << i
                           << "," << j << ") = " << s;
                        throw BoundarySquareError(os.str(), os.str());
                    }
                }
        }
        data.classes.push_back(std::move(blk));
    }
    return data;
}

std::vector<ClassHomology> homology(const MorseComplexData& data) {
    std::vector<ClassHomology> out;
    for (const auto& blk : data.classes) {
        ClassHomology ch;
        ch.homotopy = blk.homotopy;
        ch.groups = chain_homology(blk.ranks, blk.boundary);
        out.push_back(std::move(ch));
    }
    return out;
}

MorseComplexData filtered_subcomplex(const MorseComplexData& data, double a) {
    MorseComplexData out;
    out.Nt = data.Nt;
    out.precond_scale = data.precond_scale;
    out.seed = data.seed;
    std::vector<int> keep_map(data.generators.size(), -1);
    for (size_t i = 0; i < data.generators.size(); ++i)
        if (data.generators[i].action < a) {
            keep_map[i] = static_cast<int>(out.generators.size());
            out.generators.push_back(data.generators[i]);
        }
    for (const auto& blk : data.classes) {
        MorseComplexData::ClassBlock nb;
        nb.homotopy = blk.homotopy;
        std::vector<std::vector<int>> graded_old, graded_new;
        int top = blk.top_index;
        graded_old.assign(top + 1, {});
        for (int id : blk.gen_ids)
            if (keep_map[id] >= 0) {
                nb.gen_ids.push_back(keep_map[id]);
                graded_old[data.generators[id].morse_index].push_back(id);
            }
        if (nb.gen_ids.empty()) continue;
        nb.top_index = 0;
        for (int id : nb.gen_ids)
            nb.top_index = std::max(nb.top_index, out.generators[id].morse_index);
        nb.ranks.assign(nb.top_index + 1, 0);
        for (int id : nb.gen_ids) nb.ranks[out.generators[id].morse_index]++;

        // restrict the boundary matrices; closure is the filtration invariant
        nb.boundary.resize(nb.top_index + 1);
        std::vector<std::vector<int>> old_graded(top + 1), old_pos(top + 1);
        {
            std::vector<std::vector<int>> og(top + 1);
            for (int id : blk.gen_ids) og[data.generators[id].morse_index].push_back(id);
            for (int k = 0; k <= top; ++k) {
                for (size_t c = 0; c < og[k].size(); ++c) {
                    old_graded[k].push_back(og[k][c]);
                    old_pos[k].push_back(static_cast<int>(c));
                }
            }
        }
        for (int k = 1; k <= nb.top_index; ++k) {
            std::vector<int> cols, rows;
            for (size_t c = 0; c < old_graded[k].size(); ++c)
                if (keep_map[old_graded[k][c]] >= 0) cols.push_back(static_cast<int>(c));
            for (size_t r = 0; r < old_graded[k - 1].size(); ++r)
                if (keep_map[old_graded[k - 1][r]] >= 0) rows.push_back(static_cast<int>(r));
            IntMatrix d(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
            for (size_t i = 0; i < rows.size(); ++i)
                for (size_t j = 0; j < cols.size(); ++j)
                    d.at(static_cast<int>(i), static_cast<int>(j)) =
                        blk.boundary[k].at(rows[i], cols[j]);
            nb.boundary[k] = std::move(d);
        }
        out.classes.push_back(std::move(nb));
    }
    return out;
}

} // namespace loopmorse
