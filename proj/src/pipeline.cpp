#include "loopmorse/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "loopmorse/catalog.hpp"
#include "loopmorse/fredholm.hpp"
#include "loopmorse/rng.hpp"

namespace loopmorse {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct StageSet {
    bool orbits = false, indices = false, complex_ = false, homology_ = false,
         fredholm_ = false, properties = false;
};

StageSet select(const std::string& stage) {
    StageSet s;
    if (stage == "orbits") s.orbits = true;
    else if (stage == "indices") s.orbits = s.indices = true;
    else if (stage == "complex") s.orbits = s.complex_ = true;
    else if (stage == "homology") s.orbits = s.complex_ = s.homology_ = true;
    else if (stage == "fredholm") s.fredholm_ = true;
    else if (stage == "verify-all")
        s.orbits = s.indices = s.complex_ = s.homology_ = s.fredholm_ = s.properties = true;
    else throw ConfigError("unknown stage '" + stage + "'");
    return s;
}

// random phase loop with trigonometric node data, staggered momentum slots
PhaseLoop random_phase_loop(StreamRng& rng, BoundaryClass bc, int N, int n,
                            const VectorXd& q0, const VectorXd& q1) {
    PhaseLoop x;
    x.bc = bc;
    x.q.resize(N + 1, n);
    x.pmid.resize(N, n);
    const int kmax = 3;
    for (int d = 0; d < n; ++d) {
        double c0 = rng.symmetric();
        std::vector<double> a(kmax), b(kmax), pa(kmax + 1), pb(kmax);
        for (auto& v : a) v = 0.5 * rng.symmetric();
        for (auto& v : b) v = 0.5 * rng.symmetric();
        for (auto& v : pa) v = rng.symmetric();
        for (auto& v : pb) v = rng.symmetric();
        for (int j = 0; j <= N; ++j) {
            double t = static_cast<double>(j) / N;
            double v = 0;
            if (bc == BoundaryClass::Periodic) {
                v = c0;
                for (int k = 1; k <= kmax; ++k)
                    v += (a[k - 1] * std::cos(2 * kPi * k * t) +
                          b[k - 1] * std::sin(2 * kPi * k * t)) /
                         (k * k);
            } else {
                v = q0[d] + (q1[d] - q0[d]) * t;
                for (int k = 1; k <= kmax; ++k) v += a[k - 1] * std::sin(kPi * k * t) / (k * k);
            }
            x.q(j, d) = v;
        }
        for (int j = 0; j < N; ++j) {
            double t = (j + 0.5) / N;
            double v = pa[0];
            for (int k = 1; k <= kmax; ++k)
                v += pa[k] * std::cos(2 * kPi * k * t) / k + pb[k - 1] * std::sin(2 * kPi * k * t) / k;
            x.pmid(j, d) = v;
        }
    }
    if (bc == BoundaryClass::Periodic) x.q.row(N) = x.q.row(0);
    return x;
}

// random variation of a phase loop, compatible with the boundary class
void random_variation(StreamRng& rng, const PhaseLoop& x, Eigen::MatrixXd& dq,
                      Eigen::MatrixXd& dp) {
    const int N = x.segments();
    const int n = x.dim();
    dq.resize(N + 1, n);
    dp.resize(N, n);
    const int kmax = 3;
    for (int d = 0; d < n; ++d) {
        std::vector<double> a(kmax + 1), b(kmax), pa(kmax + 1), pb(kmax);
        for (auto& v : a) v = rng.symmetric();
        for (auto& v : b) v = rng.symmetric();
        for (auto& v : pa) v = rng.symmetric();
        for (auto& v : pb) v = rng.symmetric();
        for (int j = 0; j <= N; ++j) {
            double t = static_cast<double>(j) / N;
            double v = 0;
            if (x.bc == BoundaryClass::Periodic) {
                v = a[0];
                for (int k = 1; k <= kmax; ++k)
                    v += a[k] * std::cos(2 * kPi * k * t) + b[k - 1] * std::sin(2 * kPi * k * t);
            } else {
                for (int k = 1; k <= kmax; ++k) v += a[k] * std::sin(kPi * k * t);
            }
            dq(j, d) = v;
        }
        for (int j = 0; j < N; ++j) {
            double t = (j + 0.5) / N;
            double v = pa[0];
            for (int k = 1; k <= kmax; ++k)
                v += pa[k] * std::cos(2 * kPi * k * t) + pb[k - 1] * std::sin(2 * kPi * k * t);
            dp(j, d) = v;
        }
    }
    if (x.bc == BoundaryClass::Periodic) dq.row(N) = dq.row(0);
}

struct FredholmRow {
    std::string label;
    int predicted = 0;
    NumericIndexResult numeric;
    double kernel_angle = -1; // < 0 when not applicable
    bool equal = false;
};

std::vector<OperatorSpec> acceptance_specs(const FredholmSuiteConfig& fc) {
    std::vector<OperatorSpec> specs;
    auto base = [&](CRDomain d, CoefficientFamily S, const std::string& label) {
        OperatorSpec sp;
        sp.domain = d;
        sp.n = 1;
        sp.S = S;
        sp.K = fc.K;
        sp.S0 = fc.S0;
        sp.h = fc.h;
        sp.label = label;
        return sp;
    };
    for (double m : {0.5, 1.0, 1.5}) {
        for (double sgn : {1.0, -1.0}) {
            double th = sgn * m * kPi;
            std::ostringstream os;
            os << "halfcyl theta=" << th;
            specs.push_back(base(CRDomain::HalfCylinder, CoefficientFamily::theta_id(1, th),
                                 os.str()));
        }
    }
    specs.push_back(base(CRDomain::HalfCylinder, CoefficientFamily::q_alpha(1.0),
                         "halfcyl q_alpha=1"));
    specs.push_back(base(CRDomain::HalfCylinder, CoefficientFamily::q_alpha(-1.0),
                         "halfcyl q_alpha=-1"));
    for (double m : {0.5, 1.5}) {
        for (double sgn : {1.0, -1.0}) {
            double th = sgn * m * kPi;
            std::ostringstream os;
            os << "halfstrip theta=" << th;
            specs.push_back(base(CRDomain::HalfStrip, CoefficientFamily::theta_id(1, th),
                                 os.str()));
        }
    }
    specs.push_back(base(
        CRDomain::Cylinder,
        CoefficientFamily::interpolated(kPi * MatrixXd::Identity(2, 2),
                                        3 * kPi * MatrixXd::Identity(2, 2)),
        "cylinder theta pi->3pi"));
    return specs;
}

} // namespace

PipelineResult run_pipeline(const RunConfig& cfg, const std::string& stage) {
    StageSet stages = select(stage);
    PipelineResult out;
    ordered_json rep;
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    rep["system"] = cfg.system;
    rep["stage"] = stage;
    rep["seed"] = cfg.seed;
    rep["Nt"] = cfg.Nt;

    auto record_failure = [&](const std::string& what, int code) {
        out.failures.push_back(what);
        if (out.exit_code == kExitOk || code == kExitNumerical) out.exit_code = code;
    };

    try {
        std::shared_ptr<const LagrangianSystem> L;
        std::shared_ptr<HamiltonianSystem> H;
        BoundaryClass bc = BoundaryClass::Periodic;
        VectorXd q0, q1;
        std::vector<Eigen::VectorXi> classes;
        const ReferenceSystem* ref = nullptr;

        if (stages.orbits || stages.properties) {
            L = build_system(cfg);
            H = std::make_shared<HamiltonianSystem>(L);
            if (cfg.system != "custom") {
                ref = &catalog_lookup(cfg.system);
                bc = ref->bc;
                q0 = ref->q0;
                q1 = ref->q1;
                classes = ref->classes;
            } else {
                bc = (cfg.boundary == "fixed") ? BoundaryClass::FixedEnds
                                               : BoundaryClass::Periodic;
                const int n = L->dim();
                if (!cfg.q0.empty()) q0 = Eigen::Map<const VectorXd>(cfg.q0.data(), n);
                if (!cfg.q1.empty()) q1 = Eigen::Map<const VectorXd>(cfg.q1.data(), n);
                for (const auto& c : cfg.classes) {
                    Eigen::VectorXi v(n);
                    for (int d = 0; d < n; ++d) v[d] = (d < static_cast<int>(c.size())) ? c[d] : 0;
                    classes.push_back(v);
                }
                if (classes.empty()) classes.push_back(Eigen::VectorXi::Zero(n));
            }
        }

        std::vector<CriticalPoint> generators;
        std::vector<QuarantinedCandidate> quarantined;

        if (stages.orbits) {
            OrbitSearchConfig ocfg;
            ocfg.Nt = cfg.Nt;
            ocfg.seed_count = cfg.seed_count;
            ocfg.action_bound = (ref && ref->action_bound > 0) ? ref->action_bound
                                                               : cfg.action_bound;
            ocfg.rng_seed = cfg.seed;
            for (const auto& cls : classes) {
                OrbitSearchResult r =
                    (bc == BoundaryClass::Periodic)
                        ? find_periodic_orbits(*L, *H, cls, ocfg)
                        : find_bvp_solutions(*L, *H, q0, q1, cls, ocfg);
                for (auto& cp : r.generators) generators.push_back(std::move(cp));
                for (auto& qc : r.quarantined) quarantined.push_back(std::move(qc));
            }
            std::sort(generators.begin(), generators.end(),
                      [](const CriticalPoint& a, const CriticalPoint& b) {
                          if (a.action != b.action) return a.action < b.action;
                          for (int j = 0; j < a.loop.q.rows(); ++j)
                              for (int d = 0; d < a.loop.q.cols(); ++d)
                                  if (a.loop.q(j, d) != b.loop.q(j, d))
                                      return a.loop.q(j, d) < b.loop.q(j, d);
                          return false;
                      });
            if (!quarantined.empty() && cfg.fail_on_quarantine)
                record_failure("degenerate candidates quarantined; system violates (L0)/(H0)",
                               kExitVerification);
        }

        std::vector<int> maslov(generators.size(), 0);
        std::vector<bool> index_ok(generators.size(), true);
        if (stages.indices) {
            for (size_t i = 0; i < generators.size(); ++i) {
                IndexTheoremReport r = verify_index_theorem(*L, *H, generators[i]);
                maslov[i] = r.mu;
                index_ok[i] = r.equal;
                if (!r.equal)
                    record_failure("index theorem failed on generator " + std::to_string(i),
                                   kExitVerification);
            }
        }

        // generator table
        {
            ordered_json gens = ordered_json::array();
            std::string csv = "id,class,index,index_stable,action,lift_action,abs_gap,maslov,"
                              "margin,residual,hamilton_residual\n";
            for (size_t i = 0; i < generators.size(); ++i) {
                const CriticalPoint& cp = generators[i];
                double gap = std::abs(cp.action - cp.lift_action);
                ordered_json g;
                g["id"] = i;
                g["class"] = homotopy_key(cp.homotopy);
                g["index"] = cp.morse_index;
                g["index_stable"] = cp.index_stable;
                g["action"] = cp.action;
                g["lift_action"] = cp.lift_action;
                g["abs_gap"] = gap;
                if (stages.indices) {
                    g["maslov"] = maslov[i];
                    g["index_theorem"] = index_ok[i];
                }
                g["nondeg_margin"] = cp.nondeg_margin;
                g["residual"] = cp.residual;
                g["hamilton_residual"] = cp.hamilton_residual;
                gens.push_back(g);
                csv += std::to_string(i) + "," + homotopy_key(cp.homotopy) + "," +
                       std::to_string(cp.morse_index) + "," +
                       (cp.index_stable ? "1" : "0") + "," + csv_double(cp.action) + "," +
                       csv_double(cp.lift_action) + "," + csv_double(gap) + "," +
                       (stages.indices ? std::to_string(maslov[i]) : "") + "," +
                       csv_double(cp.nondeg_margin) + "," + csv_double(cp.residual) + "," +
                       csv_double(cp.hamilton_residual) + "\n";
            }
            rep["generators"] = gens;
            if (stages.orbits) out.files["generators.csv"] = csv;

            ordered_json quar = ordered_json::array();
            for (const auto& qc : quarantined) {
                ordered_json q;
                q["class"] = homotopy_key(qc.homotopy);
                q["action"] = qc.action;
                q["nondeg_margin"] = qc.nondeg_margin;
                q["reason"] = qc.reason;
                quar.push_back(q);
            }
            rep["quarantined"] = quar;
        }

        MorseComplexData complex_data;
        if (stages.complex_ && !generators.empty()) {
            FlowParams fp;
            fp.r0 = cfg.flow_r0;
            fp.precond_scale = cfg.flow_precond_scale;
            fp.sphere_samples = cfg.flow_sphere_samples;
            fp.bisect_depth = cfg.flow_bisect_depth;
            fp.max_steps = cfg.flow_max_steps;
            fp.action_floor = -1e6;
            try {
                complex_data = assemble_complex(*L, generators, fp);
                complex_data.seed = cfg.seed;
                ordered_json files = ordered_json::array();
                for (const auto& blk : complex_data.classes) {
                    for (int k = 1; k <= blk.top_index; ++k) {
                        std::ostringstream name;
                        name << "boundary_" << homotopy_key(blk.homotopy) << "_d" << k << ".txt";
                        std::ostringstream body;
                        const IntMatrix& m = blk.boundary[k];
                        for (int r = 0; r < m.rows; ++r) {
                            for (int c = 0; c < m.cols; ++c)
                                body << (c ? " " : "") << m.at(r, c).str();
                            body << "\n";
                        }
                        out.files[name.str()] = body.str();
                        files.push_back(name.str());
                    }
                }
                rep["boundary_files"] = files;
                ordered_json warns = ordered_json::array();
                for (const auto& w : complex_data.warnings) warns.push_back(w.note);
                rep["transversality_warnings"] = warns;
            } catch (const BoundarySquareError& e) {
                record_failure(std::string("boundary assembly: ") + e.what(), kExitNumerical);
            }
        }

        if (stages.homology_ && !complex_data.generators.empty()) {
            std::vector<ClassHomology> hom = homology(complex_data);
            ordered_json hj = ordered_json::array();
            for (const auto& ch : hom) {
                ordered_json c;
                c["class"] = homotopy_key(ch.homotopy);
                ordered_json betti = ordered_json::array();
                ordered_json torsion = ordered_json::array();
                for (const auto& g : ch.groups) {
                    betti.push_back(g.betti);
                    ordered_json tt = ordered_json::array();
                    for (const auto& d : g.torsion) tt.push_back(d.str());
                    torsion.push_back(tt);
                }
                c["betti"] = betti;
                c["torsion"] = torsion;
                if (ref) {
                    ordered_json expect = ordered_json::array();
                    for (long b : ref->expected_betti) expect.push_back(b);
                    c["catalog_betti"] = expect;
                    bool match = static_cast<long>(ch.groups.size()) ==
                                 static_cast<long>(ref->expected_betti.size());
                    if (match)
                        for (size_t k = 0; k < ch.groups.size(); ++k)
                            if (ch.groups[k].betti != ref->expected_betti[k] ||
                                !ch.groups[k].torsion.empty())
                                match = false;
                    c["catalog_match"] = match;
                    if (!match)
                        record_failure("homology differs from catalog in class " +
                                           homotopy_key(ch.homotopy),
                                       kExitVerification);
                }
                hj.push_back(c);
            }
            rep["homology"] = hj;
        }

        if (stages.orbits && ref) {
            // catalog generator expectations, per class
            std::map<std::string, std::vector<int>> got;
            for (const auto& cp : generators)
                got[homotopy_key(cp.homotopy)].push_back(cp.morse_index);
            bool ok = true;
            for (const auto& cls : classes) {
                auto it = got.find(homotopy_key(cls));
                std::vector<int> idx = (it == got.end()) ? std::vector<int>{} : it->second;
                std::sort(idx.begin(), idx.end());
                if (idx != ref->expected_indices) ok = false;
            }
            rep["catalog_generators_match"] = ok;
            if (!ok)
                record_failure("generator table differs from catalog", kExitVerification);
        }

        if (stages.properties && L) {
            // duality sweep (Fenchel-Young side of the action comparison)
            double min_gap = std::numeric_limits<double>::infinity();
            const int trials = 1000;
            std::vector<double> gaps(trials);
#pragma omp parallel for schedule(static)
            for (int i = 0; i < trials; ++i) {
                StreamRng rng(cfg.seed, rng_stage::kPropertySweep, static_cast<std::uint64_t>(i));
                PhaseLoop x = random_phase_loop(rng, bc, cfg.Nt, L->dim(),
                                                q0.size() ? q0 : VectorXd::Zero(L->dim()),
                                                q1.size() ? q1 : VectorXd::Zero(L->dim()));
                gaps[i] = duality_gap(*L, *H, x);
            }
            for (double g : gaps) min_gap = std::min(min_gap, g);
            double lift_worst = 0, ae_worst = 0;
            for (const auto& cp : generators) {
                lift_worst = std::max(lift_worst, std::abs(duality_gap(*L, *H, cp.lift)));
                ae_worst = std::max(ae_worst, std::abs(cp.action - cp.lift_action));
            }
            rep["checks"]["duality_min_gap"] = min_gap;
            rep["checks"]["duality_lift_worst"] = lift_worst;
            rep["checks"]["duality_AE_worst"] = ae_worst;
            if (min_gap < -1e-8 || lift_worst > 1e-8 || ae_worst > 1e-6)
                record_failure("duality sweep failed", kExitVerification);

            // second-variation comparison at each matched pair
            double worst_violation = -std::numeric_limits<double>::infinity();
            for (size_t gi = 0; gi < generators.size(); ++gi) {
                const CriticalPoint& cp = generators[gi];
                DiscretizedLoop base;
                base.bc = cp.loop.bc;
                base.q = cp.loop.q;
                const double eps = 1e-3;
                for (int v = 0; v < 100; ++v) {
                    StreamRng rng(cfg.seed, rng_stage::kVariation,
                                  (static_cast<std::uint64_t>(gi) << 16) + v);
                    Eigen::MatrixXd dq, dp;
                    random_variation(rng, cp.lift, dq, dp);
                    auto eval_gap = [&](double e) {
                        PhaseLoop xs = cp.lift;
                        xs.q += e * dq;
                        xs.pmid += e * dp;
                        DiscretizedLoop qs = base;
                        qs.q += e * dq;
                        return std::make_pair(action_hamiltonian(*H, xs),
                                              action_lagrangian(*L, qs));
                    };
                    auto [Ap, Ep] = eval_gap(eps);
                    auto [Am, Em] = eval_gap(-eps);
                    double d2A = (Ap - 2 * cp.lift_action + Am) / (eps * eps);
                    double d2E = (Ep - 2 * cp.action + Em) / (eps * eps);
                    worst_violation = std::max(worst_violation, d2A - d2E);
                }
            }
            rep["checks"]["second_variation_worst"] = worst_violation;
            if (worst_violation > 1e-6)
                record_failure("second-variation inequality violated", kExitVerification);

            // triangular generator certificate: action-sorted diagonal pairs
            bool tri = true;
            for (size_t i = 0; i + 1 < generators.size(); ++i)
                if (generators[i + 1].action < generators[i].action) tri = false;
            for (size_t i = 0; i < generators.size(); ++i) {
                if (std::abs(generators[i].action - generators[i].lift_action) > 1e-6) tri = false;
                if (stages.indices && !index_ok[i]) tri = false;
            }
            rep["checks"]["triangular_certificate"] = tri;
            if (!tri) record_failure("triangular certificate failed", kExitVerification);
        }

        if (stages.fredholm_ && cfg.fredholm.enabled) {
            std::vector<OperatorSpec> specs = acceptance_specs(cfg.fredholm);
            std::vector<FredholmRow> rows(specs.size());
            std::vector<std::string> errors(specs.size());
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < static_cast<int>(specs.size()); ++i) {
                FredholmRow row;
                row.label = specs[i].label;
                try {
                    row.predicted = predicted_index(specs[i]);
                    row.numeric = numeric_index(specs[i], /*check_stability=*/true);
                    row.equal = (row.numeric.index == row.predicted);
                    double th;
                    MatrixXd diff = specs[i].S.Sp -
                                    specs[i].S.Sp(0, 0) * MatrixXd::Identity(2, 2);
                    if (specs[i].n == 1 && specs[i].S.is_constant() &&
                        diff.cwiseAbs().maxCoeff() == 0) {
                        th = specs[i].S.Sp(0, 0);
                        (void)th;
                        row.kernel_angle = kernel_basis_check(specs[i]);
                    }
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
                rows[i] = row;
            }
            ordered_json fj = ordered_json::array();
            for (size_t i = 0; i < rows.size(); ++i) {
                ordered_json r;
                r["label"] = rows[i].label;
                if (!errors[i].empty()) {
                    r["error"] = errors[i];
                    record_failure("fredholm spec '" + rows[i].label + "': " + errors[i],
                                   kExitNumerical);
                } else {
                    r["predicted"] = rows[i].predicted;
                    r["dim_ker"] = rows[i].numeric.dim_ker;
                    r["dim_coker"] = rows[i].numeric.dim_coker;
                    r["index"] = rows[i].numeric.index;
                    r["equal"] = rows[i].equal;
                    r["stable"] = rows[i].numeric.stable;
                    if (rows[i].kernel_angle >= 0) r["kernel_angle"] = rows[i].kernel_angle;
                    if (!rows[i].equal || !rows[i].numeric.stable ||
                        (rows[i].kernel_angle >= 0 && rows[i].kernel_angle > 1e-3))
                        record_failure("fredholm mismatch on '" + rows[i].label + "'",
                                       kExitVerification);
                }
                fj.push_back(r);
            }
            rep["fredholm"] = fj;

            if (cfg.fredholm.dump_matrices) {
                for (const auto& sp : specs) {
                    AssembledOperator op = assemble(sp);
                    std::ostringstream body;
                    std::string label = sp.label;
                    for (auto& ch : label)
                        if (ch == ' ' || ch == '>') ch = '_';
                    std::ostringstream fname;
                    fname << "matrix_" << label << ".txt";
                    long row_off = 0, col_off = 0;
                    for (const auto& blk : op.blocks) {
                        for (long r = 0; r < blk.A.rows(); ++r)
                            for (long c = 0; c < blk.A.cols(); ++c) {
                                auto v = blk.A(r, c);
                                if (v.real() != 0)
                                    body << row_off + r << " " << col_off + c << " " << v.real()
                                         << "\n";
                            }
                        row_off += blk.A.rows();
                        col_off += blk.A.cols();
                    }
                    out.files[fname.str()] = body.str();
                }
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        record_failure(std::string("pipeline: ") + e.what(), kExitNumerical);
    }

    ordered_json status;
    status["exit_code"] = out.exit_code;
    ordered_json fl = ordered_json::array();
    for (const auto& f : out.failures) fl.push_back(f);
    status["failures"] = fl;
    rep["status"] = status;
    out.report_json = rep.dump(2) + "\n";
    return out;
}

void write_result(const PipelineResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "report.json", std::ios::binary);
        f << result.report_json;
    }
    for (const auto& [name, body] : result.files) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        f << body;
    }
}

} // namespace loopmorse
