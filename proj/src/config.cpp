#include "loopmorse/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "loopmorse/catalog.hpp"

namespace loopmorse {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + path + ": " + what);
}

template <typename T>
T get_or(const json& j, const std::string& key, const T& def, const std::string& path) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(path + "/" + key, e.what());
    }
}

void check_range(double v, double lo, double hi, const std::string& path) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "value " << v << " outside documented range [" << lo << ", " << hi << "]";
        fail(path, os.str());
    }
}

std::vector<TrigTerm> parse_terms(const json& arr, int dim, const std::string& path) {
    std::vector<TrigTerm> terms;
    if (!arr.is_array()) fail(path, "expected an array of coefficient terms");
    int i = 0;
    for (const auto& tj : arr) {
        std::string p = path + "[" + std::to_string(i++) + "]";
        TrigTerm t;
        t.c = get_or<double>(tj, "c", 0.0, p);
        t.kt = get_or<int>(tj, "kt", 0, p);
        t.t_sin = get_or<std::string>(tj, "t_phase", "cos", p) == "sin";
        t.kq = Eigen::VectorXi::Zero(dim);
        t.q_sin.assign(dim, false);
        if (tj.contains("kq")) {
            auto kq = tj.at("kq");
            if (!kq.is_array() || static_cast<int>(kq.size()) != dim)
                fail(p + "/kq", "expected " + std::to_string(dim) + " wave numbers");
            for (int d = 0; d < dim; ++d) t.kq[d] = kq[d].get<int>();
        }
        if (tj.contains("q_phase")) {
            auto ph = tj.at("q_phase");
            if (!ph.is_array() || static_cast<int>(ph.size()) != dim)
                fail(p + "/q_phase", "expected " + std::to_string(dim) + " phase selectors");
            for (int d = 0; d < dim; ++d) t.q_sin[d] = ph[d].get<std::string>() == "sin";
        }
        terms.push_back(t);
    }
    return terms;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    RunConfig cfg;
    cfg.system = get_or<std::string>(j, "system", "custom", "/system");
    if (j.contains("manifold")) {
        const auto& m = j.at("manifold");
        cfg.manifold_kind = get_or<std::string>(m, "kind", "flat_torus", "/manifold");
        cfg.dim = get_or<int>(m, "dim", 1, "/manifold");
        if (cfg.manifold_kind != "flat_torus" && cfg.manifold_kind != "sphere2")
            fail("/manifold/kind", "expected 'flat_torus' or 'sphere2'");
        if (cfg.manifold_kind == "flat_torus" && (cfg.dim < 1 || cfg.dim > 4))
            fail("/manifold/dim", "flat torus dimension must be 1..4");
    }
    if (j.contains("lagrangian")) cfg.lagrangian_json = j.at("lagrangian").dump();
    if (cfg.system == "custom" && cfg.lagrangian_json.empty())
        fail("/lagrangian", "custom systems need coefficient tables");

    if (j.contains("boundary")) {
        const auto& b = j.at("boundary");
        cfg.boundary = get_or<std::string>(b, "class", "periodic", "/boundary");
        if (cfg.boundary != "periodic" && cfg.boundary != "fixed")
            fail("/boundary/class", "expected 'periodic' or 'fixed'");
        cfg.q0 = get_or<std::vector<double>>(b, "q0", {}, "/boundary");
        cfg.q1 = get_or<std::vector<double>>(b, "q1", {}, "/boundary");
        if (b.contains("classes")) {
            for (const auto& c : b.at("classes")) {
                if (c.is_number_integer())
                    cfg.classes.push_back({c.get<int>()});
                else
                    cfg.classes.push_back(c.get<std::vector<int>>());
            }
        }
        if (cfg.boundary == "fixed" &&
            (cfg.q0.empty() || cfg.q1.empty()))
            fail("/boundary", "fixed-ends runs need q0 and q1");
    }

    cfg.action_bound = get_or<double>(j, "action_bound", 10.0, "/action_bound");
    check_range(cfg.action_bound, -1e6, 1e6, "/action_bound");

    if (j.contains("resolution")) {
        const auto& r = j.at("resolution");
        cfg.Nt = get_or<int>(r, "Nt", 64, "/resolution");
    } else {
        cfg.Nt = get_or<int>(j, "Nt", 64, "/Nt");
    }
    if (cfg.Nt < 16 || (cfg.Nt & (cfg.Nt - 1)) != 0)
        fail("/resolution/Nt", "node count must be >= 16 and a power of two");

    cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "/seed");
    cfg.seed_count = get_or<int>(j, "seed_count", 48, "/seed_count");
    check_range(cfg.seed_count, 1, 100000, "/seed_count");
    cfg.threads = get_or<int>(j, "threads", 0, "/threads");
    check_range(cfg.threads, 0, 1024, "/threads");

    if (j.contains("flow")) {
        const auto& f = j.at("flow");
        cfg.flow_r0 = get_or<double>(f, "r0", 1e-3, "/flow");
        check_range(cfg.flow_r0, 1e-8, 1.0, "/flow/r0");
        cfg.flow_precond_scale = get_or<double>(f, "precond_scale", 1.0, "/flow");
        check_range(cfg.flow_precond_scale, 0.1, 10.0, "/flow/precond_scale");
        cfg.flow_sphere_samples = get_or<int>(f, "sphere_samples", 64, "/flow");
        check_range(cfg.flow_sphere_samples, 2, 4096, "/flow/sphere_samples");
        cfg.flow_bisect_depth = get_or<int>(f, "bisect_depth", 40, "/flow");
        check_range(cfg.flow_bisect_depth, 4, 60, "/flow/bisect_depth");
        cfg.flow_max_steps = get_or<long>(f, "max_steps", 400000, "/flow");
    }

    if (j.contains("fredholm")) {
        const auto& f = j.at("fredholm");
        cfg.fredholm.enabled = get_or<bool>(f, "enabled", true, "/fredholm");
        cfg.fredholm.K = get_or<int>(f, "K", 8, "/fredholm");
        check_range(cfg.fredholm.K, 2, 64, "/fredholm/K");
        cfg.fredholm.S0 = get_or<double>(f, "S0", 8.0, "/fredholm");
        check_range(cfg.fredholm.S0, 2.0, 64.0, "/fredholm/S0");
        cfg.fredholm.h = get_or<double>(f, "h", 1.0 / 16, "/fredholm");
        check_range(cfg.fredholm.h, 1.0 / 256, 0.5, "/fredholm/h");
        cfg.fredholm.dump_matrices = get_or<bool>(f, "dump_matrices", false, "/fredholm");
    }

    cfg.out_dir = get_or<std::string>(j, "out", "out", "/out");
    cfg.fail_on_quarantine = get_or<bool>(j, "fail_on_quarantine", true, "/fail_on_quarantine");

    if (cfg.system != "custom") catalog_lookup(cfg.system); // throws for unknown names
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::shared_ptr<const LagrangianSystem> build_system(const RunConfig& cfg) {
    if (cfg.system != "custom") return catalog_lookup(cfg.system).lagrangian;

    json lj = json::parse(cfg.lagrangian_json);
    ManifoldModel m = cfg.manifold_kind == "flat_torus" ? ManifoldModel::flat_torus(cfg.dim)
                                                        : ManifoldModel::sphere2();
    const int n = m.dim();
    TrigField V = TrigField::constant(n, 0.0);
    if (lj.contains("V")) V = TrigField(n, parse_terms(lj.at("V"), n, "/lagrangian/V"));
    std::vector<TrigField> A;
    if (lj.contains("A")) {
        const auto& aj = lj.at("A");
        if (!aj.is_array() || static_cast<int>(aj.size()) != n)
            fail("/lagrangian/A", "expected " + std::to_string(n) + " component term lists");
        for (int d = 0; d < n; ++d)
            A.push_back(TrigField(
                n, parse_terms(aj[d], n, "/lagrangian/A[" + std::to_string(d) + "]")));
    }
    std::vector<std::vector<TrigField>> T;
    if (lj.contains("T")) {
        const auto& tj = lj.at("T");
        if (!tj.is_array() || static_cast<int>(tj.size()) != n)
            fail("/lagrangian/T", "expected an n x n table of term lists");
        T.resize(n);
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(tj[i].size()) != n) fail("/lagrangian/T", "ragged T table");
            for (int c = 0; c < n; ++c)
                T[i].push_back(TrigField(n, parse_terms(tj[i][c], n, "/lagrangian/T")));
        }
    }
    return std::make_shared<LagrangianSystem>(std::move(m), std::move(V), std::move(A),
                                              std::move(T));
}

} // namespace loopmorse
