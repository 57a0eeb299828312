// Wall-clock comparison of the OpenMP kernels against their serial reference:
// multi-start orbit search, unstable-sphere flow shooting, and the duality
// property sweep.  Same task lists, same per-task RNG streams, so both paths
// produce identical results; only the scheduling differs.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "loopmorse/catalog.hpp"
#include "loopmorse/morse.hpp"
#include "loopmorse/pipeline.hpp"

using namespace loopmorse;
using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int main() {
    const ReferenceSystem& ref = catalog_lookup("pendulum-omega-pi");
    auto L = ref.lagrangian;
    auto H = std::make_shared<HamiltonianSystem>(L);

    std::printf("threads available: %d\n", omp_get_max_threads());

    for (bool serial : {true, false}) {
        OrbitSearchConfig cfg;
        cfg.Nt = 64;
        cfg.seed_count = 96;
        cfg.action_bound = ref.action_bound;
        cfg.serial = serial;
        auto t0 = Clock::now();
        OrbitSearchResult r = find_periodic_orbits(*L, *H, Eigen::VectorXi::Zero(1), cfg);
        std::printf("orbit search   [%s] %.3f s  (%zu generators, %d converged seeds)\n",
                    serial ? "serial" : "openmp", seconds_since(t0), r.generators.size(),
                    r.seeds_converged);
    }

    {
        OrbitSearchConfig cfg;
        cfg.Nt = 64;
        cfg.seed_count = 48;
        cfg.action_bound = ref.action_bound;
        OrbitSearchResult r = find_periodic_orbits(*L, *H, Eigen::VectorXi::Zero(1), cfg);
        if (r.generators.size() == 2) {
            for (bool serial : {true, false}) {
                FlowParams fp;
                fp.serial = serial;
                fp.sphere_samples = 64;
                auto t0 = Clock::now();
                CountResult cr = count_connecting_orbits(*L, 1, 0, r.generators, fp);
                std::printf("flow shooting  [%s] %.3f s  (n = %lld, %zu witnesses)\n",
                            serial ? "serial" : "openmp", seconds_since(t0), cr.count,
                            cr.witnesses.size());
            }
        }
    }

    for (int threads : {1, omp_get_max_threads()}) {
        RunConfig cfg;
        cfg.system = "pendulum-omega-pi";
        cfg.Nt = 64;
        cfg.threads = threads;
        cfg.fredholm.enabled = false;
        auto t0 = Clock::now();
        PipelineResult res = run_pipeline(cfg, "verify-all");
        std::printf("verify-all     [%d thread%s] %.3f s  (exit %d)\n", threads,
                    threads == 1 ? "" : "s", seconds_since(t0), res.exit_code);
    }
    return 0;
}
