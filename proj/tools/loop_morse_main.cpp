#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "loopmorse/pipeline.hpp"

using namespace loopmorse;

int main(int argc, char** argv) {
    CLI::App app{"loop-morse: Morse complexes of the Lagrangian action functional,\n"
                 "Conley-Zehnder/Maslov indices, and truncated Cauchy-Riemann index checks"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false, out_set = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to the JSON run configuration")
            ->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)")
            ->each([&](const std::string&) { out_set = true; });
        sub->add_option("--threads", threads, "worker threads (0 = library default)");
        sub->add_option("--seed", seed, "RNG seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
    };

    for (const char* name :
         {"orbits", "indices", "complex", "homology", "fredholm", "verify-all"})
        add_common(app.add_subcommand(name));

    CLI11_PARSE(app, argc, argv);
    std::string stage = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = load_config_file(config_path);
        if (seed_set) cfg.seed = seed;
        if (threads > 0) cfg.threads = threads;
        if (out_set) cfg.out_dir = out_dir;

        PipelineResult result = run_pipeline(cfg, stage);
        write_result(result, cfg.out_dir);
        for (const auto& f : result.failures) std::fprintf(stderr, "[fail] %s\n", f.c_str());
        std::fprintf(stderr, "%s: exit %d, report at %s/report.json\n", stage.c_str(),
                     result.exit_code, cfg.out_dir.c_str());
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
}
