#include "kgtox/errors.hpp"
#include "kgtox/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

struct CliFlags {
    std::string config_path;
    std::string out_dir;
    std::string mode;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

kgtox::RunConfig resolve_config(const CliFlags& flags) {
    kgtox::RunConfig config;
    if (!flags.config_path.empty()) {
        config = kgtox::load_config_file(flags.config_path);
    }
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (!flags.mode.empty()) config.mode = flags.mode;
    if (flags.seed_set) {
        config.seed = flags.seed;
        config.apply_seed();
    }
    config.validate();
    return config;
}

int run_command(const CliFlags& flags, const std::string& name,
                kgtox::CommandResult (*fn)(const kgtox::RunConfig&)) {
    try {
        const kgtox::RunConfig config = resolve_config(flags);
        const kgtox::CommandResult result = fn(config);
        if (name != "all") {
            kgtox::write_manifest(config, name, result);
        }
        std::printf("%s: wrote %zu files to %s\n", name.c_str(), result.outputs.size(),
                    config.out_dir.string().c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s failed: %s\n", name.c_str(), e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph based acute toxicity prediction toolkit"};
    app.require_subcommand(1);

    CliFlags flags;
    app.add_option("--config", flags.config_path, "Config file (INI sections)");
    app.add_option("--out", flags.out_dir, "Run output directory");
    app.add_option("--mode", flags.mode, "Gap-filling mode: species | chemical")
        ->check(CLI::IsMember({"species", "chemical"}));
    auto* seed_opt = app.add_option("--seed", flags.seed, "Master seed for the whole run");

    struct Sub {
        const char* name;
        const char* help;
        kgtox::CommandResult (*fn)(const kgtox::RunConfig&);
    };
    const Sub subs[] = {
        {"generate", "Generate a synthetic KG, effect data and fingerprints", kgtox::cmd_generate},
        {"embed", "Train embeddings and write entity feature vectors", kgtox::cmd_embed},
        {"evaluate", "Run the grouped cross-validation protocol on both feature arms",
         kgtox::cmd_evaluate},
        {"explain", "Produce density, error-model and common-facts analyses", kgtox::cmd_explain},
        {"all", "Run generate, embed, evaluate and explain in sequence", kgtox::cmd_all},
    };
    for (const Sub& sub : subs) {
        app.add_subcommand(sub.name, sub.help);
    }

    CLI11_PARSE(app, argc, argv);
    flags.seed_set = seed_opt->count() > 0;

    for (const Sub& sub : subs) {
        if (app.got_subcommand(sub.name)) {
            return run_command(flags, sub.name, sub.fn);
        }
    }
    return 1;
}
