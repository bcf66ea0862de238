#pragma once

#include "kgtox/embed.hpp"
#include "kgtox/eval.hpp"
#include "kgtox/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kgtox {

// Everything a run needs, filled from an INI-style config file plus flag
// overrides. One run directory per invocation.
struct RunConfig {
    std::filesystem::path out_dir = "run";
    std::string mode = "species"; // gap-filling mode: species | chemical

    SynthConfig synth;
    TrainingConfig training;
    ProtocolConfig protocol;

    std::vector<std::string> hierarchy_predicates = {synth_vocab::kParentTaxon,
                                                     synth_vocab::kParentClass};

    // explanation settings
    std::vector<double> radius_quantiles = {0.1, 0.25, 0.5}; // used when radii empty
    std::vector<double> radii;                               // explicit radii, both sides
    std::vector<int> depths = {1, 2, 3};
    std::vector<std::size_t> n_values = {2, 3, 5, 7, 9, 11};
    std::size_t common_facts_n = 3;
    std::size_t error_model_runs = 100;
    double error_model_train_fraction = 0.8;
    bool use_cosine = false;
    double histogram_bin_width = 0.25;

    std::uint64_t seed = 42;

    // input files; default to the generate outputs inside out_dir
    std::filesystem::path kg_file() const { return out_dir / "kg.nt"; }
    std::filesystem::path effects_file() const { return out_dir / "effects.tsv"; }
    std::filesystem::path fingerprints_file() const { return out_dir / "fingerprints.tsv"; }
    std::filesystem::path features_file() const { return out_dir / "features.csv"; }

    void apply_seed(); // pushes the master seed into the module configs
    void validate() const;

    // canonical key=value rendering; hashed into manifests
    std::string canonical_string() const;
};

// Parses the INI-ish config format: [section] headers, key = value lines,
// '#' comments. Unknown keys are an error.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::filesystem::path& path);

struct CommandResult {
    std::vector<std::filesystem::path> outputs;
};

CommandResult cmd_generate(const RunConfig& config);
CommandResult cmd_embed(const RunConfig& config);
CommandResult cmd_evaluate(const RunConfig& config);
CommandResult cmd_explain(const RunConfig& config);
CommandResult cmd_all(const RunConfig& config);

// Writes manifest_<command>.json and verifies every declared output exists.
void write_manifest(const RunConfig& config, const std::string& command,
                    const CommandResult& result);

} // namespace kgtox
