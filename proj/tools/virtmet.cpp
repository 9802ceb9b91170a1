// virtmet: generate virtual parts, measure them under the Rep1..Rep4 datum
// constructions and analyze the Taguchi L9 study.

#include "virtmet/errors.hpp"
#include "virtmet/study.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitPipeline = 2;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> variants;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "Study configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Texture seed (overrides the config)");
    cmd->add_option("--out", o.out, "Output directory (overrides VIRTMET_OUT and the config)");
    cmd->add_option("--variant", o.variants, "Variant to report; repeatable (default Rep1..Rep4)");
}

virtmet::StudyConfig resolve(const CommonOptions& o) {
    virtmet::StudyConfig cfg = o.config.empty() ? virtmet::StudyConfig{} : virtmet::load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (const char* env = std::getenv(virtmet::kOutDirEnv); env && *env) cfg.out_dir = env;
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (!o.variants.empty()) {
        std::vector<virtmet::VariantSpec> chosen;
        for (const auto& name : o.variants) {
            auto it = std::find_if(cfg.variants.begin(), cfg.variants.end(),
                                   [&](const auto& v) { return v.name == name; });
            std::optional<virtmet::VariantSpec> v =
                it != cfg.variants.end() ? std::optional(*it) : virtmet::find_standard_variant(name);
            if (!v) throw virtmet::ConfigError("--variant", "unknown variant '" + name + "'");
            chosen.push_back(*v);
        }
        cfg.variants = std::move(chosen);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual-part metrology study: datum construction variants under a Taguchi L9 plan"};
    app.require_subcommand(1);

    CommonOptions gen_opts;
    auto* generate = app.add_subcommand("generate", "Write virtual-part point files, one directory per experiment");
    add_common(generate, gen_opts);

    CommonOptions run_opts;
    std::string parts_dir;
    auto* run = app.add_subcommand("run", "Measure every experiment; write results.csv and effects.json");
    add_common(run, run_opts);
    run->add_option("--parts", parts_dir, "Read parts written by 'generate' instead of building them")
        ->check(CLI::ExistingDirectory);

    std::string csv_path;
    std::string effects_out;
    auto* analyze = app.add_subcommand("analyze", "Recompute effects.json from a results.csv");
    analyze->add_option("results", csv_path, "results.csv from 'run'")->required()->check(CLI::ExistingFile);
    analyze->add_option("--out", effects_out, "Output directory (default: next to the CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*generate) {
            const auto cfg = resolve(gen_opts);
            const auto summary = virtmet::generate_study(cfg);
            std::cout << "wrote " << summary.experiment_dirs.size() << " experiments to " << cfg.out_dir.string()
                      << '\n';
        } else if (*run) {
            const auto cfg = resolve(run_opts);
            const auto summary = virtmet::run_study(
                cfg, parts_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(parts_dir));
            std::cout << "wrote " << summary.results_csv.string() << " and " << summary.effects_json.string() << '\n';
        } else if (*analyze) {
            std::filesystem::path out_dir = effects_out;
            if (out_dir.empty()) out_dir = std::filesystem::path(csv_path).parent_path();
            const auto target = out_dir / "effects.json";
            virtmet::analyze_results(csv_path, target);
            std::cout << "wrote " << target.string() << '\n';
        }
    } catch (const virtmet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPipeline;
    }
    return 0;
}
