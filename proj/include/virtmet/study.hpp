#pragma once

// Study configuration, report formats and the generate / run / analyze
// pipeline behind the command-line tool.

#include "virtmet/datum.hpp"
#include "virtmet/doe.hpp"
#include "virtmet/virtpart.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace virtmet {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutDirEnv = "VIRTMET_OUT";

struct StudyConfig {
    PartGeometry geometry;
    std::vector<FactorSpec> factors = study_factors();
    /// When non-empty, replaces the Taguchi plan with these rows.
    std::vector<DefectSpec> custom_rows;
    std::vector<VariantSpec> variants = standard_variants();
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "virtmet-out";
};

/// Key/value text:  `key = value` lines, '#' comments, lists comma separated.
/// Throws ConfigError naming the field.
StudyConfig parse_config(std::istream& in);
StudyConfig load_config(const std::filesystem::path& path);

DoePlan make_plan(const StudyConfig& config);

// results.csv: experiment,flatnessTop,flatnessSide,angleDeg,variant,holeX,holeY,deviationY
inline constexpr const char* kResultsHeader =
    "experiment,flatnessTop,flatnessSide,angleDeg,variant,holeX,holeY,deviationY";
void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// Throws ParseError carrying the 1-based line number.
std::vector<RunRecord> read_results_csv(std::istream& in);

/// Variants present in the records, sorted by name.
std::vector<std::string> recorded_variants(const std::vector<RunRecord>& records);

/// effects.json text for every recorded variant.
std::string effects_json(const std::vector<RunRecord>& records);

struct GenerateSummary {
    std::vector<std::filesystem::path> experiment_dirs;
};

/// One directory per experiment with top/side/aux/bore point files and manifest.json.
GenerateSummary generate_study(const StudyConfig& config);

struct RunSummary {
    std::filesystem::path results_csv;
    std::filesystem::path effects_json;
    std::vector<RunRecord> records;
};

/// Builds parts in memory, or reads `parts_dir` written by generate_study.
RunSummary run_study(const StudyConfig& config, const std::optional<std::filesystem::path>& parts_dir = {});

/// Re-analyzes a results.csv into `effects_path`.
void analyze_results(const std::filesystem::path& csv_path, const std::filesystem::path& effects_path);

/// Part as written by generate_study, with geometry taken from `geometry`.
PartModel load_part(const std::filesystem::path& experiment_dir, const PartGeometry& geometry, int& experiment);

}  // namespace virtmet
