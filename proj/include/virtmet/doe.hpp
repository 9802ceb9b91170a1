#pragma once

// Taguchi design of experiments over virtual parts.

#include "virtmet/datum.hpp"
#include "virtmet/virtpart.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace virtmet {

// Factor names understood by the plan builder and the analysis.
inline constexpr const char* kFlatnessTop = "flatnessTop";
inline constexpr const char* kFlatnessSide = "flatnessSide";
inline constexpr const char* kAngle = "angle";

struct FactorSpec {
    std::string name;
    /// Physical values for levels 1..n (mm, or degrees for the angle).
    std::vector<double> levels;
};

/// A = top flatness, B = side flatness, C = angle deviation, levels as tabulated.
std::vector<FactorSpec> study_factors();

struct TaguchiArray {
    std::string name;
    /// Rows of 1-based level indices.
    std::vector<std::vector<int>> matrix;

    std::size_t runs() const { return matrix.size(); }
    std::size_t columns() const { return matrix.empty() ? 0 : matrix.front().size(); }
};

/// Standard array for `n_levels` in 2..5 and `n_params` in 2..10; OutOfTable otherwise.
std::string select_array(int n_levels, int n_params);

TaguchiArray l9_matrix();

/// Only "L9" ships as data; other selector names throw NotImplemented.
TaguchiArray taguchi_array(const std::string& name);

/// Every column pair contains each ordered level pair equally often.
bool is_orthogonal(const TaguchiArray& array);

struct PlanRow {
    int experiment = 0;         // 1-based
    std::vector<int> levels;    // per factor, 1-based
    DefectSpec defects;
};

struct DoePlan {
    std::string array_name;
    std::vector<std::string> factor_names;
    std::vector<PlanRow> rows;
};

/// Factors take the first array columns in order. Throws TooManyFactors.
DoePlan build_plan(std::span<const FactorSpec> factors, const TaguchiArray& array);

/// Plan from explicit defect rows (experiments numbered from 1).
DoePlan custom_plan(const std::vector<DefectSpec>& rows);

struct VariantOutcome {
    std::string variant;
    Point2 hole;
    double deviation_y = 0.0;
};

struct RunRecord {
    int experiment = 0;
    DefectSpec defects;
    std::vector<VariantOutcome> outcomes;

    /// Throws InvalidArgument if the variant was not measured.
    const VariantOutcome& outcome(const std::string& variant) const;
};

/// Texture seed of an experiment's part.
std::uint64_t experiment_seed(std::uint64_t seed, int experiment);

/// Builds and measures every plan row; runs execute concurrently when `parallel`.
std::vector<RunRecord> run_plan(const DoePlan& plan, const PartGeometry& geometry, std::uint64_t seed,
                                const std::vector<VariantSpec>& variants = standard_variants(),
                                bool parallel = true);

struct LevelMean {
    double value = 0.0;
    double mean = 0.0;
    std::size_t runs = 0;
};

struct FactorEffect {
    std::string name;
    std::vector<LevelMean> levels;
    double range = 0.0;
};

struct AngleGroup {
    double angle = 0.0;
    std::vector<int> experiments;
    std::vector<double> values;  // |deviationY|
    double mean = 0.0;
    /// max - min of `values`.
    double spread = 0.0;
};

/// Main effects of |deviationY| for one variant.
struct EffectsReport {
    std::string variant;
    double grand_mean = 0.0;
    std::vector<FactorEffect> factors;
    /// Largest range; empty when every range is zero.
    std::optional<std::string> dominant;
    std::vector<AngleGroup> angle_groups;

    const FactorEffect& factor(const std::string& name) const;
};

/// Throws IncompletePlan unless the records form a balanced plan numbered 1..N
/// that includes `variant` in every run.
EffectsReport main_effects(const std::vector<RunRecord>& records, const std::string& variant);

/// Runs grouped by angle (ascending), experiments in index order.
std::vector<AngleGroup> angle_grouped_variation(const std::vector<RunRecord>& records, const std::string& variant);

}  // namespace virtmet
