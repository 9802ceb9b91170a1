#include "virtmet/doe.hpp"

#include "virtmet/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <map>

namespace virtmet {

namespace {

constexpr std::array<const char*, 3> kFactorNames{kFlatnessTop, kFlatnessSide, kAngle};

// Rows: 2..5 levels; columns: 2..10 parameters.
constexpr std::array<std::array<const char*, 9>, 4> kSelector{{
    {"L4", "L4", "L8", "L8", "L8", "L8", "L12", "L12", "L12"},
    {"L9", "L9", "L9", "L9", "L18", "L18", "L18", "L27", "L27"},
    {"L16", "L16", "L16", "L16", "L32", "L32", "L32", "L32", "L32"},
    {"L25", "L25", "L25", "L25", "L25", "L50", "L50", "L50", "L50"},
}};

double& defect_field(DefectSpec& d, const std::string& name) {
    if (name == kFlatnessTop) return d.flatness_top;
    if (name == kFlatnessSide) return d.flatness_side;
    if (name == kAngle) return d.angle_deviation;
    throw InvalidArgument("unknown factor '" + name + "'");
}

double defect_value(const DefectSpec& d, const std::string& name) {
    if (name == kFlatnessTop) return d.flatness_top;
    if (name == kFlatnessSide) return d.flatness_side;
    return d.angle_deviation;
}

std::vector<const RunRecord*> checked_runs(const std::vector<RunRecord>& records, const std::string& variant) {
    if (records.empty()) throw IncompletePlan("no run records");
    std::vector<const RunRecord*> runs;
    runs.reserve(records.size());
    for (const auto& r : records) runs.push_back(&r);
    std::sort(runs.begin(), runs.end(), [](auto* a, auto* b) { return a->experiment < b->experiment; });
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i]->experiment != static_cast<int>(i) + 1) {
            throw IncompletePlan("experiments must be numbered 1.." + std::to_string(runs.size()) +
                                 " without gaps or repeats");
        }
        const auto& o = runs[i]->outcomes;
        if (std::none_of(o.begin(), o.end(), [&](const auto& x) { return x.variant == variant; })) {
            throw IncompletePlan("experiment " + std::to_string(i + 1) + " has no result for " + variant);
        }
    }
    return runs;
}

}  // namespace

std::vector<FactorSpec> study_factors() {
    return {
        {kFlatnessTop, {0.03, 0.006, 0.0015}},
        {kFlatnessSide, {0.03, 0.006, 0.0015}},
        {kAngle, {0.1, 0.02, 1.0}},
    };
}

std::string select_array(int n_levels, int n_params) {
    if (n_levels < 2 || n_levels > 5 || n_params < 2 || n_params > 10) {
        throw OutOfTable("no standard array for " + std::to_string(n_levels) + " levels and " +
                         std::to_string(n_params) + " parameters");
    }
    return kSelector[n_levels - 2][n_params - 2];
}

TaguchiArray l9_matrix() {
    return {"L9",
            {{1, 1, 1, 1},
             {1, 2, 2, 2},
             {1, 3, 3, 3},
             {2, 1, 2, 3},
             {2, 2, 3, 1},
             {2, 3, 1, 2},
             {3, 1, 3, 2},
             {3, 2, 1, 3},
             {3, 3, 2, 1}}};
}

TaguchiArray taguchi_array(const std::string& name) {
    if (name == "L9") return l9_matrix();
    for (const auto& row : kSelector) {
        if (std::find(row.begin(), row.end(), name) != row.end()) {
            throw NotImplemented("array " + name + " is not shipped");
        }
    }
    throw OutOfTable("unknown array '" + name + "'");
}

bool is_orthogonal(const TaguchiArray& array) {
    const std::size_t cols = array.columns();
    for (std::size_t a = 0; a < cols; ++a) {
        for (std::size_t b = a + 1; b < cols; ++b) {
            std::map<std::pair<int, int>, int> count;
            int la = 0, lb = 0;
            for (const auto& row : array.matrix) {
                ++count[{row[a], row[b]}];
                la = std::max(la, row[a]);
                lb = std::max(lb, row[b]);
            }
            if (count.size() != static_cast<std::size_t>(la * lb)) return false;
            const int first = count.begin()->second;
            for (const auto& [pair, n] : count) {
                if (n != first) return false;
            }
        }
    }
    return true;
}

DoePlan build_plan(std::span<const FactorSpec> factors, const TaguchiArray& array) {
    if (factors.size() > array.columns()) {
        throw TooManyFactors(std::to_string(factors.size()) + " factors exceed the " +
                             std::to_string(array.columns()) + " columns of " + array.name);
    }
    DoePlan plan;
    plan.array_name = array.name;
    for (const auto& f : factors) plan.factor_names.push_back(f.name);
    for (std::size_t r = 0; r < array.runs(); ++r) {
        PlanRow row;
        row.experiment = static_cast<int>(r) + 1;
        for (std::size_t c = 0; c < factors.size(); ++c) {
            const int level = array.matrix[r][c];
            if (level < 1 || static_cast<std::size_t>(level) > factors[c].levels.size()) {
                throw InvalidArgument("factor '" + factors[c].name + "' has no level " + std::to_string(level));
            }
            row.levels.push_back(level);
            defect_field(row.defects, factors[c].name) = factors[c].levels[level - 1];
        }
        plan.rows.push_back(std::move(row));
    }
    return plan;
}

DoePlan custom_plan(const std::vector<DefectSpec>& rows) {
    DoePlan plan;
    plan.array_name = "custom";
    plan.factor_names.assign(kFactorNames.begin(), kFactorNames.end());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        plan.rows.push_back({static_cast<int>(r) + 1, {}, rows[r]});
    }
    return plan;
}

const VariantOutcome& RunRecord::outcome(const std::string& variant) const {
    for (const auto& o : outcomes) {
        if (o.variant == variant) return o;
    }
    throw InvalidArgument("experiment " + std::to_string(experiment) + " has no result for " + variant);
}

std::uint64_t experiment_seed(std::uint64_t seed, int experiment) {
    return seed * 1000 + static_cast<std::uint64_t>(experiment);
}

std::vector<RunRecord> run_plan(const DoePlan& plan, const PartGeometry& geometry, std::uint64_t seed,
                                const std::vector<VariantSpec>& variants, bool parallel) {
    const auto run_row = [&](const PlanRow& row) {
        DefectSpec defects = row.defects;
        defects.texture_seed = experiment_seed(seed, row.experiment);
        const PartModel part = build_part(geometry, defects);
        RunRecord rec{row.experiment, defects, {}};
        for (const auto& m : measure_variants(part, variants)) {
            rec.outcomes.push_back({m.variant.name, m.hole, m.deviation_y});
        }
        return rec;
    };

    std::vector<RunRecord> records;
    records.reserve(plan.rows.size());
    if (!parallel) {
        for (const auto& row : plan.rows) records.push_back(run_row(row));
        return records;
    }
    std::vector<std::future<RunRecord>> pending;
    pending.reserve(plan.rows.size());
    for (const auto& row : plan.rows) pending.push_back(std::async(std::launch::async, run_row, std::cref(row)));
    for (auto& f : pending) records.push_back(f.get());
    return records;
}

const FactorEffect& EffectsReport::factor(const std::string& name) const {
    for (const auto& f : factors) {
        if (f.name == name) return f;
    }
    throw InvalidArgument("no factor '" + name + "' in report");
}

EffectsReport main_effects(const std::vector<RunRecord>& records, const std::string& variant) {
    const auto runs = checked_runs(records, variant);
    EffectsReport report;
    report.variant = variant;

    double total = 0.0;
    for (const auto* r : runs) total += std::abs(r->outcome(variant).deviation_y);
    report.grand_mean = total / static_cast<double>(runs.size());

    for (const char* name : kFactorNames) {
        FactorEffect effect{name, {}, 0.0};
        std::vector<double> sums;
        for (const auto* r : runs) {
            const double value = defect_value(r->defects, name);
            auto it = std::find_if(effect.levels.begin(), effect.levels.end(),
                                   [&](const LevelMean& l) { return l.value == value; });
            if (it == effect.levels.end()) {
                effect.levels.push_back({value, 0.0, 0});
                sums.push_back(0.0);
                it = effect.levels.end() - 1;
            }
            const auto idx = static_cast<std::size_t>(it - effect.levels.begin());
            ++it->runs;
            sums[idx] += std::abs(r->outcome(variant).deviation_y);
        }
        for (std::size_t i = 0; i < effect.levels.size(); ++i) {
            if (effect.levels[i].runs != effect.levels.front().runs) {
                throw IncompletePlan(std::string("factor ") + name + " levels are not balanced");
            }
            effect.levels[i].mean = sums[i] / static_cast<double>(effect.levels[i].runs);
        }
        const auto [lo, hi] = std::minmax_element(effect.levels.begin(), effect.levels.end(),
                                                  [](const auto& a, const auto& b) { return a.mean < b.mean; });
        effect.range = hi->mean - lo->mean;
        report.factors.push_back(std::move(effect));
    }

    const FactorEffect* best = nullptr;
    for (const auto& f : report.factors) {
        if (!best || f.range > best->range || (f.range == best->range && f.name < best->name)) best = &f;
    }
    if (best->range > 0.0) report.dominant = best->name;

    report.angle_groups = angle_grouped_variation(records, variant);
    return report;
}

std::vector<AngleGroup> angle_grouped_variation(const std::vector<RunRecord>& records, const std::string& variant) {
    const auto runs = checked_runs(records, variant);
    std::map<double, AngleGroup> groups;
    for (const auto* r : runs) {
        auto& g = groups[r->defects.angle_deviation];
        g.angle = r->defects.angle_deviation;
        g.experiments.push_back(r->experiment);
        g.values.push_back(std::abs(r->outcome(variant).deviation_y));
    }
    std::vector<AngleGroup> out;
    for (auto& [angle, g] : groups) {
        const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
        g.spread = *hi - *lo;
        double sum = 0.0;
        for (double v : g.values) sum += v;
        g.mean = sum / static_cast<double>(g.values.size());
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace virtmet
