#include "virtmet/study.hpp"

#include "format.hpp"
#include "virtmet/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

namespace virtmet {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_list(std::string_view s, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
    if (token.empty()) return false;
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    return ec == std::errc() && ptr == end;
}

// ---------------------------------------------------------------------------
// Config

struct ConfigLine {
    std::size_t line;
    std::string key;
    std::string value;
};

[[noreturn]] void config_fail(const ConfigLine& l, const std::string& what) {
    throw ConfigError(l.key, what + " (line " + std::to_string(l.line) + ")");
}

double config_double(const ConfigLine& l, std::string_view token) {
    double v = 0;
    if (!parse_number(token, v)) config_fail(l, "expected a number, got '" + std::string(token) + "'");
    return v;
}

int config_int(const ConfigLine& l, std::string_view token) {
    int v = 0;
    if (!parse_number(token, v)) config_fail(l, "expected an integer, got '" + std::string(token) + "'");
    return v;
}

std::vector<double> config_doubles(const ConfigLine& l, std::size_t expected = 0) {
    std::vector<double> out;
    for (const auto& t : split_list(l.value)) out.push_back(config_double(l, t));
    if (expected != 0 && out.size() != expected) {
        config_fail(l, "expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
    }
    return out;
}

Association config_association(const ConfigLine& l, const std::string& s) {
    if (s == "LeastSquares") return Association::LeastSquares;
    if (s == "Tangent") return Association::Tangent;
    config_fail(l, "association must be LeastSquares or Tangent, got '" + s + "'");
}

SideConstraint config_constraint(const ConfigLine& l, const std::string& s) {
    if (s == "None") return SideConstraint::None;
    if (s == "PerpendicularToTop") return SideConstraint::PerpendicularToTop;
    config_fail(l, "constraint must be None or PerpendicularToTop, got '" + s + "'");
}

void apply_geometry(PartGeometry& g, const ConfigLine& l, std::string_view field) {
    if (field == "length") g.length = config_double(l, l.value);
    else if (field == "depth") g.depth = config_double(l, l.value);
    else if (field == "height") g.height = config_double(l, l.value);
    else if (field == "holeX") g.hole_x = config_double(l, l.value);
    else if (field == "holeY") g.hole_y = config_double(l, l.value);
    else if (field == "holeRadius") g.hole_radius = config_double(l, l.value);
    else if (field == "holeDepth") g.hole_depth = config_double(l, l.value);
    else if (field == "boreStations") g.bore_stations = config_int(l, l.value);
    else if (field == "borePointsPerRing") g.bore_points_per_ring = config_int(l, l.value);
    else if (field == "grid") {
        const auto parts = split_list(l.value);
        if (parts.size() != 2) config_fail(l, "expected 'u, v'");
        g.grid = {config_int(l, parts[0]), config_int(l, parts[1])};
    } else {
        config_fail(l, "unknown geometry field");
    }
}

// ---------------------------------------------------------------------------
// JSON with fixed 6-decimal floats

void dump_json(std::ostream& out, const ordered_json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) {
                out << "{}";
                return;
            }
            out << "{\n";
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out << ",\n";
                first = false;
                out << inner << ordered_json(k).dump() << ": ";
                dump_json(out, v, indent + 1);
            }
            out << '\n' << pad << '}';
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) {
                out << "[]";
                return;
            }
            out << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out << ",\n";
                out << inner;
                dump_json(out, j[i], indent + 1);
            }
            out << '\n' << pad << ']';
            return;
        }
        case ordered_json::value_t::number_float:
            out << detail::fixed6(j.get<double>());
            return;
        default:
            out << j.dump();
    }
}

std::string json_text(const ordered_json& j) {
    std::ostringstream out;
    dump_json(out, j, 0);
    out << '\n';
    return out.str();
}

ordered_json report_json(const EffectsReport& r, std::size_t runs) {
    ordered_json j;
    j["variant"] = r.variant;
    j["runs"] = runs;
    j["grandMean"] = r.grand_mean;
    j["factors"] = ordered_json::array();
    for (const auto& f : r.factors) {
        ordered_json fj;
        fj["name"] = f.name;
        fj["levels"] = ordered_json::array();
        for (const auto& l : f.levels) {
            fj["levels"].push_back({{"value", l.value}, {"mean", l.mean}, {"runs", l.runs}});
        }
        fj["range"] = f.range;
        j["factors"].push_back(std::move(fj));
    }
    j["dominant"] = r.dominant ? ordered_json(*r.dominant) : ordered_json(nullptr);
    j["angleGroups"] = ordered_json::array();
    for (const auto& g : r.angle_groups) {
        ordered_json gj;
        gj["angleDeg"] = g.angle;
        gj["experiments"] = g.experiments;
        gj["values"] = g.values;
        gj["mean"] = g.mean;
        gj["spread"] = g.spread;
        j["angleGroups"].push_back(std::move(gj));
    }
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string experiment_dir_name(int experiment) {
    return fmt::format("exp{:02d}", experiment);
}

constexpr std::array<std::pair<const char*, const char*>, 4> kPartFiles{{
    {"top", "top.txt"}, {"side", "side.txt"}, {"aux", "aux.txt"}, {"bore", "bore.txt"}}};

}  // namespace

StudyConfig parse_config(std::istream& in) {
    StudyConfig cfg;
    std::vector<ConfigLine> lines;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view view = trim(raw);
        if (view.empty() || view.front() == '#') continue;
        const std::size_t eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        }
        lines.push_back({line_no, std::string(trim(view.substr(0, eq))), std::string(trim(view.substr(eq + 1)))});
    }

    std::vector<VariantSpec> custom_variants;
    std::optional<ConfigLine> variant_list;
    for (const auto& l : lines) {
        const std::string_view key = l.key;
        if (key == "seed") {
            std::uint64_t s = 0;
            if (!parse_number(std::string_view(l.value), s)) config_fail(l, "expected a non-negative integer");
            cfg.seed = s;
        } else if (key == "out") {
            if (l.value.empty()) config_fail(l, "must not be empty");
            cfg.out_dir = l.value;
        } else if (key.starts_with("geometry.")) {
            apply_geometry(cfg.geometry, l, key.substr(9));
        } else if (key.starts_with("factor.")) {
            const std::string name(key.substr(7));
            auto it = std::find_if(cfg.factors.begin(), cfg.factors.end(),
                                   [&](const FactorSpec& f) { return f.name == name; });
            if (it == cfg.factors.end()) config_fail(l, "unknown factor");
            it->levels = config_doubles(l);
            if (it->levels.size() < 2) config_fail(l, "needs at least 2 levels");
            if (std::set<double>(it->levels.begin(), it->levels.end()).size() != it->levels.size()) {
                config_fail(l, "levels must be distinct");
            }
        } else if (key == "row") {
            const auto v = config_doubles(l, 3);
            cfg.custom_rows.push_back({v[0], v[1], v[2], 1});
        } else if (key == "variants") {
            variant_list = l;
        } else if (key.starts_with("variant.")) {
            const auto parts = split_list(l.value);
            if (parts.size() != 3) config_fail(l, "expected 'topAssociation, sideAssociation, constraint'");
            custom_variants.push_back({std::string(key.substr(8)), config_association(l, parts[0]),
                                       config_association(l, parts[1]), config_constraint(l, parts[2])});
        } else {
            config_fail(l, "unknown key");
        }
    }

    cfg.variants = standard_variants();
    cfg.variants.insert(cfg.variants.end(), custom_variants.begin(), custom_variants.end());
    if (variant_list) {
        std::vector<VariantSpec> chosen;
        for (const auto& name : split_list(variant_list->value)) {
            auto it = std::find_if(cfg.variants.begin(), cfg.variants.end(),
                                   [&](const VariantSpec& v) { return v.name == name; });
            if (it == cfg.variants.end()) config_fail(*variant_list, "unknown variant '" + name + "'");
            chosen.push_back(*it);
        }
        cfg.variants = std::move(chosen);
    }

    try {
        cfg.geometry.validate();
        for (const auto& r : cfg.custom_rows) r.validate();
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        const auto colon = msg.find(':');
        throw ConfigError(msg.substr(0, colon), colon == std::string::npos ? msg : msg.substr(colon + 2));
    }
    return cfg;
}

StudyConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    return parse_config(in);
}

DoePlan make_plan(const StudyConfig& config) {
    if (!config.custom_rows.empty()) return custom_plan(config.custom_rows);
    const std::size_t levels = config.factors.front().levels.size();
    for (const auto& f : config.factors) {
        if (f.levels.size() != levels) {
            throw ConfigError("factor." + f.name, "all factors need the same number of levels");
        }
    }
    const std::string name = select_array(static_cast<int>(levels), static_cast<int>(config.factors.size()));
    return build_plan(config.factors, taguchi_array(name));
}

void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records) {
    out << kResultsHeader << '\n';
    for (const auto& r : records) {
        for (const auto& o : r.outcomes) {
            out << r.experiment << ',' << detail::fixed6(r.defects.flatness_top) << ','
                << detail::fixed6(r.defects.flatness_side) << ',' << detail::fixed6(r.defects.angle_deviation)
                << ',' << o.variant << ',' << detail::fixed6(o.hole.x) << ',' << detail::fixed6(o.hole.y) << ','
                << detail::fixed6(o.deviation_y) << '\n';
        }
    }
}

std::vector<RunRecord> read_results_csv(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    if (!std::getline(in, raw)) throw ParseError(1, "missing header");
    ++line_no;
    if (trim(raw) != kResultsHeader) throw ParseError(1, "unexpected header");

    std::map<int, RunRecord> by_experiment;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view view = trim(raw);
        if (view.empty()) continue;
        const auto f = split_list(view);
        if (f.size() != 8) throw ParseError(line_no, "expected 8 fields, got " + std::to_string(f.size()));
        int experiment = 0;
        if (!parse_number(std::string_view(f[0]), experiment) || experiment < 1) {
            throw ParseError(line_no, "bad experiment index '" + f[0] + "'");
        }
        double v[7] = {};
        for (int i : {1, 2, 3, 5, 6, 7}) {
            if (!parse_number(std::string_view(f[i]), v[i - 1])) {
                throw ParseError(line_no, "field " + std::to_string(i + 1) + " is not a number: '" + f[i] + "'");
            }
        }
        if (f[4].empty()) throw ParseError(line_no, "empty variant name");
        const DefectSpec d{v[0], v[1], v[2], 1};
        auto [it, inserted] = by_experiment.try_emplace(experiment, RunRecord{experiment, d, {}});
        RunRecord& rec = it->second;
        if (!inserted && (rec.defects.flatness_top != d.flatness_top || rec.defects.flatness_side != d.flatness_side ||
                          rec.defects.angle_deviation != d.angle_deviation)) {
            throw ParseError(line_no, "defects disagree with earlier rows of experiment " + f[0]);
        }
        for (const auto& o : rec.outcomes) {
            if (o.variant == f[4]) throw ParseError(line_no, "duplicate variant " + f[4]);
        }
        rec.outcomes.push_back({f[4], {v[4], v[5]}, v[6]});
    }
    std::vector<RunRecord> out;
    for (auto& [e, r] : by_experiment) out.push_back(std::move(r));
    return out;
}

std::vector<std::string> recorded_variants(const std::vector<RunRecord>& records) {
    std::set<std::string> names;
    for (const auto& r : records) {
        for (const auto& o : r.outcomes) names.insert(o.variant);
    }
    return {names.begin(), names.end()};
}

std::string effects_json(const std::vector<RunRecord>& records) {
    ordered_json j;
    j["schema"] = "virtmet-effects/1";
    j["response"] = "abs_deviationY_mm";
    j["variants"] = ordered_json::array();
    for (const auto& v : recorded_variants(records)) {
        j["variants"].push_back(report_json(main_effects(records, v), records.size()));
    }
    return json_text(j);
}

GenerateSummary generate_study(const StudyConfig& config) {
    const DoePlan plan = make_plan(config);
    ensure_dir(config.out_dir);
    GenerateSummary summary;
    for (const auto& row : plan.rows) {
        DefectSpec defects = row.defects;
        defects.texture_seed = experiment_seed(config.seed, row.experiment);
        const PartModel part = build_part(config.geometry, defects);

        const auto dir = config.out_dir / experiment_dir_name(row.experiment);
        ensure_dir(dir);
        const PointCloud* clouds[] = {&part.top_face, &part.side_face, &part.aux_face, &part.bore};
        ordered_json files;
        for (std::size_t i = 0; i < kPartFiles.size(); ++i) {
            export_points(*clouds[i], dir / kPartFiles[i].second);
            files[kPartFiles[i].first] = kPartFiles[i].second;
        }
        ordered_json manifest;
        manifest["experiment"] = row.experiment;
        manifest["flatnessTop"] = defects.flatness_top;
        manifest["flatnessSide"] = defects.flatness_side;
        manifest["angleDeg"] = defects.angle_deviation;
        manifest["textureSeed"] = defects.texture_seed;
        manifest["files"] = files;
        write_text(dir / "manifest.json", json_text(manifest));
        summary.experiment_dirs.push_back(dir);
    }
    return summary;
}

PartModel load_part(const std::filesystem::path& experiment_dir, const PartGeometry& geometry, int& experiment) {
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(read_text(experiment_dir / "manifest.json"));
        experiment = manifest.at("experiment").get<int>();
        PartModel part;
        part.geometry = geometry;
        part.defects = {manifest.at("flatnessTop").get<double>(), manifest.at("flatnessSide").get<double>(),
                        manifest.at("angleDeg").get<double>(), manifest.at("textureSeed").get<std::uint64_t>()};
        const auto& files = manifest.at("files");
        part.top_face = import_points(experiment_dir / files.at("top").get<std::string>());
        part.side_face = import_points(experiment_dir / files.at("side").get<std::string>());
        part.aux_face = import_points(experiment_dir / files.at("aux").get<std::string>());
        part.bore = import_points(experiment_dir / files.at("bore").get<std::string>());
        return part;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad manifest in '" + experiment_dir.string() + "': " + e.what());
    }
}

RunSummary run_study(const StudyConfig& config, const std::optional<std::filesystem::path>& parts_dir) {
    std::vector<RunRecord> records;
    if (parts_dir) {
        if (!std::filesystem::is_directory(*parts_dir)) {
            throw IoError("parts directory '" + parts_dir->string() + "' does not exist");
        }
        std::vector<std::filesystem::path> dirs;
        for (const auto& entry : std::filesystem::directory_iterator(*parts_dir)) {
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json")) {
                dirs.push_back(entry.path());
            }
        }
        std::sort(dirs.begin(), dirs.end());
        if (dirs.empty()) throw IoError("no experiment directories under '" + parts_dir->string() + "'");
        for (const auto& dir : dirs) {
            int experiment = 0;
            const PartModel part = load_part(dir, config.geometry, experiment);
            RunRecord rec{experiment, part.defects, {}};
            for (const auto& m : measure_variants(part, config.variants)) {
                rec.outcomes.push_back({m.variant.name, m.hole, m.deviation_y});
            }
            records.push_back(std::move(rec));
        }
        std::sort(records.begin(), records.end(),
                  [](const RunRecord& a, const RunRecord& b) { return a.experiment < b.experiment; });
    } else {
        records = run_plan(make_plan(config), config.geometry, config.seed, config.variants);
    }

    std::ostringstream csv;
    write_results_csv(csv, records);
    // Analyze what was written so re-analysis of the CSV is byte-identical.
    std::istringstream reread(csv.str());
    const std::string effects = effects_json(read_results_csv(reread));

    ensure_dir(config.out_dir);
    RunSummary summary{config.out_dir / "results.csv", config.out_dir / "effects.json", std::move(records)};
    write_text(summary.results_csv, csv.str());
    write_text(summary.effects_json, effects);
    return summary;
}

void analyze_results(const std::filesystem::path& csv_path, const std::filesystem::path& effects_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + csv_path.string() + "' for reading");
    const std::string effects = effects_json(read_results_csv(in));
    if (effects_path.has_parent_path()) ensure_dir(effects_path.parent_path());
    write_text(effects_path, effects);
}

}  // namespace virtmet
