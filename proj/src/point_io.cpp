#include "format.hpp"
#include "virtmet/errors.hpp"
#include "virtmet/virtpart.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

namespace virtmet {

namespace {

constexpr std::string_view kLabelKey = "# label:";
constexpr std::string_view kNormalKey = "# normal:";

std::vector<std::string_view> split_spaces(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(' ', start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_double(std::string_view token, double& value) {
    if (token.empty()) return false;
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    return ec == std::errc() && ptr == end;
}

Vec3 parse_triplet(std::string_view text, std::size_t line_no) {
    const auto tokens = split_spaces(text);
    if (tokens.size() != 3) {
        throw ParseError(line_no, "expected 3 space-separated values, got " + std::to_string(tokens.size()));
    }
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!parse_double(tokens[i], v[i])) {
            throw ParseError(line_no, "column " + std::to_string(i + 1) + " is not a number: '" +
                                          std::string(tokens[i]) + "'");
        }
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

void write_points(std::ostream& out, const PointCloud& cloud) {
    const Vec3& n = cloud.material_normal;
    out << kLabelKey << ' ' << cloud.label << '\n';
    out << kNormalKey << ' ' << detail::fixed6(n.x()) << ' ' << detail::fixed6(n.y()) << ' '
        << detail::fixed6(n.z()) << '\n';
    for (const auto& p : cloud.points) {
        out << detail::fixed6(p.x()) << ' ' << detail::fixed6(p.y()) << ' ' << detail::fixed6(p.z()) << '\n';
    }
}

PointCloud read_points(std::istream& in) {
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (trim(view).empty()) continue;
        if (view.front() == '#') {
            if (view.starts_with(kLabelKey)) {
                cloud.label = std::string(trim(view.substr(kLabelKey.size())));
            } else if (view.starts_with(kNormalKey)) {
                const Vec3 n = parse_triplet(trim(view.substr(kNormalKey.size())), line_no);
                if (!(n.norm() > 0)) throw ParseError(line_no, "material normal must be nonzero");
                cloud.material_normal = n.normalized();
            }
            continue;
        }
        cloud.points.push_back(parse_triplet(view, line_no));
    }
    if (in.bad()) throw IoError("read failure");
    return cloud;
}

void export_points(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_points(out, cloud);
    out.flush();
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

PointCloud import_points(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return read_points(in);
}

}  // namespace virtmet
