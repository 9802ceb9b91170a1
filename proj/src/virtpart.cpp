#include "virtmet/virtpart.hpp"

#include "virtmet/errors.hpp"

#include <array>
#include <cmath>
#include <random>

namespace virtmet {

namespace {

constexpr double kTwoPi = 2.0 * EIGEN_PI;

// Cycles per patch extent for the three texture waves.
constexpr std::array<std::array<double, 2>, 3> kWaves{{{0.6, 0.2}, {0.3, 0.9}, {1.1, 0.8}}};

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw InvalidArgument(std::string(field) + ": " + what);
}

Mat3 columns(const Vec3& a, const Vec3& b, const Vec3& c) {
    Mat3 m;
    m.col(0) = a;
    m.col(1) = b;
    m.col(2) = c;
    return m;
}

PointCloud face_patch(GridCounts counts, std::uint64_t seed, double eu, double ev, double flat) {
    return scale_flatness(normalize_patch(generate_texture(counts, seed, eu, ev)), flat);
}

}  // namespace

void PartGeometry::validate() const {
    require(length > 0, "geometry.length", "must be > 0");
    require(depth > 0, "geometry.depth", "must be > 0");
    require(height > 0, "geometry.height", "must be > 0");
    require(hole_radius > 0, "geometry.holeRadius", "must be > 0");
    require(hole_depth > 0 && hole_depth <= height, "geometry.holeDepth", "must be in (0, height]");
    require(hole_x - hole_radius > 0 && hole_x + hole_radius < length, "geometry.holeX",
            "hole must lie strictly inside the top face");
    require(hole_y - hole_radius > 0 && hole_y + hole_radius < depth, "geometry.holeY",
            "hole must lie strictly inside the top face");
    require(grid.u >= 3 && grid.v >= 3, "geometry.grid", "needs at least 3x3 points");
    require(bore_stations >= 2, "geometry.boreStations", "must be >= 2");
    require(bore_points_per_ring >= 3, "geometry.borePointsPerRing", "must be >= 3");
}

void DefectSpec::validate() const {
    require(flatness_top >= 0, "defects.flatnessTop", "must be >= 0");
    require(flatness_side >= 0, "defects.flatnessSide", "must be >= 0");
    require(angle_deviation >= 0 && angle_deviation <= 5, "defects.angleDeviation",
            "must be in [0, 5] degrees");
}

PointCloud generate_texture(GridCounts counts, std::uint64_t seed, double extent_u, double extent_v,
                            double amplitude) {
    if (counts.u < 3 || counts.v < 3) throw InvalidArgument("texture grid needs at least 3x3 points");
    std::mt19937_64 rng(seed);
    std::array<double, kWaves.size()> phase{};
    for (auto& p : phase) p = kTwoPi * unit_uniform(rng);

    PointCloud cloud{{}, "texture", Vec3::UnitZ()};
    cloud.points.reserve(static_cast<std::size_t>(counts.u) * counts.v);
    for (int iv = 0; iv < counts.v; ++iv) {
        const double sv = static_cast<double>(iv) / (counts.v - 1);
        for (int iu = 0; iu < counts.u; ++iu) {
            const double su = static_cast<double>(iu) / (counts.u - 1);
            double wave = 0.0;
            for (std::size_t k = 0; k < kWaves.size(); ++k) {
                wave += std::cos(kTwoPi * (kWaves[k][0] * su + kWaves[k][1] * sv) + phase[k]);
            }
            const double noise = 2.0 * unit_uniform(rng) - 1.0;
            const double z = amplitude * (wave / kWaves.size() + 0.1 * noise);
            cloud.points.emplace_back(su * extent_u, sv * extent_v, z);
        }
    }
    return cloud;
}

PointCloud normalize_patch(const PointCloud& cloud) {
    // Vertical least squares is not rotation invariant for textured clouds, so
    // re-level until the refit is z = 0 (each pass shrinks the error by
    // roughly (form / extent)^2).
    PointCloud cur = cloud;
    for (int pass = 0; pass < 50; ++pass) {
        const LsqPlaneSolution s = fit_plane_lsq(cur);
        if (cur.material_normal == Vec3::UnitZ() && std::abs(s.alpha) <= 1e-14 &&
            std::abs(s.beta) <= 1e-14 && std::abs(s.omega) <= 1e-12) {
            return cur;
        }
        const Mat3 r = rotation_between(s.plane.normal(), Vec3::UnitZ());
        cur = transformed(cur, RigidTransform(r, -s.plane.offset() * Vec3::UnitZ()));
        cur.material_normal = Vec3::UnitZ();
    }
    throw NoConvergence("patch normalization did not settle");
}

PointCloud scale_flatness(const PointCloud& cloud, double target) {
    if (target < 0) throw InvalidArgument("target flatness must be >= 0");
    PointCloud out = cloud;
    if (target == 0.0) {
        for (auto& p : out.points) p.z() = 0.0;
        return out;
    }
    const double current = flatness(cloud);
    if (current == 0.0) throw ZeroFlatnessInput("cannot scale a coplanar patch to nonzero flatness");
    const double k = target / current;
    for (auto& p : out.points) p.z() *= k;
    return out;
}

PointCloud place_face(const PointCloud& cloud, const RigidTransform& pose) {
    return transformed(cloud, pose);
}

RigidTransform top_face_pose(const PartGeometry& g) {
    return RigidTransform::translation({0.0, 0.0, g.height});
}

RigidTransform side_face_pose(const PartGeometry& /*g*/, double angle_deviation_deg) {
    // Patch u -> X, v -> Z, outward e -> -Y; pivot is the bottom edge y = z = 0.
    const RigidTransform nominal(columns(Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitY()), Vec3::Zero());
    const RigidTransform tilt =
        RigidTransform::rotation_about(Point3::Zero(), Vec3::UnitX(), -deg_to_rad(angle_deviation_deg));
    return tilt.compose(nominal);
}

RigidTransform aux_face_pose(const PartGeometry& /*g*/) {
    // Patch u -> Z, v -> Y, outward e -> -X.
    return RigidTransform(columns(Vec3::UnitZ(), Vec3::UnitY(), -Vec3::UnitX()), Vec3::Zero());
}

PointCloud bore_points(const PartGeometry& g) {
    PointCloud bore{{}, "bore", Vec3::UnitZ()};
    for (int s = 0; s < g.bore_stations; ++s) {
        const double z = g.height - g.hole_depth * (s + 1) / (g.bore_stations + 1);
        for (int k = 0; k < g.bore_points_per_ring; ++k) {
            const double a = kTwoPi * k / g.bore_points_per_ring;
            bore.points.emplace_back(g.hole_x + g.hole_radius * std::cos(a),
                                     g.hole_y + g.hole_radius * std::sin(a), z);
        }
    }
    return bore;
}

PartModel build_part(const PartGeometry& geometry, const DefectSpec& defects) {
    geometry.validate();
    defects.validate();
    const std::uint64_t seed = defects.texture_seed * 10;
    const GridCounts grid = geometry.grid;

    PartModel part;
    part.geometry = geometry;
    part.defects = defects;

    part.top_face = place_face(face_patch(grid, seed + 0, geometry.length, geometry.depth, defects.flatness_top),
                               top_face_pose(geometry));
    part.top_face.label = "top";

    part.side_face = place_face(face_patch(grid, seed + 1, geometry.length, geometry.height, defects.flatness_side),
                                side_face_pose(geometry, defects.angle_deviation));
    part.side_face.label = "side";

    part.aux_face = place_face(face_patch(grid, seed + 2, geometry.height, geometry.depth, 0.0),
                               aux_face_pose(geometry));
    part.aux_face.label = "aux";

    part.bore = bore_points(geometry);
    return part;
}

}  // namespace virtmet
