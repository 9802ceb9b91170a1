#include "oracles.hpp"
#include "virtmet/errors.hpp"
#include "virtmet/fitting.hpp"
#include "virtmet/virtpart.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace virtmet;
namespace fs = std::filesystem;

namespace {

void expect_bit_identical(const PointCloud& a, const PointCloud& b) {
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_EQ(a.points[i], b.points[i]) << i;
    EXPECT_EQ(a.material_normal, b.material_normal);
    EXPECT_EQ(a.label, b.label);
}

double max_pair_distance_change(const PointCloud& a, const PointCloud& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.points.size(); ++i)
        for (std::size_t j = i + 1; j < a.points.size(); ++j)
            worst = std::max(worst, std::abs((a.points[i] - a.points[j]).norm() - (b.points[i] - b.points[j]).norm()));
    return worst;
}

// Material angle between faces A and B from their outward LSQ normals.
double face_angle_deg(const PartModel& part) {
    const Vec3 a = fit_plane_lsq(part.top_face).plane.normal();
    const Vec3 b = fit_plane_lsq(part.side_face).plane.normal();
    return 180.0 - rad_to_deg(angle_between(a, b));
}

PointCloud flat_patch() {
    return normalize_patch(generate_texture({5, 5}, 1, 30, 15, 0.0));
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("virtmet_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

// ----------------------------------------------------------------- texture

TEST(Texture, SameSeedIsBitIdentical) {
    expect_bit_identical(generate_texture({5, 5}, 7, 30, 30), generate_texture({5, 5}, 7, 30, 30));
    const auto a = generate_texture({5, 5}, 7, 30, 30), b = generate_texture({5, 5}, 8, 30, 30);
    EXPECT_NE(a.points[12], b.points[12]);
}

TEST(Texture, ZeroAmplitudeIsFlat) {
    const PointCloud c = generate_texture({5, 5}, 3, 30, 30, 0.0);
    for (const auto& p : c.points) EXPECT_EQ(p.z(), 0.0);
    EXPECT_NEAR(flatness(c), 0.0, 1e-15);
}

TEST(Texture, GridLayout) {
    const PointCloud c = generate_texture({4, 3}, 1, 30, 15);
    ASSERT_EQ(c.points.size(), 12u);
    EXPECT_EQ(c.points[0].x(), 0.0);
    EXPECT_EQ(c.points[3].x(), 30.0);
    EXPECT_EQ(c.points[11].y(), 15.0);
    EXPECT_EQ(c.material_normal, Vec3::UnitZ());
}

TEST(Texture, MatchesGoldenCapture) {
    std::ifstream in(fs::path(VIRTMET_GOLDEN_DIR) / "texture_seed1_5x5.txt");
    ASSERT_TRUE(in) << "missing golden file";
    std::string tag;
    double golden_flatness = 0;
    in >> tag >> golden_flatness;
    ASSERT_EQ(tag, "flatness");
    const PointCloud c = generate_texture({5, 5}, 1);
    for (const auto& p : c.points) {
        double x, y, z;
        in >> x >> y >> z;
        EXPECT_DOUBLE_EQ(p.x(), x);
        EXPECT_DOUBLE_EQ(p.y(), y);
        EXPECT_NEAR(p.z(), z, 1e-15);
    }
    EXPECT_GT(flatness(c), 0.0);
    EXPECT_NEAR(flatness(c), golden_flatness, 1e-15);
}

// ---------------------------------------------------------------- normalize

TEST(NormalizePatch, Idempotent) {
    const PointCloud once = normalize_patch(generate_texture({5, 5}, 2, 30, 30));
    const PointCloud twice = normalize_patch(once);
    for (std::size_t i = 0; i < once.points.size(); ++i) EXPECT_LE((once.points[i] - twice.points[i]).norm(), 1e-12);
}

TEST(NormalizePatch, PureTranslation) {
    PointCloud c = generate_texture({5, 5}, 2, 30, 30, 0.0);
    for (auto& p : c.points) p.z() = 3.0;
    const PointCloud n = normalize_patch(c);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        EXPECT_NEAR(n.points[i].z(), 0.0, 1e-12);
        EXPECT_NEAR(n.points[i].x(), c.points[i].x(), 1e-12);
        EXPECT_NEAR(n.points[i].y(), c.points[i].y(), 1e-12);
    }
}

TEST(NormalizePatch, TiltedPatchIsRigidlyLevelled) {
    const PointCloud flat = generate_texture({5, 5}, 4, 30, 30);
    const RigidTransform tilt(Eigen::AngleAxisd(deg_to_rad(2.0), Vec3(1, 1, 0).normalized()).toRotationMatrix(),
                              Vec3(1, -2, 5));
    PointCloud tilted = transformed(flat, tilt);
    tilted.material_normal = Vec3::UnitZ();
    const PointCloud n = normalize_patch(tilted);
    const auto s = fit_plane_lsq(n);
    EXPECT_NEAR(s.alpha, 0.0, 1e-12);
    EXPECT_NEAR(s.beta, 0.0, 1e-12);
    EXPECT_NEAR(s.omega, 0.0, 1e-12);
    EXPECT_LE(max_pair_distance_change(tilted, n), 1e-10);
}

TEST(NormalizePatch, CollinearIsDegenerate) {
    PointCloud c;
    for (int i = 0; i < 5; ++i) c.points.emplace_back(i, i, 0);
    EXPECT_THROW(normalize_patch(c), DegenerateCloud);
}

// -------------------------------------------------------------------- scale

TEST(ScaleFlatness, IdentityScale) {
    const PointCloud n = normalize_patch(generate_texture({5, 5}, 1, 30, 30));
    const PointCloud s = scale_flatness(n, flatness(n));
    for (std::size_t i = 0; i < n.points.size(); ++i) EXPECT_NEAR(s.points[i].z(), n.points[i].z(), 1e-15);
}

TEST(ScaleFlatness, ZeroTargetIsCoplanar) {
    const PointCloud s = scale_flatness(normalize_patch(generate_texture({5, 5}, 1, 30, 30)), 0.0);
    for (const auto& p : s.points) EXPECT_EQ(p.z(), 0.0);
}

TEST(ScaleFlatness, HitsTargetFlatness) {
    const PointCloud n = normalize_patch(generate_texture({5, 5}, 1));
    EXPECT_NEAR(flatness(scale_flatness(n, 0.006)), 0.006, 1e-12);
    const PointCloud rough = normalize_patch(generate_texture({5, 5}, 1, 30, 30));
    EXPECT_NEAR(flatness(scale_flatness(rough, 0.03)), 0.03, 1e-9);
}

TEST(ScaleFlatness, ZeroInputRejected) {
    const PointCloud flat = generate_texture({5, 5}, 1, 30, 30, 0.0);
    EXPECT_THROW(scale_flatness(flat, 0.01), ZeroFlatnessInput);
    EXPECT_NO_THROW(scale_flatness(flat, 0.0));
}

// ---------------------------------------------------------------- placement

TEST(PlaceFace, IdentityPose) {
    const PointCloud c = normalize_patch(generate_texture({5, 5}, 5, 30, 30));
    expect_bit_identical(place_face(c, RigidTransform()), c);
}

TEST(PlaceFace, SideNormalFollowsTilt) {
    const PartGeometry g;
    const PointCloud side = place_face(flat_patch(), side_face_pose(g, 1.0));
    const double d = deg_to_rad(1.0);
    EXPECT_LE((fit_plane_lsq(side).plane.normal() - Vec3(0, -std::cos(d), std::sin(d))).norm(), 1e-10);
    EXPECT_LE((side.material_normal - Vec3(0, -std::cos(d), std::sin(d))).norm(), 1e-12);
    // Bottom edge stays on the pivot line y = 0, z = 0.
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(side.points[i].y(), 0.0, 1e-12);
        EXPECT_NEAR(side.points[i].z(), 0.0, 1e-12);
    }
}

TEST(PlaceFace, TopIsTranslatedToHeight) {
    const PartGeometry g;
    const PointCloud top = place_face(normalize_patch(generate_texture({5, 5}, 1, 30, 30, 0.0)), top_face_pose(g));
    const auto s = fit_plane_lsq(top);
    EXPECT_LE((s.plane.normal() - Vec3::UnitZ()).norm(), 1e-10);
    EXPECT_NEAR(s.plane.offset(), g.height, 1e-10);
}

TEST(PlaceFace, AuxFaceIsPlaneXZero) {
    const PartGeometry g;
    const PointCloud aux = place_face(normalize_patch(generate_texture({5, 5}, 1, g.height, g.depth, 0.0)),
                                      aux_face_pose(g));
    for (const auto& p : aux.points) {
        EXPECT_NEAR(p.x(), 0.0, 1e-12);
        EXPECT_GE(p.z(), -1e-12);
        EXPECT_LE(p.z(), g.height + 1e-12);
    }
    EXPECT_LE((aux.material_normal + Vec3::UnitX()).norm(), 1e-12);
}

// ----------------------------------------------------------------- the part

TEST(BuildPart, PerfectPart) {
    const PartModel part = build_part(PartGeometry{}, DefectSpec{});
    EXPECT_NEAR(flatness(part.top_face), 0.0, 1e-12);
    EXPECT_NEAR(flatness(part.side_face), 0.0, 1e-12);
    EXPECT_NEAR(flatness(part.aux_face), 0.0, 1e-12);
    EXPECT_NEAR(face_angle_deg(part), 90.0, 1e-10);
    EXPECT_EQ(part.top_face.points.size(), 25u);
    EXPECT_EQ(part.bore.points.size(), 24u);
}

TEST(BuildPart, FirstAndLastStudyParts) {
    const PartModel e1 = build_part(PartGeometry{}, DefectSpec{0.03, 0.03, 0.1, 1});
    EXPECT_NEAR(flatness(e1.top_face), 0.03, 1e-9);
    EXPECT_NEAR(flatness(e1.side_face), 0.03, 1e-9);
    EXPECT_NEAR(face_angle_deg(e1), 90.1, 0.002);

    const PartModel e9 = build_part(PartGeometry{}, DefectSpec{0.0015, 0.0015, 0.02, 9});
    EXPECT_NEAR(flatness(e9.top_face), 0.0015, 1e-9);
    EXPECT_NEAR(flatness(e9.side_face), 0.0015, 1e-9);
    EXPECT_NEAR(face_angle_deg(e9), 90.02, 0.002);
}

TEST(BuildPart, Deterministic) {
    const DefectSpec d{0.006, 0.03, 1.0, 77};
    const PartModel a = build_part(PartGeometry{}, d), b = build_part(PartGeometry{}, d);
    expect_bit_identical(a.top_face, b.top_face);
    expect_bit_identical(a.side_face, b.side_face);
    expect_bit_identical(a.aux_face, b.aux_face);
    expect_bit_identical(a.bore, b.bore);
}

TEST(BuildPart, DefectFidelityOnRandomSpecs) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> flat(0.0005, 0.05), angle(0.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const DefectSpec d{flat(rng), flat(rng), angle(rng), rng()};
        const PartModel part = build_part(PartGeometry{}, d);
        EXPECT_NEAR(flatness(part.top_face), d.flatness_top, 1e-9);
        EXPECT_NEAR(flatness(part.side_face), d.flatness_side, 1e-9);
        EXPECT_NEAR(face_angle_deg(part), 90.0 + d.angle_deviation, 0.002);
    }
}

TEST(BuildPart, BoreGroundTruth) {
    const PartGeometry g;
    const PartModel part = build_part(g, DefectSpec{0.03, 0.03, 1.0, 5});
    const Line3 guess({g.hole_x + 0.1, g.hole_y - 0.1, g.height}, Vec3(0.01, 0, -1));
    const Cylinder cyl = fit_cylinder(part.bore, guess);
    const Point3 c = intersect_line_plane(cyl.axis(), Plane(Vec3::UnitZ(), g.height));
    EXPECT_NEAR(c.x(), g.hole_x, 1e-9);
    EXPECT_NEAR(c.y(), g.hole_y, 1e-9);
    EXPECT_NEAR(cyl.radius(), g.hole_radius, 1e-9);
    for (const auto& p : part.bore.points) {
        EXPECT_LT(p.z(), g.height);
        EXPECT_GT(p.z(), g.height - g.hole_depth);
    }
}

TEST(BuildPart, InvalidInputs) {
    PartGeometry g;
    g.height = -1;
    EXPECT_THROW(build_part(g, DefectSpec{}), InvalidArgument);
    EXPECT_THROW(build_part(PartGeometry{}, DefectSpec{-0.01, 0, 0, 1}), InvalidArgument);
    EXPECT_THROW(build_part(PartGeometry{}, DefectSpec{0, 0, 6.0, 1}), InvalidArgument);
    PartGeometry h;
    h.hole_x = 2.0;
    try {
        h.validate();
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("geometry.holeX"), std::string::npos);
    }
}

// --------------------------------------------------------------- point files

TEST(PointFiles, RoundTrip) {
    const fs::path dir = scratch_dir("roundtrip");
    PointCloud c = oracle::random_patch(9);
    c.label = "side";
    export_points(c, dir / "side.txt");
    const PointCloud r = import_points(dir / "side.txt");
    ASSERT_EQ(r.points.size(), c.points.size());
    for (std::size_t i = 0; i < c.points.size(); ++i)
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.points[i][k], c.points[i][k], 5e-7);
    EXPECT_EQ(r.label, "side");
    EXPECT_LE((r.material_normal - c.material_normal).norm(), 1e-6);
}

TEST(PointFiles, LineCountOfPatch) {
    std::ostringstream out;
    write_points(out, normalize_patch(generate_texture({5, 5}, 1, 30, 30)));
    std::istringstream in(out.str());
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 25 + 2);
}

TEST(PointFiles, MalformedLineReported) {
    std::istringstream in(
        "# label: top\n# normal: 0 0 1\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n2 x 0\n3 3 3\n");
    try {
        read_points(in);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 7u);
    }
    std::istringstream short_row("0 0 0\n1 1\n");
    EXPECT_THROW(read_points(short_row), ParseError);
}

TEST(PointFiles, FilesystemFailures) {
    EXPECT_THROW(import_points("/nonexistent/dir/none.txt"), IoError);
    EXPECT_THROW(export_points(PointCloud{}, "/nonexistent/dir/out.txt"), IoError);
}
