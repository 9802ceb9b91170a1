#pragma once

// Synthetic "virtual parts": a 30 x 30 x 15 block with a blind hole in the
// top face, whose top (A) and side (B) faces carry prescribed flatness and
// perpendicularity defects.

#include "virtmet/fitting.hpp"
#include "virtmet/geom.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace virtmet {

struct GridCounts {
    int u = 5;
    int v = 5;
};

struct PartGeometry {
    double length = 30.0;  // X
    double depth = 30.0;   // Y
    double height = 15.0;  // Z
    double hole_x = 15.0;
    double hole_y = 15.0;
    double hole_radius = 5.0;
    double hole_depth = 10.0;
    GridCounts grid{5, 5};
    int bore_stations = 3;
    int bore_points_per_ring = 8;

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

struct DefectSpec {
    double flatness_top = 0.0;   // mm
    double flatness_side = 0.0;  // mm
    /// Angle between A and B is 90 deg + angle_deviation (degrees).
    double angle_deviation = 0.0;
    std::uint64_t texture_seed = 1;

    void validate() const;
};

struct PartModel {
    PointCloud top_face;
    PointCloud side_face;
    PointCloud aux_face;
    PointCloud bore;
    PartGeometry geometry;
    DefectSpec defects;
};

/// Raw texture amplitude of a generated patch, in mm (a milled-surface scale).
inline constexpr double kDefaultTextureAmplitude = 0.01;

/// Regular grid over [0, extent_u] x [0, extent_v] with a seeded low-frequency
/// cosine texture plus 10% uniform noise in z. Material normal +Z.
PointCloud generate_texture(GridCounts counts, std::uint64_t seed, double extent_u = 1.0,
                            double extent_v = 1.0, double amplitude = kDefaultTextureAmplitude);

/// Rigid motion placing the cloud's least-squares plane at z = 0 with normal +Z.
PointCloud normalize_patch(const PointCloud& cloud);

/// Scales z so the flatness becomes `target`. Input must be normalized.
PointCloud scale_flatness(const PointCloud& cloud, double target);

PointCloud place_face(const PointCloud& cloud, const RigidTransform& pose);

// Poses carrying the canonical z = 0 patch onto each face of the part.
RigidTransform top_face_pose(const PartGeometry& g);
/// Side face y = 0 (outward -Y), tilted by `angle_deviation_deg` about the
/// bottom edge so that its top leans toward the material.
RigidTransform side_face_pose(const PartGeometry& g, double angle_deviation_deg);
RigidTransform aux_face_pose(const PartGeometry& g);

/// Defect-free bore samples (axis along -Z from the top face).
PointCloud bore_points(const PartGeometry& g);

PartModel build_part(const PartGeometry& geometry, const DefectSpec& defects);

// Text point files: '#' comment header carrying label and material normal,
// then one "X Y Z" line per point with 6 decimals.
void write_points(std::ostream& out, const PointCloud& cloud);
PointCloud read_points(std::istream& in);
void export_points(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud import_points(const std::filesystem::path& path);

}  // namespace virtmet
