#pragma once

// Association of ideal features (planes, circles, cylinders) to measured
// point clouds.

#include "virtmet/geom.hpp"

#include <span>
#include <string>
#include <vector>

namespace virtmet {

/// Ordered skin-model samples of one face or bore.
struct PointCloud {
    std::vector<Point3> points;
    std::string label;
    /// Nominal outward direction, away from the material.
    Vec3 material_normal = Vec3::UnitZ();
};

/// Applies `t` to every point and to the material normal.
PointCloud transformed(const PointCloud& cloud, const RigidTransform& t);

/// Rows are the face's nominal axes (x, y, z = normal); maps world to local.
/// For normal +Z this is the identity.
Mat3 nominal_axes(const Vec3& normal);

/// Least-squares plane in the face's nominal frame, z = alpha*y + beta*x + omega.
struct LsqPlaneSolution {
    double alpha = 0.0;
    double beta = 0.0;
    double omega = 0.0;
    /// e_i = z_i - (alpha*y_i + beta*x_i + omega), nominal-frame vertical residuals.
    std::vector<double> residuals;
    Plane plane{Vec3::UnitZ(), 0.0};
};

struct TangentPlaneSolution {
    /// Normal points along the material normal; every point lies at or below.
    Plane plane{Vec3::UnitZ(), 0.0};
    std::vector<std::size_t> contact_indices;
    double max_deviation = 0.0;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Circle2 {
    Point2 center;
    double radius = 0.0;
};

struct CylinderFit {
    Cylinder cylinder;
    std::vector<Circle2> stations;
    int iterations = 0;
};

/// Distance within which a point counts as touching a tangent plane.
inline constexpr double kContactTol = 1e-9;

LsqPlaneSolution fit_plane_lsq(const PointCloud& cloud);

/// One-sided minimax association: the plane supported by three cloud points
/// with every point on the material side that minimizes the largest distance.
TangentPlaneSolution fit_plane_tangent(const PointCloud& cloud);

/// Orthogonal least-squares plane whose normal is perpendicular to `perp_to`.
Plane fit_plane_lsq_constrained(const PointCloud& cloud, const Plane& perp_to);

/// Tangent association restricted to planes perpendicular to `perp_to`.
TangentPlaneSolution fit_plane_tangent_constrained(const PointCloud& cloud, const Plane& perp_to);

/// Peak-to-valley of signed distances about the least-squares plane.
double flatness(const PointCloud& cloud);

/// Algebraic (Kasa) circle fit.
Circle2 fit_circle_lsq(std::span<const Point2> points);

/// Station-circle / axis-refit iteration starting from `initial_axis`.
CylinderFit fit_cylinder_report(const PointCloud& cloud, const Line3& initial_axis);
Cylinder fit_cylinder(const PointCloud& cloud, const Line3& initial_axis);

}  // namespace virtmet
