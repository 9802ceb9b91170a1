#pragma once

// Small exact 3D geometry used by the fitting and datum code.
// All lengths are millimetres.

#include <Eigen/Dense>

namespace virtmet {

using Vec3 = Eigen::Vector3d;
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kUnitTol = 1e-12;
inline constexpr double kParallelTol = 1e-9;

/// Plane in Hessian normal form: { p : normal . p = offset }.
class Plane {
public:
    /// Normalizes `normal`; throws InvalidArgument on a zero vector.
    Plane(const Vec3& normal, double offset);

    static Plane through(const Point3& point, const Vec3& normal);

    const Vec3& normal() const { return normal_; }
    double offset() const { return offset_; }

    /// Same point set with the normal reversed.
    Plane flipped() const { return Plane(-normal_, -offset_); }

private:
    Vec3 normal_;
    double offset_;
};

class Line3 {
public:
    Line3(const Point3& point, const Vec3& direction);

    const Point3& point() const { return point_; }
    const Vec3& direction() const { return direction_; }
    Point3 at(double t) const { return point_ + t * direction_; }

private:
    Point3 point_;
    Vec3 direction_;
};

class Cylinder {
public:
    Cylinder(Line3 axis, double radius);

    const Line3& axis() const { return axis_; }
    double radius() const { return radius_; }

private:
    Line3 axis_;
    double radius_;
};

/// p -> rotation * p + translation.
class RigidTransform {
public:
    RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
    /// Throws InvalidArgument unless `rotation` is orthonormal with det +1.
    RigidTransform(const Mat3& rotation, const Vec3& translation);

    static RigidTransform translation(const Vec3& t) { return {Mat3::Identity(), t}; }
    /// Rotation by `angle` radians about `axis` passing through `pivot`.
    static RigidTransform rotation_about(const Point3& pivot, const Vec3& axis, double angle);

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation_part() const { return translation_; }

    Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
    Vec3 apply_direction(const Vec3& v) const { return rotation_ * v; }
    Plane apply(const Plane& plane) const;
    Line3 apply(const Line3& line) const;

    /// (*this)(other(p)).
    RigidTransform compose(const RigidTransform& other) const;
    RigidTransform inverse() const;

private:
    Mat3 rotation_;
    Vec3 translation_;
};

/// Right-handed orthonormal datum reference frame.
class DatumFrame {
public:
    DatumFrame() : origin_(Point3::Zero()), x_(Vec3::UnitX()), y_(Vec3::UnitY()), z_(Vec3::UnitZ()) {}
    /// Throws InvalidArgument if the axes are not orthonormal and right-handed within 1e-10.
    DatumFrame(const Point3& origin, const Vec3& x_axis, const Vec3& y_axis, const Vec3& z_axis);

    const Point3& origin() const { return origin_; }
    const Vec3& x_axis() const { return x_; }
    const Vec3& y_axis() const { return y_; }
    const Vec3& z_axis() const { return z_; }

private:
    Point3 origin_;
    Vec3 x_, y_, z_;
};

double signed_distance(const Plane& plane, const Point3& p);

/// Throws NearParallel if |a.normal x b.normal| <= 1e-9.
Line3 intersect_planes(const Plane& a, const Plane& b);

/// Throws NearParallel if the line lies (nearly) parallel to the plane.
Point3 intersect_line_plane(const Line3& line, const Plane& plane);

Point3 to_frame(const DatumFrame& frame, const Point3& p);
Point3 from_frame(const DatumFrame& frame, const Point3& local);

/// Angle between two directions in radians, in [0, pi].
double angle_between(const Vec3& a, const Vec3& b);

/// Minimal rotation that carries unit vector `from` onto unit vector `to`.
Mat3 rotation_between(const Vec3& from, const Vec3& to);

inline double deg_to_rad(double deg) { return deg * (EIGEN_PI / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / EIGEN_PI); }

}  // namespace virtmet
