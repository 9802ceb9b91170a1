#include "virtmet/geom.hpp"

#include "virtmet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace virtmet {

namespace {

Vec3 unit_or_throw(const Vec3& v, const char* what) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw InvalidArgument(std::string(what) + " must be a finite nonzero vector");
    }
    return v / n;
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

}  // namespace

Plane::Plane(const Vec3& normal, double offset) {
    const double n = normal.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("plane normal must be nonzero");
    normal_ = normal / n;
    offset_ = offset / n;
}

Plane Plane::through(const Point3& point, const Vec3& normal) {
    const Vec3 n = unit_or_throw(normal, "plane normal");
    return Plane(n, n.dot(point));
}

Line3::Line3(const Point3& point, const Vec3& direction)
    : point_(point), direction_(unit_or_throw(direction, "line direction")) {}

Cylinder::Cylinder(Line3 axis, double radius) : axis_(std::move(axis)), radius_(radius) {
    if (!(radius > 0.0)) throw InvalidArgument("cylinder radius must be positive");
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-12 || std::abs(rotation.determinant() - 1.0) > 1e-12) {
        throw InvalidArgument("rotation must be orthonormal with determinant +1");
    }
}

RigidTransform RigidTransform::rotation_about(const Point3& pivot, const Vec3& axis, double angle) {
    const Mat3 r = Eigen::AngleAxisd(angle, unit_or_throw(axis, "rotation axis")).toRotationMatrix();
    return RigidTransform(r, pivot - r * pivot);
}

Plane RigidTransform::apply(const Plane& plane) const {
    const Vec3 n = rotation_ * plane.normal();
    return Plane(n, plane.offset() + n.dot(translation_));
}

Line3 RigidTransform::apply(const Line3& line) const {
    return Line3(apply(line.point()), rotation_ * line.direction());
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
    return RigidTransform(rotation_ * other.rotation_, rotation_ * other.translation_ + translation_);
}

RigidTransform RigidTransform::inverse() const {
    const Mat3 rt = rotation_.transpose();
    return RigidTransform(rt, -(rt * translation_));
}

DatumFrame::DatumFrame(const Point3& origin, const Vec3& x_axis, const Vec3& y_axis, const Vec3& z_axis)
    : origin_(origin), x_(x_axis), y_(y_axis), z_(z_axis) {
    constexpr double tol = 1e-10;
    const bool unit = std::abs(x_.norm() - 1.0) <= tol && std::abs(y_.norm() - 1.0) <= tol &&
                      std::abs(z_.norm() - 1.0) <= tol;
    const bool ortho = std::abs(x_.dot(y_)) <= tol && std::abs(y_.dot(z_)) <= tol &&
                       std::abs(z_.dot(x_)) <= tol;
    const bool right = (x_.cross(y_) - z_).cwiseAbs().maxCoeff() <= tol;
    if (!unit || !ortho || !right) {
        throw InvalidArgument("datum frame axes must be orthonormal and right-handed");
    }
}

double signed_distance(const Plane& plane, const Point3& p) {
    return plane.normal().dot(p) - plane.offset();
}

Line3 intersect_planes(const Plane& a, const Plane& b) {
    const Vec3 u = a.normal().cross(b.normal());
    const double un2 = u.squaredNorm();
    if (std::sqrt(un2) <= kParallelTol) throw NearParallel("planes are parallel within 1e-9");
    // Point of the line closest to the world origin.
    const Point3 p = (a.offset() * b.normal().cross(u) + b.offset() * u.cross(a.normal())) / un2;
    return Line3(p, u);
}

Point3 intersect_line_plane(const Line3& line, const Plane& plane) {
    const double denom = plane.normal().dot(line.direction());
    if (std::abs(denom) <= kParallelTol) throw NearParallel("line is parallel to plane within 1e-9");
    return line.at(-signed_distance(plane, line.point()) / denom);
}

Point3 to_frame(const DatumFrame& frame, const Point3& p) {
    const Vec3 d = p - frame.origin();
    return {d.dot(frame.x_axis()), d.dot(frame.y_axis()), d.dot(frame.z_axis())};
}

Point3 from_frame(const DatumFrame& frame, const Point3& local) {
    return frame.origin() + local.x() * frame.x_axis() + local.y() * frame.y_axis() +
           local.z() * frame.z_axis();
}

double angle_between(const Vec3& a, const Vec3& b) {
    // atan2 form stays accurate for nearly (anti)parallel vectors.
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
    const Vec3 f = unit_or_throw(from, "rotation source");
    const Vec3 t = unit_or_throw(to, "rotation target");
    const Vec3 v = f.cross(t);
    const double c = f.dot(t);
    if (c < -1.0 + 1e-12) {
        // Antiparallel: half turn about any axis perpendicular to `from`.
        Eigen::Index i = 0;
        f.cwiseAbs().minCoeff(&i);
        const Vec3 axis = f.cross(Vec3::Unit(i)).normalized();
        return Eigen::AngleAxisd(EIGEN_PI, axis).toRotationMatrix();
    }
    const Mat3 k = skew(v);
    Mat3 r = Mat3::Identity() + k + k * k * (1.0 / (1.0 + c));
    // One polar-decomposition step removes the O(eps) drift from orthonormality.
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace virtmet
