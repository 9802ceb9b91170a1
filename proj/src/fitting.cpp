#include "virtmet/fitting.hpp"

#include "virtmet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace virtmet {

namespace {

constexpr double kOneSidedTol = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr int kMaxCylinderIterations = 100;

void require_plane_cloud(const PointCloud& cloud) {
    if (cloud.points.size() < 3) {
        throw DegenerateCloud("plane fit of '" + cloud.label + "' needs at least 3 points");
    }
}

Vec3 oriented(Vec3 n, const Vec3& toward) {
    return n.dot(toward) < 0.0 ? Vec3(-n) : n;
}

// Projection onto the plane perpendicular to `normal`, with the orientation
// hint expressed in the same 2D basis.
struct Projection2 {
    Vec3 u, v;
    std::vector<Point2> points;
    Point2 hint;
};

Projection2 project(const PointCloud& cloud, const Vec3& normal) {
    const Mat3 axes = nominal_axes(normal);
    Projection2 out{axes.row(0).transpose(), axes.row(1).transpose(), {}, {}};
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points) out.points.push_back({p.dot(out.u), p.dot(out.v)});
    out.hint = {cloud.material_normal.dot(out.u), cloud.material_normal.dot(out.v)};
    if (std::hypot(out.hint.x, out.hint.y) <= kParallelTol) {
        throw NearParallel("material normal of '" + cloud.label + "' is parallel to the constraint normal");
    }
    return out;
}

bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Evaluates a candidate support direction. Returns false unless the support
// points sit on the outermost level of the cloud (a genuine support plane).
template <typename DotFn>
bool evaluate_support(std::size_t n, DotFn&& dot, double support_level, double& offset,
                      double& max_dev, std::vector<std::size_t>& contacts) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < n; ++l) {
        const double d = dot(l);
        if (d - support_level > kOneSidedTol) return false;
        hi = std::max(hi, d);
        lo = std::min(lo, d);
    }
    offset = hi;
    max_dev = hi - lo;
    contacts.clear();
    for (std::size_t l = 0; l < n; ++l) {
        if (hi - dot(l) <= kContactTol) contacts.push_back(l);
    }
    return true;
}

void keep_best(TangentPlaneSolution& best, bool& have, const Vec3& normal, double offset,
               double max_dev, const std::vector<std::size_t>& contacts) {
    const bool better = !have || max_dev < best.max_deviation - kTieTol ||
                        (std::abs(max_dev - best.max_deviation) <= kTieTol &&
                         lex_less(contacts, best.contact_indices));
    if (better) {
        best.plane = Plane(normal, offset);
        best.max_deviation = max_dev;
        best.contact_indices = contacts;
        have = true;
    }
}

}  // namespace

PointCloud transformed(const PointCloud& cloud, const RigidTransform& t) {
    PointCloud out{{}, cloud.label, t.apply_direction(cloud.material_normal)};
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
    return out;
}

Mat3 nominal_axes(const Vec3& normal) {
    const Vec3 z = normal.normalized();
    // Helper is the world axis least aligned with the normal (lowest index on ties).
    Eigen::Index i = 0;
    z.cwiseAbs().minCoeff(&i);
    const Vec3 a = Vec3::Unit(i);
    const Vec3 x = (a - a.dot(z) * z).normalized();
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.row(0) = x.transpose();
    r.row(1) = y.transpose();
    r.row(2) = z.transpose();
    return r;
}

LsqPlaneSolution fit_plane_lsq(const PointCloud& cloud) {
    require_plane_cloud(cloud);
    const Mat3 axes = nominal_axes(cloud.material_normal);
    const std::size_t n = cloud.points.size();

    std::vector<Vec3> local;
    local.reserve(n);
    Vec3 mean = Vec3::Zero();
    for (const auto& p : cloud.points) {
        local.push_back(axes * p);
        mean += local.back();
    }
    mean /= static_cast<double>(n);

    // Centered normal equations decouple the intercept from the slopes.
    double syy = 0, sxy = 0, sxx = 0, szy = 0, szx = 0;
    for (const auto& q : local) {
        const double x = q.x() - mean.x(), y = q.y() - mean.y(), z = q.z() - mean.z();
        syy += y * y;
        sxy += x * y;
        sxx += x * x;
        szy += z * y;
        szx += z * x;
    }
    const double det = syy * sxx - sxy * sxy;
    const double scale = syy + sxx;
    if (!(det > 1e-12 * scale * scale)) {
        throw DegenerateCloud("points of '" + cloud.label + "' are collinear");
    }

    LsqPlaneSolution s;
    s.alpha = (szy * sxx - szx * sxy) / det;
    s.beta = (szx * syy - szy * sxy) / det;
    s.omega = mean.z() - s.alpha * mean.y() - s.beta * mean.x();
    s.residuals.reserve(n);
    for (const auto& q : local) s.residuals.push_back(q.z() - (s.alpha * q.y() + s.beta * q.x() + s.omega));

    const Vec3 local_normal(-s.beta, -s.alpha, 1.0);
    if (local_normal.normalized().z() < std::cos(deg_to_rad(45.0))) {
        throw DegenerateCloud("face '" + cloud.label + "' is tilted 45 degrees or more from its nominal pose");
    }
    // Local frame shares the world origin, so the offset carries over unchanged.
    s.plane = Plane(axes.transpose() * local_normal, s.omega);
    return s;
}

TangentPlaneSolution fit_plane_tangent(const PointCloud& cloud) {
    require_plane_cloud(cloud);
    const auto& pts = cloud.points;
    const std::size_t n = pts.size();
    const Vec3& m = cloud.material_normal;

    TangentPlaneSolution best;
    bool have = false;
    std::vector<std::size_t> contacts;
    contacts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec3 e1 = pts[j] - pts[i];
            for (std::size_t k = j + 1; k < n; ++k) {
                const Vec3 e2 = pts[k] - pts[i];
                Vec3 normal = e1.cross(e2);
                const double len = normal.norm();
                if (len <= 1e-9 * e1.norm() * e2.norm()) continue;
                normal = oriented(normal / len, m);
                if (normal.dot(m) <= 0.0) continue;
                double offset = 0, dev = 0;
                const auto dot = [&](std::size_t l) { return normal.dot(pts[l]); };
                if (!evaluate_support(n, dot, normal.dot(pts[i]), offset, dev, contacts)) continue;
                keep_best(best, have, normal, offset, dev, contacts);
            }
        }
    }
    if (!have) throw DegenerateCloud("no support plane found for '" + cloud.label + "' (collinear points?)");
    return best;
}

Plane fit_plane_lsq_constrained(const PointCloud& cloud, const Plane& perp_to) {
    require_plane_cloud(cloud);
    const Projection2 proj = project(cloud, perp_to.normal());
    const auto n = static_cast<double>(proj.points.size());

    Point2 c;
    for (const auto& q : proj.points) {
        c.x += q.x;
        c.y += q.y;
    }
    c.x /= n;
    c.y /= n;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& q : proj.points) {
        const Eigen::Vector2d d(q.x - c.x, q.y - c.y);
        cov += d * d.transpose();
    }
    if (!(cov.trace() > 1e-24)) {
        throw DegenerateCloud("projected points of '" + cloud.label + "' coincide");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    Eigen::Vector2d n2 = eig.eigenvectors().col(0);
    if (n2.x() * proj.hint.x + n2.y() * proj.hint.y < 0.0) n2 = -n2;

    const Vec3 normal = n2.x() * proj.u + n2.y() * proj.v;
    Point3 centroid = Point3::Zero();
    for (const auto& p : cloud.points) centroid += p;
    centroid /= n;
    return Plane::through(centroid, normal);
}

TangentPlaneSolution fit_plane_tangent_constrained(const PointCloud& cloud, const Plane& perp_to) {
    require_plane_cloud(cloud);
    const Projection2 proj = project(cloud, perp_to.normal());
    const auto& q = proj.points;
    const std::size_t n = q.size();

    TangentPlaneSolution best;
    bool have = false;
    std::vector<std::size_t> contacts;
    contacts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = q[j].x - q[i].x, dy = q[j].y - q[i].y;
            const double len = std::hypot(dx, dy);
            if (len <= 1e-12) continue;
            double nx = -dy / len, ny = dx / len;
            if (nx * proj.hint.x + ny * proj.hint.y < 0.0) {
                nx = -nx;
                ny = -ny;
            }
            double offset = 0, dev = 0;
            const auto dot = [&](std::size_t l) { return nx * q[l].x + ny * q[l].y; };
            if (!evaluate_support(n, dot, dot(i), offset, dev, contacts)) continue;
            keep_best(best, have, nx * proj.u + ny * proj.v, offset, dev, contacts);
        }
    }
    if (!have) throw DegenerateCloud("projected points of '" + cloud.label + "' coincide");
    return best;
}

double flatness(const PointCloud& cloud) {
    const Plane plane = fit_plane_lsq(cloud).plane;
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& p : cloud.points) {
        const double d = signed_distance(plane, p);
        hi = std::max(hi, d);
        lo = std::min(lo, d);
    }
    return hi - lo;
}

Circle2 fit_circle_lsq(std::span<const Point2> points) {
    if (points.size() < 3) throw DegenerateCloud("circle fit needs at least 3 points");
    const auto n = static_cast<double>(points.size());
    double mx = 0, my = 0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= n;
    my /= n;

    // Minimize sum (x^2 + y^2 + D x + E y + F)^2 in centered coordinates.
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& p : points) {
        const double x = p.x - mx, y = p.y - my;
        const Eigen::Vector3d row(x, y, 1.0);
        a += row * row.transpose();
        b -= row * (x * x + y * y);
    }
    const double det2 = a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
    const double tr2 = a(0, 0) + a(1, 1);
    if (!(det2 > 1e-12 * tr2 * tr2)) throw DegenerateCloud("circle points are collinear");

    const Eigen::Vector3d sol = a.ldlt().solve(b);
    const double cx = -0.5 * sol(0), cy = -0.5 * sol(1);
    const double r2 = cx * cx + cy * cy - sol(2);
    if (!(r2 > 0.0)) throw DegenerateCloud("circle fit produced a non-positive radius");
    return {{mx + cx, my + cy}, std::sqrt(r2)};
}

CylinderFit fit_cylinder_report(const PointCloud& cloud, const Line3& initial_axis) {
    const auto& pts = cloud.points;
    if (pts.size() < 6) throw DegenerateCloud("cylinder fit needs at least 6 points");

    Line3 axis = initial_axis;
    std::vector<Circle2> circles;
    for (int iter = 1; iter <= kMaxCylinderIterations; ++iter) {
        const Vec3 w = axis.direction();
        const Mat3 frame = nominal_axes(w);
        const Vec3 u = frame.row(0).transpose(), v = frame.row(1).transpose();

        // Group points into axial stations separated by clear gaps.
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) order.emplace_back((pts[i] - axis.point()).dot(w), i);
        std::sort(order.begin(), order.end());
        const double extent = order.back().first - order.front().first;
        const double gap = std::max(1e-9, 0.1 * extent);

        std::vector<std::vector<std::size_t>> stations(1);
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k > 0 && order[k].first - order[k - 1].first > gap) stations.emplace_back();
            stations.back().push_back(order[k].second);
        }
        if (stations.size() < 2) throw DegenerateCloud("bore points span fewer than 2 axial stations");

        circles.clear();
        std::vector<Point3> centers;
        for (const auto& st : stations) {
            if (st.size() < 3) throw DegenerateCloud("bore station with fewer than 3 points");
            std::vector<Point2> ring;
            ring.reserve(st.size());
            double t = 0;
            for (std::size_t i : st) {
                const Vec3 d = pts[i] - axis.point();
                ring.push_back({d.dot(u), d.dot(v)});
                t += d.dot(w);
            }
            t /= static_cast<double>(st.size());
            const Circle2 c = fit_circle_lsq(ring);
            circles.push_back(c);
            centers.push_back(axis.point() + c.center.x * u + c.center.y * v + t * w);
        }

        Point3 mean = Point3::Zero();
        for (const auto& c : centers) mean += c;
        mean /= static_cast<double>(centers.size());
        Mat3 scatter = Mat3::Zero();
        for (const auto& c : centers) scatter += (c - mean) * (c - mean).transpose();
        const Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
        Vec3 dir = eig.eigenvectors().col(2);
        if (dir.dot(w) < 0.0) dir = -dir;

        const double turn = angle_between(w, dir);
        const Vec3 offset = mean - axis.point();
        const double shift = (offset - offset.dot(w) * w).norm();
        axis = Line3(mean, dir);
        if (turn < 1e-10 && shift < 1e-9) {
            double r = 0;
            for (const auto& c : circles) r += c.radius;
            r /= static_cast<double>(circles.size());
            return {Cylinder(axis, r), circles, iter};
        }
    }
    throw NoConvergence("cylinder fit did not converge in 100 iterations");
}

Cylinder fit_cylinder(const PointCloud& cloud, const Line3& initial_axis) {
    return fit_cylinder_report(cloud, initial_axis).cylinder;
}

}  // namespace virtmet
