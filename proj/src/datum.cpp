#include "virtmet/datum.hpp"

#include "virtmet/errors.hpp"

namespace virtmet {

VariantSpec rep1() { return {"Rep1", Association::LeastSquares, Association::Tangent, SideConstraint::PerpendicularToTop}; }
VariantSpec rep2() { return {"Rep2", Association::LeastSquares, Association::LeastSquares, SideConstraint::None}; }
VariantSpec rep3() { return {"Rep3", Association::Tangent, Association::Tangent, SideConstraint::PerpendicularToTop}; }
VariantSpec rep4() { return {"Rep4", Association::Tangent, Association::LeastSquares, SideConstraint::None}; }

std::vector<VariantSpec> standard_variants() { return {rep1(), rep2(), rep3(), rep4()}; }

std::optional<VariantSpec> find_standard_variant(const std::string& name) {
    for (auto& v : standard_variants()) {
        if (v.name == name) return v;
    }
    return std::nullopt;
}

std::string to_string(Association a) {
    return a == Association::LeastSquares ? "LeastSquares" : "Tangent";
}

std::string to_string(SideConstraint c) {
    return c == SideConstraint::None ? "None" : "PerpendicularToTop";
}

namespace {

Plane associate_top(const PointCloud& top, Association a) {
    return a == Association::LeastSquares ? fit_plane_lsq(top).plane : fit_plane_tangent(top).plane;
}

Plane associate_side(const PointCloud& side, const VariantSpec& v, const Plane& primary) {
    if (v.constraint == SideConstraint::PerpendicularToTop) {
        return v.side == Association::LeastSquares ? fit_plane_lsq_constrained(side, primary)
                                                   : fit_plane_tangent_constrained(side, primary).plane;
    }
    return v.side == Association::LeastSquares ? fit_plane_lsq(side).plane : fit_plane_tangent(side).plane;
}

}  // namespace

DatumConstruction build_datum(const PartModel& part, const VariantSpec& variant) {
    DatumConstruction d;
    d.primary = associate_top(part.top_face, variant.top);
    d.secondary = associate_side(part.side_face, variant, d.primary);
    d.tertiary = fit_plane_lsq(part.aux_face).plane;

    d.datum_line = intersect_planes(d.primary, d.secondary);
    const Vec3 z = d.primary.normal();
    Vec3 x = d.datum_line.direction();
    // y points from the secondary datum into the material.
    if (z.cross(x).dot(d.secondary.normal()) > 0.0) x = -x;
    const Vec3 y = z.cross(x).normalized();
    x = y.cross(z);
    d.frame = DatumFrame(intersect_line_plane(d.datum_line, d.tertiary), x, y, z);
    return d;
}

DatumFrame build_frame(const PartModel& part, const VariantSpec& variant) {
    return build_datum(part, variant).frame;
}

Cylinder fit_bore(const PartModel& part) {
    if (part.bore.points.empty()) throw DegenerateCloud("part has no bore points");
    Point3 centroid = Point3::Zero();
    for (const auto& p : part.bore.points) centroid += p;
    centroid /= static_cast<double>(part.bore.points.size());
    return fit_cylinder(part.bore, Line3(centroid, -part.top_face.material_normal));
}

Point2 locate_hole(const DatumConstruction& datum, const Cylinder& bore) {
    const Point3 p = to_frame(datum.frame, intersect_line_plane(bore.axis(), datum.primary));
    return {p.x(), p.y()};
}

std::vector<MeasurementResult> measure_variants(const PartModel& part, const std::vector<VariantSpec>& variants) {
    const Cylinder bore = fit_bore(part);
    const double baseline_y = locate_hole(build_datum(part, rep2()), bore).y;

    std::vector<MeasurementResult> out;
    out.reserve(variants.size());
    for (const auto& v : variants) {
        const DatumConstruction d = build_datum(part, v);
        const Point2 hole = locate_hole(d, bore);
        const bool is_baseline = v.top == Association::LeastSquares && v.side == Association::LeastSquares &&
                                 v.constraint == SideConstraint::None;
        out.push_back({v, d.frame, hole, is_baseline ? 0.0 : hole.y - baseline_y});
    }
    return out;
}

MeasurementResult measure_hole(const PartModel& part, const VariantSpec& variant) {
    return measure_variants(part, {variant}).front();
}

std::vector<MeasurementResult> deviation_table(const PartModel& part) {
    return measure_variants(part, standard_variants());
}

}  // namespace virtmet
