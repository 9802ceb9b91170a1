#pragma once

// Plane / Line / Point datum reference frames and hole location.

#include "virtmet/fitting.hpp"
#include "virtmet/geom.hpp"
#include "virtmet/virtpart.hpp"

#include <optional>
#include <string>
#include <vector>

namespace virtmet {

enum class Association { LeastSquares, Tangent };
enum class SideConstraint { None, PerpendicularToTop };

struct VariantSpec {
    std::string name;
    Association top = Association::LeastSquares;
    Association side = Association::LeastSquares;
    SideConstraint constraint = SideConstraint::None;

    friend bool operator==(const VariantSpec&, const VariantSpec&) = default;
};

VariantSpec rep1();  // LSQ top, tangent side, perpendicular to top
VariantSpec rep2();  // LSQ top, LSQ side, intersection (baseline)
VariantSpec rep3();  // tangent top, tangent side, perpendicular to top
VariantSpec rep4();  // tangent top, LSQ side, intersection
std::vector<VariantSpec> standard_variants();
/// Rep1..Rep4 by name.
std::optional<VariantSpec> find_standard_variant(const std::string& name);

std::string to_string(Association a);
std::string to_string(SideConstraint c);

/// Associated datum features and the frame built from them.
struct DatumConstruction {
    Plane primary{Vec3::UnitZ(), 0.0};
    Plane secondary{-Vec3::UnitY(), 0.0};
    Plane tertiary{-Vec3::UnitX(), 0.0};
    Line3 datum_line{Point3::Zero(), Vec3::UnitX()};
    DatumFrame frame;
};

struct MeasurementResult {
    VariantSpec variant;
    DatumFrame frame;
    Point2 hole;
    /// Hole Y in this frame minus hole Y in the Rep2 frame.
    double deviation_y = 0.0;
};

DatumConstruction build_datum(const PartModel& part, const VariantSpec& variant);
DatumFrame build_frame(const PartModel& part, const VariantSpec& variant);

/// Cylinder fit of the bore, seeded with the top face's inward normal through
/// the bore centroid.
Cylinder fit_bore(const PartModel& part);

/// Hole position (bore axis meets the primary plane) in the variant's frame.
Point2 locate_hole(const DatumConstruction& datum, const Cylinder& bore);

MeasurementResult measure_hole(const PartModel& part, const VariantSpec& variant);

/// One bore fit shared by every variant; deviations are taken against Rep2.
std::vector<MeasurementResult> measure_variants(const PartModel& part, const std::vector<VariantSpec>& variants);

/// Rep1..Rep4.
std::vector<MeasurementResult> deviation_table(const PartModel& part);

}  // namespace virtmet
