#pragma once

// Closed-form reflections: the plane mirror, plane wavefronts off an
// arbitrary surface (parameterised by surface point or by outgoing
// direction), spherical wavefronts, and the sphere/torus gallery with the
// exact reflected twistor/potential functions used as regression
// references.

#include <cmath>
#include <functional>
#include <string>

#include "core.hpp"
#include "errors.hpp"
#include "reflection.hpp"

namespace twistor {

struct BranchChoice {
    int sign = +1;  // +1 or -1; the two give the same unoriented congruence

    static BranchChoice plus() { return {+1}; }
    static BranchChoice minus() { return {-1}; }
};

// ---------------------------------------------------------------------------
// Plane mirror (the x1x2-plane)
// ---------------------------------------------------------------------------

// Reflection of the line (xi1, eta1) in the x1x2-plane.
inline OrientedLine reflect_in_plane(cplx xi1, cplx eta1) {
    if (std::abs(xi1) * kChartLimit <= 1.0)
        throw ChartEscape("reflect_in_plane: outgoing direction at the chart boundary");
    const cplx cxi = std::conj(xi1);
    return {1.0 / cxi, -std::conj(eta1) / sq(cxi)};
}

// ---------------------------------------------------------------------------
// Plane wavefront
// ---------------------------------------------------------------------------

// Reflection of a plane wave with propagation direction xi1 at the surface
// point (xi0, eta0, r0); the congruence is parameterised by the surface
// parameter.
inline LineReflection plane_wave_by_surface_point(cplx xi1, cplx xi0, cplx eta0,
                                                  double r0) {
    return reflect_line(xi0, eta0, r0, xi1);
}

struct DirectionReflection {
    cplx F2;     // fibre of the outgoing line with direction xi
    cplx xi0;    // surface normal direction of the event
    cplx gamma;  // the branch factor
};

// Surface normal direction xi0 at which a plane wave with normal direction
// -1/conj(xi1) reflects into the outgoing direction xi.  b and beta come
// from recasting the reflection law as a quadratic for xi0; the formula is
// arranged so all radicals are real.
inline cplx plane_wave_incidence_direction(cplx xi, cplx xi1, BranchChoice branch) {
    const double b = 1.0 - std::norm(xi) * std::norm(xi1);
    const cplx beta = xi * (1.0 + std::conj(xi) * xi1) + xi1 * (1.0 + xi * std::conj(xi1));
    const double D = std::sqrt(b * b + std::norm(beta));
    if (D < 1e-14)
        throw BranchUndefined(
            "plane_wave_incidence_direction: direction not reachable by single reflection");
    if (b >= 0.0) {
        if (branch.sign > 0) return beta / (b + D);
        if (std::abs(beta) * kChartLimit <= b + D)
            throw ChartEscape("plane_wave_incidence_direction: chart boundary");
        return -(b + D) / std::conj(beta);
    }
    if (branch.sign > 0) {
        if (std::abs(beta) * kChartLimit <= D - b)
            throw ChartEscape("plane_wave_incidence_direction: chart boundary");
        return (D - b) / std::conj(beta);
    }
    return -beta / (D - b);
}

// Reflected wave of a plane wavefront with normal direction -1/conj(xi1),
// parameterised by the outgoing direction xi: eta2 = F2(xi, conj(xi)).
// Note xi1 here is the antipode of the propagation direction (the
// convention of the direction-parameterised form), unlike
// plane_wave_by_surface_point which takes the propagation direction itself.
inline DirectionReflection plane_wave_by_direction(cplx xi, cplx xi1,
                                                   const std::function<cplx(cplx)>& F0,
                                                   const std::function<double(cplx)>& r0,
                                                   BranchChoice branch) {
    DirectionReflection out;
    out.xi0 = plane_wave_incidence_direction(xi, xi1, branch);
    // gamma = 2 (1 + conj(xi0) xi) / (1 + xi0 conj(xi0)) - 1, the closed form
    // of the branch factor consistent with the chosen xi0.
    out.gamma = 2.0 * (1.0 + std::conj(out.xi0) * xi) / (1.0 + std::norm(out.xi0)) - 1.0;
    const cplx F0v = F0(out.xi0);
    const double r0v = r0(out.xi0);
    out.F2 = 0.25 * (sq(1.0 + out.gamma) * F0v - sq(xi - out.gamma * xi1) * std::conj(F0v) +
                     2.0 * (xi1 - xi) * out.gamma * r0v);
    return out;
}

// ---------------------------------------------------------------------------
// Spherical wavefront
// ---------------------------------------------------------------------------

struct SphericalReflection {
    cplx xi2, eta2;
    cplx alpha1, alpha2, alpha3;
    double beta0 = 0.0;
};

// Reflection of a spherical wavefront with focus at the origin off the
// surface element (xi0, eta0, r0); requires the surface not to contain the
// origin (beta0 > 0).
inline SphericalReflection spherical_wave_reflection(cplx xi0, cplx eta0, double r0,
                                                     BranchChoice branch) {
    const double s0 = std::norm(xi0);
    const double w0 = 1.0 + s0;
    const double beta0 = std::sqrt(4.0 * std::norm(eta0) + w0 * w0 * r0 * r0);
    if (beta0 < 1e-14)
        throw DegenerateFocus("spherical_wave_reflection: surface contains the origin");
    const double sgn = branch.sign > 0 ? 1.0 : -1.0;

    const cplx ceta0 = std::conj(eta0);
    const cplx delta = 2.0 * (xi0 * ceta0 - std::conj(xi0) * eta0) - w0 * w0 * r0 +
                       sgn * (1.0 - s0) * beta0;
    const cplx num2 = 2.0 * eta0 + 2.0 * ceta0 * sq(xi0) + sgn * 2.0 * xi0 * beta0;
    if (std::abs(num2) >= std::abs(delta) * kChartLimit)
        throw ChartEscape("spherical_wave_reflection: outgoing direction at chart boundary");

    SphericalReflection out;
    out.beta0 = beta0;
    out.xi2 = num2 / delta;
    out.alpha1 = (2.0 * ceta0 * xi0 - w0 * r0 + sgn * beta0) / delta;
    out.alpha2 = (2.0 * eta0 + xi0 * w0 * r0 + sgn * xi0 * beta0) / delta;
    out.alpha3 = (4.0 * std::norm(eta0) * xi0 - (eta0 - ceta0 * sq(xi0)) * w0 * r0 +
                  sgn * (eta0 + ceta0 * sq(xi0)) * beta0) /
                 sq(delta);
    out.eta2 = sq(out.alpha1) * eta0 - sq(out.alpha2) * ceta0 - 2.0 * w0 * out.alpha3 * r0;
    return out;
}

// ---------------------------------------------------------------------------
// Surface gallery
// ---------------------------------------------------------------------------

struct SurfaceGalleryEntry {
    std::string name;
    // Graph form over the normal direction (null for the plane, whose
    // normal map is constant; for the torus this is the outer sheet of the
    // 2-to-1 normal map).
    std::function<cplx(cplx)> F;
    std::function<double(cplx)> r;
    GridSpec graph_domain;
    std::function<SurfaceSample(cplx)> graph_at;  // nu = normal direction
    // Full surface for the physical pipeline (both torus sheets).
    SurfaceDescription desc;
    struct {
        Vec3 center{};
        double radius = 0.0;
        double a = 0.0, b = 0.0;  // torus radii
        double height = 0.0;      // plane
    } params;

    TwistorSurface twistor_surface() const { return {F, r, graph_domain}; }
};

// Sphere of the given radius: the normal congruence of the unit sphere at
// the origin is (xi, 0) with potential R; a translation moves the centre.
inline SurfaceGalleryEntry gallery_sphere(const Vec3& center, double radius) {
    if (!(radius > 0.0)) throw InvalidParams("gallery_sphere: radius must be positive");
    SurfaceGalleryEntry e;
    e.name = "sphere";
    e.params.center = center;
    e.params.radius = radius;
    const Translation tr{cplx(center.x, center.y), center.z};
    e.F = [tr](cplx xi) { return translate_line(tr, {xi, 0.0}, 0.0).first.eta; };
    e.r = [tr, radius](cplx xi) { return translate_line(tr, {xi, 0.0}, radius).second; };
    e.graph_domain = GridSpec::square(2.0, 128);
    e.graph_at = [F = e.F, r = e.r](cplx nu) -> SurfaceSample {
        require_in_chart(nu, "gallery_sphere");
        return {nu, F(nu), r(nu)};
    };
    e.desc.name = e.name;
    e.desc.at = e.graph_at;  // the normal map covers the whole sphere
    e.desc.implicit = euclid::make_sphere(center, radius);
    e.desc.domain = e.graph_domain;
    return e;
}

// Torus with core radius a and meridian radius b, rotationally symmetric
// about the x3-axis.  sqrt(xi/conj(xi)) is taken as xi/|xi|; the chart
// poles xi = 0 and xi = infinity are excluded by the mask radius.
inline SurfaceGalleryEntry gallery_torus(double a, double b, double mask_radius = 1e-2) {
    if (!(a > b && b > 0.0)) throw InvalidParams("gallery_torus: requires a > b > 0");
    if (mask_radius < 0.0) throw InvalidParams("gallery_torus: negative mask radius");
    SurfaceGalleryEntry e;
    e.name = "torus";
    e.params.a = a;
    e.params.b = b;
    e.F = [a](cplx xi) {
        const double m = std::abs(xi);
        return 0.5 * a * (1.0 - m * m) * (xi / m);
    };
    e.r = [a, b](cplx xi) {
        const double m = std::abs(xi);
        return 2.0 * a * m / (1.0 + m * m) + b;
    };
    e.graph_domain = GridSpec::square(2.0, 128);
    e.graph_domain.mask = [mask_radius](cplx nu) {
        if (mask_radius <= 0.0) return false;  // caller disabled the mask
        const double m = std::abs(nu);
        return m <= mask_radius || m >= 1.0 / mask_radius;
    };
    e.graph_at = [F = e.F, r = e.r](cplx nu) -> SurfaceSample {
        if (std::abs(nu) < 1e-300) throw ChartEscape("gallery_torus: chart pole");
        require_in_chart(nu, "gallery_torus");
        return {nu, F(nu), r(nu)};
    };

    // Full normal congruence for the physical pipeline: the normal map is
    // 2-to-1 (outer and inner sheet), so nu = azimuth + i * tube angle.
    e.desc.name = e.name;
    e.desc.at = [a, b](cplx nu) -> SurfaceSample {
        const double th = nu.real(), ph = nu.imag();
        const Vec3 n{std::cos(th) * std::cos(ph), std::sin(th) * std::cos(ph),
                     std::sin(ph)};
        const double rho = a + b * std::cos(ph);
        const EuclidPoint p{cplx(rho * std::cos(th), rho * std::sin(th)),
                            b * std::sin(ph)};
        const cplx xi0 = chart_from_vector(n);
        return {xi0, line_from_point_dir(p, xi0), affine_param(p, xi0)};
    };
    e.desc.seed_param = [a](const Vec3& point, const Vec3&) {
        const double rho = std::sqrt(point.x * point.x + point.y * point.y);
        return cplx(std::atan2(point.y, point.x), std::atan2(point.z, rho - a));
    };
    e.desc.implicit = euclid::make_torus(a, b);
    e.desc.domain = GridSpec::square(M_PI, 64);
    return e;
}

// Horizontal plane x3 = height; its normal congruence is parameterised by
// the surface point z = nu rather than by the (constant) normal direction.
inline SurfaceGalleryEntry gallery_plane(double height) {
    SurfaceGalleryEntry e;
    e.name = "plane";
    e.params.height = height;
    e.desc.name = e.name;
    e.desc.at = [height](cplx nu) -> SurfaceSample {
        require_in_chart(nu, "gallery_plane");
        return {0.0, 0.5 * nu, height};
    };
    e.graph_at = e.desc.at;  // flat: parameterised by the surface point
    e.graph_domain = GridSpec::square(4.0, 128);
    e.desc.implicit = euclid::make_plane(height);
    e.desc.domain = e.graph_domain;
    e.desc.seed_param = [](const Vec3& point, const Vec3&) {
        return cplx(point.x, point.y);
    };
    return e;
}

struct GalleryParams {
    Vec3 center{};
    double radius = 1.0;
    double a = 2.0, b = 1.0;
    double height = 0.0;
    double mask_radius = 1e-2;
};

inline SurfaceGalleryEntry gallery(const std::string& name, const GalleryParams& p = {}) {
    if (name == "sphere") return gallery_sphere(p.center, p.radius);
    if (name == "torus") return gallery_torus(p.a, p.b, p.mask_radius);
    if (name == "plane") return gallery_plane(p.height);
    throw InvalidParams("gallery: unknown surface '" + name + "'");
}

// ---------------------------------------------------------------------------
// Reference reflected congruences
// ---------------------------------------------------------------------------

enum class ReferenceParam {
    OutgoingDirection,  // nu is the outgoing direction xi
    SurfaceParameter,   // nu is the surface normal direction xi0
};

struct ReferenceForms {
    ReferenceParam param;
    std::function<cplx(cplx)> xi2;
    std::function<cplx(cplx)> eta2;
    std::function<double(cplx)> r2;  // without the additive constant
};

// Exact reflected twistor/potential functions for the regression cases.
//   sphere-plane-axis      unit sphere at the origin, plane wave down the
//                          x3-axis, parameterised by outgoing direction
//   torus-plane-axis       torus(2,1), plane wave down the x3-axis,
//                          parameterised by outgoing direction
//   torus-plane-general    torus(2,1), plane wave with propagation
//                          direction xi1, parameterised by surface normal
//   sphere-offset-spherical  unit sphere centred (0,0,-2), spherical wave
//                          from the origin, parameterised by surface normal
inline ReferenceForms reference_reflected(const std::string& name, cplx xi1 = 0.0) {
    ReferenceForms out;
    if (name == "sphere-plane-axis") {
        out.param = ReferenceParam::OutgoingDirection;
        out.xi2 = [](cplx xi) { return xi; };
        out.eta2 = [](cplx xi) { return -0.5 * xi * std::sqrt(1.0 + std::norm(xi)); };
        out.r2 = [](cplx xi) { return 2.0 / std::sqrt(1.0 + std::norm(xi)); };
        return out;
    }
    if (name == "torus-plane-axis") {
        out.param = ReferenceParam::OutgoingDirection;
        out.xi2 = [](cplx xi) { return xi; };
        out.eta2 = [](cplx xi) {
            const double m = std::abs(xi);
            const double s = m * m;
            return 0.5 * (2.0 * (1.0 - s) - m * std::sqrt(1.0 + s)) * (xi / m);
        };
        out.r2 = [](cplx xi) {
            const double s = std::norm(xi);
            return (4.0 * std::sqrt(s) + 2.0 * std::sqrt(1.0 + s)) / (1.0 + s);
        };
        return out;
    }
    if (name == "torus-plane-general") {
        // torus(2,1); xi1 is the propagation direction of the incoming wave.
        out.param = ReferenceParam::SurfaceParameter;
        out.xi2 = [xi1](cplx xi0) { return reflect_direction(xi0, xi1); };
        out.eta2 = [xi1](cplx xi0) {
            const double s0 = std::norm(xi0);
            const double m0 = std::sqrt(s0);
            const cplx cxi0 = std::conj(xi0);
            const cplx cxi1 = std::conj(xi1);
            const cplx a = cxi0 - cxi1;
            const cplx bb = 1.0 + xi0 * cxi1;
            const cplx num = (sq(a) * xi0 - sq(bb) * cxi0) * (1.0 - s0) +
                             a * bb * ((1.0 + s0) * m0 + 4.0 * s0);
            const cplx den = m0 * sq((1.0 - s0) * cxi1 - 2.0 * cxi0);
            return num / den;
        };
        out.r2 = [xi1](cplx xi0) {
            const double s0 = std::norm(xi0);
            const double m0 = std::sqrt(s0);
            const double s1 = std::norm(xi1);
            const double cross = std::norm(std::conj(xi0) - std::conj(xi1)) -
                                 std::norm(1.0 + xi0 * std::conj(xi1));
            const double mixed =
                (s0 * (1.0 - s1) - 2.0 * (xi0 * std::conj(xi1)).real()) * (1.0 + s0);
            return 4.0 * (2.0 * cross * m0 + mixed) / ((1.0 + s1) * (1.0 + s0) * (1.0 + s0));
        };
        return out;
    }
    if (name == "sphere-offset-spherical" || name == "sphere-at-(0,0,-2)-spherical") {
        out.param = ReferenceParam::SurfaceParameter;
        const auto beta = [](double s) { return std::sqrt(1.0 + 10.0 * s + 9.0 * s * s); };
        out.xi2 = [beta](cplx xi0) {
            const double s = std::norm(xi0);
            const double b = beta(s);
            const cplx den = 1.0 - 2.0 * s - 3.0 * s * s + (1.0 - s) * b;
            return 2.0 * xi0 * (2.0 * (1.0 + s) + b) / den;
        };
        out.eta2 = [beta](cplx xi0) {
            const double s = std::norm(xi0);
            const double b = beta(s);
            const double den =
                1.0 + s - 7.0 * s * s + 9.0 * s * s * s + (1.0 - 4.0 * s + 3.0 * s * s) * b;
            return 4.0 * xi0 * (1.0 - 3.0 * s) * (1.0 + 3.0 * s + b) / den;
        };
        out.r2 = [beta](cplx xi0) {
            const double s = std::norm(xi0);
            const double d = 1.0 - 3.0 * s;
            return -2.0 * d * d * beta(s) / (1.0 + 11.0 * s + 19.0 * s * s + 9.0 * s * s * s);
        };
        return out;
    }
    throw UnknownCase("reference_reflected: unknown case '" + name + "'");
}

}  // namespace twistor
