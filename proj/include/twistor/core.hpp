#pragma once

// Oriented lines in R^3 as points of TS^2: a line is a pair (xi, eta) of
// complex scalars, xi the direction in the stereographic chart (projection
// from the south pole onto the equatorial plane) and eta the fibre
// coordinate encoding the minimal-distance vector to the origin.  Points
// split as R^3 = C (+) R, written (z, t) with z = x1 + i*x2, t = x3.

#include <cmath>
#include <complex>
#include <utility>

#include "errors.hpp"
#include "vec3.hpp"

namespace twistor {

using cplx = std::complex<double>;

// |xi| beyond this counts as the chart boundary (south pole).
inline constexpr double kChartLimit = 1e8;

inline cplx sq(cplx v) { return v * v; }

struct EuclidPoint {
    cplx z;       // x1 + i*x2
    double t = 0.0;  // x3

    EuclidPoint() = default;
    EuclidPoint(cplx z, double t) : z(z), t(t) {}

    Vec3 vec() const { return {z.real(), z.imag(), t}; }
    static EuclidPoint from_vec(const Vec3& v) { return {cplx(v.x, v.y), v.z}; }
};

struct OrientedLine {
    cplx xi;   // direction chart coordinate
    cplx eta;  // fibre coordinate (perpendicular distance vector)
};

// Unitary fractional linear transformation xi -> (alpha*xi - conj(beta)) /
// (beta*xi + conj(alpha)) with |alpha|^2 + |beta|^2 = 1; a rotation about
// the origin.
struct MobiusRotation {
    cplx alpha{1.0, 0.0};
    cplx beta{0.0, 0.0};

    MobiusRotation() = default;
    MobiusRotation(cplx alpha, cplx beta) : alpha(alpha), beta(beta) {}

    double unitarity_defect() const {
        return std::abs(std::norm(alpha) + std::norm(beta) - 1.0);
    }

    MobiusRotation inverse() const { return {std::conj(alpha), -beta}; }

    bool is_identity() const { return alpha == cplx(1.0) && beta == cplx(0.0); }
};

struct Translation {
    cplx z0;
    double t0 = 0.0;
};

inline void require_in_chart(cplx xi, const char* where) {
    if (!(std::abs(xi) < kChartLimit))
        throw ChartEscape(std::string(where) + ": direction at the chart boundary");
}

// Unit vector of a chart coordinate; xi = 0 is the north pole (0,0,1).
inline Vec3 dir_to_vector(cplx xi) {
    const double s = std::norm(xi);
    const double d = 1.0 + s;
    return {2.0 * xi.real() / d, 2.0 * xi.imag() / d, (1.0 - s) / d};
}

// Inverse of dir_to_vector; throws for directions at/near the south pole.
inline cplx chart_from_vector(const Vec3& v) {
    const double d = 1.0 + v.z;
    if (!(d * kChartLimit > 2.0))
        throw ChartEscape("chart_from_vector: south-pole direction");
    return cplx(v.x, v.y) / d;
}

// Fibre coordinate of the line through p with direction xi.
inline cplx line_from_point_dir(const EuclidPoint& p, cplx xi) {
    return 0.5 * (p.z - 2.0 * p.t * xi - std::conj(p.z) * sq(xi));
}

// Signed distance of p from the point of the line closest to the origin,
// positive in the direction dir_to_vector(xi).
inline double affine_param(const EuclidPoint& p, cplx xi) {
    const double s = std::norm(xi);
    const cplx zc = std::conj(xi) * p.z;
    return (2.0 * zc.real() + (1.0 - s) * p.t) / (1.0 + s);
}

// Point a distance r along the line (xi, eta) from its closest point to the
// origin.
inline EuclidPoint point_from_line(cplx xi, cplx eta, double r) {
    const double s = std::norm(xi);
    const double d = (1.0 + s) * (1.0 + s);
    const cplx z = (2.0 * (eta - std::conj(eta) * sq(xi)) + 2.0 * xi * (1.0 + s) * r) / d;
    const double t =
        (-2.0 * (eta * std::conj(xi) + std::conj(eta) * xi).real() + (1.0 - s * s) * r) / d;
    return {z, t};
}

inline EuclidPoint point_from_line(const OrientedLine& line, double r) {
    return point_from_line(line.xi, line.eta, r);
}

// Antipodal map xi -> -1/conj(xi); leaves the chart at xi = 0.
inline cplx antipode(cplx xi) {
    if (std::abs(xi) * kChartLimit <= 1.0)
        throw ChartEscape("antipode: result at the chart boundary");
    return -1.0 / std::conj(xi);
}

// The same geometric line with reversed orientation.
inline OrientedLine reverse_line(const OrientedLine& line) {
    return {antipode(line.xi), -std::conj(line.eta) / sq(std::conj(line.xi))};
}

inline cplx mobius_apply(const MobiusRotation& rot, cplx xi) {
    const cplx den = rot.beta * xi + std::conj(rot.alpha);
    const cplx num = rot.alpha * xi - std::conj(rot.beta);
    if (std::abs(num) >= std::abs(den) * kChartLimit)
        throw ChartEscape("mobius_apply: rotated direction at the chart boundary");
    return num / den;
}

// Rotation about the origin acting on line coordinates; r (distance of a
// marked point from the foot point) is unchanged.
inline std::pair<OrientedLine, double> rotate_line(const MobiusRotation& rot,
                                                   const OrientedLine& line, double r) {
    const cplx den = rot.beta * line.xi + std::conj(rot.alpha);
    const cplx num = rot.alpha * line.xi - std::conj(rot.beta);
    if (std::abs(num) >= std::abs(den) * kChartLimit)
        throw ChartEscape("rotate_line: rotated direction at the chart boundary");
    return {OrientedLine{num / den, line.eta / sq(den)}, r};
}

// Translation taking the origin to (z0, t0); eta picks up the fibre of the
// shifted point and r shifts by the component of the translation along the
// line direction.
inline std::pair<OrientedLine, double> translate_line(const Translation& tr,
                                                      const OrientedLine& line, double r) {
    const cplx xi = line.xi;
    const cplx eta = line.eta + 0.5 * (tr.z0 - 2.0 * tr.t0 * xi - std::conj(tr.z0) * sq(xi));
    const double s = std::norm(xi);
    const double dr = (2.0 * (std::conj(xi) * tr.z0).real() + (1.0 - s) * tr.t0) / (1.0 + s);
    return {OrientedLine{xi, eta}, r + dr};
}

// 3x3 matrix of the rotation, built from the images of the basis directions.
// Basis directions whose image escapes the chart are handled through the
// antipode.
inline Mat3 rotation_matrix(const MobiusRotation& rot) {
    const cplx basis[3] = {cplx(1.0, 0.0), cplx(0.0, 1.0), cplx(0.0, 0.0)};
    Mat3 m;
    for (int k = 0; k < 3; ++k) {
        try {
            m.col[k] = dir_to_vector(mobius_apply(rot, basis[k]));
        } catch (const ChartEscape&) {
            // Image at the south pole: go through the antipodal direction
            // instead.  The antipode of the north pole maps to alpha/beta.
            const cplx image = (k == 2) ? rot.alpha / rot.beta
                                        : mobius_apply(rot, antipode(basis[k]));
            m.col[k] = -dir_to_vector(image);
        }
    }
    return m;
}

}  // namespace twistor
