#pragma once

// CSV / OBJ writers for congruences and wavefront point clouds.  Outputs
// are byte-stable: fixed iteration order, 17 significant digits.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "errors.hpp"

namespace twistor {

struct ExportRecord {
    cplx nu;
    bool shadow = false;
    // Populated only when !shadow:
    cplx xi, eta;
    std::optional<double> r;  // potential value when available
    double C = 0.0;
    std::optional<EuclidPoint> point;
};

namespace detail_export {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail_export

inline void write_congruence_csv(const std::string& path,
                                 const std::vector<ExportRecord>& records) {
    using detail_export::fmt;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "nu_re,nu_im,xi_re,xi_im,eta_re,eta_im,r,C,x1,x2,x3,shadow\n";
    for (const auto& rec : records) {
        os << fmt(rec.nu.real()) << ',' << fmt(rec.nu.imag()) << ',';
        if (rec.shadow) {
            // xi, eta, r, C and the coordinates stay empty on shadow rows.
            os << ",,,,,,,,,1\n";
            continue;
        }
        os << fmt(rec.xi.real()) << ',' << fmt(rec.xi.imag()) << ','
           << fmt(rec.eta.real()) << ',' << fmt(rec.eta.imag()) << ',';
        if (rec.r) os << fmt(*rec.r);
        os << ',' << fmt(rec.C) << ',';
        if (rec.point)
            os << fmt(rec.point->z.real()) << ',' << fmt(rec.point->z.imag()) << ','
               << fmt(rec.point->t);
        else
            os << ",,";
        os << ",0\n";
    }
}

// Vertices-only OBJ with a comment header.
inline void write_obj(const std::string& path, const std::vector<EuclidPoint>& points,
                      const std::vector<std::string>& header_comments) {
    using detail_export::fmt;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    for (const auto& line : header_comments) os << "# " << line << "\n";
    for (const auto& p : points)
        os << "v " << fmt(p.z.real()) << ' ' << fmt(p.z.imag()) << ' ' << fmt(p.t) << "\n";
}

}  // namespace twistor
