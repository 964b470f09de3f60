#pragma once

// Classical 3-vector ray tracing against analytic implicit surfaces.  This
// is the independent validation path: nothing in here touches the (xi, eta)
// line coordinates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "vec3.hpp"

namespace twistor::euclid {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit
};

struct ImplicitSurface {
    enum class Kind { Plane, Sphere, Torus, Generic };

    Kind kind = Kind::Generic;
    std::function<double(const Vec3&)> f;
    std::function<Vec3(const Vec3&)> gradient;
    double scale = 1.0;  // characteristic scene length, drives the marching step

    // Shape parameters (meaning depends on kind).
    Vec3 center{};
    double radius = 0.0;      // sphere radius / plane height (center.z)
    double core_radius = 0.0;     // torus a
    double meridian_radius = 0.0; // torus b
};

inline ImplicitSurface make_plane(double height) {
    ImplicitSurface s;
    s.kind = ImplicitSurface::Kind::Plane;
    s.center = {0, 0, height};
    s.f = [height](const Vec3& p) { return p.z - height; };
    s.gradient = [](const Vec3&) { return Vec3{0, 0, 1}; };
    s.scale = std::max(1.0, std::abs(height));
    return s;
}

inline ImplicitSurface make_sphere(const Vec3& center, double radius) {
    if (!(radius > 0.0)) throw InvalidParams("sphere radius must be positive");
    ImplicitSurface s;
    s.kind = ImplicitSurface::Kind::Sphere;
    s.center = center;
    s.radius = radius;
    s.f = [center, radius](const Vec3& p) { return norm(p - center) - radius; };
    s.gradient = [center](const Vec3& p) { return normalized(p - center); };
    s.scale = std::max(radius, norm(center));
    return s;
}

// Torus of core radius a and meridian radius b, rotationally symmetric
// about the x3-axis and centred at the origin.
inline ImplicitSurface make_torus(double a, double b) {
    if (!(a > b && b > 0.0)) throw InvalidParams("torus requires a > b > 0");
    ImplicitSurface s;
    s.kind = ImplicitSurface::Kind::Torus;
    s.core_radius = a;
    s.meridian_radius = b;
    s.f = [a, b](const Vec3& p) {
        const double rho = std::sqrt(p.x * p.x + p.y * p.y);
        return std::sqrt((rho - a) * (rho - a) + p.z * p.z) - b;
    };
    s.gradient = [a](const Vec3& p) {
        const double rho = std::sqrt(p.x * p.x + p.y * p.y);
        if (rho < 1e-300) return Vec3{0, 0, p.z >= 0 ? 1.0 : -1.0};
        const double k = (rho - a) / rho;
        Vec3 g{k * p.x, k * p.y, p.z};
        const double n = norm(g);
        return n > 0 ? g / n : Vec3{0, 0, 1};
    };
    s.scale = a + b;
    return s;
}

inline ImplicitSurface make_generic(std::function<double(const Vec3&)> f, double scale = 1.0) {
    ImplicitSurface s;
    s.kind = ImplicitSurface::Kind::Generic;
    s.f = std::move(f);
    s.scale = scale;
    const auto fn = s.f;
    s.gradient = [fn, scale](const Vec3& p) {
        const double h = 1e-6 * scale;
        Vec3 g{(fn({p.x + h, p.y, p.z}) - fn({p.x - h, p.y, p.z})) / (2 * h),
               (fn({p.x, p.y + h, p.z}) - fn({p.x, p.y - h, p.z})) / (2 * h),
               (fn({p.x, p.y, p.z + h}) - fn({p.x, p.y, p.z - h})) / (2 * h)};
        const double n = norm(g);
        return n > 0 ? g / n : Vec3{0, 0, 1};
    };
    return s;
}

// Mirror reflection of a unit direction about a unit normal.
inline Vec3 reflect_vector(const Vec3& d, const Vec3& n) {
    return d - 2.0 * dot(d, n) * n;
}

struct Hit {
    double s = 0.0;  // ray parameter
    Vec3 point;
};

namespace detail {

inline constexpr double kMinHitParam = 1e-9;

// Polish a bracketed root of g(s) = f(ray(s)) by bisection to ~1e-12.
inline double bisect(const std::function<double(double)>& g, double lo, double hi) {
    double glo = g(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0 || hi - lo < 1e-12 * std::max(1.0, std::abs(mid))) return mid;
        if ((glo < 0) == (gm < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Durand-Kerner iteration for the roots of a monic quartic with real
// coefficients:  s^4 + c3 s^3 + c2 s^2 + c1 s + c0.
inline std::array<std::complex<double>, 4> quartic_roots(double c3, double c2, double c1,
                                                         double c0) {
    using C = std::complex<double>;
    const auto eval = [&](C s) { return (((s + c3) * s + c2) * s + c1) * s + c0; };
    std::array<C, 4> r{C(0.4, 0.9), C(-0.91, 0.4), C(-0.4, -0.93), C(0.9, -0.41)};
    const double bound =
        1.0 + std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    for (auto& z : r) z *= bound;
    for (int it = 0; it < 200; ++it) {
        double moved = 0.0;
        for (int i = 0; i < 4; ++i) {
            C den(1.0, 0.0);
            for (int j = 0; j < 4; ++j)
                if (j != i) den *= r[i] - r[j];
            if (std::abs(den) < 1e-300) continue;
            const C step = eval(r[i]) / den;
            r[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14 * bound) break;
    }
    return r;
}

}  // namespace detail

// All intersections with s > 0 in increasing order.  Sphere and plane use
// the quadratic/linear shortcut, the torus its quartic; generic surfaces
// fall back to sign-change marching refined by bisection.
inline std::vector<Hit> intersect_ray_surface(const Ray& ray, const ImplicitSurface& S,
                                              double max_range = 0.0) {
    using detail::kMinHitParam;
    std::vector<double> params;
    const auto g = [&](double s) { return S.f(ray.origin + s * ray.dir); };

    switch (S.kind) {
        case ImplicitSurface::Kind::Plane: {
            if (std::abs(ray.dir.z) > 1e-300) {
                const double s = (S.center.z - ray.origin.z) / ray.dir.z;
                if (s > kMinHitParam) params.push_back(s);
            }
            break;
        }
        case ImplicitSurface::Kind::Sphere: {
            const Vec3 oc = ray.origin - S.center;
            const double b = dot(oc, ray.dir);
            const double c = norm2(oc) - S.radius * S.radius;
            const double disc = b * b - c;
            if (disc >= 0.0) {
                const double sd = std::sqrt(disc);
                for (double s : {-b - sd, -b + sd})
                    if (s > kMinHitParam) params.push_back(s);
            }
            break;
        }
        case ImplicitSurface::Kind::Torus: {
            // ((|p|^2 + a^2 - b^2)^2 = 4 a^2 (x^2 + y^2) along the ray.
            const double a2 = S.core_radius * S.core_radius;
            const double b2 = S.meridian_radius * S.meridian_radius;
            const Vec3 o = ray.origin, d = ray.dir;
            const double od = dot(o, d);
            const double oo = norm2(o);
            const double K = oo + a2 - b2;
            const double dxy = d.x * d.x + d.y * d.y;
            const double oxy = o.x * o.x + o.y * o.y;
            const double odxy = o.x * d.x + o.y * d.y;
            // (s^2 + 2 od s + K)^2 - 4 a^2 (dxy s^2 + 2 odxy s + oxy)
            const double c3 = 4.0 * od;
            const double c2 = 2.0 * K + 4.0 * od * od - 4.0 * a2 * dxy;
            const double c1 = 4.0 * od * K - 8.0 * a2 * odxy;
            const double c0 = K * K - 4.0 * a2 * oxy;
            for (const auto& z : detail::quartic_roots(c3, c2, c1, c0)) {
                if (std::abs(z.imag()) > 1e-7 * (1.0 + std::abs(z.real()))) continue;
                double s = z.real();
                if (!(s > kMinHitParam)) continue;
                // Newton polish on the signed distance along the ray.
                for (int it = 0; it < 60; ++it) {
                    const Vec3 p = ray.origin + s * ray.dir;
                    const double fv = S.f(p);
                    const double dfv = dot(S.gradient(p), ray.dir);
                    if (std::abs(dfv) < 1e-12) break;
                    const double step = fv / dfv;
                    s -= step;
                    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(s))) break;
                }
                if (s > kMinHitParam && std::abs(g(s)) < 1e-9) params.push_back(s);
            }
            break;
        }
        case ImplicitSurface::Kind::Generic: {
            const double step = 1e-2 * S.scale;
            const double range =
                max_range > 0.0 ? max_range : 20.0 * S.scale + 2.0 * norm(ray.origin);
            double prev_s = kMinHitParam;
            double prev_g = g(prev_s);
            for (double s = prev_s + step; s <= range; s += step) {
                const double cur = g(s);
                if ((prev_g < 0) != (cur < 0)) params.push_back(detail::bisect(g, prev_s, s));
                prev_s = s;
                prev_g = cur;
            }
            break;
        }
    }

    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 params.end());

    std::vector<Hit> hits;
    hits.reserve(params.size());
    for (double s : params) {
        const Vec3 p = ray.origin + s * ray.dir;
        if (std::abs(S.f(p)) < 1e-9) hits.push_back({s, p});
    }
    return hits;
}

// Outgoing ray from the first hit; the normal is the normalized gradient
// oriented against the incoming direction.
inline Ray trace_reflection(const Ray& ray, const ImplicitSurface& S) {
    const auto hits = intersect_ray_surface(ray, S);
    if (hits.empty()) throw NoIntersection("trace_reflection: ray misses the surface");
    const Vec3 p = hits.front().point;
    Vec3 n = S.gradient(p);
    if (dot(n, ray.dir) > 0) n = -n;
    return {p, reflect_vector(ray.dir, n)};
}

struct PathSample {
    bool hit = false;
    Vec3 point;     // wavefront point (only valid when hit)
    double s_hit = 0.0;
};

// Equal-path-length wavefront construction: each ray travels total_path in
// all, the remainder after the hit continuing along the reflected ray.
inline std::vector<PathSample> wavefront_by_path_length(const std::vector<Ray>& rays,
                                                        const ImplicitSurface* S,
                                                        double total_path) {
    std::vector<PathSample> out(rays.size());
    for (size_t i = 0; i < rays.size(); ++i) {
        if (S == nullptr) {
            out[i] = {true, rays[i].origin + total_path * rays[i].dir, 0.0};
            continue;
        }
        const auto hits = intersect_ray_surface(rays[i], *S);
        if (hits.empty() || hits.front().s > total_path) continue;
        const Ray refl = trace_reflection(rays[i], *S);
        out[i] = {true, refl.origin + (total_path - hits.front().s) * refl.dir,
                  hits.front().s};
    }
    return out;
}

}  // namespace twistor::euclid
