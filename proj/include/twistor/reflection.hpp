#pragma once

// Reflection of oriented lines off a surface: the reflection law on
// directions, the incidence relation fixing the fibre coordinates, the
// full pipeline producing a reflected line congruence, and the identity
// behind the Theorem of Malus.
//
// Chart escapes (directions at the stereographic south pole) are handled by
// conjugating the computation with one of the fixed rotations in
// standard_frames() and rotating the result back.

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "congruence.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "euclid.hpp"
#include "parallel.hpp"
#include "wirtinger.hpp"

namespace twistor {

// ---------------------------------------------------------------------------
// Law of reflection on the direction sphere
// ---------------------------------------------------------------------------

// Rotation through 180 degrees about xi0, i.e. reflection in xi0.
inline cplx reflect_through_point(cplx xi0, cplx xi) {
    const double s0 = std::norm(xi0);
    const cplx num = (s0 - 1.0) * xi + 2.0 * xi0;
    const cplx den = 2.0 * std::conj(xi0) * xi + (1.0 - s0);
    if (std::abs(num) >= std::abs(den) * kChartLimit)
        throw ChartEscape("reflect_through_point: image at the chart boundary");
    return num / den;
}

// Outgoing direction for incoming direction xi1 striking a surface whose
// normal direction is xi0; equals the reflection of the antipode of xi1
// through xi0.
inline cplx reflect_direction(cplx xi0, cplx xi1) {
    const double s0 = std::norm(xi0);
    const cplx num = 2.0 * xi0 * std::conj(xi1) + (1.0 - s0);
    const cplx den = (1.0 - s0) * std::conj(xi1) - 2.0 * std::conj(xi0);
    if (std::abs(num) >= std::abs(den) * kChartLimit)
        throw ChartEscape("reflect_direction: outgoing direction at the chart boundary");
    return num / den;
}

// Fibre coordinate of the line with direction xi_i through the surface
// point determined by (xi0, eta0, r0).
inline cplx incidence_eta(cplx xi0, cplx eta0, double r0, cplx xi_i) {
    const double w0 = 1.0 + std::norm(xi0);
    const cplx a = 1.0 + std::conj(xi0) * xi_i;
    const cplx b = xi0 - xi_i;
    return (sq(a) * eta0 - sq(b) * std::conj(eta0) + b * a * w0 * r0) / (w0 * w0);
}

struct LineReflection {
    cplx xi2, eta2;  // outgoing line
    cplx eta1;       // fibre of the incoming line through the same point
    bool grazing = false;
};

// The reflected line for a single event, all in one chart: outgoing
// direction from the reflection law, fibres from the incidence relation in
// its rearranged closed form.
inline LineReflection reflect_line(cplx xi0, cplx eta0, double r0, cplx xi1) {
    const double s0 = std::norm(xi0);
    const double w0 = 1.0 + s0;
    const cplx xi2 = reflect_direction(xi0, xi1);

    const cplx den = (1.0 - s0) * std::conj(xi1) - 2.0 * std::conj(xi0);
    const cplx a = std::conj(xi0) - std::conj(xi1);
    const cplx b = 1.0 + xi0 * std::conj(xi1);
    const cplx eta2 = (sq(a) * eta0 - sq(b) * std::conj(eta0) + a * b * w0 * r0) / sq(den);

    LineReflection out;
    out.xi2 = xi2;
    out.eta2 = eta2;
    out.eta1 = incidence_eta(xi0, eta0, r0, xi1);
    out.grazing = std::abs(dot(dir_to_vector(xi1), dir_to_vector(xi0))) < 1e-8;
    return out;
}

// Scalar whose dbar with respect to the incoming parameter appears in the
// Malus identity; equals -(n . d1) r0 in vector terms.
inline double malus_defect(cplx xi0, cplx xi1, double r0) {
    const double num = std::norm(xi0 - xi1) - std::norm(1.0 + xi0 * std::conj(xi1));
    return num * r0 / ((1.0 + std::norm(xi0)) * (1.0 + std::norm(xi1)));
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

struct Frame {
    MobiusRotation rot;
    Mat3 mat;
    int index = 0;
};

inline const std::array<Frame, 4>& frames() {
    static const std::array<Frame, 4> fr = [] {
        std::array<Frame, 4> out;
        const auto& rots = standard_frames();
        for (size_t k = 0; k < rots.size(); ++k)
            out[k] = {rots[k], rotation_matrix(rots[k]), static_cast<int>(k)};
        return out;
    }();
    return fr;
}

inline constexpr double kFrameChartBound = 64.0;

// First frame keeping all given directions comfortably inside the chart.
// With four boundary points at mutual angles >= 90 degrees, any three
// directions admit one.
inline const Frame& pick_frame(const std::vector<Vec3>& dirs,
                               double bound = kFrameChartBound) {
    for (const Frame& f : frames()) {
        bool ok = true;
        for (const Vec3& d : dirs) {
            const double denom = 1.0 + (f.mat * d).z;
            if (!(denom * bound > 2.0)) {
                ok = false;
                break;
            }
        }
        if (ok) return f;
    }
    throw ChartEscape("pick_frame: no admissible frame");
}

struct SurfaceSample {
    cplx xi0, eta0;
    double r0 = 0.0;
};

inline SurfaceSample rotate_sample(const Frame& f, const SurfaceSample& s) {
    const auto [line, r] = rotate_line(f.rot, {s.xi0, s.eta0}, s.r0);
    return {line.xi, line.eta, r};
}

// ---------------------------------------------------------------------------
// Surfaces and waves
// ---------------------------------------------------------------------------

// A reflecting surface: its normal congruence with potential (the twistor
// side) plus the implicit Euclidean description that seeds incidence
// solving.
struct SurfaceDescription {
    std::string name;
    std::function<SurfaceSample(cplx)> at;  // identity-frame sample at parameter nu
    std::function<bool(cplx)> mask;         // true = excluded (singular loci)
    euclid::ImplicitSurface implicit;
    GridSpec domain;
    // Parameter of the surface point with the given outward normal; used to
    // seed incidence solving.  Defaults to the normal's chart coordinate.
    std::function<cplx(const Vec3& point, const Vec3& normal)> seed_param;

    bool masked(cplx nu) const { return mask && mask(nu); }
    EuclidPoint point_at(cplx nu) const {
        const auto s = at(nu);
        return point_from_line(s.xi0, s.eta0, s.r0);
    }
};

// Incoming waves.  The parameter conventions:
//   PlaneWave      nu = transverse position (basis e1, e2 orthogonal to dir)
//   SphericalWave  nu = direction chart of the ray leaving the source
//   GraphWave      nu = xi1, with eta1 = F1(xi1, conj(xi1))
struct PlaneWave {
    Vec3 dir;  // unit propagation direction
    Vec3 e1, e2;

    explicit PlaneWave(const Vec3& d) : dir(normalized(d)) {
        const Vec3 up = std::abs(dir.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
        e1 = normalized(cross(dir, up));
        e2 = cross(dir, e1);
    }
};

struct SphericalWave {
    Vec3 source;
    // With the antipodal chart, nu labels the antipode of the ray direction;
    // this keeps waves aimed near the chart's south pole parameterisable.
    bool antipodal = false;
};

struct GraphWave {
    std::function<cplx(cplx)> F1;
};

// An arbitrary charted incoming congruence nu -> (xi1, eta1).
struct CongruenceWave {
    std::function<OrientedLine(cplx)> map;
};

using WaveSpec = std::variant<GraphWave, PlaneWave, SphericalWave, CongruenceWave>;

// Euclidean propagation direction at nu (chart-free).
inline Vec3 wave_dir(const WaveSpec& wave, cplx nu) {
    if (const auto* p = std::get_if<PlaneWave>(&wave)) return p->dir;
    if (const auto* s = std::get_if<SphericalWave>(&wave))
        return s->antipodal ? -dir_to_vector(nu) : dir_to_vector(nu);
    if (const auto* c = std::get_if<CongruenceWave>(&wave))
        return dir_to_vector(c->map(nu).xi);
    return dir_to_vector(nu);
}

// Geometric ray of the wave at parameter nu, with an origin upstream of the
// scene so the first positive hit is the first physical hit.
inline euclid::Ray wave_ray(const WaveSpec& wave, cplx nu, double upstream) {
    if (const auto* p = std::get_if<PlaneWave>(&wave)) {
        const Vec3 q = nu.real() * p->e1 + nu.imag() * p->e2;
        return {q - upstream * p->dir, p->dir};
    }
    if (const auto* s = std::get_if<SphericalWave>(&wave)) {
        return {s->source, wave_dir(wave, nu)};
    }
    if (const auto* cw = std::get_if<CongruenceWave>(&wave)) {
        const OrientedLine line = cw->map(nu);
        const Vec3 d = dir_to_vector(line.xi);
        return {point_from_line(line, 0.0).vec() - upstream * d, d};
    }
    const auto& g = std::get<GraphWave>(wave);
    const EuclidPoint foot = point_from_line(nu, g.F1(nu), 0.0);
    const Vec3 d = dir_to_vector(nu);
    return {foot.vec() - upstream * d, d};
}

// Chart description of the wave's line at nu, in the given frame.
inline OrientedLine wave_line(const WaveSpec& wave, const Frame& f, cplx nu) {
    if (const auto* p = std::get_if<PlaneWave>(&wave)) {
        const cplx xi1 = chart_from_vector(f.mat * p->dir);
        const Vec3 q = f.mat * (nu.real() * p->e1 + nu.imag() * p->e2);
        return {xi1, line_from_point_dir(EuclidPoint::from_vec(q), xi1)};
    }
    if (const auto* s = std::get_if<SphericalWave>(&wave)) {
        const cplx xi1 = chart_from_vector(f.mat * wave_dir(wave, nu));
        return {xi1, line_from_point_dir(EuclidPoint::from_vec(f.mat * s->source), xi1)};
    }
    if (const auto* cw = std::get_if<CongruenceWave>(&wave))
        return rotate_line(f.rot, cw->map(nu), 0.0).first;
    const auto& g = std::get<GraphWave>(wave);
    return rotate_line(f.rot, {nu, g.F1(nu)}, 0.0).first;
}

// ---------------------------------------------------------------------------
// Incidence solving
// ---------------------------------------------------------------------------

struct IncidenceOptions {
    int max_iterations = 50;
    double tol = 1e-13;          // residual tolerance, relative to max(1, |eta1|)
    double seed_match = 1e-5;    // |found point - oracle hit| acceptance, x scale
    WirtingerOptions jacobian{1e-6, false};
};

// Frame-local data of one reflection event.
struct EventCore {
    cplx xi0, eta0;
    double r0 = 0.0;
    cplx xi1, eta1;
    cplx xi2, eta2;
};

struct ReflectionEvent {
    cplx nu0;          // surface parameter at incidence
    EventCore core;    // chart values in the frame below
    int frame = 0;     // frames()[frame] maps identity chart to the used one
    EuclidPoint point; // incidence point (identity frame)
    bool grazing = false;

    // Identity-frame line coordinates; throws ChartEscape for directions the
    // identity chart cannot represent.
    OrientedLine outgoing() const {
        return rotate_line(frames()[frame].rot.inverse(), {core.xi2, core.eta2}, 0.0).first;
    }
    OrientedLine incoming() const {
        return rotate_line(frames()[frame].rot.inverse(), {core.xi1, core.eta1}, 0.0).first;
    }
    SurfaceSample surface() const {
        const auto [line, r] =
            rotate_line(frames()[frame].rot.inverse(), {core.xi0, core.eta0}, core.r0);
        return {line.xi, line.eta, r};
    }
};

namespace detail {

// One damped Newton solve of incidence_eta(surface(nu), xi1) = eta1 in the
// two real coordinates of nu.
inline bool newton_incidence(const std::function<cplx(cplx)>& residual, cplx& nu,
                             double scale, const IncidenceOptions& opts,
                             double& out_resid) {
    cplx res = residual(nu);
    bool hit_tol = false;
    int polish = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (std::abs(res) <= opts.tol * scale) {
            // Keep polishing to the roundoff floor: downstream finite
            // differences divide whatever error is left here by the FD step.
            hit_tol = true;
            if (++polish > 3) break;
        }
        const auto jp = wirtinger_pair(residual, nu, opts.jacobian);
        const cplx A = jp.d + jp.dbar;              // coefficient of x
        const cplx B = cplx(0, 1) * (jp.d - jp.dbar);  // coefficient of y
        const double det = A.real() * B.imag() - A.imag() * B.real();
        if (std::abs(det) < 1e-300) break;
        const double dx = (-res.real() * B.imag() + res.imag() * B.real()) / det;
        const double dy = (-A.real() * res.imag() + A.imag() * res.real()) / det;
        cplx step(dx, dy);
        double damping = 1.0;
        bool improved = false;
        for (int bs = 0; bs < 10; ++bs) {
            const cplx trial = nu + damping * step;
            cplx trial_res;
            try {
                trial_res = residual(trial);
            } catch (const ChartEscape&) {
                damping *= 0.5;
                continue;
            }
            if (std::abs(trial_res) < std::abs(res)) {
                nu = trial;
                res = trial_res;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if (!improved) break;
    }
    out_resid = std::abs(res);
    return hit_tol || std::abs(res) <= opts.tol * scale;
}

}  // namespace detail

// Solves the incidence relation for the surface parameter nu0 of the point
// where the ray meets the surface, seeded from the Euclidean intersection;
// among multiple roots the one with the smallest positive ray parameter
// (first physical hit) is selected.
inline ReflectionEvent solve_incidence(const euclid::Ray& ray, const SurfaceDescription& S,
                                       const IncidenceOptions& opts = {},
                                       std::optional<cplx> seed_hint = {}) {
    const auto hits = euclid::intersect_ray_surface(ray, S.implicit);
    if (hits.empty()) throw NoIntersection("solve_incidence: ray misses the surface");

    double worst_resid = std::numeric_limits<double>::infinity();
    for (const auto& hit : hits) {
        Vec3 n = S.implicit.gradient(hit.point);
        const Vec3 d2 = euclid::reflect_vector(ray.dir, dot(n, ray.dir) > 0 ? -n : n);
        const Frame& f = pick_frame({ray.dir, n, d2});

        OrientedLine in_line;
        try {
            in_line = {chart_from_vector(f.mat * ray.dir),
                       line_from_point_dir(EuclidPoint::from_vec(f.mat * ray.origin),
                                           chart_from_vector(f.mat * ray.dir))};
        } catch (const ChartEscape&) {
            continue;
        }
        const double scale = std::max(1.0, std::abs(in_line.eta));

        const auto residual = [&](cplx nu) {
            if (S.masked(nu)) throw ChartEscape("masked surface parameter");
            const SurfaceSample s = rotate_sample(f, S.at(nu));
            return incidence_eta(s.xi0, s.eta0, s.r0, in_line.xi) - in_line.eta;
        };

        std::vector<cplx> seeds;
        if (seed_hint) seeds.push_back(*seed_hint);
        if (S.seed_param) {
            try {
                const cplx nu = S.seed_param(hit.point, n);
                if (!S.masked(nu)) seeds.push_back(nu);
            } catch (const ChartEscape&) {
            }
        } else {
            // Graph surfaces: the parameter is the outward normal's chart.
            for (const Vec3& cand : {n, -n}) {
                try {
                    const cplx nu = chart_from_vector(cand);
                    if (!S.masked(nu)) seeds.push_back(nu);
                } catch (const ChartEscape&) {
                }
            }
        }

        for (cplx nu : seeds) {
            double resid = 0.0;
            cplx root = nu;
            bool converged = false;
            try {
                converged = detail::newton_incidence(residual, root, scale, opts, resid);
            } catch (const ChartEscape&) {
                continue;
            }
            worst_resid = std::min(worst_resid, resid);
            if (!converged) continue;
            const EuclidPoint p = S.point_at(root);
            if (norm(p.vec() - hit.point) >
                opts.seed_match * std::max(1.0, S.implicit.scale))
                continue;  // converged to a different root; keep first-hit order

            const SurfaceSample s = rotate_sample(f, S.at(root));
            const auto refl = reflect_line(s.xi0, s.eta0, s.r0, in_line.xi);
            ReflectionEvent ev;
            ev.nu0 = root;
            ev.core = {s.xi0, s.eta0, s.r0, in_line.xi, refl.eta1, refl.xi2,
                       refl.eta2};
            ev.frame = f.index;
            ev.point = p;
            ev.grazing = refl.grazing;
            return ev;
        }
    }
    throw NoConvergence("solve_incidence: Newton did not converge on any hit",
                        worst_resid);
}

// ---------------------------------------------------------------------------
// Congruence reflection
// ---------------------------------------------------------------------------

enum class NodeStatus : uint8_t { Ok = 0, Shadow = 1, Escape = 2 };

struct ReflectedNode {
    NodeStatus status = NodeStatus::Shadow;
    cplx xi2, eta2;    // identity frame (valid when status == Ok)
    ReflectionEvent event;
};

struct ReflectionScene {
    WaveSpec wave;
    SurfaceDescription surface;
    IncidenceOptions options;

    double upstream() const {
        return 10.0 * std::max(1.0, surface.implicit.scale);
    }

    ReflectionEvent event_at(cplx nu, std::optional<cplx> seed = {}) const {
        return solve_incidence(wave_ray(wave, nu, upstream()), surface, options, seed);
    }
};

class ReflectedCongruence {
public:
    ReflectionScene scene;
    GridSpec grid;
    std::vector<ReflectedNode> nodes;

    const ReflectedNode& node(int i, int j) const { return nodes[grid.index(i, j)]; }

    // Identity-frame congruence closure over unshadowed nodes; evaluation at
    // off-grid nu re-solves incidence seeded from the nearest node.  The
    // closure owns copies of everything it needs.
    ParametricCongruence congruence() const {
        struct NodeSeed {
            uint8_t ok = 0;
            cplx nu0;
        };
        auto seeds = std::make_shared<std::vector<NodeSeed>>(nodes.size());
        for (size_t k = 0; k < nodes.size(); ++k)
            (*seeds)[k] = {static_cast<uint8_t>(nodes[k].status == NodeStatus::Ok ? 1 : 0),
                           nodes[k].event.nu0};
        auto scene_copy = std::make_shared<ReflectionScene>(scene);
        const GridSpec g = grid;
        const auto base_mask = grid.mask;

        ParametricCongruence c;
        c.domain = grid;
        c.domain.mask = [seeds, g, base_mask](cplx nu) {
            if (base_mask && base_mask(nu)) return true;
            return (*seeds)[nearest_node(g, nu)].ok == 0;
        };
        c.map = [seeds, g, scene_copy](cplx nu) -> OrientedLine {
            const auto& nd = (*seeds)[nearest_node(g, nu)];
            if (!nd.ok) throw ChartEscape("reflected congruence: no event at node");
            return scene_copy->event_at(nu, nd.nu0).outgoing();
        };
        return c;
    }

    static int nearest_node(const GridSpec& g, cplx nu) {
        const int i = std::clamp(
            static_cast<int>(std::lround((nu.real() - g.u_min) / g.du())), 0, g.nx - 1);
        const int j = std::clamp(
            static_cast<int>(std::lround((nu.imag() - g.v_min) / g.dv())), 0, g.ny - 1);
        return g.index(i, j);
    }
};

// Reflects every ray of the sampled incoming congruence; rays that miss the
// surface are recorded in the shadow mask, outgoing directions that the
// identity chart cannot hold in the escape mask.
inline ReflectedCongruence reflect_congruence(const ReflectionScene& scene,
                                              const GridSpec& grid) {
    ReflectedCongruence out;
    out.scene = scene;
    out.grid = grid;
    out.nodes.assign(grid.size(), {});
    parallel_for(0, grid.size(), [&](int k) {
        ReflectedNode& nd = out.nodes[k];
        const cplx nu = grid.node(k % grid.nx, k / grid.nx);
        if (grid.masked(nu)) return;
        try {
            nd.event = scene.event_at(nu);
            const OrientedLine line = nd.event.outgoing();
            nd.xi2 = line.xi;
            nd.eta2 = line.eta;
            nd.status = NodeStatus::Ok;
        } catch (const NoIntersection&) {
            nd.status = NodeStatus::Shadow;
        } catch (const NoConvergence&) {
            nd.status = NodeStatus::Shadow;
        } catch (const ChartEscape&) {
            nd.status = NodeStatus::Escape;
        }
    });
    return out;
}

// Incidence for a charted incoming line; the ray starts far upstream of the
// foot point so the first positive hit is the first physical one.
inline ReflectionEvent solve_incidence(const OrientedLine& line,
                                       const SurfaceDescription& S,
                                       const IncidenceOptions& opts = {},
                                       std::optional<cplx> seed_hint = {}) {
    const Vec3 d = dir_to_vector(line.xi);
    const Vec3 foot = point_from_line(line, 0.0).vec();
    const double upstream = 10.0 * std::max(1.0, S.implicit.scale) + norm(foot);
    return solve_incidence(euclid::Ray{foot - upstream * d, d}, S, opts, seed_hint);
}

// Reflection of a charted incoming congruence over its own domain grid.
inline ReflectedCongruence reflect_congruence(const ParametricCongruence& incoming,
                                              const SurfaceDescription& S) {
    return reflect_congruence(ReflectionScene{CongruenceWave{incoming.map}, S, {}},
                              incoming.domain);
}

// ---------------------------------------------------------------------------
// Malus identity
// ---------------------------------------------------------------------------

// A frame-consistent event map nu -> EventCore, differentiable in nu.
using ReflectionMapFn = std::function<EventCore(cplx)>;

// Surface-parameterised map: nu is the surface parameter; the incoming ray
// through the surface point comes from a fixed plane-wave direction or a
// point source.
struct PointSourceWave {
    Vec3 source;
};
using EventWave = std::variant<PlaneWave, PointSourceWave>;
using SurfaceSampleFn = std::function<SurfaceSample(cplx)>;

inline ReflectionMapFn surface_param_map(const SurfaceSampleFn& at, const EventWave& wave,
                                         const Frame& f) {
    return [at, wave, f](cplx nu) -> EventCore {
        const SurfaceSample sample = at(nu);
        const EuclidPoint p = point_from_line(sample.xi0, sample.eta0, sample.r0);
        Vec3 d1;
        if (const auto* pw = std::get_if<PlaneWave>(&wave))
            d1 = pw->dir;
        else
            d1 = normalized(p.vec() - std::get<PointSourceWave>(wave).source);
        const SurfaceSample s = rotate_sample(f, sample);
        const cplx xi1 = chart_from_vector(f.mat * d1);
        const auto refl = reflect_line(s.xi0, s.eta0, s.r0, xi1);
        return {s.xi0, s.eta0, s.r0, xi1, refl.eta1, refl.xi2, refl.eta2};
    };
}

// Incidence-parameterised map at a fixed frame, seeded from a reference
// event so finite-difference stencils stay on one solution branch.
inline ReflectionMapFn incidence_param_map(const ReflectionScene& scene, const Frame& f,
                                           cplx seed_nu0) {
    return [scene, f, seed_nu0](cplx nu) -> EventCore {
        const ReflectionEvent ev = scene.event_at(nu, seed_nu0);
        if (ev.frame == f.index) return ev.core;
        // Re-express in the requested frame.
        const MobiusRotation to_f = f.rot;
        const MobiusRotation from_ev = frames()[ev.frame].rot.inverse();
        const auto conv = [&](cplx xi, cplx eta, double r) {
            auto [l1, r1] = rotate_line(from_ev, {xi, eta}, r);
            auto [l2, r2] = rotate_line(to_f, l1, r1);
            return SurfaceSample{l2.xi, l2.eta, r2};
        };
        const auto s0 = conv(ev.core.xi0, ev.core.eta0, ev.core.r0);
        const auto s1 = conv(ev.core.xi1, ev.core.eta1, 0.0);
        const auto s2 = conv(ev.core.xi2, ev.core.eta2, 0.0);
        return {s0.xi0, s0.eta0, s0.r0, s1.xi0, s1.eta0, s2.xi0, s2.eta0};
    };
}

// Incoming propagation direction of an EventWave at a surface point.
inline Vec3 event_wave_dir(const EventWave& wave, const EuclidPoint& p) {
    if (const auto* pw = std::get_if<PlaneWave>(&wave)) return pw->dir;
    return normalized(p.vec() - std::get<PointSourceWave>(wave).source);
}

// One reflection event at surface parameter nu, computed in whichever frame
// keeps the incoming, normal and outgoing directions inside the chart.
inline ReflectionEvent reflect_surface_event(const SurfaceSampleFn& at,
                                             const EventWave& wave, cplx nu) {
    const SurfaceSample sample = at(nu);
    const EuclidPoint p = point_from_line(sample.xi0, sample.eta0, sample.r0);
    const Vec3 d1 = event_wave_dir(wave, p);
    const Vec3 n = dir_to_vector(sample.xi0);
    const Frame& f = pick_frame({d1, n, euclid::reflect_vector(d1, n)});

    const SurfaceSample s = rotate_sample(f, sample);
    const cplx xi1 = chart_from_vector(f.mat * d1);
    const auto refl = reflect_line(s.xi0, s.eta0, s.r0, xi1);

    ReflectionEvent ev;
    ev.nu0 = nu;
    ev.core = {s.xi0, s.eta0, s.r0, xi1, refl.eta1, refl.xi2, refl.eta2};
    ev.frame = f.index;
    ev.point = p;
    ev.grazing = refl.grazing;
    return ev;
}

// Identity-frame outgoing congruence of a surface-parameterised scene; the
// frame is chosen per evaluation, which is legitimate because the identity
// chart value does not depend on the frame the event was computed in.
inline ParametricCongruence surface_outgoing_congruence(const SurfaceSampleFn& at,
                                                        const EventWave& wave,
                                                        const GridSpec& domain) {
    ParametricCongruence c;
    c.domain = domain;
    c.map = [at, wave](cplx nu) { return reflect_surface_event(at, wave, nu).outgoing(); };
    return c;
}

inline ParametricCongruence surface_incoming_congruence(const SurfaceSampleFn& at,
                                                        const EventWave& wave,
                                                        const GridSpec& domain) {
    ParametricCongruence c;
    c.domain = domain;
    c.map = [at, wave](cplx nu) { return reflect_surface_event(at, wave, nu).incoming(); };
    return c;
}

struct MalusOptions {
    WirtingerOptions wirtinger{1e-5, true};
};

// |LHS - RHS| of the identity relating the surface, incident and reflected
// congruences; near zero whether or not the incoming wave is integrable.
inline double malus_residual(const ReflectionMapFn& m, cplx nu,
                             const MalusOptions& opts = {}) {
    // Shared 9-point stencil (centre, +/-h, +/-ih, and half steps).
    const double h = opts.wirtinger.step_scale * std::max(1.0, std::abs(nu));
    const std::array<cplx, 9> pts = {nu,
                                     nu + h,
                                     nu - h,
                                     nu + cplx(0, h),
                                     nu - cplx(0, h),
                                     nu + 0.5 * h,
                                     nu - 0.5 * h,
                                     nu + cplx(0, 0.5 * h),
                                     nu - cplx(0, 0.5 * h)};
    std::array<EventCore, 9> ev;
    for (size_t k = 0; k < pts.size(); ++k) ev[k] = m(pts[k]);

    const auto pair_of = [&](auto&& get) -> WirtingerPair {
        const auto stencil = [&](int ip, int im, int jp, int jm, double hh) {
            const cplx fu = (get(ev[ip]) - get(ev[im])) / (2.0 * hh);
            const cplx fv = (get(ev[jp]) - get(ev[jm])) / (2.0 * hh);
            const cplx ifv = cplx(0, 1) * fv;
            return WirtingerPair{0.5 * (fu - ifv), 0.5 * (fu + ifv)};
        };
        const WirtingerPair coarse = stencil(1, 2, 3, 4, h);
        if (!opts.wirtinger.richardson) return coarse;
        const WirtingerPair fine = stencil(5, 6, 7, 8, 0.5 * h);
        return {(4.0 * fine.d - coarse.d) / 3.0, (4.0 * fine.dbar - coarse.dbar) / 3.0};
    };

    const EventCore& c = ev[0];
    const auto xi2p = pair_of([](const EventCore& e) { return e.xi2; });
    const auto xi1p = pair_of([](const EventCore& e) { return e.xi1; });
    const auto defp = pair_of([](const EventCore& e) {
        return cplx(malus_defect(e.xi0, e.xi1, e.r0), 0.0);
    });

    const double w2 = 1.0 + std::norm(c.xi2);
    const double w1 = 1.0 + std::norm(c.xi1);
    const cplx lhs =
        (c.eta2 * std::conj(xi2p.d) + std::conj(c.eta2) * xi2p.dbar) / (w2 * w2);
    const cplx rhs =
        (c.eta1 * std::conj(xi1p.d) + std::conj(c.eta1) * xi1p.dbar) / (w1 * w1) +
        defp.dbar;
    return std::abs(lhs - rhs);
}

}  // namespace twistor
