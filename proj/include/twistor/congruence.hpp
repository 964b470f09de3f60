#pragma once

// Parametric line congruences nu -> (xi, eta), their integrability residual,
// the potential equation dbar r = 2(eta dbar conj(xi) + conj(eta) dbar xi) /
// (1 + xi conj(xi))^2, and inversion of the dbar operator by path
// integration of the exact 1-form dr over a rectangular grid.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "wirtinger.hpp"

namespace twistor {

struct GridSpec {
    double u_min = -2.0, u_max = 2.0;
    double v_min = -2.0, v_max = 2.0;
    int nx = 128, ny = 128;
    std::function<bool(cplx)> mask;  // true = excluded

    static GridSpec square(double half, int n) {
        GridSpec g;
        g.u_min = -half;
        g.u_max = half;
        g.v_min = -half;
        g.v_max = half;
        g.nx = n;
        g.ny = n;
        return g;
    }

    double du() const { return (u_max - u_min) / (nx - 1); }
    double dv() const { return (v_max - v_min) / (ny - 1); }
    cplx node(int i, int j) const { return {u_min + i * du(), v_min + j * dv()}; }
    int index(int i, int j) const { return j * nx + i; }
    int size() const { return nx * ny; }
    bool masked(cplx nu) const { return mask && mask(nu); }
};

struct CongruenceDerivs {
    cplx d_xi, dbar_xi;    // Wirtinger derivatives of xi
    cplx d_eta, dbar_eta;  // and of eta
};

// deriv_mode is implicit: analytic closures when `derivs` is supplied,
// central finite differences otherwise.
struct ParametricCongruence {
    std::function<OrientedLine(cplx)> map;
    std::function<CongruenceDerivs(cplx)> derivs;  // optional
    GridSpec domain;
};

struct TwistorSurface {
    std::function<cplx(cplx)> F;     // twistor function, eta = F(xi, conj(xi))
    std::function<double(cplx)> r;   // potential function
    GridSpec domain;
};

struct WavefrontSample {
    cplx nu;
    EuclidPoint point;
    double offset = 0.0;  // the additive constant C along rays
};

inline CongruenceDerivs congruence_derivs(const ParametricCongruence& c, cplx nu,
                                          const WirtingerOptions& opts = {}) {
    if (c.derivs) return c.derivs(nu);
    const auto xp = wirtinger_pair([&](cplx n) { return c.map(n).xi; }, nu, opts);
    const auto ep = wirtinger_pair([&](cplx n) { return c.map(n).eta; }, nu, opts);
    return {xp.d, xp.dbar, ep.d, ep.dbar};
}

// Largest |analytic - finite difference| over the sample points; throws when
// the supplied closures disagree with the map.
inline double validate_derivatives(const ParametricCongruence& c,
                                   const std::vector<cplx>& samples, double tol = 1e-6) {
    if (!c.derivs) return 0.0;
    double worst = 0.0;
    for (cplx nu : samples) {
        const auto a = c.derivs(nu);
        const auto xp = wirtinger_pair([&](cplx n) { return c.map(n).xi; }, nu);
        const auto ep = wirtinger_pair([&](cplx n) { return c.map(n).eta; }, nu);
        worst = std::max({worst, std::abs(a.d_xi - xp.d), std::abs(a.dbar_xi - xp.dbar),
                          std::abs(a.d_eta - ep.d), std::abs(a.dbar_eta - ep.dbar)});
    }
    if (worst > tol)
        throw DerivativeMismatch("analytic derivatives disagree with finite differences",
                                 worst);
    return worst;
}

struct IntegrabilityOptions {
    WirtingerOptions outer{2e-4, true};
    WirtingerOptions inner{1e-5, true};
};

// |LHS - RHS| of the integrability condition: d of the dbar-side 1-form
// component minus dbar of the d-side component.  Vanishes exactly when the
// congruence is orthogonal to a family of surfaces.
inline double integrability_residual(const ParametricCongruence& c, cplx nu,
                                     const IntegrabilityOptions& opts = {}) {
    const auto side_dbar = [&](cplx n) {
        const auto line = c.map(n);
        const auto d = congruence_derivs(c, n, opts.inner);
        const double w = 1.0 + std::norm(line.xi);
        return (line.eta * std::conj(d.d_xi) + std::conj(line.eta) * d.dbar_xi) / (w * w);
    };
    const auto side_d = [&](cplx n) {
        const auto line = c.map(n);
        const auto d = congruence_derivs(c, n, opts.inner);
        const double w = 1.0 + std::norm(line.xi);
        return (std::conj(line.eta) * d.d_xi + line.eta * std::conj(d.dbar_xi)) / (w * w);
    };
    const cplx lhs = wirtinger(side_dbar, nu, WirtingerKind::D, opts.outer);
    const cplx rhs = wirtinger(side_d, nu, WirtingerKind::DBar, opts.outer);
    return std::abs(lhs - rhs);
}

// Fixed rotations whose chart boundaries sit at four well-separated
// directions; at least one keeps any three given directions finite.
inline const std::array<MobiusRotation, 4>& standard_frames() {
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    static const std::array<MobiusRotation, 4> frames = {
        MobiusRotation{cplx(1, 0), cplx(0, 0)},
        MobiusRotation{cplx(inv_sqrt2, 0), cplx(inv_sqrt2, 0)},
        MobiusRotation{cplx(inv_sqrt2, 0), cplx(0, inv_sqrt2)},
        MobiusRotation{cplx(inv_sqrt2, 0), cplx(-inv_sqrt2, 0)}};
    return frames;
}

// dbar r of the potential carried by the congruence.  The value is
// invariant under rotations about the origin, so the evaluation is done in
// whichever fixed frame keeps |xi| smallest; this keeps the formula usable
// when the congruence sweeps past the chart boundary.
inline cplx potential_dbar(const std::function<OrientedLine(cplx)>& map, cplx nu,
                           const WirtingerOptions& opts = {}) {
    const OrientedLine at = map(nu);
    int best = 0;
    double best_abs = std::numeric_limits<double>::infinity();
    const auto& frames = standard_frames();
    for (size_t k = 0; k < frames.size(); ++k) {
        try {
            const auto rotated = rotate_line(frames[k], at, 0.0).first;
            const double m = std::abs(rotated.xi);
            if (m < best_abs) {
                best_abs = m;
                best = static_cast<int>(k);
            }
        } catch (const ChartEscape&) {
        }
    }
    const MobiusRotation frame = frames[best];
    const auto framed = [&](cplx n) { return rotate_line(frame, map(n), 0.0).first; };
    const OrientedLine line = framed(nu);
    const auto xp = wirtinger_pair([&](cplx n) { return framed(n).xi; }, nu, opts);
    const double w = 1.0 + std::norm(line.xi);
    return 2.0 * (line.eta * std::conj(xp.d) + std::conj(line.eta) * xp.dbar) / (w * w);
}

// |dbar r - RHS of the potential equation| for congruence-with-potential
// closures.
inline double potential_residual(const std::function<OrientedLine(cplx)>& map,
                                 const std::function<double(cplx)>& r, cplx nu,
                                 const WirtingerOptions& opts = {}) {
    const cplx dbar_r =
        wirtinger([&](cplx n) { return cplx(r(n), 0.0); }, nu, WirtingerKind::DBar, opts);
    return std::abs(dbar_r - potential_dbar(map, nu, opts));
}

// Graph-form specialisation: nu = xi, eta = F(xi, conj(xi)), where the
// right-hand side reduces to 2F/(1+xi conj(xi))^2.
inline double potential_residual(const TwistorSurface& S, cplx xi,
                                 const WirtingerOptions& opts = {}) {
    const cplx dbar_r =
        wirtinger([&](cplx n) { return cplx(S.r(n), 0.0); }, xi, WirtingerKind::DBar, opts);
    const double w = 1.0 + std::norm(xi);
    return std::abs(dbar_r - 2.0 * S.F(xi) / (w * w));
}

struct SolvePotentialOptions {
    double integrability_tol = 1e-5;  // precondition on sampled nodes
    double path_tol = 1e-4;           // row-first vs column-first mismatch
    double curl_tol = 1e-6;           // per-cell loop integral of dr
    int integrability_samples = 49;
    WirtingerOptions wirtinger{};
    bool check_integrability = true;
};

struct PotentialField {
    GridSpec grid;
    std::vector<double> r;
    std::vector<uint8_t> valid;
    double path_discrepancy = 0.0;

    double at(int i, int j) const { return r[grid.index(i, j)]; }
    bool ok(int i, int j) const { return valid[grid.index(i, j)] != 0; }
};

namespace detail {

// Integral of the real 1-form dr along the straight segment [a, b]; dr has
// components r_u = 2 Re(dbar r), r_v = 2 Im(dbar r).  3-point
// Gauss-Legendre with adaptive bisection: near the rim of a reflected
// congruence (grazing incidence) dr can have an integrable square-root
// singularity.
inline double dr_gl3(const std::function<OrientedLine(cplx)>& map, cplx a, cplx b,
                     const WirtingerOptions& opts) {
    static const double x = std::sqrt(3.0 / 5.0);
    static const double pts[3] = {-x, 0.0, x};
    static const double wts[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const cplx mid = 0.5 * (a + b);
    const cplx half = 0.5 * (b - a);
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
        const cplx g = potential_dbar(map, mid + pts[k] * half, opts);
        acc += wts[k] * 2.0 * (g.real() * half.real() + g.imag() * half.imag());
    }
    return acc;
}

inline double dr_segment(const std::function<OrientedLine(cplx)>& map, cplx a, cplx b,
                         const WirtingerOptions& opts, double coarse_hint = 0.0,
                         int depth = 0) {
    const double coarse = depth == 0 ? dr_gl3(map, a, b, opts) : coarse_hint;
    const cplx mid = 0.5 * (a + b);
    const double left = dr_gl3(map, a, mid, opts);
    const double right = dr_gl3(map, mid, b, opts);
    const double fine = left + right;
    const double err = std::abs(fine - coarse);
    if (err < 1e-11 + 1e-9 * std::abs(fine)) return fine;
    if (depth >= 10) {
        // No convergence under bisection: dr is not merely singular but
        // discontinuous across this edge (a first-hit branch jump).  The
        // edge cannot carry the integration.
        if (err > 1e-6 * std::max(1.0, std::abs(fine)))
            return std::numeric_limits<double>::quiet_NaN();
        return fine;
    }
    return dr_segment(map, a, mid, opts, left, depth + 1) +
           dr_segment(map, mid, b, opts, right, depth + 1);
}

struct PotentialPass {
    std::vector<double> r;
    std::vector<uint8_t> reached;
};

// One sweep: integrate along the base line first, then perpendicular lines,
// then flood-fill whatever the mask topology disconnected from those paths.
inline PotentialPass potential_pass(const GridSpec& grid, const std::vector<uint8_t>& valid,
                                    const std::vector<double>& edge_u,
                                    const std::vector<double>& edge_v, int bi, int bj,
                                    bool row_first) {
    const int nx = grid.nx, ny = grid.ny;
    PotentialPass pass;
    pass.r.assign(grid.size(), 0.0);
    pass.reached.assign(grid.size(), 0);

    const auto idx = [&](int i, int j) { return grid.index(i, j); };
    const auto step_u = [&](int i, int j, int dir) {  // from (i,j) to (i+dir,j)
        const int e = (dir > 0 ? i : i - 1) + j * (nx - 1);
        return dir > 0 ? edge_u[e] : -edge_u[e];
    };
    const auto step_v = [&](int i, int j, int dir) {
        const int e = i + (dir > 0 ? j : j - 1) * nx;
        return dir > 0 ? edge_v[e] : -edge_v[e];
    };

    pass.reached[idx(bi, bj)] = 1;

    const auto walk_row = [&](int j) {
        for (int i = bi + 1; i < nx; ++i) {
            const double step = step_u(i - 1, j, +1);
            if (!valid[idx(i, j)] || !pass.reached[idx(i - 1, j)] || std::isnan(step))
                break;
            pass.r[idx(i, j)] = pass.r[idx(i - 1, j)] + step;
            pass.reached[idx(i, j)] = 1;
        }
        for (int i = bi - 1; i >= 0; --i) {
            const double step = step_u(i + 1, j, -1);
            if (!valid[idx(i, j)] || !pass.reached[idx(i + 1, j)] || std::isnan(step))
                break;
            pass.r[idx(i, j)] = pass.r[idx(i + 1, j)] + step;
            pass.reached[idx(i, j)] = 1;
        }
    };
    const auto walk_col = [&](int i) {
        for (int j = bj + 1; j < ny; ++j) {
            const double step = step_v(i, j - 1, +1);
            if (!valid[idx(i, j)] || !pass.reached[idx(i, j - 1)] || std::isnan(step))
                break;
            pass.r[idx(i, j)] = pass.r[idx(i, j - 1)] + step;
            pass.reached[idx(i, j)] = 1;
        }
        for (int j = bj - 1; j >= 0; --j) {
            const double step = step_v(i, j + 1, -1);
            if (!valid[idx(i, j)] || !pass.reached[idx(i, j + 1)] || std::isnan(step))
                break;
            pass.r[idx(i, j)] = pass.r[idx(i, j + 1)] + step;
            pass.reached[idx(i, j)] = 1;
        }
    };

    if (row_first) {
        walk_row(bj);
        for (int i = 0; i < nx; ++i)
            if (pass.reached[idx(i, bj)]) walk_col(i);
    } else {
        walk_col(bi);
        for (int j = 0; j < ny; ++j)
            if (pass.reached[idx(bi, j)]) walk_row(j);
    }

    // Flood fill for valid nodes cut off from the axis-aligned paths by the
    // mask; path independence makes the route immaterial.
    std::deque<int> queue;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (pass.reached[idx(i, j)]) queue.push_back(idx(i, j));
    while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        const int i = cur % nx, j = cur / nx;
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int ni = i + di[k], nj = j + dj[k];
            if (ni < 0 || ni >= nx || nj < 0 || nj >= ny) continue;
            const int nidx = idx(ni, nj);
            if (!valid[nidx] || pass.reached[nidx]) continue;
            const double step = dj[k] == 0 ? step_u(i, j, di[k]) : step_v(i, j, dj[k]);
            if (std::isnan(step)) continue;
            pass.r[nidx] = pass.r[cur] + step;
            pass.reached[nidx] = 1;
            queue.push_back(nidx);
        }
    }
    return pass;
}

}  // namespace detail

// Reconstructs r over the grid by integrating dr from base_nu, with
// r(base_nu) = r_base.  Row-first and column-first integration orders are
// both run; their largest disagreement is reported and enforced.
inline PotentialField solve_potential(const ParametricCongruence& c, cplx base_nu,
                                      double r_base, const SolvePotentialOptions& opts = {}) {
    const GridSpec& grid = c.domain;
    const int nx = grid.nx, ny = grid.ny;
    if (nx < 2 || ny < 2) throw InvalidParams("solve_potential: grid too small");

    std::vector<uint8_t> valid(grid.size(), 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const cplx nu = grid.node(i, j);
            if (grid.masked(nu)) continue;
            try {
                (void)c.map(nu);
                valid[grid.index(i, j)] = 1;
            } catch (const ChartEscape&) {
            }
        }

    // Base node: nearest valid grid node to base_nu.
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!valid[grid.index(i, j)]) continue;
            const double d = std::abs(grid.node(i, j) - base_nu);
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    if (bi < 0) throw InvalidParams("solve_potential: no valid grid nodes");

    if (opts.check_integrability) {
        // Sample interior nodes only: at the rim of the valid region the
        // congruence can have unbounded parameter derivatives (grazing
        // events), where finite differences say nothing about
        // integrability.  Nodes with huge |xi| are skipped as well; the
        // residual is evaluated in a fixed chart and loses meaning there.
        const auto interior = [&](int i, int j) {
            if (i <= 0 || i + 1 >= nx || j <= 0 || j + 1 >= ny) return false;
            return valid[grid.index(i - 1, j)] && valid[grid.index(i + 1, j)] &&
                   valid[grid.index(i, j - 1)] && valid[grid.index(i, j + 1)];
        };
        std::vector<double> residuals;
        const int want = std::max(1, opts.integrability_samples);
        const int stride = std::max(1, grid.size() / want);
        for (int k = 0; k < grid.size(); k += stride) {
            if (!valid[k]) continue;
            const int i = k % nx, j = k / nx;
            if (!interior(i, j)) continue;
            const cplx nu = grid.node(i, j);
            if (std::abs(c.map(nu).xi) > 1e3) continue;
            residuals.push_back(integrability_residual(c, nu));
        }
        // Gate on an upper quantile: isolated samples sitting on a first-hit
        // branch jump report a derivative blow-up, not a failure of
        // integrability, while a genuinely non-integrable congruence fails
        // almost everywhere.
        if (!residuals.empty()) {
            std::sort(residuals.begin(), residuals.end());
            const double q90 = residuals[(residuals.size() - 1) * 9 / 10];
            if (q90 > opts.integrability_tol)
                throw NotIntegrable("solve_potential: integrability residual " +
                                    std::to_string(q90));
        }
    }

    // Edge integrals (independent, so trivially parallelisable; kept serial
    // here because grids are modest).
    // Edge integrals.  A quadrature point can fall just outside the region
    // where the congruence exists (rim edges); such edges are dropped and
    // the affected nodes reached along other paths.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> edge_u((nx - 1) * ny, nan), edge_v(nx * (ny - 1), nan);
    const auto edge_integral = [&](cplx a, cplx b) {
        try {
            return detail::dr_segment(c.map, a, b, opts.wirtinger);
        } catch (const std::exception&) {
            return nan;
        }
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i)
            if (valid[grid.index(i, j)] && valid[grid.index(i + 1, j)])
                edge_u[i + j * (nx - 1)] =
                    edge_integral(grid.node(i, j), grid.node(i + 1, j));
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (valid[grid.index(i, j)] && valid[grid.index(i, j + 1)])
                edge_v[i + j * nx] = edge_integral(grid.node(i, j), grid.node(i, j + 1));

    // Discrete exactness: the loop integral of dr around each grid cell
    // must vanish.  A cell containing a branch point of a first-hit
    // congruence carries the jump height instead; its edges cannot take
    // part in the integration.
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const double e_bottom = edge_u[i + j * (nx - 1)];
            const double e_top = edge_u[i + (j + 1) * (nx - 1)];
            const double e_left = edge_v[i + j * nx];
            const double e_right = edge_v[(i + 1) + j * nx];
            const double loop = e_bottom + e_right - e_top - e_left;
            if (std::isnan(loop) || std::abs(loop) <= opts.curl_tol) continue;
            edge_u[i + j * (nx - 1)] = nan;
            edge_u[i + (j + 1) * (nx - 1)] = nan;
            edge_v[i + j * nx] = nan;
            edge_v[(i + 1) + j * nx] = nan;
        }

    const auto rows = detail::potential_pass(grid, valid, edge_u, edge_v, bi, bj, true);
    const auto cols = detail::potential_pass(grid, valid, edge_u, edge_v, bi, bj, false);

    PotentialField field;
    field.grid = grid;
    field.r.assign(grid.size(), nan);
    field.valid.assign(grid.size(), 0);
    double disc = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        if (rows.reached[k] && cols.reached[k])
            disc = std::max(disc, std::abs(rows.r[k] - cols.r[k]));
        if (rows.reached[k]) {
            field.r[k] = rows.r[k] + r_base;
            field.valid[k] = 1;
        } else if (cols.reached[k]) {
            field.r[k] = cols.r[k] + r_base;
            field.valid[k] = 1;
        }
    }
    field.path_discrepancy = disc;
    if (disc > opts.path_tol)
        throw PathMismatch("solve_potential: integration order mismatch " +
                               std::to_string(disc),
                           disc);
    return field;
}

// Wavefront reconstruction: one sample per valid lattice node, inserting
// xi, eta and r + C into the point map.
inline std::vector<WavefrontSample> wavefront_points(const ParametricCongruence& c,
                                                     const PotentialField& field, double C) {
    std::vector<WavefrontSample> out;
    out.reserve(field.grid.size());
    for (int j = 0; j < field.grid.ny; ++j)
        for (int i = 0; i < field.grid.nx; ++i) {
            if (!field.ok(i, j)) continue;
            const cplx nu = field.grid.node(i, j);
            const OrientedLine line = c.map(nu);
            out.push_back({nu, point_from_line(line, field.at(i, j) + C), C});
        }
    return out;
}

inline std::vector<WavefrontSample> wavefront_points(const ParametricCongruence& c,
                                                     const std::function<double(cplx)>& r,
                                                     double C, const GridSpec& grid) {
    std::vector<WavefrontSample> out;
    out.reserve(grid.size());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const cplx nu = grid.node(i, j);
            if (grid.masked(nu)) continue;
            try {
                const OrientedLine line = c.map(nu);
                out.push_back({nu, point_from_line(line, r(nu) + C), C});
            } catch (const ChartEscape&) {
            }
        }
    return out;
}

}  // namespace twistor
