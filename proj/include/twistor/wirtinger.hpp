#pragma once

// Wirtinger derivatives of smooth complex maps by central finite
// differences on nu = u + i*v:
//   d    f = (f_u - i f_v) / 2      dbar f = (f_u + i f_v) / 2
// with optional one-level Richardson extrapolation.

#include <cmath>
#include <complex>

#include "core.hpp"

namespace twistor {

enum class WirtingerKind { D, DBar };

struct WirtingerOptions {
    double step_scale = 1e-5;  // h = step_scale * max(1, |nu|)
    bool richardson = true;
};

struct WirtingerPair {
    cplx d;     // d/d nu
    cplx dbar;  // d/d conj(nu)
};

namespace detail {

template <typename F>
WirtingerPair wirtinger_stencil(F&& f, cplx nu, double h) {
    const cplx fu = (f(nu + h) - f(nu - h)) / (2.0 * h);
    const cplx fv = (f(nu + cplx(0.0, h)) - f(nu - cplx(0.0, h))) / (2.0 * h);
    const cplx ifv = cplx(0.0, 1.0) * fv;
    return {0.5 * (fu - ifv), 0.5 * (fu + ifv)};
}

}  // namespace detail

template <typename F>
WirtingerPair wirtinger_pair(F&& f, cplx nu, const WirtingerOptions& opts = {}) {
    const double h = opts.step_scale * std::max(1.0, std::abs(nu));
    WirtingerPair coarse = detail::wirtinger_stencil(f, nu, h);
    if (!opts.richardson) return coarse;
    WirtingerPair fine = detail::wirtinger_stencil(f, nu, 0.5 * h);
    return {(4.0 * fine.d - coarse.d) / 3.0, (4.0 * fine.dbar - coarse.dbar) / 3.0};
}

template <typename F>
cplx wirtinger(F&& f, cplx nu, WirtingerKind which, const WirtingerOptions& opts = {}) {
    const WirtingerPair p = wirtinger_pair(f, nu, opts);
    return which == WirtingerKind::D ? p.d : p.dbar;
}

}  // namespace twistor
