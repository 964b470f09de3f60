#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <twistor/closed_forms.hpp>
#include <twistor/congruence.hpp>
#include <twistor/wirtinger.hpp>

using namespace twistor;

namespace {

ParametricCongruence spherical_congruence() {
    ParametricCongruence c;
    c.map = [](cplx nu) { return OrientedLine{nu, 0.0}; };
    c.domain = GridSpec::square(1.5, 17);
    return c;
}

// The non-integrable probe xi = nu, eta = i nu conj(nu).  Direct Wirtinger
// algebra on the integrability condition gives
//   |LHS - RHS| = 2 |Re nu| |1 - |nu|^2| / (1 + |nu|^2)^3,
// which vanishes on the unit circle and the imaginary axis but not
// elsewhere.
ParametricCongruence probe_congruence() {
    ParametricCongruence c;
    c.map = [](cplx nu) { return OrientedLine{nu, cplx(0, 1) * nu * std::conj(nu)}; };
    c.domain = GridSpec::square(1.5, 17);
    return c;
}

double probe_residual_exact(cplx nu) {
    const double s = std::norm(nu);
    return 2.0 * std::abs(nu.real()) * std::abs(1.0 - s) / std::pow(1.0 + s, 3);
}

}  // namespace

TEST_CASE("wirtinger derivatives") {
    const WirtingerOptions opts;
    SECTION("holomorphic and antiholomorphic coordinates") {
        const auto id = [](cplx nu) { return nu; };
        const auto conj = [](cplx nu) { return std::conj(nu); };
        const cplx nu(0.7, -0.3);
        CHECK(std::abs(wirtinger(id, nu, WirtingerKind::D, opts) - 1.0) < 1e-10);
        CHECK(std::abs(wirtinger(id, nu, WirtingerKind::DBar, opts)) < 1e-10);
        CHECK(std::abs(wirtinger(conj, nu, WirtingerKind::D, opts)) < 1e-10);
        CHECK(std::abs(wirtinger(conj, nu, WirtingerKind::DBar, opts) - 1.0) < 1e-10);
    }
    SECTION("modulus squared") {
        const auto f = [](cplx nu) { return nu * std::conj(nu); };
        const auto p = wirtinger_pair(f, cplx(2.0, 0.0), opts);
        CHECK(std::abs(p.d - 2.0) < 1e-9);
        CHECK(std::abs(p.dbar - 2.0) < 1e-9);
    }
    SECTION("polynomial accuracy with Richardson") {
        // f = nu^3 conj(nu)^2: d f = 3 nu^2 conj(nu)^2, dbar f = 2 nu^3 conj(nu)
        const auto f = [](cplx nu) { return nu * nu * nu * std::conj(nu) * std::conj(nu); };
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> d(-1.5, 1.5);
        for (int k = 0; k < 100; ++k) {
            const cplx nu(d(rng), d(rng));
            const auto p = wirtinger_pair(f, nu, opts);
            const cplx cd = 3.0 * nu * nu * std::conj(nu) * std::conj(nu);
            const cplx cdb = 2.0 * nu * nu * nu * std::conj(nu);
            CHECK(std::abs(p.d - cd) < 1e-8);
            CHECK(std::abs(p.dbar - cdb) < 1e-8);
        }
    }
}

TEST_CASE("integrability residual") {
    SECTION("spherical congruence") {
        const auto c = spherical_congruence();
        CHECK(integrability_residual(c, cplx(0.4, 0.3)) < 1e-8);
        CHECK(integrability_residual(c, cplx(-1.0, 0.7)) < 1e-8);
    }
    SECTION("graph congruence of the unit sphere") {
        ParametricCongruence c;
        c.map = [](cplx nu) { return OrientedLine{nu, cplx(0, 0)}; };
        c.domain = GridSpec::square(1.5, 17);
        CHECK(integrability_residual(c, cplx(0.8, -0.2)) < 1e-8);
    }
    SECTION("non-integrable probe") {
        const auto c = probe_congruence();
        // Nonzero away from the degenerate loci...
        CHECK(integrability_residual(c, cplx(0.5, 0.0)) > 1e-3);
        CHECK(integrability_residual(c, cplx(1.5, 0.0)) > 1e-3);
        // ...and matching the closed-form residual everywhere, including the
        // accidental zero on the unit circle at nu = 1.
        for (const cplx nu : {cplx(0.5, 0.0), cplx(1.5, 0.0), cplx(1.0, 0.0),
                              cplx(0.8, 0.4), cplx(-0.6, 1.1)}) {
            CHECK(std::abs(integrability_residual(c, nu) - probe_residual_exact(nu)) <
                  1e-5);
        }
    }
}

TEST_CASE("potential residual") {
    SECTION("unit sphere") {
        TwistorSurface S{[](cplx) { return cplx(0, 0); }, [](cplx) { return 1.0; },
                         GridSpec::square(2.0, 9)};
        CHECK(potential_residual(S, cplx(0.5, -0.8)) < 1e-12);
    }
    SECTION("torus") {
        const auto torus = gallery_torus(2.0, 1.0);
        const auto S = torus.twistor_surface();
        for (const cplx xi : {cplx(0.5, 0.0), cplx(0.0, 1.4), cplx(-0.7, 0.6)})
            CHECK(potential_residual(S, xi) < 1e-6);
    }
    SECTION("reflected sphere wave") {
        TwistorSurface S{
            [](cplx xi) { return -0.5 * xi * std::sqrt(1.0 + std::norm(xi)); },
            [](cplx xi) { return 2.0 / std::sqrt(1.0 + std::norm(xi)) + 0.75; },
            GridSpec::square(2.0, 9)};
        for (const cplx xi : {cplx(0.3, 0.3), cplx(-1.2, 0.4), cplx(0.0, 1.7)})
            CHECK(potential_residual(S, xi) < 1e-6);
    }
}

TEST_CASE("analytic derivative closures are validated") {
    ParametricCongruence c = spherical_congruence();
    c.derivs = [](cplx) { return CongruenceDerivs{1.0, 0.0, 0.0, 0.0}; };
    CHECK(validate_derivatives(c, {cplx(0.3, 0.1), cplx(-0.5, 0.9)}) < 1e-8);
    c.derivs = [](cplx) { return CongruenceDerivs{1.0, 0.1, 0.0, 0.0}; };
    CHECK_THROWS_AS(validate_derivatives(c, {cplx(0.3, 0.1)}), DerivativeMismatch);
}

TEST_CASE("potential solver") {
    SECTION("spherical congruence has constant potential") {
        const auto c = spherical_congruence();
        const auto field = solve_potential(c, cplx(0, 0), 1.0);
        for (int j = 0; j < field.grid.ny; ++j)
            for (int i = 0; i < field.grid.nx; ++i)
                CHECK(std::abs(field.at(i, j) - 1.0) < 1e-12);
        CHECK(field.path_discrepancy < 1e-12);
    }
    SECTION("additive in the base value") {
        ParametricCongruence c;
        const auto ref = reference_reflected("sphere-plane-axis");
        c.map = [&](cplx nu) { return OrientedLine{nu, ref.eta2(nu)}; };
        c.domain = GridSpec::square(1.0, 9);
        const auto f0 = solve_potential(c, cplx(0, 0), 0.0);
        const auto f1 = solve_potential(c, cplx(0, 0), 0.5);
        for (int k = 0; k < f0.grid.size(); ++k)
            CHECK(std::abs((f1.r[k] - f0.r[k]) - 0.5) < 1e-12);
    }
    SECTION("recovers the reflected sphere potential") {
        ParametricCongruence c;
        const auto ref = reference_reflected("sphere-plane-axis");
        c.map = [&](cplx nu) { return OrientedLine{nu, ref.eta2(nu)}; };
        c.domain = GridSpec::square(1.5, 33);
        const auto field = solve_potential(c, cplx(0, 0), ref.r2(cplx(0, 0)));
        double worst = 0.0;
        for (int j = 0; j < field.grid.ny; ++j)
            for (int i = 0; i < field.grid.nx; ++i)
                worst = std::max(worst,
                                 std::abs(field.at(i, j) - ref.r2(field.grid.node(i, j))));
        CHECK(worst < 1e-5);
    }
    SECTION("recovers the reflected torus potential on the masked annulus") {
        ParametricCongruence c;
        const auto ref = reference_reflected("torus-plane-axis");
        c.map = [&](cplx nu) { return OrientedLine{nu, ref.eta2(nu)}; };
        c.domain = GridSpec::square(2.0, 41);
        c.domain.mask = [](cplx nu) {
            const double m = std::abs(nu);
            return m < 0.25 || m > 1.9;
        };
        const auto field = solve_potential(c, cplx(1.0, 0.0), ref.r2(cplx(1.0, 0.0)));
        double worst = 0.0;
        int nodes = 0;
        for (int j = 0; j < field.grid.ny; ++j)
            for (int i = 0; i < field.grid.nx; ++i) {
                if (!field.ok(i, j)) continue;
                worst = std::max(worst,
                                 std::abs(field.at(i, j) - ref.r2(field.grid.node(i, j))));
                ++nodes;
            }
        CHECK(nodes > 500);
        CHECK(worst < 1e-4);
    }
    SECTION("rejects a non-integrable congruence") {
        CHECK_THROWS_AS(solve_potential(probe_congruence(), cplx(0.5, 0.0), 0.0),
                        NotIntegrable);
    }
}

TEST_CASE("wavefront reconstruction") {
    SECTION("spherical congruence at offset 1 lies on the unit sphere") {
        const auto c = spherical_congruence();
        ParametricCongruence cc = c;
        const auto field = solve_potential(cc, cplx(0, 0), 0.0);
        for (const auto& sample : wavefront_points(cc, field, 1.0))
            CHECK(std::abs(norm(sample.point.vec()) - 1.0) < 1e-10);
    }
    SECTION("plane-wave congruence gives flat wavefronts") {
        ParametricCongruence c;
        c.map = [](cplx nu) { return OrientedLine{cplx(0, 0), 0.5 * std::conj(nu)}; };
        c.domain = GridSpec::square(2.0, 9);
        const double c0 = 0.8;
        for (const auto& sample :
             wavefront_points(c, [](cplx) { return 0.0; }, c0, c.domain))
            CHECK(std::abs(sample.point.t - c0) < 1e-12);
    }
    SECTION("wavefronts are orthogonal to the rays") {
        ParametricCongruence c;
        const auto ref = reference_reflected("sphere-plane-axis");
        c.map = [&](cplx nu) { return OrientedLine{nu, ref.eta2(nu)}; };
        c.domain = GridSpec::square(1.0, 9);
        const double h = 1e-5;
        for (const cplx nu : {cplx(0.3, 0.2), cplx(-0.6, 0.1), cplx(0.1, -0.7)}) {
            const auto at = [&](cplx n) {
                return point_from_line(c.map(n), ref.r2(n) + 2.0).vec();
            };
            const Vec3 tu = (at(nu + h) - at(nu - h)) / (2 * h);
            const Vec3 tv = (at(nu + cplx(0, h)) - at(nu - cplx(0, h))) / (2 * h);
            const Vec3 d = dir_to_vector(nu);
            CHECK(std::abs(dot(tu, d)) / norm(tu) < 1e-4);
            CHECK(std::abs(dot(tv, d)) / norm(tv) < 1e-4);
        }
    }
}
