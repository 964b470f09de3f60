#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <twistor/closed_forms.hpp>
#include <twistor/reflection.hpp>

using namespace twistor;

namespace {

std::mt19937_64 rng(31337);

cplx random_cplx(double bound) {
    std::uniform_real_distribution<double> d(-bound, bound);
    return {d(rng), d(rng)};
}

}  // namespace

TEST_CASE("reflection through a point of the direction sphere") {
    for (int k = 0; k < 100; ++k) {
        const cplx xi0 = random_cplx(2.0);
        CHECK(std::abs(reflect_through_point(xi0, xi0) - xi0) < 1e-12);
        const cplx xi = random_cplx(2.0);
        try {
            CHECK(std::abs(reflect_through_point(xi0, reflect_through_point(xi0, xi)) - xi) <
                  1e-12);
        } catch (const ChartEscape&) {
        }
    }
    for (int k = 0; k < 20; ++k) {
        const cplx xi = random_cplx(2.0);
        CHECK(std::abs(reflect_through_point(0.0, xi) + xi) < 1e-14);
    }
}

TEST_CASE("reflection law on directions") {
    SECTION("plane mirror: xi2 = 1/conj(xi1)") {
        for (int k = 0; k < 50; ++k) {
            const cplx xi1 = random_cplx(2.0) + cplx(0.4, 0.0);
            CHECK(std::abs(reflect_direction(0.0, xi1) - 1.0 / std::conj(xi1)) < 1e-13);
        }
    }
    SECTION("head-on retroreflection") {
        for (int k = 0; k < 50; ++k) {
            const cplx xi0 = random_cplx(2.0) + cplx(0.3, 0.0);
            const cplx xi1 = -1.0 / std::conj(xi0);
            CHECK(std::abs(reflect_direction(xi0, xi1) - xi0) < 1e-12);
        }
    }
    SECTION("grazing incidence unchanged") {
        CHECK(std::abs(reflect_direction(0.0, cplx(1, 0)) - cplx(1, 0)) < 1e-14);
    }
    SECTION("chart escape when the outgoing ray is the south pole") {
        CHECK_THROWS_AS(reflect_direction(0.0, 0.0), ChartEscape);
    }
    SECTION("coincides with reflecting the antipode through the normal") {
        for (int k = 0; k < 100; ++k) {
            const cplx xi0 = random_cplx(1.5);
            const cplx xi1 = random_cplx(1.5) + cplx(0.2, 0.2);
            try {
                CHECK(std::abs(reflect_direction(xi0, xi1) -
                               reflect_through_point(xi0, antipode(xi1))) < 1e-11);
            } catch (const ChartEscape&) {
            }
        }
    }
}

TEST_CASE("incidence relation") {
    SECTION("same line when xi_i = xi0") {
        for (int k = 0; k < 50; ++k) {
            const cplx xi0 = random_cplx(2.0), eta0 = random_cplx(2.0);
            CHECK(std::abs(incidence_eta(xi0, eta0, 0.7, xi0) - eta0) < 1e-12);
        }
    }
    SECTION("plane mirror closed form") {
        for (int k = 0; k < 50; ++k) {
            const cplx eta0 = random_cplx(2.0), xi = random_cplx(2.0);
            CHECK(std::abs(incidence_eta(0.0, eta0, 0.0, xi) -
                           (eta0 - xi * xi * std::conj(eta0))) < 1e-13);
        }
    }
    SECTION("matches the point composition") {
        for (int k = 0; k < 300; ++k) {
            const cplx xi0 = random_cplx(2.0), eta0 = random_cplx(2.0);
            const cplx xi = random_cplx(2.0);
            std::uniform_real_distribution<double> d(-2.0, 2.0);
            const double r0 = d(rng);
            const EuclidPoint p = point_from_line(xi0, eta0, r0);
            CHECK(std::abs(incidence_eta(xi0, eta0, r0, xi) - line_from_point_dir(p, xi)) <
                  1e-12);
        }
    }
}

TEST_CASE("single-event line reflection") {
    SECTION("plane mirror") {
        for (int k = 0; k < 50; ++k) {
            const cplx eta0 = random_cplx(2.0);
            const cplx xi1 = random_cplx(2.0) + cplx(0.4, 0.1);
            const auto refl = reflect_line(0.0, eta0, 0.0, xi1);
            CHECK(std::abs(refl.xi2 - 1.0 / std::conj(xi1)) < 1e-12);
            CHECK(std::abs(refl.eta2 -
                           (eta0 - std::conj(eta0) / sq(std::conj(xi1)))) < 1e-12);
        }
    }
    SECTION("unit sphere head-on") {
        const cplx xi0(0.6, -0.3);
        const auto refl = reflect_line(xi0, 0.0, 1.0, -1.0 / std::conj(xi0));
        CHECK(std::abs(refl.xi2 - xi0) < 1e-12);
        CHECK(std::abs(refl.eta2) < 1e-12);
    }
    SECTION("outgoing fibre equals the incidence relation at xi2") {
        for (int k = 0; k < 300; ++k) {
            const cplx xi0 = random_cplx(1.5), eta0 = random_cplx(1.5);
            const cplx xi1 = random_cplx(1.5);
            std::uniform_real_distribution<double> d(-2.0, 2.0);
            const double r0 = d(rng);
            try {
                const auto refl = reflect_line(xi0, eta0, r0, xi1);
                if (std::abs(refl.xi2) > 1e3) continue;
                CHECK(std::abs(refl.eta2 - incidence_eta(xi0, eta0, r0, refl.xi2)) < 1e-10);
            } catch (const ChartEscape&) {
            }
        }
    }
    SECTION("reflection is an involution on reversed rays") {
        for (int k = 0; k < 200; ++k) {
            const cplx xi0 = random_cplx(1.5), eta0 = random_cplx(1.5);
            const cplx xi1 = random_cplx(1.5);
            std::uniform_real_distribution<double> d(-2.0, 2.0);
            const double r0 = d(rng);
            try {
                const auto refl = reflect_line(xi0, eta0, r0, xi1);
                if (std::abs(refl.xi2) > 1e2 || std::abs(refl.xi2) < 1e-2) continue;
                const OrientedLine back = reverse_line({refl.xi2, refl.eta2});
                const auto second = reflect_line(xi0, eta0, r0, back.xi);
                const OrientedLine expected = reverse_line({xi1, refl.eta1});
                CHECK(std::abs(second.xi2 - expected.xi) < 1e-10);
                CHECK(std::abs(second.eta2 - expected.eta) < 1e-10);
            } catch (const ChartEscape&) {
            }
        }
    }
    SECTION("grazing events are flagged and finite") {
        const auto refl = reflect_line(0.0, cplx(0.3, 0.1), 0.4, cplx(1.0, 0.0));
        CHECK(refl.grazing);
        CHECK(std::isfinite(refl.xi2.real()));
        CHECK(std::isfinite(refl.eta2.real()));
        const auto off = reflect_line(0.0, cplx(0.3, 0.1), 0.4, cplx(1.0, 0.5));
        CHECK_FALSE(off.grazing);
    }
}

TEST_CASE("incidence solving") {
    SECTION("vertical ray onto the unit sphere") {
        const auto S = gallery_sphere({0, 0, 0}, 1.0);
        const auto ev = solve_incidence({{0, 0, 3}, {0, 0, -1}}, S.desc);
        CHECK(norm(ev.point.vec() - Vec3{0, 0, 1}) < 1e-9);
        CHECK(std::abs(ev.nu0) < 1e-9);
    }
    SECTION("ray from the origin onto the offset sphere") {
        const auto S = gallery_sphere({0, 0, -2}, 1.0);
        const Vec3 dir = normalized(Vec3{0.2, -0.1, -1.0});
        const auto ev = solve_incidence({{0, 0, 0}, dir}, S.desc);
        // First hit is on the near cap, one radius from the centre.
        CHECK(std::abs(norm(ev.point.vec() - Vec3{0, 0, -2}) - 1.0) < 1e-9);
        CHECK(ev.point.t > -2.0);
        const cplx expected = chart_from_vector(normalized(ev.point.vec() - Vec3{0, 0, -2}));
        CHECK(std::abs(ev.nu0 - expected) < 1e-8);
    }
    SECTION("downward ray onto the torus") {
        const auto S = gallery_torus(2.0, 1.0);
        const auto ev = solve_incidence({{2.1, 0, 4}, {0, 0, -1}}, S.desc);
        CHECK(std::abs(ev.point.z.real() - 2.1) < 1e-9);
        CHECK(std::abs(ev.point.t - std::sqrt(1.0 - 0.1 * 0.1 / 1.0)) < 1e-6);
        // nu0 = azimuth + i * tube angle: on the positive x1 axis, near the
        // top of the tube.
        CHECK(std::abs(ev.nu0.real()) < 1e-9);
        CHECK(std::abs(ev.nu0.imag() - std::atan2(std::sqrt(0.99), 0.1)) < 1e-8);
        // The outward normal tilts slightly away from the axis.
        const auto s = ev.surface();
        CHECK(s.xi0.real() > 0.0);
        CHECK(std::abs(s.xi0) < 0.1);
    }
    SECTION("miss raises NoIntersection") {
        const auto S = gallery_sphere({0, 0, 0}, 1.0);
        CHECK_THROWS_AS(solve_incidence({{0, 0, 3}, {1, 0, 0}}, S.desc), NoIntersection);
    }
}

TEST_CASE("congruence reflection") {
    SECTION("spherical wave in a plane mirror has a virtual source") {
        const double t1 = 1.5;
        ReflectionScene scene{SphericalWave{Vec3{0, 0, t1}}, gallery_plane(0.0).desc, {}};
        GridSpec grid;
        grid.u_min = 1.2;
        grid.u_max = 3.0;
        grid.v_min = -0.9;
        grid.v_max = 0.9;
        grid.nx = grid.ny = 9;
        const auto refl = reflect_congruence(scene, grid);
        for (const auto& nd : refl.nodes) {
            REQUIRE(nd.status == NodeStatus::Ok);
            CHECK(std::abs(nd.eta2 / nd.xi2 - cplx(t1, 0.0)) < 1e-10);
        }
    }
    SECTION("axis plane wave onto the sphere matches the closed form") {
        ReflectionScene scene{PlaneWave{Vec3{0, 0, -1}}, gallery_sphere({0, 0, 0}, 1.0).desc, {}};
        const auto ref = reference_reflected("sphere-plane-axis");
        GridSpec grid = GridSpec::square(0.62, 11);
        const auto refl = reflect_congruence(scene, grid);
        int checked = 0;
        for (const auto& nd : refl.nodes) {
            if (nd.status != NodeStatus::Ok) continue;
            CHECK(std::abs(nd.eta2 - ref.eta2(nd.xi2)) < 1e-9);
            ++checked;
        }
        CHECK(checked > 60);
    }
    SECTION("charted incoming congruence, spherical wave as a graph") {
        // nu -> (nu, -t1 nu): the congruence of lines through (0,0,t1).
        const double t1 = 0.8;
        ParametricCongruence incoming;
        incoming.map = [t1](cplx nu) { return OrientedLine{nu, -t1 * nu}; };
        incoming.domain = GridSpec::square(0.6, 7);
        incoming.domain.mask = [](cplx nu) { return std::abs(nu) < 1.0; };
        // Keep only downward rays.
        incoming.domain.u_min = 1.2;
        incoming.domain.u_max = 2.6;
        incoming.domain.v_min = -0.6;
        incoming.domain.v_max = 0.6;
        incoming.domain.mask = nullptr;
        const auto refl = reflect_congruence(incoming, gallery_plane(0.0).desc);
        int checked = 0;
        for (const auto& nd : refl.nodes) {
            if (nd.status != NodeStatus::Ok) continue;
            CHECK(std::abs(nd.eta2 / nd.xi2 - cplx(t1, 0.0)) < 1e-10);
            ++checked;
        }
        CHECK(checked == refl.grid.size());
    }
    SECTION("incidence from a charted oriented line") {
        const auto S = gallery_sphere({0, 0, 0}, 1.0);
        // Line through (0, 0, 2) aimed at the sphere.
        const cplx xi1 = chart_from_vector(normalized(Vec3{0.3, 0.1, -1.0}));
        const cplx eta1 = line_from_point_dir({cplx(0, 0), 2.0}, xi1);
        const auto ev = solve_incidence(OrientedLine{xi1, eta1}, S.desc);
        CHECK(std::abs(norm(ev.point.vec()) - 1.0) < 1e-9);
        CHECK(ev.point.t > 0.5);  // first hit on the near side
    }
    SECTION("axis plane wave onto the torus leaves an annular shadow") {
        ReflectionScene scene{PlaneWave{Vec3{0, 0, -1}}, gallery_torus(2.0, 1.0).desc, {}};
        const GridSpec grid = GridSpec::square(4.0, 33);
        const auto refl = reflect_congruence(scene, grid);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const double rho = std::abs(grid.node(i, j));
                const auto status = refl.node(i, j).status;
                if (rho < 0.85 || rho > 3.15)
                    CHECK(status == NodeStatus::Shadow);
                else if (rho > 1.15 && rho < 2.85)
                    CHECK(status != NodeStatus::Shadow);
            }
    }
}

TEST_CASE("malus defect") {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const cplx xi0 = random_cplx(2.0);
        const double r0 = d(rng);
        CHECK(std::abs(malus_defect(xi0, xi0, r0) + r0) < 1e-12);
        CHECK(std::abs(malus_defect(xi0, random_cplx(2.0), 0.0)) < 1e-15);
        if (std::abs(xi0) > 0.1)
            CHECK(std::abs(malus_defect(xi0, -1.0 / std::conj(xi0), r0) - r0) < 1e-11);
    }
}

TEST_CASE("malus identity residual") {
    SECTION("plane wave onto the sphere") {
        const auto S = gallery_sphere({0, 0, 0}, 1.0);
        const EventWave wave = PlaneWave{dir_to_vector(cplx(0.8, 0.3))};
        for (const cplx nu : {cplx(0.4, 0.2), cplx(-0.3, 0.5), cplx(0.1, -0.6)}) {
            const auto ev = reflect_surface_event(S.graph_at, wave, nu);
            const auto m = surface_param_map(S.graph_at, wave, frames()[ev.frame]);
            CHECK(malus_residual(m, nu) < 1e-5);
        }
    }
    SECTION("spherical wave onto the torus") {
        const auto S = gallery_torus(2.0, 1.0);
        const EventWave wave = PointSourceWave{Vec3{0, 0, 3.0}};
        for (const cplx nu : {cplx(0.4, 0.1), cplx(-0.2, 0.45), cplx(0.3, -0.35)}) {
            const auto ev = reflect_surface_event(S.graph_at, wave, nu);
            const auto m = surface_param_map(S.graph_at, wave, frames()[ev.frame]);
            CHECK(malus_residual(m, nu) < 1e-5);
        }
    }
    SECTION("holds for a non-integrable wave, which stays non-integrable") {
        // Incoming graph wave eta1 = i nu conj(nu) onto the plane mirror.
        ReflectionScene scene{GraphWave{[](cplx nu) { return cplx(0, 1) * nu * std::conj(nu); }},
                              gallery_plane(0.0).desc,
                              {}};
        for (const cplx nu : {cplx(1.3, 0.2), cplx(1.5, -0.4)}) {
            const auto ev = scene.event_at(nu);
            const auto m = incidence_param_map(scene, frames()[ev.frame], ev.nu0);
            CHECK(malus_residual(m, nu) < 1e-5);

            ParametricCongruence cin, cout;
            cin.map = [&m](cplx n) {
                const auto e = m(n);
                return OrientedLine{e.xi1, e.eta1};
            };
            cout.map = [&m](cplx n) {
                const auto e = m(n);
                return OrientedLine{e.xi2, e.eta2};
            };
            const double rin = integrability_residual(cin, nu);
            const double rout = integrability_residual(cout, nu);
            CHECK(rin > 1e-3);
            CHECK(rout > 1e-3);
            // The identity transfers the integrability defect exactly.
            CHECK(std::abs(rin - rout) < 1e-5);
        }
    }
}
