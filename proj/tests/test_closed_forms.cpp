#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <twistor/closed_forms.hpp>

using namespace twistor;

namespace {

std::mt19937_64 rng(7070);

cplx random_cplx(double bound) {
    std::uniform_real_distribution<double> d(-bound, bound);
    return {d(rng), d(rng)};
}

}  // namespace

TEST_CASE("plane mirror closed form") {
    SECTION("spherical wave gains a virtual source") {
        const double t1 = 0.85;
        for (int k = 0; k < 50; ++k) {
            const cplx xi1 = random_cplx(2.0) + cplx(0.3, 0.0);
            const OrientedLine out = reflect_in_plane(xi1, -2.0 * t1 * xi1);
            CHECK(std::abs(out.xi - 1.0 / std::conj(xi1)) < 1e-13);
            CHECK(std::abs(out.eta - 2.0 * t1 / std::conj(xi1)) < 1e-13);
            CHECK(std::abs(out.eta - 2.0 * t1 * out.xi) < 1e-13);
        }
    }
    SECTION("line along the mirror through the origin") {
        const OrientedLine out = reflect_in_plane(cplx(1, 0), 0.0);
        CHECK(std::abs(out.xi - cplx(1, 0)) < 1e-15);
        CHECK(std::abs(out.eta) < 1e-15);
    }
    SECTION("agrees with the general pipeline") {
        for (int k = 0; k < 200; ++k) {
            const cplx xi1 = random_cplx(2.0) + cplx(0.25, 0.1);
            const cplx eta1 = random_cplx(2.0);
            // Surface fibre solving the incidence relation for the mirror.
            const double s1 = std::norm(xi1);
            if (std::abs(1.0 - s1 * s1) < 1e-3) continue;
            const cplx eta0 =
                (eta1 + sq(xi1) * std::conj(eta1)) / (1.0 - sq(s1));
            const auto refl = reflect_line(0.0, eta0, 0.0, xi1);
            CHECK(std::abs(refl.eta1 - eta1) < 1e-10);
            const OrientedLine closed = reflect_in_plane(xi1, eta1);
            CHECK(std::abs(refl.xi2 - closed.xi) < 1e-11);
            CHECK(std::abs(refl.eta2 - closed.eta) < 1e-10);
        }
    }
    SECTION("chart escape for a vertical ray") {
        CHECK_THROWS_AS(reflect_in_plane(0.0, cplx(1, 0)), ChartEscape);
    }
}

TEST_CASE("plane wave parameterised by surface point") {
    const auto torus = gallery_torus(2.0, 1.0);
    SECTION("torus fibre matches the printed specialisation") {
        for (cplx xi1 : {cplx(1.0, 0.0), cplx(2.4, 0.0)}) {
            const auto ref = reference_reflected("torus-plane-general", xi1);
            for (int k = 0; k < 100; ++k) {
                const cplx xi0 = random_cplx(1.5);
                const double m = std::abs(xi0);
                if (m < 0.15 || m > 1.5) continue;
                const double s0 = std::norm(xi0);
                if (std::abs((1.0 - s0) * std::conj(xi1) - 2.0 * std::conj(xi0)) < 0.2)
                    continue;
                const auto smp = torus.graph_at(xi0);
                const auto refl =
                    plane_wave_by_surface_point(xi1, smp.xi0, smp.eta0, smp.r0);
                CHECK(std::abs(refl.eta2 - ref.eta2(xi0)) < 1e-10);
                CHECK(std::abs(refl.xi2 - ref.xi2(xi0)) < 1e-10);
            }
        }
    }
    SECTION("head-on sphere events give radial lines") {
        const auto sphere = gallery_sphere({0, 0, 0}, 1.0);
        for (int k = 0; k < 30; ++k) {
            const cplx xi0 = random_cplx(1.5) + cplx(0.2, 0.0);
            const auto smp = sphere.graph_at(xi0);
            const auto refl = plane_wave_by_surface_point(-1.0 / std::conj(xi0), smp.xi0,
                                                          smp.eta0, smp.r0);
            CHECK(std::abs(refl.xi2 - xi0) < 1e-11);
            CHECK(std::abs(refl.eta2) < 1e-11);
        }
    }
}

TEST_CASE("plane wave parameterised by outgoing direction") {
    SECTION("axis corollary geometry") {
        for (int k = 0; k < 100; ++k) {
            const cplx xi = random_cplx(2.0);
            if (std::abs(xi) < 0.05) continue;
            const cplx xi0 = plane_wave_incidence_direction(xi, 0.0, BranchChoice::plus());
            const cplx expected = (std::sqrt(1.0 + std::norm(xi)) - 1.0) / std::conj(xi);
            CHECK(std::abs(xi0 - expected) < 1e-12);
        }
    }
    SECTION("unit sphere reflected fibre") {
        const auto F0 = [](cplx) { return cplx(0, 0); };
        const auto r0 = [](cplx) { return 1.0; };
        for (int k = 0; k < 100; ++k) {
            const cplx xi = random_cplx(2.0);
            const auto out = plane_wave_by_direction(xi, 0.0, F0, r0, BranchChoice::plus());
            CHECK(std::abs(out.F2 + 0.5 * xi * std::sqrt(1.0 + std::norm(xi))) < 1e-12);
        }
    }
    SECTION("torus reflected fibre down the axis") {
        const auto torus = gallery_torus(2.0, 1.0);
        const auto ref = reference_reflected("torus-plane-axis");
        for (int k = 0; k < 100; ++k) {
            const cplx xi = random_cplx(2.0);
            if (std::abs(xi) < 0.1) continue;
            const auto out =
                plane_wave_by_direction(xi, 0.0, torus.F, torus.r, BranchChoice::plus());
            CHECK(std::abs(out.F2 - ref.eta2(xi)) < 1e-11);
        }
    }
    SECTION("branch factor magnitude and incidence quadratic") {
        for (int k = 0; k < 200; ++k) {
            const cplx xi = random_cplx(1.8), xi1 = random_cplx(1.8);
            const cplx denom_b = 1.0 + xi * std::conj(xi1);
            if (std::abs(denom_b) < 0.1) continue;
            const auto out = plane_wave_by_direction(
                xi, xi1, [](cplx) { return cplx(0, 0); }, [](cplx) { return 1.0; },
                BranchChoice::plus());
            // |gamma|^2 = (1 + |xi|^2) / (1 + |xi1|^2)
            CHECK(std::abs(std::norm(out.gamma) -
                           (1.0 + std::norm(xi)) / (1.0 + std::norm(xi1))) < 1e-10);
            // xi0 solves the reflection law: reflecting -1/conj(xi1) off xi0
            // returns xi.
            if (std::abs(out.xi0) > 1e-6 && std::abs(xi1) > 1e-6) {
                const cplx back = reflect_direction(out.xi0, antipode(xi1));
                CHECK(std::abs(back - xi) < 1e-9);
            }
        }
    }
    SECTION("the two branches give the same unoriented congruence") {
        for (int k = 0; k < 100; ++k) {
            const cplx xi = random_cplx(1.5) + cplx(0.3, 0.0);
            const cplx xi1 = random_cplx(1.5);
            if (std::abs(1.0 + xi * std::conj(xi1)) < 0.1) continue;
            try {
                const cplx a = plane_wave_incidence_direction(xi, xi1, BranchChoice::plus());
                const cplx b = plane_wave_incidence_direction(xi, xi1, BranchChoice::minus());
                // The two roots are antipodal normal directions of the same
                // geometric event family.
                CHECK(std::abs(antipode(a) - b) < 1e-9);
            } catch (const ChartEscape&) {
            }
        }
    }
    SECTION("unreachable direction raises BranchUndefined") {
        const cplx xi1(0.7, 0.2);
        CHECK_THROWS_AS(plane_wave_incidence_direction(antipode(xi1), xi1,
                                                       BranchChoice::plus()),
                        BranchUndefined);
    }
    SECTION("the two branches are the antipodal incidence events") {
        // Flipping the branch picks the other root of the incidence
        // quadratic: the surface normal with the antipodal direction.  On a
        // sphere both normal lines run through the centre, so as unoriented
        // lines they agree there (point membership).
        const Vec3 centre{0.3, -0.2, 0.5};
        const auto sphere = gallery_sphere(centre, 1.2);
        const EuclidPoint c_pt{cplx(centre.x, centre.y), centre.z};
        for (int k = 0; k < 100; ++k) {
            const cplx xi = random_cplx(1.5);
            const cplx xi1 = random_cplx(1.0);
            if (std::abs(1.0 + xi * std::conj(xi1)) < 0.15) continue;
            try {
                const cplx a = plane_wave_incidence_direction(xi, xi1, BranchChoice::plus());
                const cplx b = plane_wave_incidence_direction(xi, xi1, BranchChoice::minus());
                CHECK(std::abs(antipode(a) - b) < 1e-9);
                const auto sa = sphere.graph_at(a);
                const auto sb = sphere.graph_at(b);
                CHECK(std::abs(line_from_point_dir(c_pt, sa.xi0) - sa.eta0) < 1e-10);
                CHECK(std::abs(line_from_point_dir(c_pt, sb.xi0) - sb.eta0) < 1e-10);
            } catch (const ChartEscape&) {
            } catch (const BranchUndefined&) {
            }
        }
    }
}

TEST_CASE("spherical wave closed form") {
    SECTION("offset sphere direction, + branch") {
        const auto sphere = gallery_sphere({0, 0, -2}, 1.0);
        const auto ref = reference_reflected("sphere-offset-spherical");
        for (int k = 0; k < 200; ++k) {
            const cplx xi0 = random_cplx(1.5);
            const double s = std::norm(xi0);
            const double b = std::sqrt(1.0 + 10.0 * s + 9.0 * s * s);
            if (std::abs(1.0 - 2.0 * s - 3.0 * s * s + (1.0 - s) * b) < 0.1) continue;
            const double den_eta =
                1.0 + s - 7.0 * s * s + 9.0 * s * s * s + (1.0 - 4.0 * s + 3.0 * s * s) * b;
            if (std::abs(den_eta) < 0.1) continue;
            const auto smp = sphere.graph_at(xi0);
            const auto out =
                spherical_wave_reflection(smp.xi0, smp.eta0, smp.r0, BranchChoice::plus());
            CHECK(std::abs(out.beta0 - b) < 1e-12);
            CHECK(std::abs(out.xi2 - ref.xi2(xi0)) < 1e-9);
            CHECK(std::abs(out.eta2 - ref.eta2(xi0)) < 1e-9);
        }
    }
    SECTION("radial events retroreflect") {
        for (int k = 0; k < 50; ++k) {
            const cplx xi0 = random_cplx(1.5) + cplx(0.2, 0.0);
            const double r0 = 1.3;  // normal through the origin, positive potential
            const auto minus = spherical_wave_reflection(xi0, 0.0, r0, BranchChoice::minus());
            CHECK(std::abs(minus.xi2 - xi0) < 1e-12);
            CHECK(std::abs(minus.eta2) < 1e-12);
            const auto plus = spherical_wave_reflection(xi0, 0.0, r0, BranchChoice::plus());
            CHECK(std::abs(plus.xi2 - antipode(xi0)) < 1e-12);
            CHECK(std::abs(plus.eta2) < 1e-12);
        }
    }
    SECTION("surface through the origin is rejected") {
        CHECK_THROWS_AS(spherical_wave_reflection(cplx(0.4, 0.1), 0.0, 0.0,
                                                  BranchChoice::plus()),
                        DegenerateFocus);
    }
    SECTION("branch flip gives the reversed line through the same points") {
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        for (int k = 0; k < 100; ++k) {
            const cplx xi0 = random_cplx(1.5);
            const cplx eta0 = random_cplx(1.5);
            const double r0 = d(rng);
            try {
                const auto plus = spherical_wave_reflection(xi0, eta0, r0,
                                                            BranchChoice::plus());
                const auto minus = spherical_wave_reflection(xi0, eta0, r0,
                                                             BranchChoice::minus());
                if (std::abs(plus.xi2) < 1e-2 || std::abs(plus.xi2) > 1e2) continue;
                const OrientedLine rev = reverse_line({plus.xi2, plus.eta2});
                CHECK(std::abs(rev.xi - minus.xi2) < 1e-9);
                CHECK(std::abs(rev.eta - minus.eta2) < 1e-8);
            } catch (const ChartEscape&) {
            }
        }
    }
}

TEST_CASE("surface gallery") {
    SECTION("unit sphere at the origin") {
        const auto e = gallery_sphere({0, 0, 0}, 1.0);
        for (int k = 0; k < 20; ++k) {
            const cplx xi = random_cplx(2.0);
            CHECK(std::abs(e.F(xi)) < 1e-15);
            CHECK(e.r(xi) == Catch::Approx(1.0));
        }
    }
    SECTION("sphere centred (0,0,-2)") {
        const auto e = gallery_sphere({0, 0, -2}, 1.0);
        for (int k = 0; k < 20; ++k) {
            const cplx xi = random_cplx(2.0);
            const double s = std::norm(xi);
            CHECK(std::abs(e.F(xi) - 2.0 * xi) < 1e-13);
            CHECK(e.r(xi) == Catch::Approx(1.0 - 2.0 * (1.0 - s) / (1.0 + s)).margin(1e-13));
        }
    }
    SECTION("torus functions and potential equation") {
        const auto e = gallery_torus(2.0, 1.0);
        const auto S = e.twistor_surface();
        for (int k = 0; k < 60; ++k) {
            std::uniform_real_distribution<double> logm(std::log(0.1), std::log(10.0));
            std::uniform_real_distribution<double> ang(0.0, 2 * M_PI);
            const cplx xi = std::polar(std::exp(logm(rng)), ang(rng));
            const double m = std::abs(xi);
            CHECK(std::abs(e.F(xi) - 1.0 * (1.0 - m * m) * (xi / m)) < 1e-12);
            CHECK(e.r(xi) == Catch::Approx(4.0 * m / (1.0 + m * m) + 1.0).margin(1e-12));
            CHECK(potential_residual(S, xi) < 1e-6);
        }
    }
    SECTION("surface samples land on the implicit surface") {
        for (const auto& e : {gallery_sphere({0.5, -0.3, 1.0}, 1.2), gallery_torus(2.0, 1.0)}) {
            for (int k = 0; k < 50; ++k) {
                cplx nu = random_cplx(1.8);
                if (e.graph_domain.masked(nu)) continue;
                if (std::abs(nu) < 0.1) continue;
                const auto s = e.graph_at(nu);
                const EuclidPoint p = point_from_line(s.xi0, s.eta0, s.r0);
                CHECK(std::abs(e.desc.implicit.f(p.vec())) < 1e-10);
            }
        }
    }
    SECTION("invalid parameters") {
        CHECK_THROWS_AS(gallery_torus(1.0, 2.0), InvalidParams);
        CHECK_THROWS_AS(gallery_sphere({0, 0, 0}, -1.0), InvalidParams);
        CHECK_THROWS_AS(gallery("hyperboloid"), InvalidParams);
    }
}

TEST_CASE("reference reflected forms") {
    SECTION("sphere-plane-axis values") {
        const auto ref = reference_reflected("sphere-plane-axis");
        const cplx xi(0.6, -0.4);
        CHECK(std::abs(ref.eta2(xi) + 0.5 * xi * std::sqrt(1.0 + std::norm(xi))) < 1e-15);
        CHECK(ref.r2(xi) == Catch::Approx(2.0 / std::sqrt(1.0 + std::norm(xi))));
        CHECK(ref.param == ReferenceParam::OutgoingDirection);
    }
    SECTION("unknown case") {
        CHECK_THROWS_AS(reference_reflected("cone-axis"), UnknownCase);
    }
}
