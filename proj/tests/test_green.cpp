#include "doctest.h"

#include <cmath>

#include "oracle/green.hpp"
#include "ptorus/green.hpp"
#include "test_util.hpp"

using namespace ptorus;

namespace {

// p on the Hitchin curve through a = r + s tau (equivalent form of the
// nontrivial critical point equation).
cplx hitchin_point(const EllipticContext& ctx, cplx a)
{
    const WpPair w = ctx.wp(a);
    return ctx.invert_wp(w.wp + w.dwp / (2.0 * green_grad(ctx, a))).z;
}

std::size_t count_nontrivial(const std::vector<CriticalPoint>& pts)
{
    return std::count_if(pts.begin(), pts.end(),
                         [](const CriticalPoint& c) { return c.kind == CriticalKind::Nontrivial; });
}

} // namespace

TEST_CASE("green_grad vanishes at half periods and has a pole at 0")
{
    const EllipticContext ctx(Tau(cplx(0.2, 1.1)));
    for (int k = 1; k <= 3; ++k)
        CHECK(std::abs(green_grad(ctx, ctx.half_period(k))) < 1e-10);
    CHECK_THROWS_AS(green_grad(ctx, cplx(1e-9, 0.0)), NumericError);
    CHECK_THROWS_AS(green_grad(ctx, 1.0 + ctx.tau().value()), NumericError);
}

TEST_CASE("green_grad is conjugation symmetric on rectangular tori")
{
    const EllipticContext ctx{Tau(cplx(0.0, 1.3))};
    for (int i = 0; i < 20; ++i) {
        const cplx z = testutil::random_point(ctx);
        CHECK(std::abs(green_grad(ctx, std::conj(z)) - std::conj(green_grad(ctx, z))) < 1e-10);
    }
}

TEST_CASE("green_grad matches finite differences of the theta-product Green function")
{
    const cplx tau(0.2, 1.1);
    const EllipticContext ctx{Tau(tau)};
    for (int i = 0; i < 20; ++i) {
        const cplx z = testutil::random_point(ctx, 0.1);
        CHECK(std::abs(green_grad(ctx, z) - oracle::green_grad_fd(z, tau)) < 1e-5);
    }
}

TEST_CASE("gp_grad: half periods, parity, finite-difference oracle")
{
    const cplx tau(0.2, 1.1);
    const EllipticContext ctx{Tau(tau)};
    const SingularPair pair(ctx, cplx(0.31, 0.22));
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(gp_grad(ctx, pair, ctx.half_period(k))) < 1e-10);

    const cplx p = pair.p().z;
    for (int i = 0; i < 20; ++i) {
        const cplx z = testutil::random_point(ctx, 0.1);
        if (ctx.torus_distance(z, p) < 0.1 || ctx.torus_distance(z, -p) < 0.1)
            continue;
        CHECK(std::abs(gp_grad(ctx, pair, -z) + gp_grad(ctx, pair, z)) < 1e-10);
        const cplx fd =
            0.5 * (oracle::green_grad_fd(z - p, tau) + oracle::green_grad_fd(z + p, tau));
        CHECK(std::abs(gp_grad(ctx, pair, z) - fd) < 1e-5);
    }
    CHECK_THROWS_AS(gp_grad(ctx, pair, p), NumericError);
    CHECK_THROWS_AS(SingularPair(ctx, 0.5 * tau), NumericError);
}

TEST_CASE("addition formula links the two forms of the critical point equation")
{
    for (int t = 0; t < 3; ++t) {
        const EllipticContext ctx(testutil::random_tau());
        int checked = 0;
        while (checked < 100) {
            const cplx a = testutil::random_point(ctx);
            const cplx p = testutil::random_point(ctx);
            const auto wa = ctx.eval(a);
            const cplx wpp = ctx.wp(p).wp;
            if (std::abs(wa.wp - wpp) < 0.1 || ctx.torus_distance(a, p) < 0.05 ||
                ctx.torus_distance(a, -p) < 0.05)
                continue;
            const cplx lhs = ctx.wzeta(a + p) + ctx.wzeta(a - p) - 2.0 * wa.zeta;
            const cplx rhs = wa.dwp / (wa.wp - wpp);
            CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(rhs)));
            ++checked;
        }
    }
}

TEST_CASE("G on rectangular tori has exactly the three half periods, all non-degenerate")
{
    for (double im : {1.0, 1.5, 0.8}) {
        const EllipticContext ctx{Tau(cplx(0.0, im))};
        const auto pts = find_critical_points(ctx, std::nullopt);
        REQUIRE(pts.size() == 3);
        for (const auto& c : pts) {
            CHECK(c.kind == CriticalKind::Trivial);
            CHECK(std::abs(c.hessian_det) > 1e-6);
            CHECK(c.residual < 1e-9);
        }
    }
}

TEST_CASE("Hessian determinant is stable under halving the step")
{
    const EllipticContext ctx{Tau(kI)};
    for (int k = 1; k <= 3; ++k) {
        const TorusPoint a = ctx.lattice_reduce(ctx.half_period(k));
        const double d1 = classify_hessian(ctx, std::nullopt, a, 1e-4);
        const double d2 = classify_hessian(ctx, std::nullopt, a, 5e-5);
        CHECK(std::abs(d1) > 1e-6);
        CHECK(std::abs(d1 - d2) < 1e-3 * std::abs(d1));
    }
    // The stencil must not touch the pole.
    CHECK_THROWS_AS(classify_hessian(ctx, std::nullopt, ctx.lattice_reduce(cplx(1e-4, 0.0)), 1e-4),
                    NumericError);
}

TEST_CASE("G_p always has the four half periods as trivial critical points")
{
    const EllipticContext ctx{Tau(kI)};
    const SingularPair pair(ctx, cplx(0.42, 0.37));
    const auto pts = find_critical_points(ctx, pair);
    int trivial = 0;
    for (const auto& c : pts) {
        if (c.kind == CriticalKind::Trivial) {
            ++trivial;
            CHECK(c.location.is_half_period());
        }
        CHECK(c.residual < 1e-9);
    }
    CHECK(trivial == 4);
}

TEST_CASE("no nontrivial critical points for p close to a half period on the square torus")
{
    const EllipticContext ctx{Tau(kI)};
    for (int k = 0; k < 4; ++k) {
        for (double ang : {0.3, 1.9, 4.1}) {
            const cplx p = ctx.half_period(k) + 0.04 * std::exp(kI * ang);
            const auto pts = find_critical_points(ctx, SingularPair(ctx, p));
            CHECK(count_nontrivial(pts) == 0);
        }
    }
}

TEST_CASE("nontrivial critical points of G_p for p on the Hitchin curve")
{
    const cplx tau(0.2, 1.1);
    const EllipticContext ctx{Tau(tau)};
    const cplx a0 = 0.3 + 0.2 * tau;
    const SingularPair pair(ctx, hitchin_point(ctx, a0));
    const auto pts = find_critical_points(ctx, pair);
    REQUIRE(count_nontrivial(pts) >= 1);

    bool seed_found = false;
    for (const auto& c : pts) {
        if (c.kind != CriticalKind::Nontrivial)
            continue;
        CHECK(std::abs(gp_grad(ctx, pair, c.location.z)) < 1e-9);
        // Points come in +- pairs.
        CHECK(std::abs(gp_grad(ctx, pair, -c.location.z)) < 1e-9);
        const cplx res = hitchin_identity_residual(ctx, pair.p().z, c.location.z);
        CHECK(std::abs(res) < 1e-7 * std::max(1.0, std::abs(ctx.wp(pair.p().z).wp)));
        seed_found = seed_found || std::min(ctx.torus_distance(c.location.z, a0),
                                            ctx.torus_distance(c.location.z, -a0)) < 1e-7;
    }
    CHECK(seed_found);
}
