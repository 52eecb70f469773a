#include "doctest.h"

#include <cmath>

#include "oracle/lattice_sum.hpp"
#include "ptorus/elliptic.hpp"
#include "test_util.hpp"

using namespace ptorus;
using testutil::uniform;

namespace {

bool same_torus_point(const EllipticContext& ctx, cplx a, cplx b, double tol)
{
    return ctx.torus_distance(a, b) < tol;
}

} // namespace

TEST_CASE("square lattice symmetry fixes e3 and g3")
{
    const EllipticContext ctx{Tau(kI)};
    CHECK(std::abs(ctx.e3()) < 1e-12);
    CHECK(std::abs(ctx.g3()) < 1e-10);
    CHECK(std::abs(ctx.e2() + ctx.e1()) < 1e-12);
    CHECK(ctx.e1().real() > 0.0);
    CHECK(std::abs(ctx.e1().imag()) < 1e-12);
}

TEST_CASE("lattice data agree with the lattice-sum oracle")
{
    const cplx tau(0.2, 1.1);
    const EllipticContext ctx{Tau(tau)};
    CHECK(std::abs(ctx.eta1() - oracle::lattice_eta1(tau)) < 1e-9);
    CHECK(std::abs(ctx.eta2() - oracle::lattice_eta2(tau)) < 1e-9);
    for (int k = 1; k <= 3; ++k)
        CHECK(std::abs(ctx.e(k) - oracle::lattice_wp(ctx.half_period(k), tau)) < 1e-9);
}

TEST_CASE("row-summed oracle agrees with a plain box sum at its truncation level")
{
    // The box sum converges like 1/R^2; at R = 200 it is good to ~1e-4.
    const cplx tau(0.2, 1.1), z(0.3, 0.4);
    CHECK(std::abs(oracle::box_wp(z, tau, 200) - oracle::lattice_wp(z, tau)) < 1e-3);
}

TEST_CASE("context identities")
{
    for (int i = 0; i < 5; ++i) {
        const EllipticContext ctx(testutil::random_tau());
        const auto res = ctx.identity_residuals();
        CHECK(res.e_sum < 1e-10);
        CHECK(res.legendre < 1e-10);
        CHECK(res.g2 < 1e-10 * std::max(1.0, std::abs(ctx.g2())));
        CHECK(res.g3 < 1e-10 * std::max(1.0, std::abs(ctx.g3())));
    }
}

TEST_CASE("series cutoff is the smallest N with |q|^(N^2) < tol/10")
{
    const EllipticContext ctx(Tau(kI), 1e-10);
    const int n = ctx.series_cutoff();
    const double q = std::abs(ctx.nome());
    CHECK(std::pow(q, n * n) < 1e-11);
    CHECK(std::pow(q, (n - 1) * (n - 1)) >= 1e-11);
}

TEST_CASE("invalid tau is rejected")
{
    CHECK_THROWS_AS(Tau(cplx(0.0, -1.0)), NumericError);
    CHECK_THROWS_AS(Tau(cplx(0.3, 0.0)), NumericError);
    try {
        Tau t(cplx(0.0, -1.0));
    } catch (const NumericError& e) {
        CHECK(e.kind() == ErrorKind::InvalidTau);
    }
}

TEST_CASE("wp at half periods, parity and poles")
{
    const EllipticContext ctx(Tau(cplx(0.2, 1.1)));
    const WpPair h = ctx.wp(0.5);
    CHECK(std::abs(h.wp - ctx.e1()) < 1e-12);
    CHECK(std::abs(h.dwp) < 1e-9);

    const cplx z(0.31, 0.27);
    const WpPair a = ctx.wp(z), b = ctx.wp(-z);
    CHECK(std::abs(a.wp - b.wp) < 1e-12 * std::abs(a.wp));
    CHECK(std::abs(a.dwp + b.dwp) < 1e-12 * std::abs(a.dwp));

    CHECK_THROWS_AS(ctx.wp(1e-9), NumericError);
    CHECK_THROWS_AS(ctx.wp(1.0 + ctx.tau().value() + cplx(1e-9, 0.0)), NumericError);
    CHECK_NOTHROW(ctx.wp(1e-3));
}

TEST_CASE("wp matches the lattice sum on the square torus")
{
    const EllipticContext ctx{Tau(kI)};
    const cplx z(0.3, 0.4);
    const WpPair v = ctx.wp(z);
    CHECK(std::abs(v.wp - oracle::lattice_wp(z, kI)) < 1e-9);
    CHECK(std::abs(v.dwp - oracle::lattice_dwp(z, kI)) < 1e-9);
}

TEST_CASE("zeta parity, half-period value and oracle")
{
    const cplx tau(0.2, 1.1);
    const EllipticContext ctx{Tau(tau)};
    const cplx z(0.3, 0.4);
    CHECK(std::abs(ctx.wzeta(-z) + ctx.wzeta(z)) < 1e-10);
    CHECK(std::abs(ctx.wzeta(0.5) - 0.5 * ctx.eta1()) < 1e-10);
    CHECK(std::abs(ctx.wzeta(z) - oracle::lattice_zeta(z, tau)) < 1e-9);
}

TEST_CASE("zeta quasi-periodicity")
{
    const EllipticContext ctx(Tau(cplx(-0.35, 0.9)));
    for (int i = 0; i < 20; ++i) {
        const cplx z = testutil::random_point(ctx);
        CHECK(std::abs(ctx.wzeta(z + 1.0) - ctx.wzeta(z) - ctx.eta1()) < 1e-10);
        CHECK(std::abs(ctx.wzeta(z + ctx.tau().value()) - ctx.wzeta(z) - ctx.eta2()) < 1e-10);
    }
}

TEST_CASE("lattice_reduce")
{
    const cplx tau(0.2, 1.1);
    const EllipticContext ctx{Tau(tau)};
    auto p = ctx.lattice_reduce(1.2 + 2.3 * tau);
    CHECK(p.r == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(p.s == doctest::Approx(0.3).epsilon(1e-12));
    p = ctx.lattice_reduce(0.0);
    CHECK(p.r == 0.0);
    CHECK(p.s == 0.0);
    p = ctx.lattice_reduce(-0.25 - 0.5 * tau);
    CHECK(p.r == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(p.s == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(p.z - (p.r + p.s * tau)) < 1e-14);
    CHECK(ctx.lattice_reduce(0.5 + tau).is_half_period());
    CHECK_FALSE(ctx.lattice_reduce(0.3 + 0.5 * tau).is_half_period());
}

TEST_CASE("invert_wp")
{
    const EllipticContext ctx(Tau(cplx(0.2, 1.1)));
    const TorusPoint h = ctx.invert_wp(ctx.e1());
    CHECK(same_torus_point(ctx, h.z, 0.5, 1e-9));

    const EllipticContext sq{Tau(kI)};
    const TorusPoint z5 = sq.invert_wp(5.0);
    CHECK(std::abs(sq.wp(z5.z).wp - 5.0) < 1e-10 * 5.0);
    CHECK(z5.s <= 0.5);

    // Large values land near the origin.
    const TorusPoint big = sq.invert_wp(cplx(1e6, 3e5));
    CHECK(std::abs(sq.wp(big.z).wp - cplx(1e6, 3e5)) < 1e-10 * 1e6);
}

TEST_CASE("property: differential equation of wp on random points")
{
    for (int t = 0; t < 3; ++t) {
        const EllipticContext ctx(testutil::random_tau());
        for (int i = 0; i < 100; ++i) {
            const cplx z = testutil::random_point(ctx, 0.02);
            const WpPair v = ctx.wp(z);
            const cplx rhs = 4.0 * (v.wp - ctx.e1()) * (v.wp - ctx.e2()) * (v.wp - ctx.e3());
            const cplx rhs_g = 4.0 * v.wp * v.wp * v.wp - ctx.g2() * v.wp - ctx.g3();
            const double scale = 1.0 + std::pow(std::abs(v.wp), 3);
            CHECK(std::abs(v.dwp * v.dwp - rhs) < 1e-8 * scale);
            CHECK(std::abs(v.dwp * v.dwp - rhs_g) < 1e-8 * scale);
        }
    }
}

TEST_CASE("property: oracle agreement on a 10x10 grid for random tau")
{
    for (int t = 0; t < 5; ++t) {
        const Tau tau = testutil::random_tau();
        const EllipticContext ctx(tau);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const cplx z = (i + 0.5) / 10.0 + ((j + 0.5) / 10.0) * tau.value();
                const auto v = ctx.eval(z);
                worst = std::max(worst, std::abs(v.wp - oracle::lattice_wp(z, tau.value())));
                worst = std::max(worst, std::abs(v.zeta - oracle::lattice_zeta(z, tau.value())));
            }
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("property: invert_wp is +-identity on the torus")
{
    const EllipticContext ctx(Tau(cplx(0.1, 1.3)));
    for (int i = 0; i < 100; ++i) {
        const cplx z = testutil::random_point(ctx, 0.01);
        const TorusPoint w = ctx.invert_wp(ctx.wp(z).wp);
        const bool plus = same_torus_point(ctx, w.z, z, 1e-8);
        const bool minus = same_torus_point(ctx, w.z, -z, 1e-8);
        CHECK((plus || minus));
        CHECK(w.s <= 0.5 + 1e-9);
    }
}
