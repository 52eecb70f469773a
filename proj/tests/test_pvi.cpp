#include "doctest.h"

#include <cmath>

#include "json.hpp"
#include "oracle/lattice_sum.hpp"
#include "ptorus/gle.hpp"
#include "ptorus/parallel.hpp"
#include "ptorus/pvi.hpp"
#include "test_util.hpp"

using namespace ptorus;

namespace {

const cplx kTau0(0.2, 1.1);

/// Real (r, s) away from (1/2) Z^2 by at least `margin`.
MonodromyParams random_rs(double margin = 0.08)
{
    for (;;) {
        const double r = testutil::uniform(0.0, 1.0), s = testutil::uniform(0.0, 1.0);
        const double dr = std::abs(2 * r - std::round(2 * r)) / 2;
        const double ds = std::abs(2 * s - std::round(2 * s)) / 2;
        if (std::hypot(dr, ds) > margin)
            return {r, s};
    }
}

double pm_lattice_distance(const EllipticContext& ctx, cplx a, cplx b)
{
    return std::min(ctx.torus_distance(a, b), ctx.torus_distance(a, -b));
}

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

} // namespace

TEST_CASE("PVIIndex parameters are exact rationals")
{
    const PVIIndex zero;
    for (int k = 0; k < 4; ++k)
        CHECK(zero.alpha(k) == boost::rational<long long>(1, 8));
    const PVIIndex ok = PVIIndex::okamoto_1000();
    CHECK(ok.alpha(0) == boost::rational<long long>(9, 8));
    CHECK(ok.alpha(1) == boost::rational<long long>(1, 8));
    CHECK(ok.weight(0) == 2);
    CHECK(ok.weight(3) == 0);
    CHECK(PVIIndex({2, 0, 1, 0}).alpha(0) == boost::rational<long long>(25, 8));
    CHECK(PVIIndex::parse("0") == zero);
    CHECK(PVIIndex::parse("1,0,0,0") == ok);
    CHECK(ok.to_string() == "1,0,0,0");
    CHECK_THROWS_AS(PVIIndex({-1, 0, 0, 0}), NumericError);
    CHECK_THROWS_AS(PVIIndex::parse("1,0,0"), NumericError);
    CHECK_THROWS_AS(PVIIndex::parse("1,0,0,0,0"), NumericError);
}

TEST_CASE("z_rs: Green gradient, parity and the lattice-sum oracle")
{
    const EllipticContext ctx{Tau(kTau0)};
    for (int i = 0; i < 20; ++i) {
        const MonodromyParams mp = random_rs();
        const cplx a = mp.point(ctx.tau());
        CHECK(std::abs(z_rs(ctx, mp) - green_grad(ctx, a)) < 1e-10);
        CHECK(std::abs(z_rs(ctx, {-mp.r, -mp.s}) + z_rs(ctx, mp)) < 1e-10);
    }
    const MonodromyParams mp{0.3, 0.2};
    const cplx oracle_z = oracle::lattice_zeta(0.3 + 0.2 * kTau0, kTau0) -
                          0.3 * oracle::lattice_eta1(kTau0) - 0.2 * oracle::lattice_eta2(kTau0);
    CHECK(std::abs(z_rs(ctx, mp) - oracle_z) < 1e-9);
    CHECK_THROWS_AS(z_rs(ctx, {0.5, 0.0}), NumericError);
    CHECK_THROWS_AS(z_rs(ctx, {1.0, -0.5}), NumericError);
}

TEST_CASE("hitchin_p: sign symmetry, inversion and the addition-formula identity")
{
    const EllipticContext ctx{Tau(kTau0)};
    const MonodromyParams mp{0.3, 0.2};
    const PviPoint p = hitchin_p(ctx, mp);
    CHECK(std::abs(ctx.wp(p.p.z).wp - p.wp) < 1e-10 * std::max(1.0, std::abs(p.wp)));
    CHECK(std::abs(hitchin_wp(ctx, {-0.3, -0.2}) - p.wp) < 1e-10);
    CHECK(std::abs(hitchin_identity_residual(ctx, p.p.z, mp.point(ctx.tau()))) < 1e-9);
}

TEST_CASE("property: r + s tau is a critical point of G_p for p = hitchin_p(r, s)")
{
    for (int t = 0; t < 3; ++t) {
        const EllipticContext ctx(testutil::random_tau());
        for (int i = 0; i < 50; ++i) {
            const MonodromyParams mp = random_rs();
            const cplx a = mp.point(ctx.tau());
            PviPoint p;
            try {
                p = hitchin_p(ctx, mp);
            } catch (const NumericError&) {
                continue;
            }
            const double scale = std::max(1.0, std::abs(p.wp));
            CHECK(std::abs(hitchin_identity_residual(ctx, p.p.z, a)) < 1e-8 * scale);
            if (ctx.distance_to_half_periods(p.p.z) > 1e-3)
                CHECK(std::abs(gp_grad(ctx, SingularPair(ctx, p.p.z), a)) < 1e-8 * scale);
        }
    }
}

TEST_CASE("degenerate Z exactly at critical points of G")
{
    // On the hexagonal torus (1 + tau) / 3 is a critical point of G.
    const EllipticContext hex{Tau(std::exp(kI * kPi / 3.0))};
    const MonodromyParams third{1.0 / 3.0, 1.0 / 3.0};
    CHECK(std::abs(green_grad(hex, third.point(hex.tau()))) < 1e-10);
    CHECK(std::abs(z_rs(hex, third)) < 1e-10);
    CHECK_THROWS_AS(hitchin_p(hex, third), NumericError);
    try {
        hitchin_p(hex, third);
    } catch (const NumericError& e) {
        CHECK(e.kind() == ErrorKind::DegenerateZ);
    }
    CHECK_NOTHROW(hitchin_p(hex, {0.3, 0.3}));
}

TEST_CASE("okamoto lift: sign symmetry and degenerate denominator")
{
    const EllipticContext ctx{Tau(kTau0)};
    const cplx a = okamoto_wp_1000(ctx, {0.3, 0.2});
    const cplx b = okamoto_wp_1000(ctx, {-0.3, -0.2});
    CHECK(std::abs(a - b) < 1e-9 * std::max(1.0, std::abs(a)));
    CHECK(std::isfinite(a.real()));
    try {
        okamoto_wp_1000(ctx, {0.3, 0.2}, 1e6);
        FAIL("expected DegenerateDenominator");
    } catch (const NumericError& e) {
        CHECK(e.kind() == ErrorKind::DegenerateDenominator);
    }
    CHECK_THROWS_AS(solution_wp(ctx, {0.3, 0.2}, PVIIndex({0, 1, 0, 0})), NumericError);
}

TEST_CASE("EPVI residual of the Hitchin solution is second order in h")
{
    const PVIIndex n0;
    for (cplx tau : {kTau0, cplx(0.0, 1.0), cplx(0.0, 1.5)}) {
        for (int i = 0; i < 4; ++i) {
            const MonodromyParams mp = random_rs(0.12);
            const PFamily fam = solution_family(mp, n0);
            double r1, r2;
            try {
                r1 = epvi_residual(fam, n0, Tau(tau), 1e-3);
                r2 = epvi_residual(fam, n0, Tau(tau), 5e-4);
            } catch (const NumericError&) {
                continue;
            }
            CHECK(r1 < 1e-5);
            const double order = observed_order(r1, r2);
            CHECK(order > 1.5);
            CHECK(order < 2.6);
        }
    }
}

TEST_CASE("EPVI residual stays second order when p passes near a half period")
{
    // At Im tau < 1 the truncation term grows with the inverse distance of
    // p to E[2]; the absolute bound no longer holds but the order does.
    const PVIIndex n0;
    const cplx tau(-0.3, 0.9);
    const EllipticContext ctx{Tau(tau)};
    const MonodromyParams mp{0.51905, 0.979752};
    CHECK(ctx.distance_to_half_periods(hitchin_p(ctx, mp).p.z) < 0.1);
    const PFamily fam = solution_family(mp, n0);
    const double r1 = epvi_residual(fam, n0, Tau(tau), 1e-3);
    const double r2 = epvi_residual(fam, n0, Tau(tau), 5e-4);
    CHECK(r1 > 1e-5);
    CHECK(std::abs(observed_order(r1, r2) - 2.0) < 0.05);
}

TEST_CASE("EPVI residual of the (1,0,0,0) lift")
{
    const PVIIndex n1 = PVIIndex::okamoto_1000();
    const PFamily fam = solution_family({0.3, 0.2}, n1);
    const double r1 = epvi_residual(fam, n1, Tau(kTau0), 1e-3);
    const double r2 = epvi_residual(fam, n1, Tau(kTau0), 5e-4);
    CHECK(r1 < 1e-4);
    CHECK(observed_order(r1, r2) > 1.5);
    CHECK(observed_order(r1, r2) < 2.6);
    // The same family fails the equation with the n = 0 parameters.
    CHECK(epvi_residual(fam, PVIIndex(), Tau(kTau0), 1e-3) > 100 * r1);
}

TEST_CASE("EPVI residual detects a perturbed solution")
{
    const PVIIndex n0;
    const MonodromyParams mp{0.3, 0.2};
    const PFamily good = solution_family(mp, n0);
    const PFamily bad = [mp](const EllipticContext& ctx) {
        return ctx.invert_wp(hitchin_wp(ctx, mp) + 0.1).z;
    };
    const double r_good = epvi_residual(good, n0, Tau(kTau0), 1e-3);
    const double r_bad = epvi_residual(bad, n0, Tau(kTau0), 1e-3);
    CHECK(r_bad > 10 * r_good);
}

TEST_CASE("branch tracking refuses jumps")
{
    const EllipticContext ctx{Tau(kTau0)};
    const cplx p(0.31, 0.4);
    CHECK(std::abs(track_branch(ctx, p + 1.0, p) - p) < 1e-12);
    CHECK(std::abs(track_branch(ctx, -p + kTau0, p) - p) < 1e-12);
    // Both +-q are about 0.6 away from p; the threshold is 0.3 * 1.63.
    const cplx q(0.1, 0.05);
    CHECK_THROWS_AS(track_branch(ctx, q + 0.5 + 0.5 * kTau0, q), NumericError);
}

TEST_CASE("Hamiltonian right-hand side for n = 0 has no half-period terms")
{
    const EllipticContext ctx{Tau(kTau0)};
    const cplx p(0.31, 0.27), A(0.4, -0.2);
    const auto d = hamiltonian_rhs(ctx, PVIIndex(), p, A);
    const WeierstrassValues w = ctx.eval(2.0 * p);
    const cplx dA = kI / (4 * kPi) * ((2.0 * w.wp + 2.0 * ctx.eta1()) * A - 1.5 * w.dwp);
    CHECK(std::abs(d[1] - dA) < 1e-12);
    const auto d1 = hamiltonian_rhs(ctx, PVIIndex::okamoto_1000(), p, A);
    CHECK(std::abs(d1[1] - dA + kI / (4 * kPi) * 2.0 * ctx.wp(p).dwp) < 1e-10);
    CHECK(std::abs(d1[0] - d[0]) == 0.0);
}

TEST_CASE("Hamiltonian flow follows the Hitchin family and is reversible")
{
    const PVIIndex n0;
    const MonodromyParams mp{0.3, 0.2};
    const Tau t0(kTau0), t1(kTau0 + cplx(0.0, 0.2));
    const HamiltonianState s0 = state_from_family(solution_family(mp, n0), n0, t0, 1e-3);
    const auto path = hamiltonian_flow(n0, s0, t1, 4);
    REQUIRE(path.size() == 5);
    const EllipticContext c1(t1);
    const PviPoint target = hitchin_p(c1, mp);
    CHECK(pm_lattice_distance(c1, path.back().p, target.p.z) < 1e-6);
    for (const auto& st : path) {
        const EllipticContext c(Tau(st.tau));
        CHECK(std::abs(st.B - apparent_B(c, n0, st.p, st.A)) < 1e-12 * std::max(1.0, std::abs(st.B)));
    }

    const auto back = hamiltonian_flow(n0, path.back(), t0, 4);
    CHECK(std::abs(back.back().p - s0.p) < 1e-7);
    CHECK(std::abs(back.back().A - s0.A) < 1e-7);
}

TEST_CASE("Hamiltonian flow refuses to reach a half period")
{
    const PVIIndex n0;
    HamiltonianState s{kTau0, cplx(0.5, 0.0) + 1e-5, 0.0, 0.0};
    FlowOptions o;
    o.clearance = 1e-3;
    try {
        hamiltonian_flow(n0, s, Tau(kTau0 + 0.1), 2, o);
        FAIL("expected HalfPeriodCollision");
    } catch (const NumericError& e) {
        CHECK(e.kind() == ErrorKind::HalfPeriodCollision);
    }
}

TEST_CASE("A from finite differences: sign flip, convergence order, flow consistency")
{
    const PVIIndex n0;
    const MonodromyParams mp{0.3, 0.2};
    const Tau tau(kTau0);
    const PFamily fam = solution_family(mp, n0);
    const PFamily neg = [fam](const EllipticContext& ctx) { return -fam(ctx); };
    const HamiltonianState s = state_from_family(fam, n0, tau, 1e-3);
    const HamiltonianState sn = state_from_family(neg, n0, tau, 1e-3);
    CHECK(std::abs(sn.p + s.p) < 1e-12);
    CHECK(std::abs(sn.A + s.A) < 1e-9);
    CHECK(std::abs(sn.B - s.B) < 1e-8 * std::max(1.0, std::abs(s.B)));
    CHECK(std::abs(a_from_hitchin(mp, tau, 1e-3) - s.A) < 1e-12);

    const cplx a1 = a_from_hitchin(mp, tau, 4e-3);
    const cplx a2 = a_from_hitchin(mp, tau, 2e-3);
    const cplx a3 = a_from_hitchin(mp, tau, 1e-3);
    const double ratio = std::abs(a1 - a2) / std::abs(a2 - a3);
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);

    // A short flow from the finite-difference state stays on the family.
    const double dt = 1e-3;
    const auto flow = hamiltonian_flow(n0, s, Tau(kTau0 + dt), 1);
    const EllipticContext c1(Tau(kTau0 + dt));
    const cplx exact = track_branch(c1, fam(c1), s.p);
    CHECK(std::abs(flow.back().p - exact) < 1e-8);
}

TEST_CASE("omega membership, n = 0: no solutions near half periods on the square torus")
{
    const EllipticContext ctx{Tau(kI)};
    for (int k = 0; k < 4; ++k)
        for (int a = 0; a < 16; ++a) {
            const cplx p = ctx.half_period(k) + 0.05 * std::exp(kI * (2 * kPi * a / 16));
            CHECK_FALSE(omega_membership(ctx, SingularPair(ctx, p), PVIIndex()).has_value());
        }
}

TEST_CASE("omega membership, n = 0: round trip through hitchin_p")
{
    const EllipticContext ctx{Tau(kI)};
    int tested = 0;
    while (tested < 12) {
        const MonodromyParams mp = random_rs(0.1);
        PviPoint p;
        try {
            p = hitchin_p(ctx, mp);
        } catch (const NumericError&) {
            continue;
        }
        if (ctx.distance_to_half_periods(p.p.z) < 0.02)
            continue;
        ++tested;
        const auto w = omega_membership(ctx, SingularPair(ctx, p.p.z), PVIIndex());
        REQUIRE(w.has_value());
        const PviPoint back = hitchin_p(ctx, {w->r, w->s});
        CHECK(pm_lattice_distance(ctx, back.p.z, p.p.z) < 1e-6);
    }
}

TEST_CASE("omega membership, n = (1,0,0,0): forward scan finds a witness")
{
    const PVIIndex n1 = PVIIndex::okamoto_1000();
    const EllipticContext ctx{Tau(kTau0)};
    const PviPoint p = okamoto_p_1000(ctx, {0.3, 0.2});
    const auto w = omega_membership(ctx, SingularPair(ctx, p.p.z), n1);
    REQUIRE(w.has_value());
    CHECK(w->residual < 1e-9 * std::max(1.0, std::abs(p.wp)));
    const PviPoint back = okamoto_p_1000(ctx, {w->r, w->s});
    CHECK(pm_lattice_distance(ctx, back.p.z, p.p.z) < 1e-6);
    CHECK_THROWS_AS(omega_membership(ctx, SingularPair(ctx, p.p.z), PVIIndex({0, 0, 1, 0})),
                    NumericError);
}

TEST_CASE("omega scan on the square torus")
{
    const int res = 24;
    const RegionSample s = omega_scan(Tau(kI), PVIIndex(), res);
    const EllipticContext ctx{Tau(kI)};
    int members = 0;
    for (int j = 0; j < res; ++j)
        for (int i = 0; i < res; ++i) {
            const RegionCell& c = s.at(i, j);
            const cplx p = c.r_cell + c.s_cell * kI;
            if (ctx.distance_to_half_periods(p) < 0.05)
                CHECK_FALSE(c.member);
            if (c.excluded)
                CHECK(ctx.distance_to_half_periods(p) < 2.0 / res);
            CHECK(c.member == s.at(res - 1 - i, res - 1 - j).member);
            if (c.member) {
                ++members;
                REQUIRE(c.witness.has_value());
                CHECK(c.witness->residual < 1e-6);
            }
        }
    CHECK(members > 0);

    // Forward image: Hitchin points of a coarse (r, s) grid are members.
    int landed = 0;
    for (int a = 1; a < 8; ++a)
        for (int b = 1; b < 4; ++b) {
            const MonodromyParams mp{a / 8.0 + 0.01, b / 8.0 + 0.01};
            const PviPoint p = hitchin_p(ctx, mp);
            if (ctx.distance_to_half_periods(p.p.z) < 0.05)
                continue;
            CHECK(omega_membership(ctx, SingularPair(ctx, p.p.z), PVIIndex()).has_value());
            ++landed;
        }
    CHECK(landed > 5);
}

TEST_CASE("omega scan serialisation and determinism")
{
    const RegionSample a = omega_scan(Tau(cplx(0.1, 1.2)), PVIIndex(), 16);
    set_max_threads(3);
    const RegionSample b = omega_scan(Tau(cplx(0.1, 1.2)), PVIIndex(), 16);
    set_max_threads(0);
    const std::string csv = region_to_csv(a);
    CHECK(csv == region_to_csv(b));
    CHECK(csv.rfind("r_cell,s_cell,member,witness_r,witness_s,residual\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 16 * 16 + 1);

    const auto j = nlohmann::json::parse(region_to_json(a));
    CHECK(j["resolution"] == 16);
    CHECK(j["index"] == "0");
    CHECK(j["cells"].size() == 256);
    CHECK(j["tau"]["im"].get<double>() == 1.2);
    for (const auto& c : j["cells"])
        if (c["excluded"].get<bool>())
            CHECK_FALSE(c["member"].get<bool>());

    CHECK_THROWS_AS(omega_scan(Tau(kI), PVIIndex(), 8), NumericError);
}
