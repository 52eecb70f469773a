#include "ptorus/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptorus {

SingularPair::SingularPair(const EllipticContext& ctx, cplx p, double tol)
    : p_(ctx.lattice_reduce(p))
{
    if (p_.is_half_period(tol))
        fail(ErrorKind::HalfLatticeInput, "the singular point p must not be a half period");
}

namespace {

GradientJet single_jet(const EllipticContext& ctx, cplx z)
{
    const WeierstrassValues v = ctx.eval(z);
    const auto [r, s] = ctx.real_coords(z);
    const cplx t = ctx.tau().value();
    GradientJet j;
    j.value = v.zeta - r * ctx.eta1() - s * ctx.eta2();
    j.d_x = -v.wp - ctx.eta1();
    j.d_y = -kI * v.wp + ctx.eta1() * (t.real() / t.imag()) - ctx.eta2() / t.imag();
    return j;
}

double pm_distance(const EllipticContext& ctx, cplx a, cplx b)
{
    return std::min(ctx.torus_distance(a, b), ctx.torus_distance(a, -b));
}

} // namespace

cplx green_grad(const EllipticContext& ctx, const TorusPoint& z)
{
    const WeierstrassValues v = ctx.eval(z.z);
    return v.zeta - z.r * ctx.eta1() - z.s * ctx.eta2();
}

cplx green_grad(const EllipticContext& ctx, cplx z)
{
    return green_grad(ctx, ctx.lattice_reduce(z));
}

cplx gp_grad(const EllipticContext& ctx, const SingularPair& pair, cplx z)
{
    const cplx p = pair.p().z;
    return 0.5 * (green_grad(ctx, z - p) + green_grad(ctx, z + p));
}

GradientJet gradient_jet(const EllipticContext& ctx, const SingularPair* pair, cplx z)
{
    if (!pair)
        return single_jet(ctx, z);
    const cplx p = pair->p().z;
    const GradientJet a = single_jet(ctx, z - p);
    const GradientJet b = single_jet(ctx, z + p);
    return {0.5 * (a.value + b.value), 0.5 * (a.d_x + b.d_x), 0.5 * (a.d_y + b.d_y)};
}

double classify_hessian(const EllipticContext& ctx, const std::optional<SingularPair>& pair,
                        const TorusPoint& a, double step)
{
    const double h = step > 0.0 ? step : 1e-4 * std::min(1.0, ctx.tau().im());
    const SingularPair* pp = pair ? &*pair : nullptr;
    // (G_x, G_y) from -4 pi dG/dz = F:  G_x = -Re F / (2 pi),  G_y = Im F / (2 pi).
    auto grad = [&](cplx z) -> std::array<double, 2> {
        try {
            const cplx f = gradient_jet(ctx, pp, z).value;
            return {-f.real() / (2.0 * kPi), f.imag() / (2.0 * kPi)};
        } catch (const NumericError& e) {
            if (e.kind() == ErrorKind::PoleProximity)
                fail(ErrorKind::StepTooLarge, "Hessian stencil touches a singularity");
            throw;
        }
    };
    const auto gxp = grad(a.z + h), gxm = grad(a.z - h);
    const auto gyp = grad(a.z + kI * h), gym = grad(a.z - kI * h);
    const double hxx = (gxp[0] - gxm[0]) / (2.0 * h);
    const double hyx = (gxp[1] - gxm[1]) / (2.0 * h);
    const double hxy = (gyp[0] - gym[0]) / (2.0 * h);
    const double hyy = (gyp[1] - gym[1]) / (2.0 * h);
    const double off = 0.5 * (hxy + hyx);
    return hxx * hyy - off * off;
}

std::vector<CriticalPoint> find_critical_points(const EllipticContext& ctx,
                                                const std::optional<SingularPair>& pair,
                                                const CriticalSearchOptions& options)
{
    if (options.seeds_per_axis < 8)
        fail(ErrorKind::InvalidArgument, "seeds_per_axis must be at least 8");
    const SingularPair* pp = pair ? &*pair : nullptr;
    const cplx tau = ctx.tau().value();
    const double max_step = 0.1 * std::min(1.0, ctx.tau().im());

    std::vector<cplx> singular;
    if (pp) {
        singular = {pp->p().z, -pp->p().z};
    } else {
        singular = {0.0};
    }

    auto newton = [&](cplx a) -> std::optional<CriticalPoint> {
        try {
            double res = std::numeric_limits<double>::infinity();
            for (int it = 0; it < options.max_iter; ++it) {
                const GradientJet j = gradient_jet(ctx, pp, a);
                res = std::abs(j.value);
                if (res < options.newton_tol)
                    break;
                const double j11 = j.d_x.real(), j12 = j.d_y.real();
                const double j21 = j.d_x.imag(), j22 = j.d_y.imag();
                const double det = j11 * j22 - j12 * j21;
                if (!(std::abs(det) > 1e-300))
                    return std::nullopt;
                const double fx = j.value.real(), fy = j.value.imag();
                cplx d(-(j22 * fx - j12 * fy) / det, -(-j21 * fx + j11 * fy) / det);
                if (std::abs(d) > max_step)
                    d *= max_step / std::abs(d);
                a += d;
                if (std::abs(d) < 1e-15 * (1.0 + std::abs(a))) {
                    res = std::abs(gradient_jet(ctx, pp, a).value);
                    break;
                }
            }
            if (!(res < options.accept_tol))
                return std::nullopt;
            CriticalPoint cp;
            cp.location = ctx.canonical_pm(a);
            cp.residual = res;
            return cp;
        } catch (const NumericError&) {
            return std::nullopt;
        }
    };

    std::vector<CriticalPoint> found;
    const int n = options.seeds_per_axis;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const cplx seed = (i + 0.5) / n + ((k + 0.5) / n) * tau;
            bool excluded = false;
            for (cplx c : singular)
                excluded = excluded || ctx.torus_distance(seed, c) < options.seed_exclusion;
            if (excluded)
                continue;
            if (auto cp = newton(seed))
                found.push_back(*cp);
        }
    }

    for (int k = pp ? 0 : 1; k < 4; ++k) {
        CriticalPoint cp;
        cp.location = ctx.lattice_reduce(ctx.half_period(k));
        cp.residual = std::abs(gradient_jet(ctx, pp, cp.location.z).value);
        found.push_back(cp);
    }

    for (auto& cp : found) {
        for (int k = 0; k < 4; ++k) {
            if (ctx.torus_distance(cp.location.z, ctx.half_period(k)) < 1e-7) {
                const TorusPoint snapped = ctx.lattice_reduce(ctx.half_period(k));
                cp.location = snapped;
                cp.residual = std::abs(gradient_jet(ctx, pp, snapped.z).value);
            }
        }
        cp.kind = cp.location.is_half_period(1e-9) ? CriticalKind::Trivial : CriticalKind::Nontrivial;
    }

    std::sort(found.begin(), found.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.location.r != b.location.r)
            return a.location.r < b.location.r;
        return a.location.s < b.location.s;
    });

    std::vector<CriticalPoint> unique;
    for (const auto& cp : found) {
        auto same = std::find_if(unique.begin(), unique.end(), [&](const CriticalPoint& u) {
            return pm_distance(ctx, u.location.z, cp.location.z) < options.dedup_radius;
        });
        if (same == unique.end())
            unique.push_back(cp);
        else if (cp.residual < same->residual && same->kind == cp.kind)
            *same = cp;
    }

    for (auto& cp : unique) {
        try {
            cp.hessian_det = classify_hessian(ctx, pair, cp.location);
        } catch (const NumericError&) {
            cp.hessian_det = std::numeric_limits<double>::quiet_NaN();
        }
    }
    std::sort(unique.begin(), unique.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.location.s != b.location.s)
            return a.location.s < b.location.s;
        return a.location.r < b.location.r;
    });
    return unique;
}

cplx hitchin_identity_residual(const EllipticContext& ctx, cplx p, cplx a)
{
    const WpPair wa = ctx.wp(a);
    const cplx z = green_grad(ctx, a);
    return ctx.wp(p).wp - wa.wp - wa.dwp / (2.0 * z);
}

} // namespace ptorus
