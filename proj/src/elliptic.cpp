#include "ptorus/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ptorus {

namespace {

std::string describe(cplx z)
{
    std::ostringstream os;
    os.precision(17);
    os << z;
    return os.str();
}

// Eisenstein series E4 and E6 in the variable x = q^2 = exp(2 pi i tau).
std::pair<cplx, cplx> eisenstein_e4_e6(cplx x, double tol)
{
    cplx e4 = 1.0, e6 = 1.0;
    cplx xn = 1.0;
    for (int n = 1; n < 10000; ++n) {
        xn *= x;
        const cplx lambert = xn / (1.0 - xn);
        const double n3 = double(n) * n * n;
        const cplx t4 = 240.0 * n3 * lambert;
        const cplx t6 = -504.0 * n3 * n * n * lambert;
        e4 += t4;
        e6 += t6;
        if (std::abs(t6) < tol * 1e-3 && std::abs(t4) < tol * 1e-3)
            break;
    }
    return {e4, e6};
}

} // namespace

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidTau: return "invalid-tau";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::PoleProximity: return "pole-proximity";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::HalfLatticeInput: return "half-lattice-input";
    case ErrorKind::DegenerateZ: return "degenerate-Z";
    case ErrorKind::DegenerateDenominator: return "degenerate-denominator";
    case ErrorKind::BranchJump: return "branch-jump";
    case ErrorKind::HalfPeriodCollision: return "half-period-collision";
    case ErrorKind::StepFailure: return "step-failure";
    case ErrorKind::StepTooLarge: return "step-too-large";
    case ErrorKind::UnsupportedIndex: return "unsupported-index";
    case ErrorKind::NoValidBasepoint: return "no-valid-basepoint";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::NotUnitary: return "not-unitary";
    case ErrorKind::CircleIntersectsSingularity: return "circle-intersects-other-singularity";
    }
    return "unknown";
}

Tau::Tau(cplx value) : value_(value)
{
    if (!(value.imag() > 0.0) || !std::isfinite(value.real()) || !std::isfinite(value.imag()))
        fail(ErrorKind::InvalidTau, "Im(tau) must be positive, got " + describe(value));
}

bool TorusPoint::is_half_period(double tol) const noexcept
{
    auto near_int = [tol](double x) { return std::abs(x - std::round(x)) < tol; };
    return near_int(2.0 * r) && near_int(2.0 * s);
}

EllipticContext::EllipticContext(Tau tau, double tol) : EllipticContext(tau, tol, tol) {}

EllipticContext::EllipticContext(Tau tau, double tol, double series_tol) : tau_(tau), tol_(tol)
{
    if (!(tol > 0.0) || !(series_tol > 0.0))
        fail(ErrorKind::InvalidArgument, "tolerances must be positive");
    const cplx t = tau.value();
    clearance_ = 1e-6 * std::min(1.0, tau.im());
    q_ = std::exp(kI * kPi * t);

    // Smallest N with |q|^(N^2) < series_tol / 10.
    const double log_q = -kPi * tau.im();
    const double target = std::log(series_tol / 10.0);
    cutoff_ = 1;
    while (log_q * cutoff_ * cutoff_ >= target)
        ++cutoff_;

    coeff_.resize(cutoff_ + 1);
    for (int n = 0; n <= cutoff_; ++n) {
        const double h = n + 0.5;
        coeff_[n] = (n % 2 == 0 ? 2.0 : -2.0) * std::exp(kI * kPi * t * (h * h));
    }

    cplx d1 = 0.0, d3 = 0.0;
    for (int n = 0; n <= cutoff_; ++n) {
        const double k = 2.0 * n + 1.0;
        d1 += coeff_[n] * k;
        d3 -= coeff_[n] * (k * k * k);
    }
    eta1_ = -(kPi * kPi / 3.0) * d3 / d1;
    // eta2 = 2 zeta(tau/2), evaluated without lattice reduction.
    eta2_ = 2.0 * (eta1_ * (0.5 * t) + kPi * log_derivs(0.5 * t).l1);

    for (int k = 1; k <= 3; ++k)
        e_[k - 1] = wp(half_period(k)).wp;

    const auto [e4, e6] = eisenstein_e4_e6(q_ * q_, series_tol);
    const double pi2 = kPi * kPi;
    g2_ = (4.0 * pi2 * pi2 / 3.0) * e4;
    g3_ = (8.0 * pi2 * pi2 * pi2 / 27.0) * e6;
}

cplx EllipticContext::e(int k) const
{
    if (k < 1 || k > 3)
        fail(ErrorKind::InvalidArgument, "e_k needs k in {1,2,3}");
    return e_[k - 1];
}

cplx EllipticContext::half_period(int k) const
{
    switch (k) {
    case 0: return 0.0;
    case 1: return 0.5;
    case 2: return 0.5 * tau_.value();
    case 3: return 0.5 * (1.0 + tau_.value());
    default: fail(ErrorKind::InvalidArgument, "half period index must be 0..3");
    }
}

EllipticContext::LogDerivs EllipticContext::log_derivs(cplx z) const
{
    // theta1(x) = sum_n c_n sin((2n+1)x) with x = pi z; derivatives in x.
    const cplx w = std::exp(kI * kPi * z);
    const cplx winv = 1.0 / w;
    const cplx w2 = w * w, w2inv = winv * winv;
    cplx wk = w, wkinv = winv;
    cplx s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int n = 0; n <= cutoff_; ++n) {
        const double k = 2.0 * n + 1.0;
        const cplx sn = (wk - wkinv) / (2.0 * kI);
        const cplx cs = 0.5 * (wk + wkinv);
        const cplx c = coeff_[n];
        s0 += c * sn;
        s1 += c * (k * cs);
        s2 -= c * (k * k * sn);
        s3 -= c * (k * k * k * cs);
        wk *= w2;
        wkinv *= w2inv;
    }
    return {s1 / s0, s2 / s0, s3 / s0};
}

WeierstrassValues EllipticContext::eval(cplx z) const
{
    const cplx t = tau_.value();
    // Move z to the representative with |r|, |s| <= 1/2.
    const double n = std::round(z.imag() / t.imag());
    const cplx z1 = z - n * t;
    const double m = std::round(z1.real() - (z1.imag() / t.imag()) * t.real());
    const cplx zr = z1 - m;
    if (!std::isfinite(zr.real()) || !std::isfinite(zr.imag()))
        fail(ErrorKind::InvalidArgument, "non-finite argument " + describe(z));
    if (std::abs(zr) < clearance_)
        fail(ErrorKind::PoleProximity, "z = " + describe(z) + " is within clearance of a lattice point");

    const LogDerivs d = log_derivs(zr);
    const double pi2 = kPi * kPi;
    WeierstrassValues out;
    out.zeta = eta1_ * zr + kPi * d.l1 + m * eta1_ + n * eta2_;
    out.wp = -eta1_ - pi2 * (d.l2 - d.l1 * d.l1);
    out.dwp = -pi2 * kPi * (d.l3 - 3.0 * d.l1 * d.l2 + 2.0 * d.l1 * d.l1 * d.l1);
    return out;
}

WpPair EllipticContext::wp(cplx z) const
{
    const auto v = eval(z);
    return {v.wp, v.dwp};
}

cplx EllipticContext::wzeta(cplx z) const
{
    return eval(z).zeta;
}

std::array<double, 2> EllipticContext::real_coords(cplx z) const noexcept
{
    const cplx t = tau_.value();
    const double s = z.imag() / t.imag();
    return {z.real() - s * t.real(), s};
}

TorusPoint EllipticContext::lattice_reduce(cplx z) const
{
    auto [r, s] = real_coords(z);
    auto wrap = [](double x) {
        x -= std::floor(x);
        if (x >= 1.0 - 1e-13 || x < 0.0)
            x = 0.0;
        return x;
    };
    r = wrap(r);
    s = wrap(s);
    return {r + s * tau_.value(), r, s};
}

cplx EllipticContext::nearest_representative(cplx z, cplx near) const noexcept
{
    const cplx t = tau_.value();
    const cplx w = z - near;
    const auto [r, s] = real_coords(w);
    const double n0 = std::round(s), m0 = std::round(r);
    cplx best = w;
    double best_abs = std::numeric_limits<double>::infinity();
    for (int dn = -1; dn <= 1; ++dn) {
        for (int dm = -1; dm <= 1; ++dm) {
            const cplx cand = w - (m0 + dm) - (n0 + dn) * t;
            if (std::abs(cand) < best_abs) {
                best_abs = std::abs(cand);
                best = cand;
            }
        }
    }
    return near + best;
}

double EllipticContext::torus_distance(cplx a, cplx b) const noexcept
{
    return std::abs(nearest_representative(a - b, 0.0));
}

double EllipticContext::distance_to_half_periods(cplx z) const noexcept
{
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k)
        d = std::min(d, torus_distance(z, half_period(k)));
    return d;
}

double EllipticContext::lattice_diameter() const noexcept
{
    const cplx t = tau_.value();
    return std::max(std::abs(1.0 + t), std::abs(1.0 - t));
}

IdentityResiduals EllipticContext::identity_residuals() const
{
    const cplx e1 = e_[0], e2 = e_[1], e3 = e_[2];
    return {
        std::abs(e1 + e2 + e3),
        std::abs(eta1_ * tau_.value() - eta2_ - 2.0 * kPi * kI),
        std::abs(g2_ + 4.0 * (e1 * e2 + e2 * e3 + e3 * e1)),
        std::abs(g3_ - 4.0 * e1 * e2 * e3),
    };
}

TorusPoint EllipticContext::canonical_pm(cplx z) const
{
    const TorusPoint a = lattice_reduce(z);
    const TorusPoint b = lattice_reduce(-z);
    constexpr double tie = 1e-9;
    if (std::abs(a.s - b.s) > tie)
        return a.s < b.s ? a : b;
    if (std::abs(a.r - b.r) > tie)
        return a.r < b.r ? a : b;
    return std::abs(a.z) <= std::abs(b.z) ? a : b;
}

TorusPoint EllipticContext::invert_wp(cplx c) const
{
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        fail(ErrorKind::InvalidArgument, "cannot invert wp at a non-finite value");

    const double scale = std::min(1.0, tau_.im());
    const double accept = tol_ * std::max(1.0, std::abs(c));

    std::vector<cplx> seeds;
    if (std::abs(c) > 25.0)
        seeds.push_back(1.0 / std::sqrt(c));
    // Close to a branch value the two preimages merge at omega_k/2; seed from
    // wp(omega_k/2 + d) ~ e_k + wp''(omega_k/2) d^2 / 2.
    for (int k = 1; k <= 3; ++k) {
        const cplx ek = e_[k - 1];
        if (c == ek)
            seeds.push_back(half_period(k));
        const cplx wpp = 6.0 * ek * ek - 0.5 * g2_;
        if (std::abs(wpp) > 0.0) {
            const cplx delta = std::sqrt(2.0 * (c - ek) / wpp);
            if (std::abs(delta) < 0.25 * scale)
                seeds.push_back(half_period(k) + delta);
        }
    }
    {
        constexpr int grid = 6;
        std::vector<std::pair<double, cplx>> ranked;
        for (int i = 0; i < grid; ++i) {
            for (int j = 0; j < grid; ++j) {
                const cplx z = (i + 0.5) / grid + ((j + 0.5) / grid) * tau_.value();
                const cplx v = wp(z).wp;
                ranked.emplace_back(std::abs(v - c) / (1.0 + std::abs(c)), z);
            }
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (int i = 0; i < 8; ++i)
            seeds.push_back(ranked[i].second);
    }

    const double max_step = 0.2 * scale;
    for (cplx z : seeds) {
        bool ok = false;
        int polish = 0;
        try {
            for (int it = 0; it < 100; ++it) {
                const WpPair v = wp(z);
                const cplx f = v.wp - c;
                if (f == 0.0) {
                    ok = true;
                    break;
                }
                if (v.dwp == 0.0) {
                    z += 1e-7 * scale;
                    continue;
                }
                cplx step = f / v.dwp;
                if (std::abs(step) > max_step)
                    step *= max_step / std::abs(step);
                z -= step;
                if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) {
                    if (++polish >= 2) {
                        ok = true;
                        break;
                    }
                }
            }
            ok = std::abs(wp(z).wp - c) < accept;
        } catch (const NumericError&) {
            ok = false;
        }
        if (!ok)
            continue;

        return canonical_pm(z);
    }
    fail(ErrorKind::NoConvergence, "Newton failed to invert wp at c = " + describe(c));
}

} // namespace ptorus
