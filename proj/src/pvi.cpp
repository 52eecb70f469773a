#include "ptorus/pvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "ptorus/format.hpp"
#include "ptorus/gle.hpp"
#include "ptorus/parallel.hpp"

namespace ptorus {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool near_integer(cplx x, double tol)
{
    return std::abs(x - std::round(x.real())) < tol;
}

/// (r, s) mod Z^2 and joint sign: s <= 1/2, then r <= 1/2.
std::array<double, 2> canonical_rs(double r, double s)
{
    auto wrap = [](double x) {
        x -= std::floor(x);
        return x >= 1.0 - 1e-13 ? 0.0 : x;
    };
    r = wrap(r);
    s = wrap(s);
    const double nr = wrap(-r), ns = wrap(-s);
    if (ns < s - 1e-12 || (std::abs(ns - s) <= 1e-12 && nr < r))
        return {nr, ns};
    return {r, s};
}

} // namespace

void MonodromyParams::validate(double tol) const
{
    if (near_integer(2.0 * r, tol) && near_integer(2.0 * s, tol))
        fail(ErrorKind::HalfLatticeInput, "(r, s) must not lie in (1/2) Z^2");
}

bool MonodromyParams::is_real(double tol) const noexcept
{
    return std::abs(r.imag()) <= tol && std::abs(s.imag()) <= tol;
}

cplx z_rs(const EllipticContext& ctx, const MonodromyParams& params)
{
    params.validate();
    return ctx.wzeta(params.point(ctx.tau())) - params.r * ctx.eta1() - params.s * ctx.eta2();
}

cplx hitchin_wp(const EllipticContext& ctx, const MonodromyParams& params, double degenerate_tol)
{
    params.validate();
    const WeierstrassValues v = ctx.eval(params.point(ctx.tau()));
    const cplx Z = v.zeta - params.r * ctx.eta1() - params.s * ctx.eta2();
    if (std::abs(Z) < degenerate_tol)
        fail(ErrorKind::DegenerateZ, "Z_{r,s} vanishes: r + s tau is a critical point of G");
    return v.wp + v.dwp / (2.0 * Z);
}

PviPoint hitchin_p(const EllipticContext& ctx, const MonodromyParams& params,
                   double degenerate_tol)
{
    const cplx c = hitchin_wp(ctx, params, degenerate_tol);
    return {ctx.invert_wp(c), c};
}

cplx okamoto_wp_1000(const EllipticContext& ctx, const MonodromyParams& params,
                     double degenerate_tol)
{
    params.validate();
    const WeierstrassValues v = ctx.eval(params.point(ctx.tau()));
    const cplx Z = v.zeta - params.r * ctx.eta1() - params.s * ctx.eta2();
    const cplx w = v.wp, dw = v.dwp;
    const cplx den = Z * Z * Z - 3.0 * w * Z - dw;
    if (std::abs(den) < degenerate_tol)
        fail(ErrorKind::DegenerateDenominator, "Z^3 - 3 wp Z - wp' vanishes");
    const cplx num = 3.0 * dw * Z * Z + (12.0 * w * w - ctx.g2()) * Z + 3.0 * w * dw;
    return w + num / (2.0 * den);
}

PviPoint okamoto_p_1000(const EllipticContext& ctx, const MonodromyParams& params,
                        double degenerate_tol)
{
    const cplx c = okamoto_wp_1000(ctx, params, degenerate_tol);
    return {ctx.invert_wp(c), c};
}

cplx solution_wp(const EllipticContext& ctx, const MonodromyParams& params, const PVIIndex& index)
{
    if (index.is_zero())
        return hitchin_wp(ctx, params, ctx.tol());
    if (index.is_okamoto_1000())
        return okamoto_wp_1000(ctx, params, ctx.tol());
    fail(ErrorKind::UnsupportedIndex, "explicit solutions exist only for n = 0 and (1,0,0,0)");
}

PviPoint solution_p(const EllipticContext& ctx, const MonodromyParams& params,
                    const PVIIndex& index)
{
    const cplx c = solution_wp(ctx, params, index);
    return {ctx.invert_wp(c), c};
}

PFamily solution_family(const MonodromyParams& params, const PVIIndex& index)
{
    params.validate();
    if (!index.is_zero() && !index.is_okamoto_1000())
        fail(ErrorKind::UnsupportedIndex, "explicit solutions exist only for n = 0 and (1,0,0,0)");
    return [params, index](const EllipticContext& ctx) {
        return solution_p(ctx, params, index).p.z;
    };
}

cplx track_branch(const EllipticContext& ctx, cplx p, cplx prev)
{
    const cplx a = ctx.nearest_representative(p, prev);
    const cplx b = ctx.nearest_representative(-p, prev);
    const cplx best = std::abs(a - prev) <= std::abs(b - prev) ? a : b;
    if (std::abs(best - prev) > 0.3 * ctx.lattice_diameter())
        fail(ErrorKind::BranchJump, "p(tau) jumps across the stencil");
    return best;
}

cplx epvi_rhs(const EllipticContext& ctx, const PVIIndex& index, cplx p)
{
    cplx sum = 0.0;
    for (int k = 0; k < 4; ++k)
        sum += index.alpha_value(k) * ctx.wp(p + ctx.half_period(k)).dwp;
    return -sum / (4.0 * kPi * kPi);
}

EpviTerms epvi_terms(const PFamily& family, const PVIIndex& index, const Tau& tau, double h,
                     double tol)
{
    if (!(h > 0.0))
        fail(ErrorKind::InvalidArgument, "step h must be positive");
    const EllipticContext c0(tau, tol);
    const EllipticContext cp(Tau(tau.value() + h), tol);
    const EllipticContext cm(Tau(tau.value() - h), tol);
    const cplx p0 = family(c0);
    const cplx pp = track_branch(cp, family(cp), p0);
    const cplx pm = track_branch(cm, family(cm), p0);
    EpviTerms t;
    t.p = p0;
    t.p_second = (pp - 2.0 * p0 + pm) / (h * h);
    t.rhs = epvi_rhs(c0, index, p0);
    t.residual = std::abs(t.p_second - t.rhs);
    return t;
}

double epvi_residual(const PFamily& family, const PVIIndex& index, const Tau& tau, double h,
                     double tol)
{
    return epvi_terms(family, index, tau, h, tol).residual;
}

std::array<cplx, 2> hamiltonian_rhs(const EllipticContext& ctx, const PVIIndex& index, cplx p,
                                    cplx A)
{
    const WeierstrassValues d = ctx.eval(2.0 * p);
    const cplx eta1 = ctx.eta1();
    const cplx dp = -kI / (4.0 * kPi) * (2.0 * A - d.zeta + 2.0 * p * eta1);
    cplx bracket = (2.0 * d.wp + 2.0 * eta1) * A - 1.5 * d.dwp;
    for (int k = 0; k < 4; ++k)
        if (index.weight(k) != 0)
            bracket -= double(index.weight(k)) * ctx.wp(p - ctx.half_period(k)).dwp;
    return {dp, kI / (4.0 * kPi) * bracket};
}

std::vector<HamiltonianState> hamiltonian_flow(const PVIIndex& index,
                                               const HamiltonianState& state0, const Tau& tau1,
                                               int steps, const FlowOptions& options)
{
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 4>;

    if (steps < 1)
        fail(ErrorKind::InvalidArgument, "steps must be at least 1");
    const Tau tau0(state0.tau);
    const cplx t0 = tau0.value(), dt = tau1.value() - t0;

    auto clearance_at = [&](const EllipticContext& ctx) {
        return options.clearance > 0.0 ? options.clearance : 1e-3 * std::min(1.0, ctx.tau().im());
    };
    auto make_state = [&](const EllipticContext& ctx, cplx p, cplx A) {
        return HamiltonianState{ctx.tau().value(), p, A, apparent_B(ctx, index, p, A)};
    };

    auto system = [&](const State& x, State& dxdt, double t) {
        // Im tau stays positive on the segment since both endpoints have it.
        const EllipticContext ctx(Tau(t0 + t * dt), options.context_tol);
        const cplx p(x[0], x[1]), A(x[2], x[3]);
        if (ctx.distance_to_half_periods(p) < clearance_at(ctx))
            fail(ErrorKind::HalfPeriodCollision, "p(tau) reaches a half period");
        const auto d = hamiltonian_rhs(ctx, index, p, A);
        const cplx dp = d[0] * dt, dA = d[1] * dt;
        dxdt = {dp.real(), dp.imag(), dA.real(), dA.imag()};
    };

    std::vector<double> times(steps + 1);
    for (int i = 0; i <= steps; ++i)
        times[i] = double(i) / steps;
    times.back() = 1.0;

    std::vector<HamiltonianState> out;
    out.reserve(steps + 1);
    auto observer = [&](const State& x, double t) {
        const EllipticContext ctx(Tau(t0 + t * dt), options.context_tol);
        out.push_back(make_state(ctx, cplx(x[0], x[1]), cplx(x[2], x[3])));
    };

    State x{state0.p.real(), state0.p.imag(), state0.A.real(), state0.A.imag()};
    auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol,
                                             odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, system, x, times.begin(), times.end(), 1e-3, observer,
                                odeint::max_step_checker(options.max_steps));
    } catch (const NumericError&) {
        throw;
    } catch (const std::exception& e) {
        fail(ErrorKind::StepFailure, std::string("Hamiltonian flow: ") + e.what());
    }
    return out;
}

HamiltonianState state_from_family(const PFamily& family, const PVIIndex& index, const Tau& tau,
                                   double h, double tol)
{
    if (!(h > 0.0))
        fail(ErrorKind::InvalidArgument, "step h must be positive");
    const EllipticContext c0(tau, tol);
    const EllipticContext cp(Tau(tau.value() + h), tol);
    const EllipticContext cm(Tau(tau.value() - h), tol);
    const cplx p0 = family(c0);
    const cplx pp = track_branch(cp, family(cp), p0);
    const cplx pm = track_branch(cm, family(cm), p0);
    const cplx dp = (pp - pm) / (2.0 * h);
    const cplx A = 0.5 * (4.0 * kPi * kI * dp + c0.wzeta(2.0 * p0) - 2.0 * p0 * c0.eta1());
    return {tau.value(), p0, A, apparent_B(c0, index, p0, A)};
}

cplx a_from_hitchin(const MonodromyParams& params, const Tau& tau, double h, double tol)
{
    return state_from_family(solution_family(params, PVIIndex::zero()), PVIIndex::zero(), tau, h,
                             tol)
        .A;
}

ForwardTable::ForwardTable(const EllipticContext& ctx, const PVIIndex& index, int resolution)
{
    if (resolution < 4)
        fail(ErrorKind::InvalidArgument, "forward table resolution must be at least 4");
    const int nr = resolution, ns = resolution / 2;
    entries_.resize(std::size_t(nr) * (ns + 1));
    parallel_for(entries_.size(), [&](std::size_t idx) {
        const double r = double(idx % nr) / nr;
        const double s = 0.5 * double(idx / nr) / ns;
        Entry& e = entries_[idx];
        e.r = r;
        e.s = s;
        e.wp = cplx(kNaN, kNaN);
        const MonodromyParams mp{r, s};
        if (near_integer(2.0 * mp.r, 1e-9) && near_integer(2.0 * mp.s, 1e-9))
            return;
        try {
            e.wp = solution_wp(ctx, mp, index);
        } catch (const NumericError& err) {
            if (err.is_input_error())
                throw;
        }
    });
}

namespace {

double chordal(cplx a, cplx b)
{
    return std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
}

/// Newton on real (r, s) for wp(p^n_{r,s}) = c, from a table seed.
std::optional<OmegaWitness> forward_newton(const EllipticContext& ctx, const PVIIndex& index,
                                           cplx c, double r, double s, double accept,
                                           int max_iter)
{
    const bool invert = std::abs(c) > 1.0;
    auto g = [&](double rr, double ss) {
        const cplx w = solution_wp(ctx, MonodromyParams{rr, ss}, index);
        return invert ? 1.0 / w - 1.0 / c : w - c;
    };
    try {
        for (int it = 0; it < max_iter; ++it) {
            const cplx f = g(r, s);
            if (std::abs(f) < 1e-14)
                break;
            const double h = 1e-7;
            const cplx fr = (g(r + h, s) - g(r - h, s)) / (2.0 * h);
            const cplx fs = (g(r, s + h) - g(r, s - h)) / (2.0 * h);
            const double det = fr.real() * fs.imag() - fs.real() * fr.imag();
            if (!(std::abs(det) > 1e-300))
                return std::nullopt;
            double dr = -(fs.imag() * f.real() - fs.real() * f.imag()) / det;
            double ds = -(-fr.imag() * f.real() + fr.real() * f.imag()) / det;
            const double len = std::hypot(dr, ds);
            if (len > 0.05) {
                dr *= 0.05 / len;
                ds *= 0.05 / len;
            }
            r += dr;
            s += ds;
            if (len < 1e-15)
                break;
        }
        const auto [cr, cs] = canonical_rs(r, s);
        const MonodromyParams mp{cr, cs};
        if (near_integer(2.0 * mp.r, 1e-6) && near_integer(2.0 * mp.s, 1e-6))
            return std::nullopt;
        const double res = std::abs(solution_wp(ctx, mp, index) - c);
        if (!(res < accept))
            return std::nullopt;
        return OmegaWitness{cr, cs, res};
    } catch (const NumericError& e) {
        if (e.is_input_error() && e.kind() != ErrorKind::HalfLatticeInput)
            throw;
        return std::nullopt;
    }
}

} // namespace

std::optional<OmegaWitness> omega_membership(const EllipticContext& ctx, const SingularPair& pair,
                                             const PVIIndex& index,
                                             const MembershipOptions& options,
                                             const ForwardTable* table)
{
    if (!index.is_zero() && !index.is_okamoto_1000())
        fail(ErrorKind::UnsupportedIndex, "membership is implemented for n = 0 and (1,0,0,0)");
    const cplx c = ctx.wp(pair.p().z).wp;
    const double accept = options.match_tol * std::max(1.0, std::abs(c));
    std::optional<OmegaWitness> best;
    auto offer = [&](const OmegaWitness& w) {
        if (!best || w.residual < best->residual)
            best = w;
    };

    if (index.is_zero()) {
        for (const auto& cp : find_critical_points(ctx, pair, options.critical)) {
            if (cp.kind != CriticalKind::Nontrivial)
                continue;
            const auto [r, s] = canonical_rs(cp.location.r, cp.location.s);
            try {
                const double res = std::abs(hitchin_wp(ctx, MonodromyParams{r, s}, ctx.tol()) - c);
                if (res < accept)
                    offer({r, s, res});
            } catch (const NumericError& e) {
                if (e.kind() != ErrorKind::DegenerateZ)
                    throw;
            }
        }
        return best;
    }

    std::optional<ForwardTable> own;
    if (!table) {
        own.emplace(ctx, index, options.table_res);
        table = &*own;
    }
    const auto& entries = table->entries();
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (std::isfinite(entries[i].wp.real()))
            ranked.emplace_back(chordal(entries[i].wp, c), i);
    std::sort(ranked.begin(), ranked.end());

    std::vector<std::array<double, 2>> seeds;
    const double spacing = 2.5 / options.table_res;
    for (const auto& [d, i] : ranked) {
        if (int(seeds.size()) >= options.candidates)
            break;
        const double r = entries[i].r, s = entries[i].s;
        bool close = false;
        for (const auto& q : seeds) {
            const double dr = std::remainder(r - q[0], 1.0);
            close = close || std::hypot(dr, s - q[1]) < spacing;
        }
        if (!close)
            seeds.push_back({r, s});
    }
    for (const auto& q : seeds)
        if (auto w = forward_newton(ctx, index, c, q[0], q[1], accept, options.newton_max_iter))
            offer(*w);
    return best;
}

RegionSample omega_scan(const Tau& tau, const PVIIndex& index, int resolution,
                        const MembershipOptions& options, double tol)
{
    if (resolution < 16)
        fail(ErrorKind::InvalidArgument, "resolution must be at least 16");
    if (!index.is_zero() && !index.is_okamoto_1000())
        fail(ErrorKind::UnsupportedIndex, "membership is implemented for n = 0 and (1,0,0,0)");
    const EllipticContext ctx(tau, tol);
    std::optional<ForwardTable> table;
    if (index.is_okamoto_1000())
        table.emplace(ctx, index, options.table_res);

    RegionSample out;
    out.tau = tau.value();
    out.index = index;
    out.resolution = resolution;
    out.cells.resize(std::size_t(resolution) * resolution);
    const double radius = 2.0 / resolution;
    parallel_for(out.cells.size(), [&](std::size_t idx) {
        RegionCell& cell = out.cells[idx];
        cell.r_cell = (double(idx % resolution) + 0.5) / resolution;
        cell.s_cell = (double(idx / resolution) + 0.5) / resolution;
        const cplx p = cell.r_cell + cell.s_cell * tau.value();
        if (ctx.distance_to_half_periods(p) < radius) {
            cell.excluded = true;
            return;
        }
        cell.witness = omega_membership(ctx, SingularPair(ctx, p), index, options,
                                        table ? &*table : nullptr);
        cell.member = cell.witness.has_value();
    });
    return out;
}

std::string region_to_csv(const RegionSample& sample)
{
    std::ostringstream os;
    os << "r_cell,s_cell,member,witness_r,witness_s,residual\n";
    for (const auto& c : sample.cells) {
        os << fmt17(c.r_cell) << ',' << fmt17(c.s_cell) << ',' << (c.member ? 1 : 0) << ',';
        if (c.witness)
            os << fmt17(c.witness->r) << ',' << fmt17(c.witness->s) << ','
               << fmt17(c.witness->residual);
        else
            os << "NaN,NaN,NaN";
        os << '\n';
    }
    return os.str();
}

std::string region_to_json(const RegionSample& sample)
{
    std::ostringstream os;
    os << "{\n  \"tau\": " << json_complex(sample.tau) << ",\n  \"index\": "
       << json_string(sample.index.to_string()) << ",\n  \"resolution\": " << sample.resolution
       << ",\n  \"cells\": [";
    for (std::size_t i = 0; i < sample.cells.size(); ++i) {
        const auto& c = sample.cells[i];
        os << (i ? ",\n    " : "\n    ") << "{\"r_cell\": " << json_number(c.r_cell)
           << ", \"s_cell\": " << json_number(c.s_cell)
           << ", \"member\": " << (c.member ? "true" : "false")
           << ", \"excluded\": " << (c.excluded ? "true" : "false") << ", \"witness\": ";
        if (c.witness)
            os << "{\"r\": " << json_number(c.witness->r) << ", \"s\": "
               << json_number(c.witness->s) << "}, \"residual\": "
               << json_number(c.witness->residual);
        else
            os << "null, \"residual\": null";
        os << '}';
    }
    os << "\n  ]\n}\n";
    return os.str();
}

} // namespace ptorus
