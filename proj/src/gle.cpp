#include "ptorus/gle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "ptorus/format.hpp"

namespace ptorus {

cplx apparent_B(const EllipticContext& ctx, const PVIIndex& index, cplx p, cplx A)
{
    if (ctx.lattice_reduce(p).is_half_period())
        fail(ErrorKind::HalfLatticeInput, "p must not be a half period");
    const WeierstrassValues d = ctx.eval(2.0 * p);
    cplx B = A * A - d.zeta * A - 0.75 * d.wp;
    for (int k = 0; k < 4; ++k)
        if (index.weight(k) != 0)
            B -= double(index.weight(k)) * ctx.wp(p - ctx.half_period(k)).wp;
    return B;
}

GLEParams::GLEParams(const EllipticContext& ctx, const PVIIndex& index, cplx p, cplx A)
    : index_(index), p_(p), A_(A), B_(apparent_B(ctx, index, p, A)), tau_(ctx.tau().value())
{
}

GLEParams GLEParams::with_b_shift(const EllipticContext& ctx, const PVIIndex& index, cplx p,
                                  cplx A, cplx b_shift)
{
    GLEParams g(ctx, index, p, A);
    g.B_ += b_shift;
    return g;
}

cplx potential(const EllipticContext& ctx, const GLEParams& params, cplx z)
{
    const cplx p = params.p();
    const WeierstrassValues a = ctx.eval(z + p);
    const WeierstrassValues b = ctx.eval(z - p);
    cplx I = 0.75 * (a.wp + b.wp) + params.A() * (a.zeta - b.zeta) + params.B();
    for (int k = 0; k < 4; ++k)
        if (params.index().weight(k) != 0)
            I += double(params.index().weight(k)) * ctx.wp(z - ctx.half_period(k)).wp;
    return I;
}

namespace {

/// E[2] and +-p, one representative each.
std::vector<cplx> singular_base(const EllipticContext& ctx, const GLEParams& params)
{
    return {ctx.half_period(0), ctx.half_period(1), ctx.half_period(2), ctx.half_period(3),
            params.p(), -params.p()};
}

double point_segment_distance(cplx c, cplx a, cplx b)
{
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0)
        return std::abs(c - a);
    const double t = std::clamp(((c - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(c - (a + t * d));
}

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(cplx a, cplx b, cplx c, cplx d)
{
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
           d4 != 0;
}

/// Translates of the cut [-p, p] that can meet a path near `center`.
std::vector<std::array<cplx, 2>> cut_translates(const EllipticContext& ctx, cplx p, cplx center,
                                                int reach)
{
    const cplx tau = ctx.tau().value();
    const auto [cr, cs] = ctx.real_coords(center);
    std::vector<std::array<cplx, 2>> out;
    for (int m = int(std::floor(cr)) - reach - 1; m <= int(std::floor(cr)) + reach + 1; ++m)
        for (int n = int(std::floor(cs)) - reach - 1; n <= int(std::floor(cs)) + reach + 1; ++n) {
            const cplx l = double(m) + double(n) * tau;
            out.push_back({-p + l, p + l});
        }
    return out;
}

int count_cut_crossings(const EllipticContext& ctx, cplx p, const std::vector<cplx>& path)
{
    int count = 0;
    const auto cuts = cut_translates(ctx, p, path.front(), 2);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        for (const auto& c : cuts)
            if (segments_cross(path[i], path[i + 1], c[0], c[1]))
                ++count;
    return count;
}

double distance_to_cuts(const EllipticContext& ctx, cplx p, cplx z)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cut_translates(ctx, p, z, 1))
        best = std::min(best, point_segment_distance(z, c[0], c[1]));
    return best;
}

struct Disk {
    cplx center;
    /// Direction in which the cut leaves the center, if the center is +-p.
    std::optional<double> cut_angle;
};

/// Appends the polyline a -> b (excluding a) to out, replacing the part inside
/// each disk of radius R by an arc. Arcs around +-p avoid the cut; arcs around
/// half periods take the shorter side.
void append_segment(std::vector<cplx>& out, cplx a, cplx b, const std::vector<Disk>& disks,
                    double R, int arc_segments, std::optional<cplx> skip_center = std::nullopt)
{
    const cplx d = b - a;
    const double len = std::abs(d);
    if (len == 0.0)
        return;
    const cplx u = d / len;
    struct Hit {
        double t_in, t_out;
        const Disk* disk;
    };
    std::vector<Hit> hits;
    for (const auto& disk : disks) {
        if (skip_center && std::abs(disk.center - *skip_center) < 1e-12)
            continue;
        const cplx w = (disk.center - a) * std::conj(u);
        const double t = w.real(), h = std::abs(w.imag());
        if (h >= R)
            continue;
        const double half = std::sqrt(R * R - h * h);
        if (t + half <= 0.0 || t - half >= len)
            continue;
        hits.push_back({t - half, t + half, &disk});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.t_in < y.t_in; });
    for (const auto& hit : hits) {
        const cplx c = hit.disk->center;
        const cplx e1 = a + std::max(hit.t_in, 0.0) * u;
        const cplx e2 = a + std::min(hit.t_out, len) * u;
        const double a1 = std::arg(e1 - c), a2 = std::arg(e2 - c);
        double ccw = std::fmod(a2 - a1 + 4.0 * kPi, 2.0 * kPi);
        bool use_ccw;
        if (hit.disk->cut_angle) {
            const double phi = std::fmod(*hit.disk->cut_angle - a1 + 4.0 * kPi, 2.0 * kPi);
            use_ccw = !(phi < ccw);
        } else {
            use_ccw = ccw <= kPi;
        }
        const double span = use_ccw ? ccw : -(2.0 * kPi - ccw);
        const int pieces =
            std::max(1, int(std::ceil(std::abs(span) / (2.0 * kPi) * arc_segments)));
        const double r1 = std::abs(e1 - c), r2 = std::abs(e2 - c);
        out.push_back(e1);
        for (int k = 1; k < pieces; ++k) {
            const double f = double(k) / pieces;
            out.push_back(c + ((1.0 - f) * r1 + f * r2) * std::exp(kI * (a1 + f * span)));
        }
        out.push_back(e2);
    }
    out.push_back(b);
}

std::vector<Disk> disks_near(const EllipticContext& ctx, const GLEParams& params, cplx center)
{
    std::vector<Disk> disks;
    const cplx p = params.p();
    for (cplx z : singular_points_near(ctx, params, center, 2)) {
        Disk d{z, std::nullopt};
        // Centers congruent to +p see the cut leave towards -p, and vice versa.
        if (ctx.torus_distance(z, p) < 1e-12 && ctx.torus_distance(p, -p) > 1e-12)
            d.cut_angle = std::arg(-p - p);
        else if (ctx.torus_distance(z, -p) < 1e-12)
            d.cut_angle = std::arg(p + p);
        disks.push_back(d);
    }
    return disks;
}

} // namespace

std::vector<cplx> singular_points_near(const EllipticContext& ctx, const GLEParams& params,
                                       cplx center, int reach)
{
    const cplx tau = ctx.tau().value();
    const auto [cr, cs] = ctx.real_coords(center);
    std::vector<cplx> out;
    for (cplx base : singular_base(ctx, params)) {
        const auto [br, bs] = ctx.real_coords(base);
        const int m0 = int(std::floor(cr - br)), n0 = int(std::floor(cs - bs));
        for (int m = m0 - reach; m <= m0 + reach + 1; ++m)
            for (int n = n0 - reach; n <= n0 + reach + 1; ++n)
                out.push_back(base + double(m) + double(n) * tau);
    }
    return out;
}

double PathSpec::length() const
{
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i)
        L += std::abs(vertices[i + 1] - vertices[i]);
    return L;
}

PathSpec PathSpec::reversed() const
{
    PathSpec r = *this;
    std::reverse(r.vertices.begin(), r.vertices.end());
    return r;
}

double path_clearance(const EllipticContext& ctx, const GLEParams& params, const PathSpec& path)
{
    double best = std::numeric_limits<double>::infinity();
    if (path.vertices.empty())
        return best;
    const auto pts = singular_points_near(ctx, params, path.vertices.front(), 3);
    for (cplx c : pts) {
        if (path.vertices.size() == 1)
            best = std::min(best, std::abs(c - path.vertices[0]));
        for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
            best = std::min(best, point_segment_distance(c, path.vertices[i], path.vertices[i + 1]));
    }
    return best;
}

double default_clearance(const EllipticContext& ctx, const GLEParams& params)
{
    double c = 0.05 * std::min(1.0, ctx.tau().im());
    const auto base = singular_base(ctx, params);
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i + 1; j < base.size(); ++j)
            sep = std::min(sep, ctx.torus_distance(base[i], base[j]));
    return std::min(c, 0.45 * sep / 1.02);
}

cplx default_basepoint(const EllipticContext& ctx, const GLEParams& params, double clearance)
{
    const cplx tau = ctx.tau().value();
    const double R = 1.02 * clearance;
    auto ok = [&](cplx q) {
        for (cplx c : singular_points_near(ctx, params, q, 1))
            if (std::abs(q - c) < 2.0 * R)
                return false;
        return distance_to_cuts(ctx, params.p(), q) >= R;
    };
    const cplx q0 = 0.37 + 0.29 * tau;
    // Rings of growing radius up to 0.05, 16 directions each.
    for (int ring = 0; ring <= 10; ++ring) {
        const double rad = 0.005 * ring;
        const int dirs = ring == 0 ? 1 : 16;
        for (int k = 0; k < dirs; ++k) {
            const cplx q = q0 + rad * std::exp(kI * (2.0 * kPi * k / dirs));
            if (ok(q))
                return q;
        }
    }
    fail(ErrorKind::NoValidBasepoint, "no basepoint within 0.05 of 0.37 + 0.29 tau clears the singularities");
}

Cycles build_cycles(const EllipticContext& ctx, const GLEParams& params, std::optional<cplx> q0,
                    const CycleOptions& options)
{
    const double clearance =
        options.clearance > 0.0 ? options.clearance : default_clearance(ctx, params);
    if (options.arc_segments < 16)
        fail(ErrorKind::InvalidArgument, "arc_segments must be at least 16");
    const double R = 1.02 * clearance;
    const cplx q = q0 ? *q0 : default_basepoint(ctx, params, clearance);
    for (cplx c : singular_points_near(ctx, params, q, 1))
        if (std::abs(q - c) < 2.0 * R)
            fail(ErrorKind::NoValidBasepoint, "basepoint too close to a singular point");
    if (distance_to_cuts(ctx, params.p(), q) < R)
        fail(ErrorKind::NoValidBasepoint, "basepoint too close to the cut between -p and p");

    const auto disks = disks_near(ctx, params, q);
    const cplx tau = ctx.tau().value();
    Cycles out;
    out.clearance = clearance;
    out.basepoint = q;

    auto straight = [&](cplx a, cplx b) {
        PathSpec path;
        path.clearance = clearance;
        path.vertices.push_back(a);
        append_segment(path.vertices, a, b, disks, R, options.arc_segments);
        return path;
    };
    out.l1 = straight(q, q + 1.0);
    out.l2 = straight(q, q + tau);
    out.sign_l1 = count_cut_crossings(ctx, params.p(), out.l1.vertices) % 2 ? -1 : 1;
    out.sign_l2 = count_cut_crossings(ctx, params.p(), out.l2.vertices) % 2 ? -1 : 1;

    auto loop = [&](cplx target) {
        const cplx c = ctx.nearest_representative(target, q);
        const double th = std::arg(q - c);
        const cplx entry = c + R * std::exp(kI * th);
        PathSpec path;
        path.clearance = clearance;
        path.vertices.push_back(q);
        append_segment(path.vertices, q, entry, disks, R, options.arc_segments, c);
        const std::vector<cplx> tail = path.vertices;
        const int n = options.arc_segments;
        for (int k = 1; k <= n; ++k)
            path.vertices.push_back(k == n ? entry
                                           : c + R * std::exp(kI * (th + 2.0 * kPi * k / n)));
        for (auto it = tail.rbegin() + 1; it != tail.rend(); ++it)
            path.vertices.push_back(*it);
        return path;
    };
    out.gamma_plus = loop(params.p());
    out.gamma_minus = loop(-params.p());
    return out;
}

PathSpec detour_segment(const EllipticContext& ctx, const GLEParams& params, cplx a, cplx b,
                        double radius, int arc_segments, std::optional<cplx> skip)
{
    PathSpec path;
    path.clearance = radius / 1.02;
    path.vertices.push_back(a);
    append_segment(path.vertices, a, b, disks_near(ctx, params, 0.5 * (a + b)), radius,
                   arc_segments, skip);
    return path;
}

Mat2 transfer_matrix(const EllipticContext& ctx, const GLEParams& params, const PathSpec& path,
                     const TransferOptions& options)
{
    return propagate(ctx, params, path, Mat2::Identity(), options);
}

Mat2 propagate(const EllipticContext& ctx, const GLEParams& params, const PathSpec& path,
               const Mat2& Y0, const TransferOptions& options)
{
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 8>;

    // x = (y1, y2, y1', y2') as re/im pairs.
    State x{Y0(0, 0).real(), Y0(0, 0).imag(), Y0(0, 1).real(), Y0(0, 1).imag(),
            Y0(1, 0).real(), Y0(1, 0).imag(), Y0(1, 1).real(), Y0(1, 1).imag()};
    auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol,
                                           odeint::runge_kutta_fehlberg78<State>());
    std::size_t total = 0;
    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
        const cplx a = path.vertices[i], b = path.vertices[i + 1];
        const double len = std::abs(b - a);
        if (len == 0.0)
            continue;
        const cplx u = (b - a) / len;
        auto system = [&](const State& s, State& ds, double t) {
            const cplx I = potential(ctx, params, a + t * u);
            const cplx y1(s[0], s[1]), y2(s[2], s[3]), d1(s[4], s[5]), d2(s[6], s[7]);
            const cplx v[4] = {u * d1, u * d2, u * I * y1, u * I * y2};
            for (int k = 0; k < 4; ++k) {
                ds[2 * k] = v[k].real();
                ds[2 * k + 1] = v[k].imag();
            }
        };
        double t = 0.0, dt = std::min(len, 0.05);
        try {
            while (t < len) {
                if (t + dt > len)
                    dt = len - t;
                if (stepper.try_step(system, x, t, dt) == odeint::success) {
                    if (++total > options.max_steps)
                        fail(ErrorKind::IntegrationFailure, "too many steps along the path");
                } else if (dt < 1e-14 * len) {
                    fail(ErrorKind::IntegrationFailure, "step size underflow along the path");
                }
            }
        } catch (const NumericError& e) {
            if (e.kind() == ErrorKind::PoleProximity)
                fail(ErrorKind::IntegrationFailure, "path runs into a singular point");
            throw;
        }
    }
    Mat2 T;
    T << cplx(x[0], x[1]), cplx(x[2], x[3]), cplx(x[4], x[5]), cplx(x[6], x[7]);
    return T;
}

double MonodromyRep::det_defect() const
{
    double d = 0.0;
    for (const Mat2* m : {&N1, &N2, &gamma_plus, &gamma_minus})
        d = std::max(d, std::abs(m->determinant() - 1.0));
    return d;
}

double MonodromyRep::commutator_norm() const { return (N1 * N2 - N2 * N1).norm(); }

double MonodromyRep::local_defect() const
{
    const Mat2 I = Mat2::Identity();
    return std::max((gamma_plus + I).norm(), (gamma_minus + I).norm());
}

MonodromyRep monodromy(const EllipticContext& ctx, const GLEParams& params, std::optional<cplx> q0,
                       const CycleOptions& cycle_options, const TransferOptions& options)
{
    const Cycles c = build_cycles(ctx, params, q0, cycle_options);
    // rho(gamma) acts on the row of solutions, which is the transpose of the
    // transfer matrix on initial data.
    MonodromyRep rep;
    rep.basepoint = c.basepoint;
    rep.N1 = double(c.sign_l1) * transfer_matrix(ctx, params, c.l1, options).transpose();
    rep.N2 = double(c.sign_l2) * transfer_matrix(ctx, params, c.l2, options).transpose();
    rep.gamma_plus = transfer_matrix(ctx, params, c.gamma_plus, options).transpose();
    rep.gamma_minus = transfer_matrix(ctx, params, c.gamma_minus, options).transpose();
    return rep;
}

namespace {

double eigen_gap(const Mat2& m)
{
    const cplx tr = m.trace(), det = m.determinant();
    return std::abs(std::sqrt(tr * tr - 4.0 * det));
}

/// Off-diagonal size of V^-1 M V relative to |M|.
double offdiag(const Mat2& V, const Mat2& M)
{
    const Mat2 D = V.inverse() * M * V;
    return (std::abs(D(0, 1)) + std::abs(D(1, 0))) / std::max(1.0, M.norm());
}

cplx wrap_real(cplx x)
{
    double re = x.real() - std::floor(x.real());
    if (re >= 1.0 - 1e-12)
        re = 0.0;
    return {re, x.imag()};
}

} // namespace

MonodromyClass classify(const MonodromyRep& rep, double tol)
{
    const Mat2 P = rep.N1 * rep.N2;
    const Mat2* cands[3] = {&rep.N1, &rep.N2, &P};
    const Mat2* best = cands[0];
    for (const Mat2* m : cands)
        if (eigen_gap(*m) > eigen_gap(*best))
            best = m;

    if (eigen_gap(*best) > 1e-3) {
        Eigen::ComplexEigenSolver<Mat2> es(*best);
        const Mat2 V = es.eigenvectors();
        if (std::abs(V.determinant()) < 1e-12)
            fail(ErrorKind::IllConditioned, "eigenbasis is singular");
        if (offdiag(V, rep.N1) > tol || offdiag(V, rep.N2) > tol)
            fail(ErrorKind::IllConditioned, "N1 and N2 are not simultaneously diagonal");
        const Mat2 D1 = V.inverse() * rep.N1 * V, D2 = V.inverse() * rep.N2 * V;
        // On the first eigenvector N1 = e^{-2 pi i s}, N2 = e^{2 pi i r}.
        cplx s = kI * std::log(D1(0, 0)) / (2.0 * kPi);
        cplx r = std::log(D2(0, 0)) / (2.0 * kPi * kI);
        r = wrap_real(r);
        s = wrap_real(s);
        const cplx nr = wrap_real(-r), ns = wrap_real(-s);
        if (ns.real() < s.real() - 1e-9 || (std::abs(ns.real() - s.real()) <= 1e-9 && nr.real() < r.real()))
            return CompletelyReducible{nr, ns};
        return CompletelyReducible{r, s};
    }

    // All eigenvalues are +-1: N_j = eps_j (I + nilpotent).
    const int e1 = rep.N1.trace().real() >= 0 ? 1 : -1;
    const int e2 = rep.N2.trace().real() >= 0 ? 1 : -1;
    const Mat2 n1 = double(e1) * rep.N1 - Mat2::Identity();
    const Mat2 n2 = double(e2) * rep.N2 - Mat2::Identity();
    const double s1 = n1.norm(), s2 = n2.norm();
    if (s1 < tol && s2 < tol) {
        const cplx s = e1 > 0 ? 0.0 : 0.5, r = e2 > 0 ? 0.0 : 0.5;
        return CompletelyReducible{r, s};
    }
    if (s1 < tol)
        return NotCompletelyReducible{e1, e2, std::nullopt};
    // n2 = C n1 for commuting nilpotents.
    const cplx C = (n1.adjoint() * n2).trace() / (n1.adjoint() * n1).trace();
    if ((n2 - C * n1).norm() > std::max(tol, 1e-3 * s2))
        fail(ErrorKind::IllConditioned, "nilpotent parts are not proportional");
    return NotCompletelyReducible{e1, e2, C};
}

std::optional<std::array<double, 2>> is_unitary(const MonodromyRep& rep, double tol)
{
    MonodromyClass c;
    try {
        c = classify(rep, tol);
    } catch (const NumericError&) {
        return std::nullopt;
    }
    const auto* a = std::get_if<CompletelyReducible>(&c);
    if (!a || std::abs(a->r.imag()) >= tol || std::abs(a->s.imag()) >= tol)
        return std::nullopt;
    return std::array<double, 2>{a->r.real(), a->s.real()};
}

std::string matrix_to_json(const Mat2& m)
{
    std::string out = "[";
    for (int i = 0; i < 2; ++i) {
        out += i ? ", [" : "[";
        for (int j = 0; j < 2; ++j) {
            out += j ? ", " : "";
            out += "[" + json_number(m(i, j).real()) + ", " + json_number(m(i, j).imag()) + "]";
        }
        out += "]";
    }
    return out + "]";
}

} // namespace ptorus
