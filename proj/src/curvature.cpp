#include "ptorus/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ptorus/format.hpp"
#include "ptorus/parallel.hpp"

namespace ptorus {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double singular_distance(const EllipticContext& ctx, const GLEParams& params, cplx z)
{
    return std::min({ctx.distance_to_half_periods(z), ctx.torus_distance(z, params.p()),
                     ctx.torus_distance(z, -params.p())});
}

/// Height in [0, Im tau) farthest from the heights of all singular points.
double pick_row_height(const EllipticContext& ctx, const GLEParams& params, double& margin)
{
    const double T = ctx.tau().im();
    const double heights[4] = {0.0, 0.5 * T, params.p().imag(), -params.p().imag()};
    double best_y = 0.0;
    margin = -1.0;
    const int samples = 512;
    for (int k = 0; k < samples; ++k) {
        const double y = T * k / samples;
        double d = std::numeric_limits<double>::infinity();
        for (double h : heights) {
            const double w = std::fmod(std::abs(y - h), T);
            d = std::min(d, std::min(w, T - w));
        }
        if (d > margin) {
            margin = d;
            best_y = y;
        }
    }
    return best_y;
}

cplx reduce_to_rectangle(const EllipticContext& ctx, cplx z)
{
    const cplx tau = ctx.tau().value();
    z -= std::floor(z.imag() / tau.imag()) * tau;
    z -= std::floor(z.real());
    return z;
}

} // namespace

EigenBasis eigenbasis(const EllipticContext& ctx, const GLEParams& params,
                      const MonodromyRep& rep)
{
    const auto rs = is_unitary(rep);
    if (!rs)
        fail(ErrorKind::NotUnitary, "monodromy is not unitary");
    EigenBasis b;
    b.r = (*rs)[0];
    b.s = (*rs)[1];
    b.q0 = rep.basepoint;
    b.radius = 1.02 * default_clearance(ctx, params);

    // Loops act on initial data through the transposes of the monodromy matrices.
    const Mat2 M1 = rep.N1.transpose(), M2 = rep.N2.transpose(), P = M1 * M2;
    const cplx lam = std::exp(-2.0 * kPi * kI * b.s), mu = std::exp(2.0 * kPi * kI * b.r);
    auto gap = [](const Mat2& m) {
        return std::abs(std::sqrt(m.trace() * m.trace() - 4.0 * m.determinant()));
    };
    const Mat2* best = &M1;
    for (const Mat2* m : {&M2, &P})
        if (gap(*m) > gap(*best))
            best = m;
    Eigen::ComplexEigenSolver<Mat2> es(*best);
    Eigen::Vector2cd v1;
    double res = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k) {
        const Eigen::Vector2cd v = es.eigenvectors().col(k).normalized();
        const double e = (M1 * v - lam * v).norm() + (M2 * v - mu * v).norm();
        if (e < res) {
            res = e;
            v1 = v;
        }
    }
    if (res > 1e-6)
        fail(ErrorKind::IllConditioned, "no common eigenvector with the expected eigenvalues");

    // y2(z) = y1(-z): continue y1 to -q0 and flip the derivative.
    Mat2 Y0 = Mat2::Zero();
    Y0.col(0) = v1;
    const Mat2 Ym = propagate(ctx, params, detour_segment(ctx, params, b.q0, -b.q0, b.radius), Y0);
    b.data.col(0) = v1;
    b.data(0, 1) = Ym(0, 0);
    b.data(1, 1) = -Ym(1, 0);
    b.wronskian = b.data(1, 0) * b.data(0, 1) - b.data(0, 0) * b.data(1, 1);
    if (std::abs(b.wronskian) < 1e-10)
        fail(ErrorKind::IllConditioned, "y1(z) and y1(-z) are linearly dependent");

    double margin = 0.0;
    b.row_height = pick_row_height(ctx, params, margin);
    if (margin < 1.5 * b.radius)
        fail(ErrorKind::NoValidBasepoint, "no horizontal row clears the singular points");
    b.q_row = cplx(b.q0.real(), b.row_height);
    b.row_data = propagate(ctx, params, detour_segment(ctx, params, b.q0, b.q_row, b.radius), b.data);
    return b;
}

Mat2 basis_at(const EllipticContext& ctx, const GLEParams& params, const EigenBasis& basis,
              cplx z)
{
    cplx t = z;
    std::optional<cplx> center;
    for (cplx c : singular_points_near(ctx, params, z, 1)) {
        const double d = std::abs(z - c);
        if (d < basis.radius) {
            if (d < ctx.pole_clearance())
                fail(ErrorKind::PoleProximity, "evaluation point is a singular point");
            center = c;
            t = c + basis.radius * (z - c) / d;
        }
    }
    const cplx corner(t.real(), basis.row_height);
    Mat2 Y = propagate(ctx, params, detour_segment(ctx, params, basis.q_row, corner, basis.radius),
                       basis.row_data);
    Y = propagate(ctx, params, detour_segment(ctx, params, corner, t, basis.radius), Y);
    if (center)
        Y = propagate(ctx, params, detour_segment(ctx, params, t, z, basis.radius, 24, center), Y);
    return Y;
}

double u_from_data(const EigenBasis& basis, const Mat2& Y, double beta)
{
    const double a = std::norm(Y(0, 0)), b = std::norm(Y(0, 1));
    return std::log(8.0) + 2.0 * std::log(beta * std::abs(basis.wronskian)) -
           2.0 * std::log(beta * beta * a + b);
}

double u_at(const EllipticContext& ctx, const GLEParams& params, const EigenBasis& basis, cplx z,
            double beta)
{
    if (!(beta > 0.0))
        fail(ErrorKind::InvalidArgument, "beta must be positive");
    return u_from_data(basis, basis_at(ctx, params, basis, reduce_to_rectangle(ctx, z)), beta);
}

SolutionField u_field(const EllipticContext& ctx, const GLEParams& params,
                      const EigenBasis& basis, int resolution, double beta)
{
    if (resolution < 32)
        fail(ErrorKind::InvalidArgument, "resolution must be at least 32");
    if (!(beta > 0.0))
        fail(ErrorKind::InvalidArgument, "beta must be positive");
    SolutionField f;
    f.tau = ctx.tau().value();
    f.p = params.p();
    f.A = params.A();
    f.beta = beta;
    f.resolution = resolution;
    f.hx = 1.0 / resolution;
    f.hy = ctx.tau().im() / resolution;
    f.mask_radius = std::max(2.0 * std::max(f.hx, f.hy), basis.radius);
    const int n = resolution + 1;
    f.u.assign(std::size_t(n) * n, kNaN);
    f.masked.assign(std::size_t(n) * n, 0);
    f.distance.assign(std::size_t(n) * n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t k = std::size_t(j) * n + i;
            f.distance[k] = singular_distance(ctx, params, f.node(i, j));
            f.masked[k] = f.distance[k] < f.mask_radius;
        }

    const double R = f.mask_radius;
    const double y_row = basis.row_height;
    {
        double margin = 0.0;
        pick_row_height(ctx, params, margin);
        if (margin < R)
            fail(ErrorKind::NoValidBasepoint, "evaluation row too close to a singular point");
    }

    // Data at (x_i, row) by sweeping along the row in both directions.
    std::vector<Mat2> row(n);
    const double x0 = basis.q_row.real();
    {
        cplx prev = basis.q_row;
        Mat2 Y = basis.row_data;
        for (int i = 0; i < n; ++i) {
            if (f.node(i, 0).real() < x0)
                continue;
            const cplx z(i * f.hx, y_row);
            Y = propagate(ctx, params, detour_segment(ctx, params, prev, z, R), Y);
            row[i] = Y;
            prev = z;
        }
        prev = basis.q_row;
        Y = basis.row_data;
        for (int i = n - 1; i >= 0; --i) {
            if (f.node(i, 0).real() >= x0)
                continue;
            const cplx z(i * f.hx, y_row);
            Y = propagate(ctx, params, detour_segment(ctx, params, prev, z, R), Y);
            row[i] = Y;
            prev = z;
        }
    }

    parallel_for(std::size_t(n), [&](std::size_t col) {
        const int i = int(col);
        const cplx start(i * f.hx, y_row);
        for (int dir : {1, -1}) {
            cplx prev = start;
            Mat2 Y = row[i];
            const int first = int(std::ceil(y_row / f.hy));
            int j = dir > 0 ? first : first - 1;
            for (; j >= 0 && j < n; j += dir) {
                if (f.is_masked(i, j))
                    continue;
                const cplx z = f.node(i, j);
                Y = propagate(ctx, params, detour_segment(ctx, params, prev, z, R), Y);
                f.u[std::size_t(j) * n + i] = u_from_data(basis, Y, beta);
                prev = z;
            }
        }
    });
    return f;
}

namespace {

double node_residual(const SolutionField& f, int i, int j, double shift)
{
    const double c = f.at(i, j) + shift;
    const double lap = (f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at(i - 1, j)) / (f.hx * f.hx) +
                       (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) / (f.hy * f.hy);
    return std::abs(lap + std::exp(c));
}

bool stencil_free(const SolutionField& f, int i, int j)
{
    return !f.is_masked(i, j) && !f.is_masked(i + 1, j) && !f.is_masked(i - 1, j) &&
           !f.is_masked(i, j + 1) && !f.is_masked(i, j - 1);
}

} // namespace

double pde_residual(const SolutionField& f, double shift, double exclusion)
{
    double worst = 0.0;
    for (int j = 1; j < f.resolution; ++j)
        for (int i = 1; i < f.resolution; ++i)
            if (stencil_free(f, i, j) && f.distance[std::size_t(j) * f.stride() + i] >= exclusion)
                worst = std::max(worst, node_residual(f, i, j, shift));
    return worst;
}

ResidualComparison pde_residual_common(const SolutionField& coarse, const SolutionField& fine,
                                       double exclusion)
{
    if (fine.resolution != 2 * coarse.resolution)
        fail(ErrorKind::InvalidArgument, "fine grid must have twice the coarse resolution");
    ResidualComparison out{0.0, 0.0, kNaN};
    for (int j = 1; j < coarse.resolution; ++j)
        for (int i = 1; i < coarse.resolution; ++i) {
            if (coarse.distance[std::size_t(j) * coarse.stride() + i] < exclusion)
                continue;
            if (!stencil_free(coarse, i, j) || !stencil_free(fine, 2 * i, 2 * j))
                continue;
            out.coarse = std::max(out.coarse, node_residual(coarse, i, j, 0.0));
            out.fine = std::max(out.fine, node_residual(fine, 2 * i, 2 * j, 0.0));
        }
    out.ratio = out.coarse / out.fine;
    return out;
}

double evenness_defect(const EllipticContext& ctx, const GLEParams& params,
                       const EigenBasis& basis, const SolutionField& field, int step)
{
    if (step < 1)
        fail(ErrorKind::InvalidArgument, "step must be positive");
    double worst = 0.0;
    for (int j = 0; j <= field.resolution; j += step)
        for (int i = 0; i <= field.resolution; i += step) {
            if (field.is_masked(i, j))
                continue;
            const double um = u_at(ctx, params, basis, -field.node(i, j), field.beta);
            worst = std::max(worst, std::abs(field.at(i, j) - um));
        }
    return worst;
}

double periodicity_defect(const SolutionField& f)
{
    double worst = 0.0;
    for (int j = 0; j <= f.resolution; ++j)
        if (!f.is_masked(0, j) && !f.is_masked(f.resolution, j))
            worst = std::max(worst, std::abs(f.at(0, j) - f.at(f.resolution, j)));
    return worst;
}

double asymptotic_slope(const EllipticContext& ctx, const GLEParams& params,
                        const EigenBasis& basis, cplx center, double beta)
{
    const double m = std::min(1.0, ctx.tau().im());
    const double radii[4] = {0.08 * m, 0.04 * m, 0.02 * m, 0.01 * m};
    for (cplx c : singular_points_near(ctx, params, center, 1)) {
        const double d = std::abs(c - center);
        if (d > 1e-9 && d < radii[0] + basis.radius)
            fail(ErrorKind::CircleIntersectsSingularity,
                 "sampling circles come too close to another singular point");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (double rho : radii)
        for (int k = 0; k < 8; ++k) {
            const cplx z = center + rho * std::exp(kI * (2.0 * kPi * (k + 0.5) / 8.0));
            const double u = u_from_data(basis, basis_at(ctx, params, basis, z), beta);
            const double x = std::log(rho);
            sx += x;
            sy += u;
            sxx += x * x;
            sxy += x * u;
            ++count;
        }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

double asymptotics_check(const EllipticContext& ctx, const GLEParams& params,
                         const EigenBasis& basis, cplx center, double expected_coeff)
{
    return std::abs(asymptotic_slope(ctx, params, basis, center) - expected_coeff);
}

double schwarzian_defect(const EllipticContext& ctx, const GLEParams& params,
                         const EigenBasis& basis, cplx z, double h)
{
    const Mat2 Y = basis_at(ctx, params, basis, z);
    auto f_at = [&](double t) {
        if (t == 0.0)
            return Y(0, 0) / Y(0, 1);
        PathSpec path;
        path.vertices = {z, z + t};
        const Mat2 Yt = propagate(ctx, params, path, Y);
        return Yt(0, 0) / Yt(0, 1);
    };
    auto central = [&](double k) {
        const cplx f0 = f_at(0.0), fp = f_at(k), fm = f_at(-k), fpp = f_at(2 * k),
                   fmm = f_at(-2 * k);
        const cplx d1 = (fp - fm) / (2.0 * k);
        const cplx d2 = (fp - 2.0 * f0 + fm) / (k * k);
        const cplx d3 = (fpp - 2.0 * fp + 2.0 * fm - fmm) / (2.0 * k * k * k);
        return d3 / d1 - 1.5 * (d2 / d1) * (d2 / d1);
    };
    // Central differences have an even error expansion; one Richardson step.
    const cplx S = (4.0 * central(0.5 * h) - central(h)) / 3.0;
    const cplx target = -2.0 * potential(ctx, params, z);
    return std::abs(S - target) / std::abs(target);
}

std::string field_to_csv(const SolutionField& f)
{
    std::ostringstream os;
    os << "x,y,u,masked\n";
    for (int j = 0; j <= f.resolution; ++j)
        for (int i = 0; i <= f.resolution; ++i) {
            const cplx z = f.node(i, j);
            os << fmt17(z.real()) << ',' << fmt17(z.imag()) << ','
               << fmt17(f.is_masked(i, j) ? kNaN : f.at(i, j)) << ','
               << (f.is_masked(i, j) ? 1 : 0) << '\n';
        }
    return os.str();
}

std::string field_header_json(const SolutionField& f)
{
    std::ostringstream os;
    os << "{\"tau\": " << json_complex(f.tau) << ", \"p\": " << json_complex(f.p)
       << ", \"A\": " << json_complex(f.A) << ", \"beta\": " << json_number(f.beta)
       << ", \"resolution\": " << f.resolution << ", \"mask_radius\": "
       << json_number(f.mask_radius) << ", \"pde_residual\": " << json_number(pde_residual(f))
       << ", \"periodicity_defect\": " << json_number(periodicity_defect(f)) << "}\n";
    return os.str();
}

} // namespace ptorus
