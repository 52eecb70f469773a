#pragma once

// Solutions of the curvature equation  Delta u + e^u = 0  built from a GLE with
// unitary monodromy. With y1 a common eigenfunction of the monodromy and
// y2(z) = y1(-z), the developing map f = y1 / y2 gives
//   u = log 8 + 2 log(beta |W|) - 2 log(beta^2 |y1|^2 + |y2|^2),
// W = y1' y2 - y1 y2'. beta = 1 is the even member of the family.

#include <optional>
#include <string>
#include <vector>

#include "ptorus/gle.hpp"

namespace ptorus {

struct EigenBasis {
    cplx q0;
    /// Columns (y, y') of y1 and y2 at q0.
    Mat2 data;
    cplx wronskian;
    double r = 0.0;
    double s = 0.0;
    /// Detour radius used for every evaluation path.
    double radius = 0.0;
    /// Evaluation paths run horizontally at this height; data at q_row.
    double row_height = 0.0;
    cplx q_row;
    Mat2 row_data;
};

/// Throws NotUnitary when is_unitary(rep) fails and IllConditioned when the
/// common eigenvector cannot be separated.
EigenBasis eigenbasis(const EllipticContext& ctx, const GLEParams& params,
                      const MonodromyRep& rep);

/// [[y1, y2], [y1', y2']] at z, continued along the canonical path
/// q0 -> row -> (Re z, row) -> z. Points inside a detour disk are entered
/// radially. z is used as given (no reduction).
Mat2 basis_at(const EllipticContext& ctx, const GLEParams& params, const EigenBasis& basis,
              cplx z);

/// u_beta(z); z is reduced into the period rectangle first.
double u_at(const EllipticContext& ctx, const GLEParams& params, const EigenBasis& basis, cplx z,
            double beta = 1.0);

/// u from basis data at a point.
double u_from_data(const EigenBasis& basis, const Mat2& Y, double beta);

struct SolutionField {
    cplx tau;
    cplx p;
    cplx A;
    double beta = 1.0;
    int resolution = 0;
    double hx = 0.0, hy = 0.0;
    double mask_radius = 0.0;
    /// Node (i, j) at x = i hx, y = j hy, stored at j * (resolution + 1) + i.
    std::vector<double> u;
    std::vector<char> masked;
    /// Distance of each node to the singular set.
    std::vector<double> distance;

    int stride() const { return resolution + 1; }
    double at(int i, int j) const { return u.at(std::size_t(j) * stride() + i); }
    bool is_masked(int i, int j) const { return masked.at(std::size_t(j) * stride() + i) != 0; }
    cplx node(int i, int j) const { return cplx(i * hx, j * hy); }
};

/// u on the (resolution + 1)^2 nodes of [0, 1] x [0, Im tau]; nodes within
/// max(2h, clearance) of a singular point are masked.
SolutionField u_field(const EllipticContext& ctx, const GLEParams& params,
                      const EigenBasis& basis, int resolution, double beta = 1.0);

/// max |Delta_h u + shift-corrected e^u| over nodes whose 5-point stencil is
/// unmasked and which lie at least `exclusion` from every singular point.
double pde_residual(const SolutionField& field, double shift = 0.0, double exclusion = 0.0);

struct ResidualComparison {
    double coarse;
    double fine;
    double ratio;
};

/// Residuals of two fields (fine.resolution == 2 * coarse.resolution) on the
/// coarse nodes farther than `exclusion` from every singular point.
ResidualComparison pde_residual_common(const SolutionField& coarse, const SolutionField& fine,
                                       double exclusion);

/// max |u(z) - u(-z)| over unmasked nodes on a sub-grid of the given step.
double evenness_defect(const EllipticContext& ctx, const GLEParams& params,
                       const EigenBasis& basis, const SolutionField& field, int step = 8);

/// max |u(0, y) - u(1, y)| over unmasked node pairs.
double periodicity_defect(const SolutionField& field);

/// Least-squares slope of u against log|z - center| on circles of radii
/// (0.08, 0.04, 0.02, 0.01) * min(1, Im tau), 8 points each.
double asymptotic_slope(const EllipticContext& ctx, const GLEParams& params,
                        const EigenBasis& basis, cplx center, double beta = 1.0);

/// |slope - expected_coeff|.
double asymptotics_check(const EllipticContext& ctx, const GLEParams& params,
                         const EigenBasis& basis, cplx center, double expected_coeff);

/// |S(f) + 2 I_n| / |2 I_n| at z, with the Schwarzian S(f) of f = y1 / y2 from
/// central differences of steps h and h/2, Richardson-combined.
double schwarzian_defect(const EllipticContext& ctx, const GLEParams& params,
                         const EigenBasis& basis, cplx z, double h = 1e-3);

/// x,y,u,masked rows; masked nodes carry NaN.
std::string field_to_csv(const SolutionField& field);
/// tau, p, A, beta, resolution, mask radius and the PDE residual.
std::string field_header_json(const SolutionField& field);

} // namespace ptorus
