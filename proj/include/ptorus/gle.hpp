#pragma once

// The generalized Lame equation
//   y'' = I_n(z; p, A, tau) y,
//   I_n = sum_k n_k(n_k+1) wp(z - omega_k/2) + 3/4 (wp(z+p) + wp(z-p))
//         + A (zeta(z+p) - zeta(z-p)) + B,
// with B fixed by the apparentness condition at +-p, and its monodromy.
//
// Transfer matrices act on columns (y, y') at the start of a path and return
// (y, y') at its end.

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ptorus/elliptic.hpp"
#include "ptorus/index.hpp"

namespace ptorus {

using Mat2 = Eigen::Matrix2cd;

/// A^2 - zeta(2p) A - 3/4 wp(2p) - sum_k n_k(n_k+1) wp(p - omega_k/2).
/// Throws HalfLatticeInput if p is a half period.
cplx apparent_B(const EllipticContext& ctx, const PVIIndex& index, cplx p, cplx A);

class GLEParams {
public:
    /// B from apparent_B.
    GLEParams(const EllipticContext& ctx, const PVIIndex& index, cplx p, cplx A);

    /// Same but with B shifted by b_shift (for sensitivity tests; the result
    /// is not apparent unless b_shift = 0).
    static GLEParams with_b_shift(const EllipticContext& ctx, const PVIIndex& index, cplx p,
                                  cplx A, cplx b_shift);

    const PVIIndex& index() const noexcept { return index_; }
    cplx p() const noexcept { return p_; }
    cplx A() const noexcept { return A_; }
    cplx B() const noexcept { return B_; }
    cplx tau() const noexcept { return tau_; }

private:
    GLEParams() = default;
    PVIIndex index_;
    cplx p_, A_, B_, tau_;
};

/// I_n(z). Throws PoleProximity near E[2] (weighted) or +-p.
cplx potential(const EllipticContext& ctx, const GLEParams& params, cplx z);

/// Points of the plane that are singular for the equation, within the
/// parallelogram spanned around `center` by one lattice cell in each
/// direction.
std::vector<cplx> singular_points_near(const EllipticContext& ctx, const GLEParams& params,
                                       cplx center, int reach = 1);

/// A polyline in the plane.
struct PathSpec {
    std::vector<cplx> vertices;
    double clearance = 0.0;

    cplx start() const { return vertices.front(); }
    cplx end() const { return vertices.back(); }
    double length() const;
    PathSpec reversed() const;
};

/// Minimal distance of a path to the singular set (all translates).
double path_clearance(const EllipticContext& ctx, const GLEParams& params, const PathSpec& path);

struct CycleOptions {
    /// 0 means 0.05 * min(1, Im tau), reduced when singular points are closer.
    double clearance = 0.0;
    /// Chords per full detour circle.
    int arc_segments = 24;
};

struct Cycles {
    PathSpec l1;           // q0 -> q0 + 1
    PathSpec l2;           // q0 -> q0 + tau
    PathSpec gamma_plus;   // loop around +p
    PathSpec gamma_minus;  // loop around -p
    /// Sign (-1)^(crossings of L + Lambda) for l1, l2; the straight
    /// translates may cross the cut, which multiplies the monodromy by -I.
    int sign_l1 = 1;
    int sign_l2 = 1;
    double clearance = 0.0;
    cplx basepoint;
};

/// 0.37 + 0.29 tau, moved by up to 0.05 if it is too close to singular
/// points or to the cut L = [-p, p]. Throws NoValidBasepoint.
cplx default_basepoint(const EllipticContext& ctx, const GLEParams& params, double clearance);

double default_clearance(const EllipticContext& ctx, const GLEParams& params);

Cycles build_cycles(const EllipticContext& ctx, const GLEParams& params,
                    std::optional<cplx> q0 = std::nullopt, const CycleOptions& options = {});

struct TransferOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::size_t max_steps = 200000;
};

Mat2 transfer_matrix(const EllipticContext& ctx, const GLEParams& params, const PathSpec& path,
                     const TransferOptions& options = {});

/// Solution matrix [[y1, y2], [y1', y2']] at the end of the path, given its
/// value Y0 at the start.
Mat2 propagate(const EllipticContext& ctx, const GLEParams& params, const PathSpec& path,
               const Mat2& Y0, const TransferOptions& options = {});

/// The segment a -> b with every part inside a disk of the given radius
/// around a singular point (other than `skip`) replaced by an arc. Arcs around
/// +-p stay off the cut, arcs around half periods take the shorter side. The
/// end points must lie outside the disks.
PathSpec detour_segment(const EllipticContext& ctx, const GLEParams& params, cplx a, cplx b,
                        double radius, int arc_segments = 24,
                        std::optional<cplx> skip = std::nullopt);

struct MonodromyRep {
    Mat2 N1, N2;
    Mat2 gamma_plus, gamma_minus;
    cplx basepoint;

    double det_defect() const;          // max |det - 1| over the four matrices
    double commutator_norm() const;     // |N1 N2 - N2 N1|
    double local_defect() const;        // max |gamma_pm + I|
};

MonodromyRep monodromy(const EllipticContext& ctx, const GLEParams& params,
                       std::optional<cplx> q0 = std::nullopt, const CycleOptions& cycles = {},
                       const TransferOptions& options = {});

struct CompletelyReducible {
    cplx r;
    cplx s;
};

struct NotCompletelyReducible {
    int eps1;
    int eps2;
    /// nullopt stands for C = infinity.
    std::optional<cplx> C;
};

using MonodromyClass = std::variant<CompletelyReducible, NotCompletelyReducible>;

/// Case (a): N1 ~ diag(e^{-2 pi i s}, e^{2 pi i s}), N2 ~ diag(e^{2 pi i r}, e^{-2 pi i r})
/// on a common eigenbasis, (r, s) reduced to Re in [0, 1) with s <= 1/2, then
/// r <= 1/2. Case (b): N1 ~ eps1 [[1,0],[1,1]], N2 ~ eps2 [[1,0],[C,1]].
/// Throws IllConditioned when neither case is recognised cleanly.
MonodromyClass classify(const MonodromyRep& rep, double tol = 1e-6);

/// Real (r, s) when the monodromy is unitary, nothing otherwise.
std::optional<std::array<double, 2>> is_unitary(const MonodromyRep& rep, double tol = 1e-6);

/// Row-major [[re, im], ...] nesting.
std::string matrix_to_json(const Mat2& m);

} // namespace ptorus
