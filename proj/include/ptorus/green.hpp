#pragma once

// Gradient of the torus Green function G and of
//   G_p(z) = (G(z - p) + G(z + p)) / 2,
// and the search for their critical points. Only gradients are computed; the
// potential itself (which needs an additive normalisation) never appears.
//
// Gradients are reported as the complex number -4*pi*dG/dz, which for
// z = r + s*tau with real (r, s) equals zeta(z) - r*eta1 - s*eta2.

#include <optional>
#include <vector>

#include "ptorus/elliptic.hpp"

namespace ptorus {

/// The singular source p of G_p; never a half period.
class SingularPair {
public:
    /// Throws NumericError(HalfLatticeInput) if p is within tol of E[2].
    SingularPair(const EllipticContext& ctx, cplx p, double tol = 1e-9);

    const TorusPoint& p() const noexcept { return p_; }

private:
    TorusPoint p_;
};

enum class CriticalKind { Trivial, Nontrivial };

struct CriticalPoint {
    TorusPoint location;
    CriticalKind kind = CriticalKind::Nontrivial;
    double residual = 0.0;       // |gradient| at location
    double hessian_det = 0.0;    // determinant of the real 2x2 Hessian
};

struct CriticalSearchOptions {
    int seeds_per_axis = 8;
    int max_iter = 50;
    double newton_tol = 1e-12;
    /// A Newton end point counts as a root when |gradient| is below this.
    double accept_tol = 1e-9;
    double seed_exclusion = 0.03;
    double dedup_radius = 1e-6;
};

/// -4*pi*dG/dz at z. Throws PoleProximity at z = 0 mod Lambda.
cplx green_grad(const EllipticContext& ctx, const TorusPoint& z);
cplx green_grad(const EllipticContext& ctx, cplx z);

/// -4*pi*dG_p/dz. Throws PoleProximity at z = +-p mod Lambda.
cplx gp_grad(const EllipticContext& ctx, const SingularPair& pair, cplx z);

/// Gradient of G (no pair) or G_p, with its partial derivatives in x and y.
struct GradientJet {
    cplx value;
    cplx d_x;
    cplx d_y;
};
GradientJet gradient_jet(const EllipticContext& ctx, const SingularPair* pair, cplx z);

/// Critical points of G (pair empty) or G_p, deduplicated modulo Lambda and
/// modulo z -> -z, sorted by (s, r). Half periods are always present as
/// trivial points (omega_1/2..omega_3/2 for G, all four for G_p).
std::vector<CriticalPoint> find_critical_points(const EllipticContext& ctx,
                                                const std::optional<SingularPair>& pair,
                                                const CriticalSearchOptions& options = {});

/// Signed determinant of the central-difference Hessian of G (or G_p) in
/// real coordinates z = x + iy, step 1e-4 * min(1, Im tau).
double classify_hessian(const EllipticContext& ctx, const std::optional<SingularPair>& pair,
                        const TorusPoint& a, double step = 0.0);

/// Left side of the nontrivial critical-point equation written through the
/// addition formula: wp(p) - wp(a) - wp'(a) / (2 Z), Z = green_grad(a).
cplx hitchin_identity_residual(const EllipticContext& ctx, cplx p, cplx a);

} // namespace ptorus
