#pragma once

// Explicit solutions of the elliptic Painleve VI equation
//   p'' = -(1 / 4 pi^2) sum_k alpha_k wp'(p + omega_k / 2)
// (Hitchin's formula for n = 0 and its lift to n = (1,0,0,0)), the equivalent
// Hamiltonian system in (p, A), and the solvability region Omega_tau^n.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ptorus/elliptic.hpp"
#include "ptorus/green.hpp"
#include "ptorus/index.hpp"

namespace ptorus {

/// Monodromy data (r, s); never in (1/2) Z^2.
struct MonodromyParams {
    cplx r;
    cplx s;

    /// Throws NumericError(HalfLatticeInput) when 2r and 2s are both within
    /// tol of integers.
    void validate(double tol = 1e-9) const;
    bool is_real(double tol = 1e-12) const noexcept;
    /// r + s*tau
    cplx point(const Tau& tau) const noexcept { return r + s * tau.value(); }
};

/// A solution value: the point p (one of +-p, reduced) and wp(p).
struct PviPoint {
    TorusPoint p;
    cplx wp;
};

/// zeta(r + s tau) - r eta1 - s eta2.
cplx z_rs(const EllipticContext& ctx, const MonodromyParams& params);

/// wp(p) from Hitchin's formula, without inverting wp.
/// Throws DegenerateZ when |Z_{r,s}| < degenerate_tol.
cplx hitchin_wp(const EllipticContext& ctx, const MonodromyParams& params,
                double degenerate_tol = 1e-10);
PviPoint hitchin_p(const EllipticContext& ctx, const MonodromyParams& params,
                   double degenerate_tol = 1e-10);

/// wp of the n = (1,0,0,0) solution,
///   wp + (3 wp' Z^2 + (12 wp^2 - g2) Z + 3 wp wp') / (2 (Z^3 - 3 wp Z - wp')),
/// with wp, wp' at r + s tau. Throws DegenerateDenominator when the
/// denominator is below degenerate_tol in modulus.
cplx okamoto_wp_1000(const EllipticContext& ctx, const MonodromyParams& params,
                     double degenerate_tol = 1e-10);
PviPoint okamoto_p_1000(const EllipticContext& ctx, const MonodromyParams& params,
                        double degenerate_tol = 1e-10);

/// wp(p^n_{r,s}) for n = 0 or (1,0,0,0); UnsupportedIndex otherwise.
cplx solution_wp(const EllipticContext& ctx, const MonodromyParams& params, const PVIIndex& index);
PviPoint solution_p(const EllipticContext& ctx, const MonodromyParams& params,
                    const PVIIndex& index);

/// A one-parameter family tau -> p(tau); each call may return any of the
/// representatives of +-p + Lambda.
using PFamily = std::function<cplx(const EllipticContext&)>;

PFamily solution_family(const MonodromyParams& params, const PVIIndex& index);

/// The representative of +-p + Lambda closest to prev. Throws BranchJump when
/// it is farther than 0.3 lattice diameters.
cplx track_branch(const EllipticContext& ctx, cplx p, cplx prev);

struct EpviTerms {
    cplx p;            // p(tau) on the tracked branch
    cplx p_second;     // central second difference
    cplx rhs;          // -(1/4pi^2) sum alpha_k wp'(p + omega_k/2)
    double residual;   // |p_second - rhs|
};

/// Finite-difference check of the elliptic PVI equation at tau with step h
/// along the real tau direction.
EpviTerms epvi_terms(const PFamily& family, const PVIIndex& index, const Tau& tau, double h,
                     double tol = kDefaultTol);
double epvi_residual(const PFamily& family, const PVIIndex& index, const Tau& tau, double h,
                     double tol = kDefaultTol);

/// -(1/4pi^2) sum alpha_k wp'(p + omega_k/2)
cplx epvi_rhs(const EllipticContext& ctx, const PVIIndex& index, cplx p);

struct HamiltonianState {
    cplx tau;
    cplx p;
    cplx A;
    cplx B;    // recomputed from (p, A, tau), never integrated
};

/// Right-hand side of the Hamiltonian system: (dp/dtau, dA/dtau).
std::array<cplx, 2> hamiltonian_rhs(const EllipticContext& ctx, const PVIIndex& index, cplx p,
                                    cplx A);

struct FlowOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    /// Minimal distance of p to E[2]; 0 means 1e-3 * min(1, Im tau).
    double clearance = 0.0;
    double context_tol = kDefaultTol;
    std::size_t max_steps = 100000;
};

/// Integrates the Hamiltonian system along the straight segment from
/// state0.tau to tau1 and returns steps + 1 equally spaced states (the first
/// is state0 with B recomputed).
std::vector<HamiltonianState> hamiltonian_flow(const PVIIndex& index,
                                               const HamiltonianState& state0, const Tau& tau1,
                                               int steps, const FlowOptions& options = {});

/// State (p, A, B) at tau for a family: p as returned by the family, A from
/// the first Hamiltonian equation with dp/dtau by central differences.
HamiltonianState state_from_family(const PFamily& family, const PVIIndex& index, const Tau& tau,
                                   double h, double tol = kDefaultTol);

/// A = (4 pi i dp/dtau + zeta(2p) - 2 p eta1) / 2 for the Hitchin family.
cplx a_from_hitchin(const MonodromyParams& params, const Tau& tau, double h,
                    double tol = kDefaultTol);

struct OmegaWitness {
    double r;
    double s;
    double residual;    // |wp(p_{r,s}^n) - wp(p)|
};

struct MembershipOptions {
    /// Acceptance of a witness, |wp(p^n_{r,s}) - wp(p)| < match_tol * max(1, |wp(p)|).
    double match_tol = 1e-3;
    /// Forward grid for n = (1,0,0,0): table_res x table_res / 2 over r in [0,1), s in [0,1/2].
    int table_res = 64;
    int candidates = 8;
    int newton_max_iter = 40;
    CriticalSearchOptions critical{};
};

/// Forward image of the (r, s) grid under (r, s) -> wp(p^n_{r,s}); reusable
/// across membership queries with the same tau and index.
class ForwardTable {
public:
    ForwardTable(const EllipticContext& ctx, const PVIIndex& index, int resolution);

    struct Entry {
        double r, s;
        cplx wp;    // NaN where the formula degenerates
    };
    const std::vector<Entry>& entries() const noexcept { return entries_; }

private:
    std::vector<Entry> entries_;
};

/// Some real (r, s) with p^n_{r,s} = +-p, or nothing. n must be 0 or
/// (1,0,0,0).
std::optional<OmegaWitness> omega_membership(const EllipticContext& ctx, const SingularPair& p,
                                             const PVIIndex& index,
                                             const MembershipOptions& options = {},
                                             const ForwardTable* table = nullptr);

struct RegionCell {
    double r_cell;
    double s_cell;
    bool excluded = false;
    bool member = false;
    std::optional<OmegaWitness> witness;
};

struct RegionSample {
    cplx tau;
    PVIIndex index;
    int resolution = 0;
    /// Row-major in s: cells[j * resolution + i] has center
    /// ((i + 1/2) / res, (j + 1/2) / res).
    std::vector<RegionCell> cells;

    const RegionCell& at(int i, int j) const { return cells.at(j * resolution + i); }
};

/// Membership at every cell center p = r_cell + s_cell tau; cells within
/// 2 / resolution of E[2] are excluded (and reported as non-members).
RegionSample omega_scan(const Tau& tau, const PVIIndex& index, int resolution,
                        const MembershipOptions& options = {}, double tol = kDefaultTol);

std::string region_to_csv(const RegionSample& sample);
std::string region_to_json(const RegionSample& sample);

} // namespace ptorus
