#pragma once

// Weierstrass functions for the lattice Z + Z*tau, evaluated through the
// Jacobi theta function theta_1 with nome q = exp(i*pi*tau).
//
// Conventions: omega_0 = 0, omega_1 = 1, omega_2 = tau, omega_3 = 1 + tau.
// Half periods are omega_k / 2 and e_k = wp(omega_k / 2) for k = 1, 2, 3.
// Quasi-periods: eta_k = zeta(z + omega_k) - zeta(z) = 2 zeta(omega_k / 2).

#include <array>
#include <complex>
#include <vector>

#include "ptorus/error.hpp"

namespace ptorus {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kDefaultTol = 1e-10;

/// A point of the upper half plane.
class Tau {
public:
    /// Throws NumericError(InvalidTau) unless Im(value) > 0.
    explicit Tau(cplx value);

    cplx value() const noexcept { return value_; }
    double im() const noexcept { return value_.imag(); }
    double re() const noexcept { return value_.real(); }

private:
    cplx value_;
};

/// A point of the torus together with its real lattice coordinates,
/// z = r + s*tau with r, s in [0, 1).
struct TorusPoint {
    cplx z;
    double r = 0.0;
    double s = 0.0;

    /// (2r, 2s) both within tol of integers.
    bool is_half_period(double tol = 1e-9) const noexcept;
};

struct WpPair {
    cplx wp;
    cplx dwp;
};

/// zeta, wp and wp' from a single theta-series evaluation.
struct WeierstrassValues {
    cplx zeta;
    cplx wp;
    cplx dwp;
};

/// Residuals of the identities every context has to satisfy.
struct IdentityResiduals {
    double e_sum;       // |e1 + e2 + e3|
    double legendre;    // |eta1*tau - eta2 - 2*pi*i|
    double g2;          // |g2 + 4(e1e2 + e2e3 + e3e1)|
    double g3;          // |g3 - 4 e1e2e3|
};

/// Precomputed lattice data for one tau. Immutable after construction and
/// therefore safe to share between threads.
class EllipticContext {
public:
    explicit EllipticContext(Tau tau, double tol = kDefaultTol);
    EllipticContext(Tau tau, double tol, double series_tol);

    const Tau& tau() const noexcept { return tau_; }
    cplx nome() const noexcept { return q_; }
    cplx eta1() const noexcept { return eta1_; }
    cplx eta2() const noexcept { return eta2_; }
    cplx e1() const noexcept { return e_[0]; }
    cplx e2() const noexcept { return e_[1]; }
    cplx e3() const noexcept { return e_[2]; }
    /// e_k for k = 1, 2, 3.
    cplx e(int k) const;
    cplx g2() const noexcept { return g2_; }
    cplx g3() const noexcept { return g3_; }
    int series_cutoff() const noexcept { return cutoff_; }
    double tol() const noexcept { return tol_; }
    /// Evaluations closer than this to a lattice point are refused.
    double pole_clearance() const noexcept { return clearance_; }

    /// omega_k / 2 for k = 0..3.
    cplx half_period(int k) const;

    WpPair wp(cplx z) const;
    cplx wzeta(cplx z) const;
    WeierstrassValues eval(cplx z) const;

    /// One of the two preimages +-z of c under wp, canonicalised so that the
    /// reduced coordinates have s < 1/2, then r < 1/2, then the smaller |z|.
    TorusPoint invert_wp(cplx c) const;

    TorusPoint lattice_reduce(cplx z) const;

    /// The representative of {z, -z} picked by the invert_wp rule.
    TorusPoint canonical_pm(cplx z) const;

    /// Real coordinates (r, s) of z = r + s*tau without reduction.
    std::array<double, 2> real_coords(cplx z) const noexcept;

    /// Distance between a and b on the torus (minimum over lattice translates).
    double torus_distance(cplx a, cplx b) const noexcept;

    /// The representative of z + Lambda closest to `near`.
    cplx nearest_representative(cplx z, cplx near) const noexcept;

    /// Distance from z to the 2-torsion set E[2].
    double distance_to_half_periods(cplx z) const noexcept;

    /// Diameter of the period parallelogram, max(|1 + tau|, |1 - tau|).
    double lattice_diameter() const noexcept;

    IdentityResiduals identity_residuals() const;

private:
    struct LogDerivs {
        cplx l1, l2, l3;    // theta1^(k) / theta1 at pi*z
    };
    LogDerivs log_derivs(cplx z) const;

    Tau tau_;
    double tol_;
    double clearance_;
    cplx q_;
    int cutoff_ = 0;
    std::vector<cplx> coeff_;    // 2 (-1)^n q^{(n+1/2)^2}
    cplx eta1_, eta2_;
    std::array<cplx, 3> e_{};
    cplx g2_, g3_;
};

inline EllipticContext make_context(Tau tau, double tol = kDefaultTol)
{
    return EllipticContext(tau, tol);
}

} // namespace ptorus
