#pragma once

// Test-only Green function of the flat torus C/(Z + Z tau), up to an additive
// constant:
//   G(z) = -(1/2pi) log|theta_1(pi z)| + (Im z)^2 / (2 Im tau)
// with theta_1 from its Jacobi triple product (constant factors dropped).

#include <cmath>
#include <complex>

namespace oracle {

using cplx = std::complex<double>;

inline double green_value(cplx z, cplx tau)
{
    constexpr double pi = 3.14159265358979323846;
    // Periodicity lets us move z to |Im z| <= Im(tau)/2, where the product
    // converges geometrically.
    const double n = std::round(z.imag() / tau.imag());
    z -= n * tau;
    const cplx q2 = std::exp(cplx(0.0, 2.0 * pi) * tau);
    const cplx c2 = std::cos(2.0 * pi * z);
    double log_abs = std::log(std::abs(std::sin(pi * z)));
    cplx q2n = 1.0;
    for (int k = 1; k < 200; ++k) {
        q2n *= q2;
        log_abs += std::log(std::abs(1.0 - 2.0 * q2n * c2 + q2n * q2n));
        if (std::abs(q2n) < 1e-18)
            break;
    }
    return -log_abs / (2.0 * pi) + z.imag() * z.imag() / (2.0 * tau.imag());
}

/// -4 pi dG/dz by central differences of green_value.
inline cplx green_grad_fd(cplx z, cplx tau, double h = 1e-5)
{
    constexpr double pi = 3.14159265358979323846;
    const double gx = (green_value(z + h, tau) - green_value(z - h, tau)) / (2.0 * h);
    const double gy =
        (green_value(z + cplx(0.0, h), tau) - green_value(z - cplx(0.0, h), tau)) / (2.0 * h);
    return -4.0 * pi * 0.5 * cplx(gx, -gy);
}

} // namespace oracle
