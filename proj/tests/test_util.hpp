#pragma once

#include <complex>
#include <random>

#include "ptorus/elliptic.hpp"

namespace testutil {

using ptorus::cplx;

inline std::mt19937_64& rng()
{
    static std::mt19937_64 gen(20261019);
    return gen;
}

inline double uniform(double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

/// tau with Re in [-0.5, 0.5] and Im in [0.8, 1.6].
inline ptorus::Tau random_tau()
{
    return ptorus::Tau(cplx(uniform(-0.5, 0.5), uniform(0.8, 1.6)));
}

/// A point r + s*tau with (r, s) in [0,1)^2 at least `margin` (in r,s units)
/// away from every half period.
inline cplx random_point(const ptorus::EllipticContext& ctx, double margin = 0.05)
{
    for (;;) {
        const double r = uniform(0.0, 1.0), s = uniform(0.0, 1.0);
        bool ok = true;
        for (double hr : {0.0, 0.5, 1.0})
            for (double hs : {0.0, 0.5, 1.0})
                if (std::hypot(r - hr, s - hs) < margin)
                    ok = false;
        if (ok)
            return r + s * ctx.tau().value();
    }
}

} // namespace testutil
