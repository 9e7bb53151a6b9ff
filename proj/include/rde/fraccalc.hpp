#pragma once

#include "rde/core.hpp"

namespace rde::frac {

// Riemann-Liouville fractional integrals and derivatives of scalar grid
// paths. All operators integrate the singular weight exactly against the
// piecewise-linear interpolant of the data (product integration), so power
// weights near the singularity are handled without Riemann-sum loss.

/// (I_{0+}^alpha f)(t_k) for alpha > 0. Exact for alpha = 1 (cumulative
/// trapezoid) and exact up to roundoff for linear f at any alpha.
Path int_left(const Path& f, double alpha);

/// (I_{1-}^alpha f)(t_k), the reflection of int_left about t -> 1-t.
Path int_right(const Path& f, double alpha);

/// Fractional derivative of order alpha in (0,1), computed from
///   D^alpha f(t) = [ f(t)/t^alpha
///                    + alpha * int_0^t (f(t)-f(s))(t-s)^(-alpha-1) ds ]
///                  / Gamma(1-alpha).
/// The value at t_0 = 0 is singular for f(0) != 0 and is excluded: the
/// output carries 0 at node 0 and is meaningful on t_1..t_n.
Path deriv_left(const Path& f, double alpha);

/// Mirror of deriv_left; node n is the excluded endpoint.
Path deriv_right(const Path& f, double alpha);

/// Cumulative trapezoid integral (the alpha = 1 case, exposed because
/// several operators reduce to it exactly).
Path cumtrapz(const Path& f);

}  // namespace rde::frac
