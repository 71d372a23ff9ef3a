#pragma once

#include <functional>
#include <vector>

namespace valley::quad {

/// Adaptive Gauss-Kronrod (61 point) over a finite interval. Infinite
/// endpoints are mapped by the underlying library.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

/// Integral of exp(log_f(x)) over the real line where log_f is unimodal (or
/// has its mass concentrated around `peak`). The domain is truncated where
/// the integrand falls below e^-40 of its maximum; `breaks` are extra split
/// points (kinks) kept inside the domain. Returns the natural log of the
/// integral so callers can work with very large values.
double log_integrate_peaked(const std::function<double(double)>& log_f, double peak,
                            const std::vector<double>& breaks, double rel_tol = 1e-10);

/// |p + y|^alpha - |p|^alpha without cancellation for small y.
double pow_abs_increment(double p, double y, double alpha);

/// Root of a decreasing function by bracketing outward from 0 and bisecting.
double decreasing_root(const std::function<double(double)>& g);

}  // namespace valley::quad
