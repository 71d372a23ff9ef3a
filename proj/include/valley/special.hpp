#pragma once

// Gamma-family special functions needed by the closed-form densities and by
// the Gamma(1 + q) normalisation of every moment.

namespace valley {

/// ln Gamma(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// Lower incomplete gamma  gamma(a, z) = int_0^z x^(a-1) e^-x dx,  a > 0, z >= 0.
double lower_incomplete_gamma(double a, double z);

/// Upper incomplete gamma  Gamma(a, z) = int_z^inf x^(a-1) e^-x dx,  z >= 0.
/// Any real a is accepted for z > 0 (a <= 0 goes through the small-|a| series
/// and the downward recurrence Gamma(a,z) = (Gamma(a+1,z) - z^a e^-z) / a).
/// At z = 0 only a > 0 is finite.
double upper_incomplete_gamma(double a, double z);

/// z^-a gamma(a, z); finite as z -> 0 (limit 1/a).
double lower_incomplete_gamma_scaled(double a, double z);

/// z^-a Gamma(a, z); avoids the overflow of z^a Gamma(a, z) pairs at small z
/// when a < 0 (limit -1/a as z -> 0).
double upper_incomplete_gamma_scaled(double a, double z);

/// Exponential integral E1(z) = Gamma(0, z), z > 0.
double exponential_integral_e1(double z);

/// Ein(z) = int_0^z (1 - e^-t)/t dt, the entire part of E1:
/// E1(z) = -euler_gamma - ln z + Ein(z).
double entire_exponential_integral(double z);

}  // namespace valley
