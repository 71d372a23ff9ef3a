#include "valley/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "valley/error.hpp"

namespace valley {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIter = 100000;

// lgamma without touching the global signgam.
double lgamma_pure(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

// z^-a gamma(a, z) by the power series, a > 0.
double lower_series_scaled(double a, double z) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= z / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return std::exp(-z) * sum;
}

// z^-a Gamma(a, z) by the Legendre continued fraction (modified Lentz).
double upper_cf_scaled(double a, double z) {
  constexpr double tiny = 1e-300;
  double b = z + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-z) * h;
}

// z^-a Gamma(a, z) for |a| <= 1/2 and z < 1.5:
//   Gamma(a,z) = [Gamma(1+a) - z^a]/a - z^a sum_{k>=1} (-z)^k / (k! (a+k)).
// The bracket goes through expm1 so a -> 0 recovers E1 smoothly.
double upper_small_a_scaled(double a, double z) {
  const double lz = std::log(z);
  double head;
  if (a == 0.0) {
    head = -std::numbers::egamma - lz;
  } else {
    head = (std::expm1(lgamma_pure(1.0 + a)) - std::expm1(a * lz)) / a;
  }
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < kMaxIter; ++k) {
    term *= -z / k;
    const double contrib = term / (a + k);
    sum += contrib;
    if (std::abs(contrib) < std::abs(sum) * kEps) break;
  }
  return head * std::exp(-a * lz) - sum;
}

void check_z(double z, const char* who) {
  if (!(z >= 0.0)) throw DomainError(std::string(who) + ": z must be non-negative");
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  return lgamma_pure(x);
}

double lower_incomplete_gamma_scaled(double a, double z) {
  if (!(a > 0.0)) throw DomainError("lower_incomplete_gamma: a must be positive");
  check_z(z, "lower_incomplete_gamma");
  if (z == 0.0) return 1.0 / a;
  if (std::isinf(z)) return 0.0;
  if (z < a + 1.0) return lower_series_scaled(a, z);
  return std::exp(lgamma_pure(a) - a * std::log(z)) - upper_cf_scaled(a, z);
}

double upper_incomplete_gamma_scaled(double a, double z) {
  check_z(z, "upper_incomplete_gamma");
  if (std::isnan(a)) throw DomainError("upper_incomplete_gamma: a is NaN");
  if (z == 0.0) {
    if (a > 0.0) return std::numeric_limits<double>::infinity();
    throw DomainError("upper_incomplete_gamma: diverges at z = 0 for a <= 0");
  }
  if (std::isinf(z)) return 0.0;
  if (z >= 1.5 && z >= a + 1.0) return upper_cf_scaled(a, z);
  if (a > 0.5) return std::exp(lgamma_pure(a) - a * std::log(z)) - lower_series_scaled(a, z);
  if (a >= -0.5) return upper_small_a_scaled(a, z);

  // Recur downward from b = a + n in [-1/2, 1/2):
  //   z^-(b-1) Gamma(b-1, z) = (z * z^-b Gamma(b, z) - e^-z) / (b - 1).
  const double n = std::ceil(-0.5 - a);
  double b = a + n;
  double u = upper_small_a_scaled(b, z);
  const double ez = std::exp(-z);
  for (int i = 0; i < static_cast<int>(n); ++i) {
    u = (z * u - ez) / (b - 1.0);
    b -= 1.0;
  }
  return u;
}

double lower_incomplete_gamma(double a, double z) {
  if (!(a > 0.0)) throw DomainError("lower_incomplete_gamma: a must be positive");
  check_z(z, "lower_incomplete_gamma");
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return std::tgamma(a);
  if (z < a + 1.0) return std::exp(a * std::log(z)) * lower_series_scaled(a, z);
  return std::tgamma(a) - std::exp(a * std::log(z)) * upper_cf_scaled(a, z);
}

double upper_incomplete_gamma(double a, double z) {
  check_z(z, "upper_incomplete_gamma");
  if (z == 0.0) {
    if (a > 0.0) return std::tgamma(a);
    throw DomainError("upper_incomplete_gamma: diverges at z = 0 for a <= 0");
  }
  if (std::isinf(z)) return 0.0;
  if (a > 0.5 && z < a + 1.0) {
    return std::tgamma(a) - std::exp(a * std::log(z)) * lower_series_scaled(a, z);
  }
  return std::exp(a * std::log(z)) * upper_incomplete_gamma_scaled(a, z);
}

double exponential_integral_e1(double z) {
  if (!(z > 0.0)) throw DomainError("exponential_integral_e1: z must be positive");
  return upper_incomplete_gamma_scaled(0.0, z);
}

double entire_exponential_integral(double z) {
  if (z == 0.0) return 0.0;
  if (std::abs(z) <= 2.0) {
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < kMaxIter; ++k) {
      term *= -z / k;
      const double contrib = -term / k;
      sum += contrib;
      if (std::abs(contrib) < std::abs(sum) * kEps) break;
    }
    return sum;
  }
  if (z < 0.0) throw DomainError("entire_exponential_integral: z < -2 unsupported");
  return exponential_integral_e1(z) + std::numbers::egamma + std::log(z);
}

}  // namespace valley
