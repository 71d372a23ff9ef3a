#pragma once

#include <cstddef>

#include "valley/types.hpp"

namespace valley {

/// Multifractal (saddle-point) moment law
///   <t^q> ~ Gamma(1+q) exp(q c0 + b |q|^(alpha/(alpha-1))),
/// with c0 = ln tau0 + mu beta and b = ln L.
struct MFParams {
  double alpha = 2.0;
  double c0 = 0.0;
  double b = 1.0;
};

/// Heuristic extension: the exponent |q|^(alpha/(alpha-1)) is replaced by
/// phi(q) = (1/b1) [1 - exp(-b1 |q|^(1/(alpha-1)))] |q|, which saturates to a
/// monofractal slope b/b1 at large q.
struct HMFParams {
  double alpha = 2.0;
  double c0 = 0.0;
  double b = 1.0;
  double b1 = 0.2;
};

void validate(const MFParams& p);
void validate(const HMFParams& p);

/// Laplace-method evaluation of I(q) = int exp(-|y|^alpha + q beta sigma y) dy.
struct SaddlePointResult {
  double value = 0.0;           // A(q) exp(b |q|^(alpha/(alpha-1)))
  double prefactor = 0.0;       // A(q)
  double exponent_coeff = 0.0;  // b
  double lambda = 0.0;          // (beta sigma)^(alpha/(alpha-1))
  double x0 = 0.0;              // minimiser of h(x) = |x|^alpha - q x
  double h_x0 = 0.0;            // h(x0)
  double h2_x0 = 0.0;           // h''(x0)
};

struct SeriesResult {
  double value = 0.0;
  std::size_t terms_used = 0;
  bool converged = true;  // false: n_max reached, value is the partial sum
};

struct Scales {
  double l = 1.0;       // e^{beta mu}
  double b = 0.0;       // (alpha-1) (beta sigma/alpha)^(alpha/(alpha-1))
  double L = 1.0;       // e^b
  double lambda = 0.0;  // (beta sigma)^(alpha/(alpha-1))
};

/// Gamma(1+q) tau0^q e^{q beta eps}.
double conditional_moment(double q, double eps, const ModelParams& params);

double moment_delta(double q, const ModelParams& params);
double moment_uniform(double q, const ModelParams& params);
double moment_laplace(double q, const ModelParams& params);
double moment_gaussian(double q, const ModelParams& params);

/// Exact stretched-exponential moment through quadrature of I(q).
double moment_stretched(double q, const ModelParams& params);

/// Power series of the stretched-exponential moment, truncated once the next
/// term contributes less than `tol` relative to the running sum.
SeriesResult moment_stretched_series(double q, const ModelParams& params, double tol = 1e-12,
                                     std::size_t n_max = 500);

/// Any weight family; StretchedExp goes through moment_stretched.
double moment(double q, const ModelParams& params);

/// ln(<t^q> / Gamma(1+q)) for any weight family, computed in log space.
double log_norm_moment(double q, const ModelParams& params);

/// I(q) by adaptive quadrature (relative tolerance 1e-10).
double iq_quadrature(double q, double alpha, double beta_sigma);
double log_iq_quadrature(double q, double alpha, double beta_sigma);

SaddlePointResult saddlepoint_iq(double q, double alpha, double beta_sigma);

double moment_mf(double q, const MFParams& p);
double log_moment_mf(double q, const MFParams& p);
double moment_hmf(double q, const HMFParams& p);
double log_moment_hmf(double q, const HMFParams& p);

/// Saturating exponent phi(q) of the heuristic law.
double hmf_exponent(double q, double alpha, double b1);

/// Priority location mu at which l and L coincide (b = mu beta):
/// mu = k sigma^(alpha/(alpha-1)), k = (1 - 1/alpha) (beta/alpha)^(1/(alpha-1)).
double fd_relation(double sigma, double alpha, double beta);

Scales scales(const ModelParams& params);

/// b from (alpha, beta sigma) and its inverse.
double b_from_beta_sigma(double alpha, double beta_sigma);
double beta_sigma_from_b(double alpha, double b);

/// A stretched-exponential model with tau0 = beta = 1 reproducing the MF
/// parameters (mu = c0, sigma from b).
ModelParams model_from_mf(const MFParams& p);

}  // namespace valley
