#include "valley/moments.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>

#include "valley/error.hpp"
#include "valley/quadrature.hpp"
#include "valley/special.hpp"

namespace valley {

namespace {

void check_order(double q, const char* who) {
  if (!(q > -1.0)) {
    throw DivergentMoment(std::string(who) + ": q-moments exist only for q > -1");
  }
}

void check_alpha(double alpha, const char* who) {
  if (!(alpha > 1.0)) {
    throw DivergentMoment(std::string(who) + ": moments require alpha > 1");
  }
}

template <class W>
const W& weight_as(const ModelParams& params, const char* who) {
  validate(params);
  const auto* w = std::get_if<W>(&params.weight);
  if (w == nullptr) {
    throw UnsupportedModel(std::string(who) + ": wrong weight family (" +
                           weight_name(params.weight) + ")");
  }
  return *w;
}

// ln(sinh(x)/x), even in x.
double log_sinhc(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) return ax * ax / 6.0;
  if (ax < 20.0) return std::log(std::sinh(ax) / ax);
  return ax + std::log1p(-std::exp(-2.0 * ax)) - std::numbers::ln2 - std::log(ax);
}

double log_norm_delta(double q, const ModelParams& p, const Delta& w) {
  return q * (std::log(p.tau0) + p.beta * w.mu);
}

double log_norm_uniform(double q, const ModelParams& p, const Uniform& w) {
  return q * std::log(p.tau0) + log_sinhc(q * w.half_width * p.beta);
}

double log_norm_laplace(double q, const ModelParams& p, const Laplace& w) {
  const double x = q * p.beta * w.sigma;
  if (!(std::abs(x) < 1.0)) {
    throw DivergentMoment("moment_laplace: requires |q| beta sigma < 1");
  }
  return q * std::log(p.tau0) - std::log1p(-x * x);
}

double log_norm_stretched(double q, const ModelParams& p, const StretchedExp& w) {
  check_alpha(w.alpha, "moment_stretched");
  if (q == 0.0) return 0.0;
  return q * (std::log(p.tau0) + p.beta * w.mu) + log_iq_quadrature(q, w.alpha, p.beta * w.sigma) -
         std::numbers::ln2 - log_gamma(1.0 + 1.0 / w.alpha);
}

}  // namespace

void validate(const MFParams& p) {
  if (!(p.alpha > 1.0)) throw DomainError("MFParams: alpha must exceed 1");
  if (!(p.b > 0.0)) throw DomainError("MFParams: b must be positive");
  if (!std::isfinite(p.c0)) throw DomainError("MFParams: c0 must be finite");
}

void validate(const HMFParams& p) {
  if (!(p.alpha > 1.0)) throw DomainError("HMFParams: alpha must exceed 1");
  if (!(p.b > 0.0)) throw DomainError("HMFParams: b must be positive");
  if (!(p.b1 > 0.0)) throw DomainError("HMFParams: b1 must be positive");
  if (!std::isfinite(p.c0)) throw DomainError("HMFParams: c0 must be finite");
}

double conditional_moment(double q, double eps, const ModelParams& params) {
  validate(params);
  check_order(q, "conditional_moment");
  return std::exp(log_gamma(1.0 + q) + q * (std::log(params.tau0) + params.beta * eps));
}

double moment_delta(double q, const ModelParams& params) {
  const auto& w = weight_as<Delta>(params, "moment_delta");
  check_order(q, "moment_delta");
  return std::exp(log_gamma(1.0 + q) + log_norm_delta(q, params, w));
}

double moment_uniform(double q, const ModelParams& params) {
  const auto& w = weight_as<Uniform>(params, "moment_uniform");
  check_order(q, "moment_uniform");
  return std::exp(log_gamma(1.0 + q) + log_norm_uniform(q, params, w));
}

double moment_laplace(double q, const ModelParams& params) {
  const auto& w = weight_as<Laplace>(params, "moment_laplace");
  check_order(q, "moment_laplace");
  return std::exp(log_gamma(1.0 + q) + log_norm_laplace(q, params, w));
}

double moment_gaussian(double q, const ModelParams& params) {
  const auto& w = weight_as<StretchedExp>(params, "moment_gaussian");
  if (w.alpha != 2.0) throw UnsupportedModel("moment_gaussian: requires alpha = 2");
  check_order(q, "moment_gaussian");
  const double x = q * w.sigma * params.beta;
  return std::exp(log_gamma(1.0 + q) + q * (std::log(params.tau0) + params.beta * w.mu) +
                  0.25 * x * x);
}

double moment_stretched(double q, const ModelParams& params) {
  const auto& w = weight_as<StretchedExp>(params, "moment_stretched");
  check_order(q, "moment_stretched");
  return std::exp(log_gamma(1.0 + q) + log_norm_stretched(q, params, w));
}

SeriesResult moment_stretched_series(double q, const ModelParams& params, double tol,
                                     std::size_t n_max) {
  const auto& w = weight_as<StretchedExp>(params, "moment_stretched_series");
  check_alpha(w.alpha, "moment_stretched_series");
  check_order(q, "moment_stretched_series");
  if (n_max == 0) throw DomainError("moment_stretched_series: n_max must be positive");

  const double x = q * w.sigma * params.beta;
  const double log_x = std::log(std::abs(x));  // -inf at q = 0
  auto log_term = [&](std::size_t n) {
    const double m = static_cast<double>(n);
    if (n == 0) return log_gamma(1.0 / w.alpha);
    return log_gamma((2.0 * m + 1.0) / w.alpha) + 2.0 * m * log_x - log_gamma(2.0 * m + 1.0);
  };

  // Terms are positive and unimodal in n; accumulate ln(sum).
  double log_sum = log_term(0);
  double prev = log_sum;
  const double log_tol = std::log(tol);
  SeriesResult out;
  out.terms_used = 1;
  out.converged = false;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double next = log_term(n);
    if (next < prev && next - log_sum < log_tol) {
      out.converged = true;
      break;
    }
    if (n == n_max) break;
    const double hi = std::max(log_sum, next);
    log_sum = hi + std::log(std::exp(log_sum - hi) + std::exp(next - hi));
    prev = next;
    out.terms_used = n + 1;
  }
  out.value = std::exp(log_gamma(1.0 + q) + q * (std::log(params.tau0) + params.beta * w.mu) +
                       log_sum - log_gamma(1.0 / w.alpha));
  return out;
}

double log_norm_moment(double q, const ModelParams& params) {
  validate(params);
  check_order(q, "log_norm_moment");
  return std::visit(
      [&](const auto& w) -> double {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, Delta>) {
          return log_norm_delta(q, params, w);
        } else if constexpr (std::is_same_v<W, Uniform>) {
          return log_norm_uniform(q, params, w);
        } else if constexpr (std::is_same_v<W, Laplace>) {
          return log_norm_laplace(q, params, w);
        } else {
          return log_norm_stretched(q, params, w);
        }
      },
      params.weight);
}

double moment(double q, const ModelParams& params) {
  const double log_norm = log_norm_moment(q, params);
  return std::exp(log_gamma(1.0 + q) + log_norm);
}

double log_iq_quadrature(double q, double alpha, double beta_sigma) {
  if (!(alpha > 1.0)) throw DomainError("iq_quadrature: integral diverges unless alpha > 1");
  if (!(beta_sigma > 0.0)) throw DomainError("iq_quadrature: beta sigma must be positive");
  const double slope = q * beta_sigma;
  auto log_f = [=](double y) { return -std::pow(std::abs(y), alpha) + slope * y; };
  const double peak =
      q == 0.0 ? 0.0
               : std::copysign(std::pow(std::abs(slope) / alpha, 1.0 / (alpha - 1.0)), q);
  auto log_g = [=](double y) { return -quad::pow_abs_increment(peak, y, alpha) + slope * y; };
  return log_f(peak) + quad::log_integrate_peaked(log_g, 0.0, {-peak}, 1e-12);
}

double iq_quadrature(double q, double alpha, double beta_sigma) {
  return std::exp(log_iq_quadrature(q, alpha, beta_sigma));
}

SaddlePointResult saddlepoint_iq(double q, double alpha, double beta_sigma) {
  if (!(alpha > 1.0)) throw DomainError("saddlepoint_iq: requires alpha > 1");
  if (!(beta_sigma > 0.0)) throw DomainError("saddlepoint_iq: beta sigma must be positive");
  if (q == 0.0) throw SaddleDegenerate("saddlepoint_iq: prefactor A(q) is degenerate at q = 0");
  const double aq = std::abs(q);
  const double inv = 1.0 / (alpha - 1.0);
  const double ratio = aq / alpha;

  SaddlePointResult r;
  r.lambda = std::pow(beta_sigma, alpha * inv);
  r.x0 = std::copysign(std::pow(ratio, inv), q);
  r.h2_x0 = alpha * (alpha - 1.0) * std::pow(ratio, (alpha - 2.0) * inv);
  r.h_x0 = -(alpha - 1.0) * std::pow(ratio, alpha * inv);
  r.prefactor = std::pow(r.lambda, 1.0 / alpha) *
                std::sqrt(2.0 * std::numbers::pi / (r.lambda * alpha * (alpha - 1.0))) *
                std::pow(ratio, (2.0 - alpha) * inv / 2.0);
  r.exponent_coeff = r.lambda * (alpha - 1.0) / std::pow(alpha, alpha * inv);
  r.value = r.prefactor * std::exp(r.exponent_coeff * std::pow(aq, alpha * inv));
  return r;
}

double log_moment_mf(double q, const MFParams& p) {
  validate(p);
  check_order(q, "moment_mf");
  return log_gamma(1.0 + q) + q * p.c0 + p.b * std::pow(std::abs(q), p.alpha / (p.alpha - 1.0));
}

double moment_mf(double q, const MFParams& p) { return std::exp(log_moment_mf(q, p)); }

double hmf_exponent(double q, double alpha, double b1) {
  const double aq = std::abs(q);
  return -std::expm1(-b1 * std::pow(aq, 1.0 / (alpha - 1.0))) * aq / b1;
}

double log_moment_hmf(double q, const HMFParams& p) {
  validate(p);
  check_order(q, "moment_hmf");
  return log_gamma(1.0 + q) + q * p.c0 + p.b * hmf_exponent(q, p.alpha, p.b1);
}

double moment_hmf(double q, const HMFParams& p) { return std::exp(log_moment_hmf(q, p)); }

double fd_relation(double sigma, double alpha, double beta) {
  if (!(alpha > 1.0)) throw DomainError("fd_relation: requires alpha > 1");
  if (!(sigma >= 0.0) || !(beta > 0.0)) throw DomainError("fd_relation: sigma >= 0, beta > 0");
  const double k = (1.0 - 1.0 / alpha) * std::pow(beta / alpha, 1.0 / (alpha - 1.0));
  return k * std::pow(sigma, alpha / (alpha - 1.0));
}

double b_from_beta_sigma(double alpha, double beta_sigma) {
  if (!(alpha > 1.0)) throw DomainError("b_from_beta_sigma: requires alpha > 1");
  return (alpha - 1.0) * std::pow(beta_sigma / alpha, alpha / (alpha - 1.0));
}

double beta_sigma_from_b(double alpha, double b) {
  if (!(alpha > 1.0)) throw DomainError("beta_sigma_from_b: requires alpha > 1");
  if (!(b > 0.0)) throw DomainError("beta_sigma_from_b: requires b > 0");
  return alpha * std::pow(b / (alpha - 1.0), (alpha - 1.0) / alpha);
}

Scales scales(const ModelParams& params) {
  const auto& w = weight_as<StretchedExp>(params, "scales");
  if (!(w.alpha > 1.0)) throw DomainError("scales: requires alpha > 1");
  const double bs = params.beta * w.sigma;
  Scales s;
  s.l = std::exp(params.beta * w.mu);
  s.lambda = std::pow(bs, w.alpha / (w.alpha - 1.0));
  s.b = b_from_beta_sigma(w.alpha, bs);
  s.L = std::exp(s.b);
  return s;
}

ModelParams model_from_mf(const MFParams& p) {
  validate(p);
  return ModelParams{1.0, 1.0, StretchedExp{p.c0, beta_sigma_from_b(p.alpha, p.b), p.alpha}};
}

}  // namespace valley
