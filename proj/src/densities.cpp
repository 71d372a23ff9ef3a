#include "valley/densities.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "valley/error.hpp"
#include "valley/moments.hpp"
#include "valley/quadrature.hpp"
#include "valley/special.hpp"

namespace valley {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sinh(x)/x without the 0/0 at the origin.
double sinhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

// (1 - e^-u)/u.
double one_minus_exp_over(double u) {
  if (u < 1e-8) return 1.0 - 0.5 * u;
  return -std::expm1(-u) / u;
}

void check_time(double t, const char* who) {
  if (!(t >= 0.0)) throw DomainError(std::string(who) + ": t must be non-negative");
}

// psi for the uniform weight:
//   e^{-t/tau+} (1 - e^{-t (1/tau- - 1/tau+)}) / (2 Delta beta t).
double ptd_uniform(double t, double tau0, double db) {
  const double tau_plus = tau0 * std::exp(db);
  const double u = t * 2.0 * std::sinh(db) / tau0;
  return std::exp(-t / tau_plus) * one_minus_exp_over(u) * sinhc(db) / tau0;
}

double sojourn_uniform(double t, double tau0, double db) {
  if (t == 0.0) return 1.0;
  if (db < 1e-3) {
    // Nearly degenerate: average e^{-t/tau(eps)} over the (tiny) support.
    auto f = [&](double x) { return std::exp(-(t / tau0) * std::exp(-db * x)); };
    return 0.5 * boost::math::quadrature::gauss<double, 20>::integrate(f, -1.0, 1.0);
  }
  const double lo = t / (tau0 * std::exp(db));   // t / tau+
  const double hi = t / (tau0 * std::exp(-db));  // t / tau-
  if (hi <= 2.0) {
    // E1(lo) - E1(hi) = 2 db + Ein(lo) - Ein(hi).
    return 1.0 + (entire_exponential_integral(lo) - entire_exponential_integral(hi)) / (2.0 * db);
  }
  return (exponential_integral_e1(lo) - exponential_integral_e1(hi)) / (2.0 * db);
}

double ptd_laplace(double t, double tau0, double sb) {
  if (t == 0.0) return sb < 1.0 ? 1.0 / (tau0 * (1.0 - sb * sb)) : kInf;
  const double k = 1.0 / sb;
  const double z = t / tau0;
  return (lower_incomplete_gamma_scaled(1.0 + k, z) + upper_incomplete_gamma_scaled(1.0 - k, z)) /
         (2.0 * sb * tau0);
}

double sojourn_laplace(double t, double tau0, double sb) {
  if (t == 0.0) return 1.0;
  const double k = 1.0 / sb;
  const double z = t / tau0;
  return 0.5 * k * (lower_incomplete_gamma_scaled(k, z) + upper_incomplete_gamma_scaled(-k, z));
}

// Shared integrand for the stretched-exponential mixture in the standardised
// priority x = (eps - mu)/sigma:
//   log integrand = -|x|^alpha - shift * s x - r e^{-s x},
// with r = t/(tau0 l), s = beta sigma; shift = 1 for psi, 0 for Psi.
double log_mixture_integral(double log_r, double s, double alpha, bool density) {
  const bool has_r = std::isfinite(log_r);
  const double shift = density ? 1.0 : 0.0;
  auto log_f = [=](double x) {
    double v = -std::pow(std::abs(x), alpha) - shift * s * x;
    if (has_r) v -= std::exp(log_r - s * x);
    return v;
  };
  auto slope = [=](double x) {
    const double ax = std::abs(x);
    double d = (x == 0.0) ? 0.0 : -alpha * std::pow(ax, alpha - 1.0) * (x > 0 ? 1.0 : -1.0);
    d -= shift * s;
    if (has_r) d += s * std::exp(log_r - s * x);
    return d;
  };
  const double peak = quad::decreasing_root(slope);
  // Integrate in y = x - peak with every term expanded about the peak, so the
  // integrand keeps full relative precision even when log_f(peak) is huge.
  const double rise = has_r ? std::exp(log_r - s * peak) : 0.0;
  auto log_g = [=](double y) {
    const double v = -quad::pow_abs_increment(peak, y, alpha) - shift * s * y;
    return has_r ? v - rise * std::expm1(-s * y) : v;
  };
  return log_f(peak) + quad::log_integrate_peaked(log_g, 0.0, {-peak}, 1e-10);
}

double ptd_stretched(double t, const ModelParams& p, const StretchedExp& w) {
  const double s = p.beta * w.sigma;
  if (t == 0.0 && (w.alpha < 1.0 || (w.alpha == 1.0 && s >= 1.0))) return kInf;
  const double log_scale = std::log(p.tau0) + p.beta * w.mu;  // ln(tau0 l)
  const double log_r = t == 0.0 ? -kInf : std::log(t) - log_scale;
  const double log_i = log_mixture_integral(log_r, s, w.alpha, true);
  return std::exp(log_i - log_scale - std::log(2.0) - log_gamma(1.0 + 1.0 / w.alpha));
}

double sojourn_stretched(double t, const ModelParams& p, const StretchedExp& w) {
  if (t == 0.0) return 1.0;
  const double s = p.beta * w.sigma;
  const double log_r = std::log(t) - std::log(p.tau0) - p.beta * w.mu;
  const double log_i = log_mixture_integral(log_r, s, w.alpha, false);
  const double v = std::exp(log_i - std::log(2.0) - log_gamma(1.0 + 1.0 / w.alpha));
  return std::min(1.0, v);
}

}  // namespace

const char* to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::HighTemperature:
      return "high_temperature";
    case PhaseLabel::LowTemperature:
      return "low_temperature";
    case PhaseLabel::Critical:
      return "critical";
  }
  return "unknown";
}

double tau_of_epsilon(double eps, const ModelParams& params) {
  return params.tau0 * std::exp(params.beta * eps);
}

double ptd(double t, const ModelParams& params) {
  validate(params);
  check_time(t, "ptd");
  const double tau0 = params.tau0;
  const double beta = params.beta;
  if (const auto* d = std::get_if<Delta>(&params.weight)) {
    const double tau = tau_of_epsilon(d->mu, params);
    return std::exp(-t / tau) / tau;
  }
  if (const auto* u = std::get_if<Uniform>(&params.weight)) {
    return ptd_uniform(t, tau0, u->half_width * beta);
  }
  if (const auto* l = std::get_if<Laplace>(&params.weight)) {
    return ptd_laplace(t, tau0, l->sigma * beta);
  }
  return ptd_stretched(t, params, std::get<StretchedExp>(params.weight));
}

TailValue ptd_tail(double t, const ModelParams& params) {
  validate(params);
  const auto* l = std::get_if<Laplace>(&params.weight);
  if (l == nullptr) throw UnsupportedModel("ptd_tail: only defined for the Laplace weight");
  if (!(t > 0.0)) throw DomainError("ptd_tail: t must be positive");
  const double sb = l->sigma * params.beta;
  const double k = 1.0 / sb;
  const double log_v = log_gamma(1.0 + k) - std::log(2.0 * sb * params.tau0) +
                       (1.0 + k) * (std::log(params.tau0) - std::log(t));
  return TailValue{std::exp(log_v), t < 10.0 * params.tau0};
}

double sojourn(double t, const ModelParams& params) {
  validate(params);
  check_time(t, "sojourn");
  if (const auto* d = std::get_if<Delta>(&params.weight)) {
    return std::exp(-t / tau_of_epsilon(d->mu, params));
  }
  if (const auto* u = std::get_if<Uniform>(&params.weight)) {
    return sojourn_uniform(t, params.tau0, u->half_width * params.beta);
  }
  if (const auto* l = std::get_if<Laplace>(&params.weight)) {
    return sojourn_laplace(t, params.tau0, l->sigma * params.beta);
  }
  return sojourn_stretched(t, params, std::get<StretchedExp>(params.weight));
}

std::optional<double> characteristic_time(const ModelParams& params) {
  validate(params);
  if (const auto* d = std::get_if<Delta>(&params.weight)) {
    return tau_of_epsilon(d->mu, params);
  }
  if (const auto* u = std::get_if<Uniform>(&params.weight)) {
    // Mean of the uniform mixture: (tau+ - tau-) / (2 Delta beta).
    return params.tau0 * sinhc(u->half_width * params.beta);
  }
  if (const auto* l = std::get_if<Laplace>(&params.weight)) {
    const double sb = l->sigma * params.beta;
    if (sb >= 1.0) return std::nullopt;
    return params.tau0 / (1.0 - sb * sb);
  }
  const auto& w = std::get<StretchedExp>(params.weight);
  if (!(w.alpha > 1.0)) return std::nullopt;
  return moment_stretched(1.0, params);
}

PhaseInfo phase(const ModelParams& params) {
  validate(params);
  const auto* l = std::get_if<Laplace>(&params.weight);
  if (l == nullptr) return PhaseInfo{};
  const double sb = params.beta * l->sigma;
  PhaseInfo info;
  info.tail_exponent = 1.0 + 1.0 / sb;
  if (sb < 1.0) {
    info.label = PhaseLabel::HighTemperature;
  } else if (sb == 1.0) {
    info.label = PhaseLabel::Critical;
  } else {
    info.label = PhaseLabel::LowTemperature;
  }
  return info;
}

}  // namespace valley
