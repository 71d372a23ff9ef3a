#pragma once

#include <optional>

#include "valley/types.hpp"

namespace valley {

enum class PhaseLabel { HighTemperature, LowTemperature, Critical };

const char* to_string(PhaseLabel label);

struct PhaseInfo {
  PhaseLabel label = PhaseLabel::HighTemperature;
  // 1 + 1/(sigma beta) for the Laplace weight; empty otherwise.
  std::optional<double> tail_exponent;
};

struct TailValue {
  double value = 0.0;
  // Set when t < 10 tau0, where the power law is not yet accurate.
  bool outside_asymptotic_range = false;
};

/// tau(eps) = tau0 exp(beta eps).
double tau_of_epsilon(double eps, const ModelParams& params);

/// Unconditional pausing-time density psi(t). Closed forms for Delta,
/// Uniform and Laplace weights; adaptive quadrature over the priority for
/// StretchedExp. Returns +inf at t = 0 when the density diverges there.
double ptd(double t, const ModelParams& params);

/// Large-t power law of the Laplace density,
/// Gamma(1 + 1/sb) / (2 sb tau0) (tau0/t)^(1 + 1/sb).
TailValue ptd_tail(double t, const ModelParams& params);

/// Sojourn (survival) probability Psi(t) = P(interval > t).
double sojourn(double t, const ModelParams& params);

/// Mean interevent time <t>, or nullopt when it is infinite (Laplace with
/// beta sigma >= 1, StretchedExp with alpha <= 1).
std::optional<double> characteristic_time(const ModelParams& params);

/// Phase of the Laplace model; every other weight is HighTemperature.
PhaseInfo phase(const ModelParams& params);

}  // namespace valley
