#pragma once

#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "valley/moments.hpp"
#include "valley/types.hpp"

namespace valley {

// Survival-function families compared against the mixture model.

/// Tsallis q-exponential [1 + m (q_ts - 1) t]^(-1/(q_ts - 1)), q_ts > 1.
struct QExponential {
  double m = 1.0;
  double q_ts = 1.5;
};

/// exp(-a t^c).
struct Weibull {
  double a = 1.0;
  double c = 1.0;
};

/// Stretched-exponential mixture evaluated numerically.
struct MFNumeric {
  ModelParams params;
};

using SojournModel = std::variant<QExponential, Weibull, MFNumeric>;

enum class SojournClass { QExponential, Weibull, MFNumeric };

void validate(const SojournModel& model);
double sojourn_model(double t, const SojournModel& model);

/// Points the nonlinear fits operate on: y is ln(<t^q>/Gamma(1+q)); weights
/// are 1/stderr^2 or all ones.
struct CurvePoints {
  std::vector<double> q;
  std::vector<double> y;
  std::vector<double> weight;
};

/// Points of `curve` with q in [q_min, q_max], q != 0.
CurvePoints select_points(const QMomentCurve& curve, double q_min, double q_max);

/// Through-origin regression ln(<t^q>/Gamma(1+q)) = q ln tau. Parameter "ln_tau".
FitResult fit_monofractal(const QMomentCurve& curve, double q_min = 10.0, double q_max = 20.0);

/// Weighted fit of q c0 + b |q|^(alpha/(alpha-1)). Parameters "alpha", "c0", "b".
FitResult fit_mf(const QMomentCurve& curve, double q_min = 0.0, double q_max = 3.5);
FitResult fit_mf(const CurvePoints& points);

/// Weighted fit of q c0 + (b/b1)(1 - e^{-b1 |q|^(1/(alpha-1))}) |q|.
/// Parameters "alpha", "c0", "b", "b1".
FitResult fit_hmf(const QMomentCurve& curve, double q_min = 0.0, double q_max = 20.0);
FitResult fit_hmf(const CurvePoints& points);

/// Least squares on ln Psi. Parameters: q-exponential "m", "q_ts"; Weibull
/// "a", "c"; MF numeric "alpha", "c0", "b".
FitResult fit_sojourn(std::span<const double> t_grid, std::span<const double> psi,
                      SojournClass model_class);

MFParams mf_params_of(const FitResult& fit);
HMFParams hmf_params_of(const FitResult& fit);
SojournModel sojourn_model_of(const FitResult& fit, SojournClass model_class);

}  // namespace valley
