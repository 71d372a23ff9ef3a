#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valley/moments.hpp"
#include "valley/types.hpp"

namespace valley {

enum class InputKind { Timestamps, Durations };

struct IngestOptions {
  InputKind input_kind = InputKind::Timestamps;
  // Intervals longer than this (seconds) are treated as session breaks.
  std::optional<double> gap_cutoff;
  // Resolution floor; durations below it are dropped. 0 drops only t <= 0.
  double min_duration = 0.0;
};

// Drop-reason keys recorded in SeriesMeta::dropped.
inline constexpr const char* kDropNonPositive = "non_positive";
inline constexpr const char* kDropBelowMin = "below_min_duration";
inline constexpr const char* kDropSessionBreak = "session_break";

/// Build an EventSeries from raw timestamps or durations. Throws IngestError
/// (carrying the index) on decreasing timestamps.
EventSeries ingest(std::span<const double> records, const IngestOptions& opts,
                   std::string source = {});

/// q_min, q_min + step, ..., up to q_max; values within rounding of 0 snap to 0.
std::vector<double> make_q_grid(double q_min, double q_max, double step);

/// ln(<t^q>/Gamma(1+q)) per q via log-sum-exp, with delta-method standard
/// errors of the log estimate. Exactly 0 at q = 0.
QMomentCurve empirical_qmoments(const EventSeries& series, std::span<const double> q_grid);

/// Fraction of durations strictly greater than each t.
std::vector<double> empirical_sojourn(const EventSeries& series, std::span<const double> t_grid);

/// One point of a collapse diagnostic. value is empty when the point was
/// skipped (e.g. q = 0 where the diagnostic is undefined).
struct DiagnosticPoint {
  double q = 0.0;
  double abscissa = 0.0;
  std::optional<double> value;
};

using Diagnostic = std::vector<DiagnosticPoint>;

/// ln phi_i(q) = curve(q) + q (ln theta - ln tau_i); abscissa q.
Diagnostic phi_ratio(const QMomentCurve& curve, double tau_i, double theta);

/// curve(q) / (q ln tau_i); abscissa q. q = 0 skipped.
Diagnostic f_F(const QMomentCurve& curve, double tau_i);

/// curve(q)/q - c0; abscissa b q^(1/(alpha-1)). q <= 0 skipped.
Diagnostic f_MF(const QMomentCurve& curve, const MFParams& p);

/// (b1/b) (curve(q)/q - c0); abscissa b1 q^(1/(alpha-1)). q <= 0 skipped.
Diagnostic f_HMF(const QMomentCurve& curve, const HMFParams& p);

/// b1 (curve(q)/q - c0) = b f_HMF(q); abscissa q. q <= 0 skipped.
Diagnostic transform_moment(const QMomentCurve& curve, const HMFParams& p);

/// Rescaled order q_hat = (b1_ref/b1_mkt)^(alpha_mkt-1) q^((alpha_mkt-1)/(alpha_ref-1)),
/// i.e. the order at which the market's saturation variable matches the
/// reference's at q: b1_mkt q_hat^(1/(alpha_mkt-1)) = b1_ref q^(1/(alpha_ref-1)).
double scale_q(double q, const HMFParams& market, const HMFParams& reference);

/// Analytic curves for the moment laws, for synthetic checks and the CLI.
QMomentCurve mf_curve(std::span<const double> q_grid, const MFParams& p);
QMomentCurve hmf_curve(std::span<const double> q_grid, const HMFParams& p);
QMomentCurve model_curve(std::span<const double> q_grid, const ModelParams& params);

}  // namespace valley
