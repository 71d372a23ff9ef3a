#include "valley/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "valley/error.hpp"
#include "valley/special.hpp"

namespace valley {

namespace {

void check_options(const IngestOptions& opts) {
  if (!(opts.min_duration >= 0.0)) throw DomainError("ingest: min_duration must be >= 0");
  if (opts.gap_cutoff && !(*opts.gap_cutoff > opts.min_duration)) {
    throw DomainError("ingest: gap_cutoff must exceed min_duration");
  }
}

// Per-q skip rule shared by the f_* diagnostics.
template <class F>
Diagnostic positive_q_diagnostic(const QMomentCurve& curve, F&& point) {
  validate(curve);
  Diagnostic out;
  out.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double q = curve.q_grid[i];
    DiagnosticPoint p{q, q, std::nullopt};
    if (q > 0.0) point(p, curve.log_norm_moment[i]);
    out.push_back(p);
  }
  return out;
}

}  // namespace

EventSeries ingest(std::span<const double> records, const IngestOptions& opts,
                   std::string source) {
  check_options(opts);
  EventSeries out;
  out.meta.source = std::move(source);
  auto& dropped = out.meta.dropped;

  auto accept = [&](double d) {
    if (!(d > 0.0)) {
      ++dropped[kDropNonPositive];
    } else if (d < opts.min_duration) {
      ++dropped[kDropBelowMin];
    } else if (opts.gap_cutoff && d > *opts.gap_cutoff) {
      ++dropped[kDropSessionBreak];
    } else {
      out.durations.push_back(d);
    }
  };

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!std::isfinite(records[i])) {
      throw IngestError("ingest: non-finite record at index " + std::to_string(i), i);
    }
  }
  if (opts.input_kind == InputKind::Durations) {
    out.durations.reserve(records.size());
    for (double d : records) accept(d);
    return out;
  }
  out.durations.reserve(records.empty() ? 0 : records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i] < records[i - 1]) {
      throw IngestError("ingest: timestamps decrease at index " + std::to_string(i), i);
    }
    accept(records[i] - records[i - 1]);
  }
  return out;
}

std::vector<double> make_q_grid(double q_min, double q_max, double step) {
  if (!(step > 0.0) || !(q_max >= q_min) || !(q_min > -1.0)) {
    throw DomainError("make_q_grid: need q_min > -1, q_max >= q_min, step > 0");
  }
  const auto n = static_cast<std::size_t>(std::floor((q_max - q_min) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double q = q_min + static_cast<double>(i) * step;
    // Strip accumulated binary noise so 0.1 steps print as 0.3, not 0.30000000000000004.
    q = std::round(q * 1e12) / 1e12;
    if (std::abs(q) < 1e-12 * step) q = 0.0;
    grid.push_back(q);
  }
  return grid;
}

QMomentCurve empirical_qmoments(const EventSeries& series, std::span<const double> q_grid) {
  if (series.empty()) throw DomainError("empirical_qmoments: empty series");
  QMomentCurve curve;
  curve.q_grid.assign(q_grid.begin(), q_grid.end());
  curve.log_norm_moment.assign(q_grid.size(), 0.0);
  curve.stderr_log.assign(q_grid.size(), 0.0);
  curve.n_samples = series.size();
  validate(curve);

  std::vector<double> logs(series.size());
  for (std::size_t j = 0; j < series.size(); ++j) {
    if (!(series.durations[j] > 0.0)) throw DomainError("empirical_qmoments: non-positive duration");
    logs[j] = std::log(series.durations[j]);
  }
  const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
  const double log_min = *lo_it;
  const double log_max = *hi_it;
  const double log_n = std::log(static_cast<double>(logs.size()));
  const double n = static_cast<double>(logs.size());

  auto estimate = [&](std::size_t i) {
    const double q = curve.q_grid[i];
    if (q == 0.0) return;
    const double shift = q > 0.0 ? q * log_max : q * log_min;
    double s1 = 0.0;
    double s2 = 0.0;
    for (double lt : logs) {
      const double e = std::exp(q * lt - shift);
      s1 += e;
      s2 += e * e;
    }
    const double log_m1 = shift + std::log(s1) - log_n;
    const double log_m2 = 2.0 * shift + std::log(s2) - log_n;
    curve.log_norm_moment[i] = log_m1 - log_gamma(1.0 + q);
    const double rel_var = std::max(0.0, std::expm1(log_m2 - 2.0 * log_m1));
    curve.stderr_log[i] = std::sqrt(rel_var / n);
  };

  // Orders are independent; each writes only its own slot.
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t work = q_grid.size() * logs.size();
  const unsigned workers =
      work < (1u << 20) ? 1u : static_cast<unsigned>(std::min<std::size_t>(hw, q_grid.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < q_grid.size(); ++i) estimate(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < q_grid.size(); i += workers) estimate(i);
      });
    }
  }
  return curve;
}

std::vector<double> empirical_sojourn(const EventSeries& series, std::span<const double> t_grid) {
  if (series.empty()) throw DomainError("empirical_sojourn: empty series");
  std::vector<double> sorted = series.durations;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t >= 0.0)) throw DomainError("empirical_sojourn: t must be non-negative");
    if (i > 0 && !(t > t_grid[i - 1])) throw DomainError("empirical_sojourn: t grid must increase");
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    out.push_back(static_cast<double>(above) / n);
  }
  return out;
}

Diagnostic phi_ratio(const QMomentCurve& curve, double tau_i, double theta) {
  validate(curve);
  if (!(tau_i > 0.0) || !(theta > 0.0)) throw DomainError("phi_ratio: tau_i, theta must be > 0");
  const double shift = std::log(theta) - std::log(tau_i);
  Diagnostic out;
  out.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double q = curve.q_grid[i];
    out.push_back({q, q, curve.log_norm_moment[i] + q * shift});
  }
  return out;
}

Diagnostic f_F(const QMomentCurve& curve, double tau_i) {
  validate(curve);
  if (!(tau_i > 0.0)) throw DomainError("f_F: tau_i must be positive");
  const double log_tau = std::log(tau_i);
  if (log_tau == 0.0) throw DomainError("f_F: ln tau_i must be non-zero");
  Diagnostic out;
  out.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double q = curve.q_grid[i];
    DiagnosticPoint p{q, q, std::nullopt};
    if (q != 0.0) p.value = curve.log_norm_moment[i] / (q * log_tau);
    out.push_back(p);
  }
  return out;
}

Diagnostic f_MF(const QMomentCurve& curve, const MFParams& p) {
  validate(p);
  const double s = 1.0 / (p.alpha - 1.0);
  return positive_q_diagnostic(curve, [&](DiagnosticPoint& pt, double y) {
    pt.abscissa = p.b * std::pow(pt.q, s);
    pt.value = y / pt.q - p.c0;
  });
}

Diagnostic f_HMF(const QMomentCurve& curve, const HMFParams& p) {
  validate(p);
  const double s = 1.0 / (p.alpha - 1.0);
  return positive_q_diagnostic(curve, [&](DiagnosticPoint& pt, double y) {
    pt.abscissa = p.b1 * std::pow(pt.q, s);
    pt.value = (p.b1 / p.b) * (y / pt.q - p.c0);
  });
}

Diagnostic transform_moment(const QMomentCurve& curve, const HMFParams& p) {
  validate(p);
  return positive_q_diagnostic(curve, [&](DiagnosticPoint& pt, double y) {
    pt.value = p.b1 * (y / pt.q - p.c0);
  });
}

double scale_q(double q, const HMFParams& market, const HMFParams& reference) {
  if (!(q > 0.0)) throw DomainError("scale_q: q must be positive");
  validate(market);
  validate(reference);
  const double am = market.alpha - 1.0;
  const double ar = reference.alpha - 1.0;
  return std::pow(reference.b1 / market.b1, am) * std::pow(q, am / ar);
}

QMomentCurve mf_curve(std::span<const double> q_grid, const MFParams& p) {
  validate(p);
  QMomentCurve c;
  c.q_grid.assign(q_grid.begin(), q_grid.end());
  const double e = p.alpha / (p.alpha - 1.0);
  for (double q : q_grid) c.log_norm_moment.push_back(q * p.c0 + p.b * std::pow(std::abs(q), e));
  validate(c);
  return c;
}

QMomentCurve hmf_curve(std::span<const double> q_grid, const HMFParams& p) {
  validate(p);
  QMomentCurve c;
  c.q_grid.assign(q_grid.begin(), q_grid.end());
  for (double q : q_grid) {
    c.log_norm_moment.push_back(q * p.c0 + p.b * hmf_exponent(q, p.alpha, p.b1));
  }
  validate(c);
  return c;
}

QMomentCurve model_curve(std::span<const double> q_grid, const ModelParams& params) {
  QMomentCurve c;
  c.q_grid.assign(q_grid.begin(), q_grid.end());
  for (double q : q_grid) c.log_norm_moment.push_back(log_norm_moment(q, params));
  validate(c);
  return c;
}

}  // namespace valley
