#include "valley/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "valley/densities.hpp"
#include "valley/error.hpp"
#include "valley/least_squares.hpp"

namespace valley {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlphaMin = 1.0 + 1e-6;
constexpr double kAlphaMax = 50.0;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Packs an LM solution into a FitResult with standard errors and flags.
FitResult finish(const lsq::Solution& sol, const std::vector<std::string>& names,
                 std::pair<double, double> domain, const lsq::Options& opts) {
  FitResult fit;
  fit.q_domain = domain;
  fit.residual_norm = sol.cost;
  fit.converged = sol.converged;
  fit.iterations = sol.iterations;
  const auto cov = lsq::covariance(sol);
  if (!cov) fit.flags.push_back("singular_covariance");
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    ParamEstimate est{sol.x[k], cov ? std::sqrt(std::max(0.0, (*cov)(k, k))) : kInf};
    const bool at_lo = opts.lower.size() > k && sol.x[k] <= opts.lower[k];
    const bool at_hi = opts.upper.size() > k && sol.x[k] >= opts.upper[k];
    if (at_lo || at_hi) fit.flags.push_back(names[i] + "_at_bound");
    if (!(est.std_error <= std::abs(est.estimate))) {
      fit.flags.push_back(names[i] + "_weakly_identified");
    }
    fit.params[names[i]] = est;
  }
  return fit;
}

// Weighted linear least squares y ~ c1 f1 + c2 f2.
std::pair<double, double> linear_pair(const CurvePoints& pts, const std::vector<double>& f1,
                                      const std::vector<double>& f2) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < pts.q.size(); ++i) {
    const double w = pts.weight[i];
    a(0, 0) += w * f1[i] * f1[i];
    a(0, 1) += w * f1[i] * f2[i];
    a(1, 1) += w * f2[i] * f2[i];
    rhs[0] += w * f1[i] * pts.y[i];
    rhs[1] += w * f2[i] * pts.y[i];
  }
  a(1, 0) = a(0, 1);
  const Eigen::Vector2d sol = a.ldlt().solve(rhs);
  return {sol[0], sol[1]};
}

std::pair<double, double> domain_of(const CurvePoints& pts) {
  const auto [lo, hi] = std::minmax_element(pts.q.begin(), pts.q.end());
  return {*lo, *hi};
}

VectorXd sqrt_weights(const CurvePoints& pts) {
  VectorXd w(static_cast<Eigen::Index>(pts.q.size()));
  for (std::size_t i = 0; i < pts.q.size(); ++i) w[static_cast<Eigen::Index>(i)] = std::sqrt(pts.weight[i]);
  return w;
}

// Log-log slope of (y/q - c0) against q from an alpha = 2 first pass.
double alpha_guess(const CurvePoints& pts) {
  std::vector<double> f1 = pts.q;
  std::vector<double> f2;
  for (double q : pts.q) f2.push_back(q * q);
  const auto [c0, b] = linear_pair(pts, f1, f2);
  (void)b;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < pts.q.size(); ++i) {
    const double q = pts.q[i];
    const double z = pts.y[i] / q - c0;
    if (q > 0.0 && z > 0.0) {
      const double lx = std::log(q), ly = std::log(z);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
  }
  if (n < 2) return 2.0;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return 2.0;
  const double slope = (n * sxy - sx * sy) / den;
  if (!(slope > 0.0)) return 2.0;
  return std::clamp(1.0 + 1.0 / slope, 1.05, 10.0);
}

bool better(const lsq::Solution& cand, const lsq::Solution* best) {
  if (best == nullptr) return true;
  if (cand.converged != best->converged) return cand.converged;
  return cand.cost < best->cost;
}

// --- MF model ------------------------------------------------------------

struct MFModel {
  const CurvePoints& pts;
  VectorXd sw;

  VectorXd residual(const VectorXd& x) const {
    const double alpha = x[0], c0 = x[1], b = x[2];
    const double e = alpha / (alpha - 1.0);
    VectorXd r(static_cast<Eigen::Index>(pts.q.size()));
    for (std::size_t i = 0; i < pts.q.size(); ++i) {
      const double q = pts.q[i];
      const auto k = static_cast<Eigen::Index>(i);
      r[k] = sw[k] * (q * c0 + b * std::pow(std::abs(q), e) - pts.y[i]);
    }
    return r;
  }

  MatrixXd jacobian(const VectorXd& x) const {
    const double alpha = x[0], b = x[2];
    const double e = alpha / (alpha - 1.0);
    const double de = -1.0 / ((alpha - 1.0) * (alpha - 1.0));
    MatrixXd j(static_cast<Eigen::Index>(pts.q.size()), 3);
    for (std::size_t i = 0; i < pts.q.size(); ++i) {
      const double q = pts.q[i];
      const auto k = static_cast<Eigen::Index>(i);
      const double aq = std::abs(q);
      const double xq = std::pow(aq, e);
      j(k, 0) = sw[k] * b * xq * std::log(aq) * de;
      j(k, 1) = sw[k] * q;
      j(k, 2) = sw[k] * xq;
    }
    return j;
  }
};

// --- HMF model -----------------------------------------------------------

// u e^-u - (1 - e^-u), accurate for small u.
double saturation_slope(double u) {
  if (u < 1e-3) return u * u * (-0.5 + u * (1.0 / 3.0 - u / 8.0));
  return u * std::exp(-u) + std::expm1(-u);
}

struct HMFModel {
  const CurvePoints& pts;
  VectorXd sw;

  VectorXd residual(const VectorXd& x) const {
    const HMFParams p{x[0], x[1], x[2], x[3]};
    VectorXd r(static_cast<Eigen::Index>(pts.q.size()));
    for (std::size_t i = 0; i < pts.q.size(); ++i) {
      const double q = pts.q[i];
      const auto k = static_cast<Eigen::Index>(i);
      r[k] = sw[k] * (q * p.c0 + p.b * hmf_exponent(q, p.alpha, p.b1) - pts.y[i]);
    }
    return r;
  }

  MatrixXd jacobian(const VectorXd& x) const {
    const double alpha = x[0], b = x[2], b1 = x[3];
    const double s = 1.0 / (alpha - 1.0);
    MatrixXd j(static_cast<Eigen::Index>(pts.q.size()), 4);
    for (std::size_t i = 0; i < pts.q.size(); ++i) {
      const double q = pts.q[i];
      const auto k = static_cast<Eigen::Index>(i);
      const double aq = std::abs(q);
      const double xs = std::pow(aq, s);
      const double u = b1 * xs;
      const double decay = std::exp(-u);
      const double sat = -std::expm1(-u);
      const double d_alpha = decay == 0.0 ? 0.0 : -b * aq * decay * xs * std::log(aq) * s * s;
      j(k, 0) = sw[k] * d_alpha;
      j(k, 1) = sw[k] * q;
      j(k, 2) = sw[k] * sat * aq / b1;
      j(k, 3) = sw[k] * b * aq * saturation_slope(u) / (b1 * b1);
    }
    return j;
  }
};

void require_points(const CurvePoints& pts, std::size_t needed, const char* who) {
  if (pts.q.size() < needed) {
    throw FitError(std::string(who) + ": needs at least " + std::to_string(needed) +
                   " grid points in range, got " + std::to_string(pts.q.size()));
  }
}

// --- Sojourn models ------------------------------------------------------

struct SojournData {
  std::vector<double> t;
  std::vector<double> log_psi;
};

SojournData check_sojourn(std::span<const double> t_grid, std::span<const double> psi,
                          std::size_t n_params) {
  if (t_grid.size() != psi.size()) throw FitError("fit_sojourn: t and psi differ in length");
  if (t_grid.size() < n_params) throw FitError("fit_sojourn: fewer points than parameters");
  SojournData d;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw FitError("fit_sojourn: t must be non-negative");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw FitError("fit_sojourn: t grid must increase");
    if (!(psi[i] > 0.0 && psi[i] <= 1.0)) throw FitError("fit_sojourn: psi must lie in (0, 1]");
    if (i > 0 && psi[i] > psi[i - 1]) throw FitError("fit_sojourn: psi must be nonincreasing");
    d.t.push_back(t_grid[i]);
    d.log_psi.push_back(std::log(psi[i]));
  }
  return d;
}

// ln(1 + m k t)/k with the k -> 0 limit m t.
double qexp_log_term(double m, double k, double t) {
  const double u = m * k * t;
  if (u < 1e-8) return m * t * (1.0 - 0.5 * u);
  return std::log1p(u) / k;
}

FitResult fit_weibull(const SojournData& d) {
  // Linearised start: ln(-ln Psi) = ln a + c ln t.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    if (d.t[i] > 0.0 && d.log_psi[i] < 0.0) {
      const double lx = std::log(d.t[i]), ly = std::log(-d.log_psi[i]);
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
      ++n;
    }
  }
  double a0 = 1.0, c0 = 1.0;
  if (n >= 2 && n * sxx - sx * sx != 0.0) {
    c0 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    a0 = std::exp((sy - c0 * sx) / n);
  }
  auto residual = [&](const VectorXd& x) {
    VectorXd r(static_cast<Eigen::Index>(d.t.size()));
    for (std::size_t i = 0; i < d.t.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = -x[0] * std::pow(d.t[i], x[1]) - d.log_psi[i];
    }
    return r;
  };
  auto jacobian = [&](const VectorXd& x) {
    MatrixXd j(static_cast<Eigen::Index>(d.t.size()), 2);
    for (std::size_t i = 0; i < d.t.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double tc = std::pow(d.t[i], x[1]);
      j(k, 0) = -tc;
      j(k, 1) = d.t[i] > 0.0 ? -x[0] * tc * std::log(d.t[i]) : 0.0;
    }
    return j;
  };
  lsq::Options opts;
  opts.lower = vec({1e-300, 1e-6});
  opts.upper = vec({kInf, 50.0});
  const auto sol = lsq::minimize(residual, lsq::JacobianFn(jacobian),
                                 vec({std::max(a0, 1e-12), std::clamp(c0, 1e-3, 49.0)}), opts);
  return finish(sol, {"a", "c"}, {d.t.front(), d.t.back()}, opts);
}

FitResult fit_qexponential(const SojournData& d) {
  // Exponential start for the rate.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    num -= d.t[i] * d.log_psi[i];
    den += d.t[i] * d.t[i];
  }
  const double m0 = den > 0.0 && num > 0.0 ? num / den : 1.0;

  // Internally x = (m, q_ts - 1) so the exponential limit sits on the bound.
  auto residual = [&](const VectorXd& x) {
    VectorXd r(static_cast<Eigen::Index>(d.t.size()));
    for (std::size_t i = 0; i < d.t.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = -qexp_log_term(x[0], x[1], d.t[i]) - d.log_psi[i];
    }
    return r;
  };
  auto jacobian = [&](const VectorXd& x) {
    const double m = x[0], kappa = x[1];
    MatrixXd j(static_cast<Eigen::Index>(d.t.size()), 2);
    for (std::size_t i = 0; i < d.t.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double t = d.t[i];
      const double u = m * kappa * t;
      j(k, 0) = -t / (1.0 + u);
      // d/dkappa of -ln(1+u)/kappa = (m t)^2 [ln(1+u) - u/(1+u)] / u^2
      const double g = u < 1e-4 ? 0.5 - 2.0 * u / 3.0 : (std::log1p(u) - u / (1.0 + u)) / (u * u);
      j(k, 1) = (m * t) * (m * t) * g;
    }
    return j;
  };
  lsq::Options opts;
  opts.lower = vec({1e-300, 0.0});
  opts.upper = vec({kInf, 50.0});
  const lsq::Solution* best = nullptr;
  lsq::Solution keep;
  for (double kappa0 : {0.05, 0.3, 1.0}) {
    auto sol = lsq::minimize(residual, lsq::JacobianFn(jacobian), vec({m0, kappa0}), opts);
    if (better(sol, best)) {
      keep = std::move(sol);
      best = &keep;
    }
  }
  FitResult fit = finish(keep, {"m", "q_ts_minus_1"}, {d.t.front(), d.t.back()}, opts);
  // Report q_ts itself.
  ParamEstimate k = fit.params.at("q_ts_minus_1");
  fit.params.erase("q_ts_minus_1");
  fit.params["q_ts"] = ParamEstimate{1.0 + k.estimate, k.std_error};
  for (auto& f : fit.flags) {
    if (f.rfind("q_ts_minus_1", 0) == 0) f.replace(0, 12, "q_ts");
  }
  return fit;
}

FitResult fit_mf_numeric(const SojournData& d) {
  // Start: alpha 1.6, b 0.2, c0 from the 1/e crossing of Psi.
  double c0 = 0.0;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    if (d.log_psi[i] <= -1.0 && d.t[i] > 0.0) {
      c0 = std::log(d.t[i]);
      break;
    }
  }
  auto residual = [&](const VectorXd& x) {
    VectorXd r(static_cast<Eigen::Index>(d.t.size()));
    const ModelParams params = model_from_mf(MFParams{x[0], x[1], x[2]});
    for (std::size_t i = 0; i < d.t.size(); ++i) {
      r[static_cast<Eigen::Index>(i)] = std::log(sojourn(d.t[i], params)) - d.log_psi[i];
    }
    return r;
  };
  lsq::Options opts;
  opts.lower = vec({1.01, -kInf, 1e-6});
  opts.upper = vec({10.0, kInf, 50.0});
  opts.max_iterations = 200;
  const auto sol = lsq::minimize(residual, std::nullopt, vec({1.6, c0, 0.2}), opts);
  return finish(sol, {"alpha", "c0", "b"}, {d.t.front(), d.t.back()}, opts);
}

}  // namespace

void validate(const SojournModel& model) {
  if (const auto* q = std::get_if<QExponential>(&model)) {
    if (!(q->m > 0.0) || !(q->q_ts > 1.0)) throw DomainError("QExponential: m > 0, q_ts > 1");
  } else if (const auto* w = std::get_if<Weibull>(&model)) {
    if (!(w->a > 0.0) || !(w->c > 0.0)) throw DomainError("Weibull: a > 0, c > 0");
  } else {
    const auto& mf = std::get<MFNumeric>(model);
    validate(mf.params);
    if (!std::holds_alternative<StretchedExp>(mf.params.weight)) {
      throw UnsupportedModel("MFNumeric: requires a stretched-exponential weight");
    }
  }
}

double sojourn_model(double t, const SojournModel& model) {
  validate(model);
  if (!(t >= 0.0)) throw DomainError("sojourn_model: t must be non-negative");
  if (const auto* q = std::get_if<QExponential>(&model)) {
    return std::exp(-qexp_log_term(q->m, q->q_ts - 1.0, t));
  }
  if (const auto* w = std::get_if<Weibull>(&model)) {
    return std::exp(-w->a * std::pow(t, w->c));
  }
  return sojourn(t, std::get<MFNumeric>(model).params);
}

CurvePoints select_points(const QMomentCurve& curve, double q_min, double q_max) {
  validate(curve);
  CurvePoints pts;
  bool use_se = curve.has_stderr();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double q = curve.q_grid[i];
    if (q < q_min || q > q_max || q == 0.0) continue;
    pts.q.push_back(q);
    pts.y.push_back(curve.log_norm_moment[i]);
    if (use_se) {
      const double se = curve.stderr_log[i];
      if (se > 0.0 && std::isfinite(se)) {
        pts.weight.push_back(1.0 / (se * se));
      } else {
        use_se = false;
      }
    }
  }
  if (!use_se) pts.weight.assign(pts.q.size(), 1.0);
  return pts;
}

FitResult fit_monofractal(const QMomentCurve& curve, double q_min, double q_max) {
  const CurvePoints pts = select_points(curve, q_min, q_max);
  require_points(pts, 2, "fit_monofractal");
  double sqq = 0.0, sqy = 0.0;
  for (std::size_t i = 0; i < pts.q.size(); ++i) {
    sqq += pts.q[i] * pts.q[i];
    sqy += pts.q[i] * pts.y[i];
  }
  const double ln_tau = sqy / sqq;
  double rss = 0.0;
  for (std::size_t i = 0; i < pts.q.size(); ++i) {
    const double r = pts.y[i] - pts.q[i] * ln_tau;
    rss += r * r;
  }
  FitResult fit;
  const double dof = static_cast<double>(pts.q.size() - 1);
  fit.params["ln_tau"] = ParamEstimate{ln_tau, std::sqrt(rss / dof / sqq)};
  fit.q_domain = domain_of(pts);
  fit.residual_norm = rss;
  fit.converged = true;
  return fit;
}

FitResult fit_mf(const QMomentCurve& curve, double q_min, double q_max) {
  return fit_mf(select_points(curve, q_min, q_max));
}

FitResult fit_mf(const CurvePoints& pts) {
  require_points(pts, 6, "fit_mf");
  const MFModel model{pts, sqrt_weights(pts)};
  lsq::Options opts;
  opts.lower = vec({kAlphaMin, -kInf, 0.0});
  opts.upper = vec({kAlphaMax, kInf, kInf});

  const lsq::Solution* best = nullptr;
  lsq::Solution keep;
  for (double alpha0 : {alpha_guess(pts), 1.3, 1.5, 2.0, 3.0}) {
    std::vector<double> f2;
    for (double q : pts.q) f2.push_back(std::pow(std::abs(q), alpha0 / (alpha0 - 1.0)));
    auto [c0, b] = linear_pair(pts, pts.q, f2);
    auto sol = lsq::minimize([&](const VectorXd& x) { return model.residual(x); },
                             lsq::JacobianFn([&](const VectorXd& x) { return model.jacobian(x); }),
                             vec({alpha0, c0, std::max(b, 1e-6)}), opts);
    if (better(sol, best)) {
      keep = std::move(sol);
      best = &keep;
    }
  }
  FitResult fit = finish(keep, {"alpha", "c0", "b"}, domain_of(pts), opts);
  if (!(fit["b"] > 1e-12)) {
    fit.converged = false;
    fit.flags.push_back("b_zero_alpha_unidentifiable");
  }
  return fit;
}

FitResult fit_hmf(const QMomentCurve& curve, double q_min, double q_max) {
  return fit_hmf(select_points(curve, q_min, q_max));
}

FitResult fit_hmf(const CurvePoints& pts) {
  require_points(pts, 8, "fit_hmf");
  const HMFModel model{pts, sqrt_weights(pts)};
  lsq::Options opts;
  opts.lower = vec({kAlphaMin, -kInf, 0.0, 1e-8});
  opts.upper = vec({kAlphaMax, kInf, kInf, 1e3});

  const lsq::Solution* best = nullptr;
  lsq::Solution keep;
  for (double alpha0 : {alpha_guess(pts), 1.5, 1.8, 2.1, 2.5}) {
    for (double b10 : {0.2, 0.05, 0.5, 1.0}) {
      std::vector<double> f2;
      for (double q : pts.q) f2.push_back(hmf_exponent(q, alpha0, b10));
      auto [c0, b] = linear_pair(pts, pts.q, f2);
      auto sol = lsq::minimize(
          [&](const VectorXd& x) { return model.residual(x); },
          lsq::JacobianFn([&](const VectorXd& x) { return model.jacobian(x); }),
          vec({alpha0, c0, std::max(b, 1e-6), b10}), opts);
      if (better(sol, best)) {
        keep = std::move(sol);
        best = &keep;
      }
    }
  }
  FitResult fit = finish(keep, {"alpha", "c0", "b", "b1"}, domain_of(pts), opts);
  if (!(fit["b"] > 1e-12)) {
    fit.converged = false;
    fit.flags.push_back("b_zero_b1_unidentifiable");
  }
  return fit;
}

FitResult fit_sojourn(std::span<const double> t_grid, std::span<const double> psi,
                      SojournClass model_class) {
  switch (model_class) {
    case SojournClass::Weibull:
      return fit_weibull(check_sojourn(t_grid, psi, 2));
    case SojournClass::QExponential: {
      FitResult fit = fit_qexponential(check_sojourn(t_grid, psi, 2));
      if (fit["q_ts"] - 1.0 < 1e-6 && !fit.has_flag("q_ts_at_bound")) {
        fit.flags.push_back("q_ts_at_bound");
      }
      return fit;
    }
    case SojournClass::MFNumeric:
      return fit_mf_numeric(check_sojourn(t_grid, psi, 3));
  }
  throw FitError("fit_sojourn: unknown model class");
}

MFParams mf_params_of(const FitResult& fit) {
  return MFParams{fit["alpha"], fit["c0"], fit["b"]};
}

HMFParams hmf_params_of(const FitResult& fit) {
  return HMFParams{fit["alpha"], fit["c0"], fit["b"], fit["b1"]};
}

SojournModel sojourn_model_of(const FitResult& fit, SojournClass model_class) {
  switch (model_class) {
    case SojournClass::QExponential:
      return QExponential{fit["m"], fit["q_ts"]};
    case SojournClass::Weibull:
      return Weibull{fit["a"], fit["c"]};
    case SojournClass::MFNumeric:
      return MFNumeric{model_from_mf(mf_params_of(fit))};
  }
  throw FitError("sojourn_model_of: unknown model class");
}

}  // namespace valley
