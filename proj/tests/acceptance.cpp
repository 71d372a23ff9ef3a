// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "valley/cli.hpp"
#include "valley/densities.hpp"
#include "valley/empirical.hpp"
#include "valley/error.hpp"
#include "valley/fitting.hpp"
#include "valley/moments.hpp"
#include "valley/simulate.hpp"

using namespace valley;

namespace {

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Adaptive Gauss-Kronrod over consecutive breakpoints.
double gk(const std::function<double(double)>& f, std::vector<double> breaks, unsigned depth = 15) {
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    // Unit interval: the library's local error floor is not scaled by width.
    const double a = breaks[i], w = breaks[i + 1] - breaks[i];
    auto g = [&](double u) { return f(a + w * u); };
    total += w * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, depth,
                                                                               1e-12);
  }
  return total;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Direct mixture integral psi(t) = int rho(eps) e^{-t/tau}/tau d eps.
double mixture_oracle(double t, const ModelParams& p) {
  const double peak = std::log(t / p.tau0) / p.beta;
  auto kernel = [&](double eps) {
    const double inv_tau = std::exp(-p.beta * eps) / p.tau0;
    return std::exp(-t * inv_tau) * inv_tau;
  };
  if (const auto* u = std::get_if<Uniform>(&p.weight)) {
    const double d = u->half_width;
    std::vector<double> br{-d, d};
    if (std::abs(peak) < d) br.push_back(peak);
    return gk([&](double e) { return kernel(e) / (2.0 * d); }, br) ;
  }
  const double s = std::get<Laplace>(p.weight).sigma;
  const double a = std::abs(peak) + 60.0 * s + 40.0 / p.beta;
  return gk([&](double e) { return kernel(e) * std::exp(-std::abs(e) / s) / (2.0 * s); },
            {-a, 0.0, peak, a});
}

void normalization() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(12345);
  auto draw = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
  double worst = 0.0;
  std::string worst_family;
  for (int family = 0; family < 4; ++family) {
    for (int k = 0; k < 10; ++k) {
      ModelParams p;
      p.tau0 = std::exp(draw(-2.0, 2.0));
      p.beta = draw(0.5, 2.0);
      switch (family) {
        case 0: p.weight = Delta{draw(-1.0, 1.0)}; break;
        case 1: p.weight = Uniform{draw(0.05, 4.0) / p.beta}; break;
        case 2: p.weight = Laplace{draw(0.2, 3.0) / p.beta}; break;
        default: p.weight = StretchedExp{draw(-1.0, 1.0), draw(0.2, 2.0) / p.beta, draw(0.8, 3.0)};
      }
      // int_0^inf psi dt with t = tau0 e^u, on unit cells of u where the
      // integrand is above 1e-20 of its largest sampled value.
      auto integrand = [&](double u) {
        const double t = p.tau0 * std::exp(u);
        return t * ptd(t, p);
      };
      std::vector<double> cells, values;
      for (double u = -60.0; u <= 200.0; u += 1.0) {
        cells.push_back(u);
        values.push_back(integrand(u));
      }
      const double top = *std::max_element(values.begin(), values.end());
      std::size_t first = 0, last = cells.size() - 1;
      while (first + 1 < cells.size() && values[first + 1] < 1e-20 * top) ++first;
      while (last > first + 1 && values[last - 1] < 1e-20 * top) --last;
      const std::vector<double> br(cells.begin() + static_cast<std::ptrdiff_t>(first),
                                   cells.begin() + static_cast<std::ptrdiff_t>(last) + 1);
      const double mass = gk(integrand, br);
      const double err = std::abs(mass - 1.0);
      if (err > worst) {
        worst = err;
        worst_family = weight_name(p.weight);
      }
    }
  }
  const double secs = seconds_since(t0);
  report("normalization", worst <= 1e-6 && secs < 10.0,
         fmt("max |int psi - 1| = %.3g (%s), 40 parameter sets in %.2f s", worst,
             worst_family.c_str(), secs));
}

void closed_form_vs_oracle() {
  double worst = 0.0;
  for (double sb : {0.5, 2.0}) {
    for (bool laplace : {true, false}) {
      ModelParams p{1.3, 1.0, laplace ? WeightSpec{Laplace{sb}} : WeightSpec{Uniform{sb}}};
      for (double t : logspace(1e-3, 1e3, 20)) {
        worst = std::max(worst, rel(ptd(t, p), mixture_oracle(t, p)));
      }
    }
  }
  report("closed_form_vs_oracle", worst <= 1e-8,
         fmt("max relative deviation %.3g over laplace and uniform, sigma beta in {0.5, 2}", worst));
}

void tail_law() {
  const ModelParams p{1.0, 1.0, Laplace{2.0}};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto grid = logspace(1e2, 1e4, 41);
  for (double t : grid) {
    const double x = std::log(t), y = std::log(ptd(t, p));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = static_cast<double>(grid.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  report("tail_law", rel(slope, -1.5) <= 0.02, fmt("log-log slope %.6f (target -1.5)", slope));
}

void gaussian_exactness() {
  double worst_saddle = 0.0, worst_mf = 0.0;
  for (double bs : {0.3, 1.0, 2.5}) {
    for (double q : {-0.5, 0.25, 1.0, 2.0, 5.0}) {
      const double exact = std::sqrt(std::numbers::pi) * std::exp(0.25 * (q * bs) * (q * bs));
      worst_saddle = std::max(worst_saddle, rel(saddlepoint_iq(q, 2.0, bs).value, exact));
      const double tau0 = 1.7, mu = -0.4;
      const ModelParams p{tau0, 1.0, StretchedExp{mu, bs, 2.0}};
      const MFParams mf{2.0, std::log(tau0) + mu, b_from_beta_sigma(2.0, bs)};
      const double eq = std::tgamma(1.0 + q) * std::pow(tau0, q) * std::exp(q * mu) *
                        std::exp(0.25 * (q * bs) * (q * bs));
      worst_mf = std::max(worst_mf, rel(moment_mf(q, mf), eq));
      worst_mf = std::max(worst_mf, rel(moment_gaussian(q, p), eq));
    }
  }
  report("gaussian_exactness", worst_saddle <= 1e-12 && worst_mf <= 1e-12,
         fmt("saddle vs sqrt(pi) e^{(q s b)^2/4}: %.3g; MF law vs Gaussian moment: %.3g",
             worst_saddle, worst_mf));
}

void series_vs_quadrature() {
  double worst = 0.0;
  bool all_converged = true;
  for (double bs : {0.25, 0.5, 1.0}) {
    const ModelParams p{1.0, 1.0, StretchedExp{0.2, bs, 1.5}};
    for (double q = -0.75; q <= 3.0 + 1e-9; q += 0.25) {
      if (q == 0.0 || std::abs(q) * bs > 1.5 + 1e-12) continue;
      const SeriesResult s = moment_stretched_series(q, p);
      all_converged = all_converged && s.converged;
      worst = std::max(worst, rel(s.value, moment_stretched(q, p)));
    }
  }
  report("series_vs_quadrature", worst <= 1e-8 && all_converged,
         fmt("max relative deviation %.3g (alpha 1.5, |q| sigma beta <= 1.5, q <= 3)", worst));
}

void saddle_accuracy() {
  double worst = 0.0, worst_q = 0.0;
  std::string per_q;
  for (double q = 0.5; q <= 5.0 + 1e-9; q += 0.5) {
    const double e = rel(saddlepoint_iq(q, 1.5, 3.0).value, iq_quadrature(q, 1.5, 3.0));
    per_q += fmt(" q=%.1f:%.4f", q, e);
    if (e > worst) worst = e, worst_q = q;
  }
  std::vector<double> errs;
  std::string trend;
  for (double lambda : {5.0, 10.0, 27.0, 100.0}) {
    const double bs = std::pow(lambda, 1.0 / 3.0);  // lambda = (beta sigma)^3 at alpha = 1.5
    errs.push_back(rel(saddlepoint_iq(2.0, 1.5, bs).value, iq_quadrature(2.0, 1.5, bs)));
    trend += fmt(" %.3g", errs.back());
  }
  const bool monotone = std::is_sorted(errs.rbegin(), errs.rend());
  report("saddle_accuracy", worst <= 0.05 && monotone,
         fmt("max rel error %.4f at q=%.1f (bound 0.05);%s; q=2 error along lambda 5,10,27,100:%s",
             worst, worst_q, per_q.c_str(), trend.c_str()));
}

void simulation_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelParams p{1.0, 1.0, StretchedExp{0.0, 1.0, 2.0}};
  const EventSeries s = generate_series(SimConfig{p, 1'000'000, 1, 0});
  const auto grid = make_q_grid(0.0, 3.0, 0.1);
  const QMomentCurve curve = empirical_qmoments(s, grid);
  double worst = 0.0, worst_q = 0.0, worst_z = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double q = grid[i];
    const double theory = 0.25 * q * q;  // ln(<t^q>/Gamma(1+q)) for tau0 = 1, mu = 0, sigma beta = 1
    const double diff = curve.log_norm_moment[i] - theory;
    const double dev = std::abs(std::expm1(diff));
    if (dev > worst) {
      worst = dev;
      worst_q = q;
      worst_z = curve.stderr_log[i] > 0.0 ? diff / curve.stderr_log[i] : 0.0;
    }
  }
  const FitResult fit = fit_mf(curve, 0.0, 3.0);
  const double secs = seconds_since(t0);
  report("simulation_recovery", worst <= 0.03 && std::abs(fit["alpha"] - 2.0) <= 0.1 && secs < 60.0,
         fmt("max moment deviation %.4f at q=%.1f (%.2f standard errors; bound 0.03), fitted alpha "
             "%.4f +- %.4f, %.2f s",
             worst, worst_q, worst_z, fit["alpha"], fit.stderr_of("alpha"), secs));
}

void hmf_roundtrip() {
  double worst = 0.0;
  std::string worst_row;
  const auto grid = make_q_grid(0.1, 20.0, 0.1);
  for (const auto& row : fixtures::kHMFRows) {
    const FitResult fit = fit_hmf(hmf_curve(grid, row.params), 0.1, 20.0);
    const HMFParams& t = row.params;
    for (const auto& [name, truth] :
         {std::pair{"alpha", t.alpha}, {"c0", t.c0}, {"b", t.b}, {"b1", t.b1}}) {
      const double e = rel(fit[name], truth);
      if (e > worst) worst = e, worst_row = std::string(row.name) + "." + name;
    }
  }
  report("hmf_roundtrip", worst <= 0.01,
         fmt("max relative parameter error %.3g (%s) over six rows", worst, worst_row.c_str()));
}

void collapse_exactness() {
  const auto grid = make_q_grid(0.0, 20.0, 0.1);
  double hmf_dev = 0.0;
  for (const auto& row : fixtures::kHMFRows) {
    for (const auto& pt : f_HMF(hmf_curve(grid, row.params), row.params)) {
      if (pt.value) hmf_dev = std::max(hmf_dev, std::abs(*pt.value + std::expm1(-pt.abscissa)));
    }
  }
  double mf_dev = 0.0;
  const auto small = make_q_grid(0.0, 3.5, 0.05);
  for (const MFParams& p : {fixtures::kMFDax, MFParams{1.5, 0.3, 0.2}, MFParams{2.4, -2.0, 3.0}}) {
    for (const auto& pt : f_MF(mf_curve(small, p), p)) {
      if (pt.value) mf_dev = std::max(mf_dev, std::abs(*pt.value - pt.abscissa));
    }
  }
  QMomentCurve mono;
  mono.q_grid = grid;
  for (double q : grid) mono.log_norm_moment.push_back(2.0 * q);
  double f_dev = 0.0;
  for (const auto& pt : f_F(mono, std::exp(2.0))) {
    if (pt.value) f_dev = std::max(f_dev, std::abs(*pt.value - 1.0));
  }
  report("collapse_exactness", hmf_dev < 1e-6 && mf_dev <= 1e-10 && f_dev <= 1e-12,
         fmt("f_HMF vs 1-e^-x: %.3g; f_MF vs identity: %.3g; f_F vs 1: %.3g", hmf_dev, mf_dev,
             f_dev));
}

void phase_behavior() {
  bool all_throw = true;
  for (double bs : {1.0, 1.2, 2.0}) {
    try {
      moment_laplace(1.0, ModelParams{1.0, 1.0, Laplace{bs}});
      all_throw = false;
    } catch (const DivergentMoment&) {
    }
  }
  const ModelParams p{1.0, 1.0, Laplace{1.2}};
  int monotone = 0;
  std::string means;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const EventSeries s = generate_series(SimConfig{p, 10'000'000, seed, 0});
    std::vector<double> m;
    double sum = 0.0;
    std::size_t next = 1000;
    for (std::size_t i = 0; i < s.size(); ++i) {
      sum += s.durations[i];
      if (i + 1 == next) {
        m.push_back(sum / static_cast<double>(next));
        next *= 100;
      }
    }
    if (m[0] < m[1] && m[1] < m[2]) ++monotone;
  }
  report("phase_behavior", all_throw && monotone >= 8,
         fmt("moment_laplace(q=1) rejects beta sigma >= 1: %s; running mean increasing in %d/10 "
             "replications",
             all_throw ? "yes" : "no", monotone));
}

void sojourn_cross_check() {
  const ModelParams p = model_from_mf(MFParams{1.6, 1.7, 0.12});
  const auto grid = logspace(0.05, 2000.0, 30);
  std::vector<double> psi;
  for (double t : grid) psi.push_back(sojourn(t, p));
  const bool nonincreasing = std::is_sorted(psi.rbegin(), psi.rend());
  const double at0 = sojourn(0.0, p);

  const std::size_t n = 10'000'000;
  const EventSeries s = generate_series(SimConfig{p, n, 2024, 0});
  const auto emp = empirical_sojourn(s, grid);
  double worst_z = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double se = std::sqrt(psi[i] * (1.0 - psi[i]) / static_cast<double>(n));
    worst_z = std::max(worst_z, std::abs(emp[i] - psi[i]) / se);
  }

  std::vector<double> tw = logspace(0.01, 100.0, 40), pw;
  for (double t : tw) pw.push_back(std::exp(-1.53 * std::pow(t, 0.459)));
  const FitResult w = fit_sojourn(tw, pw, SojournClass::Weibull);
  const double werr = std::max(rel(w["a"], 1.53), rel(w["c"], 0.459));

  report("sojourn_cross_check",
         nonincreasing && std::abs(at0 - 1.0) <= 1e-8 && worst_z <= 3.0 && werr <= 1e-6,
         fmt("nonincreasing: %s; |Psi(0)-1| = %.2g; max |MC - Psi|/se = %.2f over 30 points; "
             "Weibull roundtrip error %.2g",
             nonincreasing ? "yes" : "no", std::abs(at0 - 1.0), worst_z, werr));
}

void end_to_end_cli() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "valley_acceptance";
  fs::create_directories(dir);
  const std::string events = (dir / "events.csv").string();
  const std::string curve = (dir / "curve.csv").string();
  const std::string fit = (dir / "fit.json").string();
  std::ostringstream out, err;
  int rc = cli::run({"simulate", "--weight", "delta", "--mu", "0", "--beta", "1", "--tau0",
                     std::to_string(std::exp(2.0)), "--n", "1000000", "--seed", "11", "-o", events},
                    out, err);
  if (rc == 0) rc = cli::run({"estimate", "--input", events, "--qmax", "6", "-o", curve}, out, err);
  if (rc == 0) {
    rc = cli::run({"fit", "--input", curve, "--kind", "mono", "--qmin", "1", "--qmax", "5", "-o", fit},
                  out, err);
  }
  if (rc != 0) {
    report("end_to_end_cli", false, "command failed: " + err.str());
    return;
  }
  std::ifstream f(fit);
  const auto j = nlohmann::json::parse(f);
  const double ln_tau = j["params"]["ln_tau"]["estimate"].get<double>();
  report("end_to_end_cli", rel(ln_tau, 2.0) <= 0.02,
         fmt("simulate -> estimate -> fit mono: ln tau = %.5f (target 2)", ln_tau));
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)()>> checks{
      {"normalization", normalization},
      {"closed_form_vs_oracle", closed_form_vs_oracle},
      {"tail_law", tail_law},
      {"gaussian_exactness", gaussian_exactness},
      {"series_vs_quadrature", series_vs_quadrature},
      {"saddle_accuracy", saddle_accuracy},
      {"simulation_recovery", simulation_recovery},
      {"hmf_roundtrip", hmf_roundtrip},
      {"collapse_exactness", collapse_exactness},
      {"phase_behavior", phase_behavior},
      {"sojourn_cross_check", sojourn_cross_check},
      {"end_to_end_cli", end_to_end_cli},
  };
  for (const auto& [id, check] : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}
