#include "valley/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "valley/error.hpp"

namespace valley::quad {

namespace {

constexpr double kTruncation = 40.0;  // e^-40 ~ 4e-18 of the peak
constexpr unsigned kMaxDepth = 18;

// Walk away from `from` in `direction` with doubling steps until log_f drops
// kTruncation below `top`.
double find_cutoff(const std::function<double(double)>& log_f, double from, double direction,
                   double top) {
  // Start small so sharply peaked integrands get a tight domain.
  double step = 1e-6 * std::max(1.0, std::abs(from));
  for (int i = 0; i < 400; ++i) {
    const double x = from + direction * step;
    const double v = log_f(x);
    if (!(v > top - kTruncation)) return x;  // also catches -inf/NaN tails
    step *= 2.0;
  }
  throw DomainError("quadrature: integrand does not decay (divergent integral)");
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, kMaxDepth, rel_tol);
  }
  // Map to [0, 1]: the library's local error floor (2 eps |r|) is not scaled
  // by the interval width, so short intervals never meet a relative tolerance.
  const double width = b - a;
  auto g = [&](double u) { return f(a + width * u); };
  return width *
         boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, kMaxDepth, rel_tol);
}

double log_integrate_peaked(const std::function<double(double)>& log_f, double peak,
                            const std::vector<double>& breaks, double rel_tol) {
  double top = log_f(peak);
  for (double b : breaks) top = std::max(top, log_f(b));
  if (!std::isfinite(top)) throw DomainError("quadrature: non-finite integrand at peak");

  // Breaks out in the negligible tail would only widen the domain.
  std::vector<double> inner;
  for (double b : breaks) {
    if (log_f(b) > top - kTruncation) inner.push_back(b);
  }
  double lo = peak;
  double hi = peak;
  for (double b : inner) {
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  lo = find_cutoff(log_f, lo, -1.0, top);
  hi = find_cutoff(log_f, hi, +1.0, top);

  std::vector<double> nodes{lo, peak, hi};
  for (double b : inner) nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  // Merge nodes that nearly coincide; a sliver interval cannot reach a relative
  // tolerance in floating point and would drive the recursion to full depth.
  const double min_gap = 1e-9 * (hi - lo);
  std::vector<double> kept{nodes.front()};
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] - kept.back() > min_gap) kept.push_back(nodes[i]);
  }
  if (kept.size() > 1 && hi - kept.back() <= min_gap) kept.back() = hi;
  if (kept.back() != hi) kept.push_back(hi);
  nodes = std::move(kept);

  auto scaled = [&](double x) {
    const double v = log_f(x) - top;
    return v < -745.0 ? 0.0 : std::exp(v);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    total += integrate(scaled, nodes[i], nodes[i + 1], rel_tol);
  }
  return top + std::log(total);
}

double pow_abs_increment(double p, double y, double alpha) {
  if (p != 0.0 && (p + y) / p > 0.0) {
    return std::pow(std::abs(p), alpha) * std::expm1(alpha * std::log1p(y / p));
  }
  return std::pow(std::abs(p + y), alpha) - std::pow(std::abs(p), alpha);
}

double decreasing_root(const std::function<double(double)>& g) {
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; i < 1000 && !(g(lo) > 0.0); ++i) lo *= 2.0;
  for (int i = 0; i < 1000 && !(g(hi) < 0.0); ++i) hi *= 2.0;
  if (!(g(lo) > 0.0) || !(g(hi) < 0.0)) throw DomainError("decreasing_root: no sign change");
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi || hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
    const double v = g(mid);
    if (v > 0.0) {
      lo = mid;
    } else if (v < 0.0) {
      hi = mid;
    } else {
      return mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace valley::quad
