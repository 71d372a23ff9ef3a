#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace valley {

// Priority (energy) densities rho(eps) mixed over the conditional
// exponential law.

/// All priorities equal to mu.
struct Delta {
  double mu = 0.0;
};

/// Uniform on [-half_width, half_width].
struct Uniform {
  double half_width = 1.0;
};

/// Zero-centred double exponential; sigma is the mean of |eps|.
struct Laplace {
  double sigma = 1.0;
};

/// rho(eps) = exp(-|(eps - mu)/sigma|^alpha) / (2 sigma Gamma(1 + 1/alpha)).
/// alpha <= 1 is valid for densities and sojourn probabilities but every
/// moment operation rejects it.
struct StretchedExp {
  double mu = 0.0;
  double sigma = 1.0;
  double alpha = 2.0;
};

using WeightSpec = std::variant<Delta, Uniform, Laplace, StretchedExp>;

/// Throws DomainError when the weight parameters violate their invariants.
void validate(const WeightSpec& weight);

std::string weight_name(const WeightSpec& weight);

/// The generative model: tau(eps) = tau0 * exp(beta * eps), eps ~ weight.
struct ModelParams {
  double tau0 = 1.0;
  double beta = 1.0;
  WeightSpec weight = Delta{};
};

void validate(const ModelParams& params);

/// Grid of moment orders with ln(<t^q> / Gamma(1+q)) at each order.
/// stderr_log is empty for analytic curves; n_samples is 0 for them.
struct QMomentCurve {
  std::vector<double> q_grid;
  std::vector<double> log_norm_moment;
  std::vector<double> stderr_log;
  std::size_t n_samples = 0;

  std::size_t size() const { return q_grid.size(); }
  bool has_stderr() const { return stderr_log.size() == q_grid.size() && !q_grid.empty(); }
};

/// Checks the grid is strictly increasing, every q > -1 and sizes agree.
void validate(const QMomentCurve& curve);

struct ParamEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

struct FitResult {
  std::map<std::string, ParamEstimate> params;
  std::pair<double, double> q_domain{0.0, 0.0};
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  // Degeneracy notes such as "q_ts_at_bound" or "singular_covariance".
  std::vector<std::string> flags;

  double operator[](const std::string& name) const { return params.at(name).estimate; }
  double stderr_of(const std::string& name) const { return params.at(name).std_error; }
  bool has_flag(const std::string& flag) const;
};

struct SeriesMeta {
  std::string source;
  // Drop reason -> number of records dropped for it.
  std::map<std::string, std::size_t> dropped;
};

/// Positive interevent durations in seconds, in source order.
struct EventSeries {
  std::vector<double> durations;
  SeriesMeta meta;

  std::size_t size() const { return durations.size(); }
  bool empty() const { return durations.empty(); }
};

}  // namespace valley
