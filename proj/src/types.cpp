#include "valley/types.hpp"

#include <algorithm>
#include <cmath>

#include "valley/error.hpp"

namespace valley {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

void validate(const WeightSpec& weight) {
  std::visit(overloaded{
                 [](const Delta& d) {
                   if (!std::isfinite(d.mu)) throw DomainError("Delta: mu must be finite");
                 },
                 [](const Uniform& u) {
                   if (!(u.half_width > 0.0) || !std::isfinite(u.half_width))
                     throw DomainError("Uniform: half-width must be positive");
                 },
                 [](const Laplace& l) {
                   if (!(l.sigma > 0.0) || !std::isfinite(l.sigma))
                     throw DomainError("Laplace: sigma must be positive");
                 },
                 [](const StretchedExp& s) {
                   if (!std::isfinite(s.mu)) throw DomainError("StretchedExp: mu must be finite");
                   if (!(s.sigma > 0.0) || !std::isfinite(s.sigma))
                     throw DomainError("StretchedExp: sigma must be positive");
                   if (!(s.alpha > 0.0) || !std::isfinite(s.alpha))
                     throw DomainError("StretchedExp: alpha must be positive");
                 },
             },
             weight);
}

std::string weight_name(const WeightSpec& weight) {
  return std::visit(overloaded{
                        [](const Delta&) { return std::string("delta"); },
                        [](const Uniform&) { return std::string("uniform"); },
                        [](const Laplace&) { return std::string("laplace"); },
                        [](const StretchedExp&) { return std::string("stretched"); },
                    },
                    weight);
}

void validate(const ModelParams& params) {
  if (!(params.tau0 > 0.0) || !std::isfinite(params.tau0))
    throw DomainError("ModelParams: tau0 must be positive");
  if (!(params.beta > 0.0) || !std::isfinite(params.beta))
    throw DomainError("ModelParams: beta must be positive");
  validate(params.weight);
}

void validate(const QMomentCurve& curve) {
  if (curve.log_norm_moment.size() != curve.q_grid.size())
    throw DomainError("QMomentCurve: grid and values differ in length");
  if (!curve.stderr_log.empty() && curve.stderr_log.size() != curve.q_grid.size())
    throw DomainError("QMomentCurve: grid and standard errors differ in length");
  for (std::size_t i = 0; i < curve.q_grid.size(); ++i) {
    if (!(curve.q_grid[i] > -1.0)) throw DomainError("QMomentCurve: every q must exceed -1");
    if (i > 0 && !(curve.q_grid[i] > curve.q_grid[i - 1]))
      throw DomainError("QMomentCurve: q grid must be strictly increasing");
  }
}

bool FitResult::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

}  // namespace valley
