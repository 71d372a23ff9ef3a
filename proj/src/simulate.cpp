#include "valley/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "valley/error.hpp"

namespace valley {

double sample_epsilon(const WeightSpec& weight, Rng& rng) {
  if (const auto* d = std::get_if<Delta>(&weight)) return d->mu;
  if (const auto* u = std::get_if<Uniform>(&weight)) {
    return u->half_width * (2.0 * rng.uniform() - 1.0);
  }
  if (const auto* l = std::get_if<Laplace>(&weight)) {
    return rng.sign() * l->sigma * rng.exponential();
  }
  // |eps - mu|/sigma = G^(1/alpha) with G ~ Gamma(1/alpha, 1).
  const auto& s = std::get<StretchedExp>(weight);
  const double sign = rng.sign();
  const double g = rng.gamma(1.0 / s.alpha);
  return s.mu + sign * s.sigma * std::pow(g, 1.0 / s.alpha);
}

double sample_interevent(const ModelParams& params, Rng& rng) {
  const double eps = sample_epsilon(params.weight, rng);
  return params.tau0 * std::exp(params.beta * eps) * rng.exponential();
}

EventSeries generate_series(const SimConfig& cfg) {
  validate(cfg.params);
  if (cfg.n_events == 0) throw DomainError("generate_series: n_events must be at least 1");

  EventSeries out;
  out.durations.resize(cfg.n_events);
  out.meta.source = "simulate:" + weight_name(cfg.params.weight) + ":seed=" +
                    std::to_string(cfg.seed);

  const std::size_t n_blocks = (cfg.n_events + kSimBlockSize - 1) / kSimBlockSize;
  auto fill_block = [&](std::size_t block) {
    Rng rng = Rng::for_block(cfg.seed, block);
    const std::size_t begin = block * kSimBlockSize;
    const std::size_t end = std::min(cfg.n_events, begin + kSimBlockSize);
    for (std::size_t i = begin; i < end; ++i) {
      out.durations[i] = sample_interevent(cfg.params, rng);
    }
  };

  unsigned workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, n_blocks));
  if (workers == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fill_block(b);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < n_blocks; b += workers) fill_block(b);
    });
  }
  pool.clear();
  return out;
}

}  // namespace valley
