#pragma once

#include <cstddef>
#include <cstdint>

#include "valley/random.hpp"
#include "valley/types.hpp"

namespace valley {

struct SimConfig {
  ModelParams params;
  std::size_t n_events = 1;
  std::uint64_t seed = 0;
  // 0 = hardware concurrency. Output does not depend on this value.
  unsigned threads = 0;
};

/// Events per independently seeded block. Part of the seed-to-output
/// contract: block i of a run uses Rng::for_block(seed, i).
inline constexpr std::size_t kSimBlockSize = 1 << 16;

/// Draw a priority eps from the weight density.
double sample_epsilon(const WeightSpec& weight, Rng& rng);

/// Draw one interevent time: fresh eps, then t = -tau(eps) ln u.
double sample_interevent(const ModelParams& params, Rng& rng);

/// i.i.d. durations; bit-identical for identical (params, n_events, seed).
EventSeries generate_series(const SimConfig& cfg);

}  // namespace valley
