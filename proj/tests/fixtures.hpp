#pragma once

#include <array>
#include <string_view>

#include "valley/moments.hpp"

namespace valley::fixtures {

struct NamedHMF {
  std::string_view name;
  HMFParams params;
};

// Heuristic-law parameters of six tick-data sets (alpha, c0, b, b1).
inline constexpr std::array<NamedHMF, 6> kHMFRows{{
    {"DAX", {1.91, -3.0, 2.5, 0.33}},
    {"TEF", {1.78, 0.1, 1.07, 0.20}},
    {"DJI", {1.60, 0.18, 0.29, 0.091}},
    {"WIG20", {1.96, 0.5, 3.3, 0.50}},
    {"USDM", {1.69, 2.97, 0.26, 0.115}},
    {"EURUS", {2.21, -9.5, 11.7, 0.71}},
}};

// Small-q multifractal parameters of the DAX futures.
inline constexpr MFParams kMFDax{1.85, -1.5, 0.9};

}  // namespace valley::fixtures
