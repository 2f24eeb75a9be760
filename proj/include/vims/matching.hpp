#pragma once

#include <vector>

#include "vims/descriptor.hpp"

namespace vims {

struct Match {
  std::uint32_t query_index = 0;
  std::uint32_t target_index = 0;
  int distance = 0;
};

// 2NN ratio matching with mutual-best one-to-one filtering. A query is
// accepted only when its best distance is strictly below ratio times the
// second best; with fewer than two targets the absolute threshold applies
// instead.
std::vector<Match> match_2nn(const std::vector<BinaryDescriptor>& query,
                             const std::vector<BinaryDescriptor>& target,
                             double ratio = 0.7, int absolute_threshold = 64);

}  // namespace vims
