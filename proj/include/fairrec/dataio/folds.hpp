#pragma once

#include <cstdint>
#include <vector>

#include "fairrec/dataio/movielens.hpp"

namespace fairrec {

// Cross-validation partition of rating indices.
struct FoldSplit {
  int foldCount = 5;
  uint64_t seed = 0;
  std::vector<uint8_t> assignments;  // rating index -> fold id

  std::vector<int32_t> trainIndices(int fold) const;
  std::vector<int32_t> testIndices(int fold) const;
};

// Uniform random partition into foldCount folds with sizes differing
// by at most one. Driven by splitmix64 so the split is identical on
// every platform for a given seed.
FoldSplit make_folds(size_t nRatings, int foldCount, uint64_t seed);

}  // namespace fairrec
