#include "fairrec/dataio/folds.hpp"

#include <numeric>
#include <stdexcept>

#include "fairrec/common.hpp"

namespace fairrec {

std::vector<int32_t> FoldSplit::trainIndices(int fold) const {
  std::vector<int32_t> out;
  out.reserve(assignments.size());
  for (size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(static_cast<int32_t>(i));
  return out;
}

std::vector<int32_t> FoldSplit::testIndices(int fold) const {
  std::vector<int32_t> out;
  for (size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(static_cast<int32_t>(i));
  return out;
}

FoldSplit make_folds(size_t nRatings, int foldCount, uint64_t seed) {
  if (foldCount < 2) throw std::invalid_argument("foldCount must be >= 2");

  std::vector<int32_t> order(nRatings);
  std::iota(order.begin(), order.end(), 0);

  // Fisher-Yates with splitmix64; position p mod foldCount keeps fold
  // sizes within one of each other.
  SplitMix64 rng(seed);
  for (size_t i = nRatings; i > 1; --i) {
    size_t j = static_cast<size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }

  FoldSplit split;
  split.foldCount = foldCount;
  split.seed = seed;
  split.assignments.assign(nRatings, 0);
  for (size_t p = 0; p < nRatings; ++p)
    split.assignments[order[p]] = static_cast<uint8_t>(p % foldCount);
  return split;
}

}  // namespace fairrec
