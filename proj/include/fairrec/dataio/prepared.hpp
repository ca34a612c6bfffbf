#pragma once

#include <string>

#include "fairrec/dataio/folds.hpp"
#include "fairrec/dataio/movielens.hpp"

namespace fairrec {

// Canonical prepared-dataset directory:
//   ratings.tsv  userId  movieId  stars  timestamp
//   users.tsv    userId  gender  ageBracket  occupation
//   movies.tsv   movieId  title  genres ('|'-joined)
//   folds.tsv    ratingIndex  fold
//   meta.json    seed, fold count, normalization, counts
struct PreparedDataset {
  RatingsDataset data;
  FoldSplit folds;
};

void write_prepared(const std::string& dir, const RatingsDataset& data,
                    const FoldSplit& folds);

PreparedDataset load_prepared(const std::string& dir);

// Keeps a seeded uniform sample of maxUsers users, then re-applies the
// more-than-minRatings rule. Used for desk-scale runs.
void subsample_users(RatingsDataset& data, int maxUsers, int minRatings,
                     uint64_t seed);

}  // namespace fairrec
