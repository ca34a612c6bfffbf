#pragma once

#include <cstdint>
#include <string>

namespace fairrec {

// Synthetic MovieLens-layout dataset with a controllable gender/genre
// skew: female users rate romance/musical titles more often and
// higher, male users action/sci-fi, with strength `bias` in [0,1].
// Useful for smoke tests and fairness experiments when the real
// dataset is not on disk.
struct SyntheticSpec {
  int users = 120;
  int movies = 60;
  int ratingsPerUser = 30;  // upper bound; selection bias removes some
  double femaleFraction = 0.4;
  double bias = 0.8;
  uint64_t seed = 7;
};

// Writes ratings.dat, users.dat, movies.dat in the '::' format.
void write_synthetic_movielens(const std::string& dir, const SyntheticSpec& spec);

}  // namespace fairrec
