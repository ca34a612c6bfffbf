#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairrec/rules/vocabulary.hpp"

namespace fairrec {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UserInfo {
  char gender = '?';   // 'F' or 'M'
  int ageBracket = 0;  // MovieLens coded brackets (1,18,25,35,45,50,56)
  int occupation = 0;  // MovieLens codes 0..20
};

struct MovieInfo {
  std::string title;
  std::set<std::string> genres;
};

struct RatingRecord {
  EntityId user;
  EntityId movie;
  int stars;  // 1..5
  int64_t timestamp;
};

enum class Normalization : uint8_t {
  MinMax,   // (stars - 1) / 4, endpoints at 0 and 1
  DivFive,  // stars / 5
};

const char* normalization_name(Normalization n);
Normalization normalization_from_name(const std::string& name);

struct RatingsDataset {
  std::map<EntityId, UserInfo> users;
  std::map<EntityId, MovieInfo> movies;
  std::vector<RatingRecord> ratings;
  Normalization normalization = Normalization::MinMax;

  double normalized(int stars) const {
    return normalization == Normalization::MinMax ? (stars - 1) / 4.0 : stars / 5.0;
  }
  // Exact inverse on the 5 representable values.
  int starsFromNormalized(double v) const {
    double s = normalization == Normalization::MinMax ? 4.0 * v + 1.0 : 5.0 * v;
    return static_cast<int>(s + 0.5);
  }
  // Star-scale prediction from a [0,1] value, clipped to [1,5].
  double starsFromValue(double v) const {
    double s = normalization == Normalization::MinMax ? 4.0 * v + 1.0 : 5.0 * v;
    return s < 1.0 ? 1.0 : (s > 5.0 ? 5.0 : s);
  }
};

// Reads ratings.dat / users.dat / movies.dat ('::'-separated, Latin-1
// text passed through verbatim). With strict=false malformed lines are
// skipped with a warning on stderr; with strict=true they throw
// DataError naming the file and line.
RatingsDataset parse_movielens(const std::string& dataDir, bool strict = false);

struct FilterCounts {
  int64_t ratings = 0;
  int64_t movies = 0;         // movies kept by the genre filter
  int64_t users = 0;          // users kept by the >minRatings rule
  int64_t ratedMovies = 0;    // distinct movies left in the ratings
};

// The five genres whose rating behavior differs most by gender.
std::span<const std::string> filter_genres();

// Keeps movies tagged with at least one of the five genres
// (case-insensitive), drops their lost ratings, then keeps users with
// strictly more than minRatings remaining ratings. Idempotent.
FilterCounts filter_dataset(RatingsDataset& data, int minRatings = 50);

}  // namespace fairrec
