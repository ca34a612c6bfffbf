#include "fairrec/dataio/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fairrec/common.hpp"

namespace fairrec {

namespace {

constexpr int kAgeBrackets[] = {1, 18, 25, 35, 45, 50, 56};

// Index into kGenres; the first five are the filter genres.
constexpr const char* kGenres[] = {"Action", "Romance", "Crime", "Musical",
                                   "Sci-Fi", "Drama", "Comedy"};

// Genre affinity on the star scale for (female, male) users.
double affinity(int genre, bool female, double bias) {
  // Romance/Musical lean female, Action/Sci-Fi lean male.
  static constexpr double kFemale[] = {-0.9, 1.0, 0.0, 0.8, -1.0, 0.2, 0.1};
  static constexpr double kMale[] = {0.9, -0.8, 0.1, -0.7, 1.0, 0.0, 0.1};
  return bias * (female ? kFemale[genre] : kMale[genre]);
}

}  // namespace

void write_synthetic_movielens(const std::string& dir, const SyntheticSpec& spec) {
  if (spec.users < 2 || spec.movies < 2)
    throw std::invalid_argument("synthetic dataset needs at least 2 users and 2 movies");

  std::filesystem::create_directories(dir);
  SplitMix64 rng(spec.seed);

  struct Movie {
    std::vector<int> genres;
  };
  std::vector<Movie> movies(spec.movies);
  std::ofstream moviesOut(dir + "/movies.dat", std::ios::binary);
  for (int m = 0; m < spec.movies; ++m) {
    int primary = static_cast<int>(rng.below(std::size(kGenres)));
    movies[m].genres.push_back(primary);
    if (rng.uniform01() < 0.3) {
      int secondary = static_cast<int>(rng.below(std::size(kGenres)));
      if (secondary != primary) movies[m].genres.push_back(secondary);
    }
    std::sort(movies[m].genres.begin(), movies[m].genres.end());
    moviesOut << (m + 1) << "::Movie " << (m + 1) << " (2000)::";
    for (size_t g = 0; g < movies[m].genres.size(); ++g)
      moviesOut << (g ? "|" : "") << kGenres[movies[m].genres[g]];
    moviesOut << '\n';
  }

  std::vector<bool> female(spec.users);
  std::ofstream usersOut(dir + "/users.dat", std::ios::binary);
  for (int u = 0; u < spec.users; ++u) {
    female[u] = rng.uniform01() < spec.femaleFraction;
    int age = kAgeBrackets[rng.below(std::size(kAgeBrackets))];
    int occupation = static_cast<int>(rng.below(21));
    usersOut << (u + 1) << "::" << (female[u] ? 'F' : 'M') << "::" << age
             << "::" << occupation << "::00000\n";
  }

  std::ofstream ratingsOut(dir + "/ratings.dat", std::ios::binary);
  int64_t timestamp = 978300000;
  for (int u = 0; u < spec.users; ++u) {
    double userBase = 3.2 + (rng.uniform01() - 0.5);  // personal rating level

    std::vector<int> candidates(spec.movies);
    std::iota(candidates.begin(), candidates.end(), 0);
    for (size_t i = candidates.size(); i > 1; --i)
      std::swap(candidates[i - 1], candidates[rng.below(i)]);

    int emitted = 0;
    for (int m : candidates) {
      if (emitted >= spec.ratingsPerUser) break;
      double aff = 0.0;
      for (int g : movies[m].genres) aff += affinity(g, female[u], spec.bias);
      aff /= static_cast<double>(movies[m].genres.size());
      // Observation bias: users are less likely to rate low-affinity titles.
      double pRate = std::clamp(0.75 + 0.3 * aff, 0.05, 1.0);
      if (rng.uniform01() > pRate) continue;
      double noise = (rng.uniform01() - 0.5) * 1.2;
      int stars = static_cast<int>(std::lround(userBase + aff + noise));
      stars = std::clamp(stars, 1, 5);
      ratingsOut << (u + 1) << "::" << (m + 1) << "::" << stars
                 << "::" << timestamp++ << '\n';
      ++emitted;
    }
  }
}

}  // namespace fairrec
