#include "fairrec/dataio/movielens.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>

namespace fairrec {

const char* normalization_name(Normalization n) {
  return n == Normalization::MinMax ? "minmax" : "div5";
}

Normalization normalization_from_name(const std::string& name) {
  if (name == "minmax") return Normalization::MinMax;
  if (name == "div5") return Normalization::DivFive;
  throw DataError("unknown normalization '" + name + "' (expected minmax or div5)");
}

namespace {

std::vector<std::string_view> split_on(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> fields;
  size_t pos = 0;
  while (true) {
    size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return fields;
}

bool parse_int(std::string_view s, int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Applies `fn` to each non-empty line; fn returns false on a malformed
// line, which is skipped or fatal depending on strict.
template <typename Fn>
void for_each_line(const std::string& path, bool strict, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!fn(std::string_view(line))) {
      std::string msg = path + ": malformed line " + std::to_string(lineNo);
      if (strict) throw DataError(msg);
      std::cerr << "warning: " << msg << " (skipped)\n";
    }
  }
}

}  // namespace

RatingsDataset parse_movielens(const std::string& dataDir, bool strict) {
  RatingsDataset data;

  for_each_line(dataDir + "/users.dat", strict, [&](std::string_view line) {
    auto f = split_on(line, "::");
    if (f.size() < 4) return false;
    int64_t id, age, occupation;
    if (!parse_int(f[0], id) || !parse_int(f[2], age) || !parse_int(f[3], occupation))
      return false;
    if (f[1] != "F" && f[1] != "M") return false;
    data.users[static_cast<EntityId>(id)] =
        UserInfo{f[1][0], static_cast<int>(age), static_cast<int>(occupation)};
    return true;
  });

  for_each_line(dataDir + "/movies.dat", strict, [&](std::string_view line) {
    auto f = split_on(line, "::");
    if (f.size() != 3) return false;
    int64_t id;
    if (!parse_int(f[0], id)) return false;
    MovieInfo info;
    info.title = std::string(f[1]);
    for (std::string_view g : split_on(f[2], "|"))
      if (!g.empty()) info.genres.insert(std::string(g));
    data.movies[static_cast<EntityId>(id)] = std::move(info);
    return true;
  });

  for_each_line(dataDir + "/ratings.dat", strict, [&](std::string_view line) {
    auto f = split_on(line, "::");
    if (f.size() != 4) return false;
    int64_t user, movie, stars, ts;
    if (!parse_int(f[0], user) || !parse_int(f[1], movie) || !parse_int(f[2], stars) ||
        !parse_int(f[3], ts))
      return false;
    if (stars < 1 || stars > 5) return false;
    if (!data.users.count(static_cast<EntityId>(user)) ||
        !data.movies.count(static_cast<EntityId>(movie)))
      return false;
    data.ratings.push_back(RatingRecord{static_cast<EntityId>(user),
                                        static_cast<EntityId>(movie),
                                        static_cast<int>(stars), ts});
    return true;
  });

  return data;
}

std::span<const std::string> filter_genres() {
  static const std::array<std::string, 5> kGenres = {"action", "romance", "crime",
                                                     "musical", "sci-fi"};
  return kGenres;
}

FilterCounts filter_dataset(RatingsDataset& data, int minRatings) {
  auto genres = filter_genres();

  // Movies first: keep any movie tagged with one of the five genres.
  for (auto it = data.movies.begin(); it != data.movies.end();) {
    bool keep = false;
    for (const std::string& g : it->second.genres) {
      std::string low = lowercase(g);
      if (std::find(genres.begin(), genres.end(), low) != genres.end()) {
        keep = true;
        break;
      }
    }
    it = keep ? std::next(it) : data.movies.erase(it);
  }
  std::erase_if(data.ratings,
                [&](const RatingRecord& r) { return !data.movies.count(r.movie); });

  // Then the user threshold, computed on the movie-filtered ratings.
  std::map<EntityId, int> perUser;
  for (const RatingRecord& r : data.ratings) ++perUser[r.user];
  for (auto it = data.users.begin(); it != data.users.end();) {
    auto found = perUser.find(it->first);
    bool keep = found != perUser.end() && found->second > minRatings;
    it = keep ? std::next(it) : data.users.erase(it);
  }
  std::erase_if(data.ratings,
                [&](const RatingRecord& r) { return !data.users.count(r.user); });

  FilterCounts counts;
  counts.ratings = static_cast<int64_t>(data.ratings.size());
  counts.movies = static_cast<int64_t>(data.movies.size());
  counts.users = static_cast<int64_t>(data.users.size());
  std::set<EntityId> rated;
  for (const RatingRecord& r : data.ratings) rated.insert(r.movie);
  counts.ratedMovies = static_cast<int64_t>(rated.size());
  return counts;
}

}  // namespace fairrec
