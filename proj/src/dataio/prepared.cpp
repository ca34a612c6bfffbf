#include "fairrec/dataio/prepared.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairrec/common.hpp"

namespace fairrec {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t next = line.find('\t', pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return fields;
}

}  // namespace

void write_prepared(const std::string& dir, const RatingsDataset& data,
                    const FoldSplit& folds) {
  std::filesystem::create_directories(dir);

  {
    auto out = open_out(dir + "/ratings.tsv");
    for (const RatingRecord& r : data.ratings)
      out << r.user << '\t' << r.movie << '\t' << r.stars << '\t' << r.timestamp
          << '\n';
  }
  {
    auto out = open_out(dir + "/users.tsv");
    for (const auto& [id, u] : data.users)
      out << id << '\t' << u.gender << '\t' << u.ageBracket << '\t' << u.occupation
          << '\n';
  }
  {
    auto out = open_out(dir + "/movies.tsv");
    for (const auto& [id, m] : data.movies) {
      out << id << '\t' << m.title << '\t';
      bool first = true;
      for (const std::string& g : m.genres) {
        if (!first) out << '|';
        out << g;
        first = false;
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir + "/folds.tsv");
    for (size_t i = 0; i < folds.assignments.size(); ++i)
      out << i << '\t' << static_cast<int>(folds.assignments[i]) << '\n';
  }
  {
    nlohmann::json meta;
    meta["seed"] = folds.seed;
    meta["foldCount"] = folds.foldCount;
    meta["normalization"] = normalization_name(data.normalization);
    meta["ratings"] = data.ratings.size();
    meta["movies"] = data.movies.size();
    meta["users"] = data.users.size();
    auto out = open_out(dir + "/meta.json");
    out << meta.dump(2) << '\n';
  }
}

PreparedDataset load_prepared(const std::string& dir) {
  PreparedDataset prep;

  {
    auto in = open_in(dir + "/meta.json");
    nlohmann::json meta = nlohmann::json::parse(in);
    prep.folds.seed = meta.at("seed").get<uint64_t>();
    prep.folds.foldCount = meta.at("foldCount").get<int>();
    prep.data.normalization =
        normalization_from_name(meta.at("normalization").get<std::string>());
  }

  std::string line;
  {
    auto in = open_in(dir + "/users.tsv");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 4 || f[1].size() != 1)
        throw DataError(dir + "/users.tsv: malformed line");
      prep.data.users[std::stoi(f[0])] =
          UserInfo{f[1][0], std::stoi(f[2]), std::stoi(f[3])};
    }
  }
  {
    auto in = open_in(dir + "/movies.tsv");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 3) throw DataError(dir + "/movies.tsv: malformed line");
      MovieInfo info;
      info.title = f[1];
      std::stringstream genres(f[2]);
      std::string g;
      while (std::getline(genres, g, '|'))
        if (!g.empty()) info.genres.insert(g);
      prep.data.movies[std::stoi(f[0])] = std::move(info);
    }
  }
  {
    auto in = open_in(dir + "/ratings.tsv");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 4) throw DataError(dir + "/ratings.tsv: malformed line");
      prep.data.ratings.push_back(RatingRecord{std::stoi(f[0]), std::stoi(f[1]),
                                               std::stoi(f[2]), std::stoll(f[3])});
    }
  }
  {
    auto in = open_in(dir + "/folds.tsv");
    prep.folds.assignments.assign(prep.data.ratings.size(), 0);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 2) throw DataError(dir + "/folds.tsv: malformed line");
      size_t idx = std::stoul(f[0]);
      if (idx >= prep.folds.assignments.size())
        throw DataError(dir + "/folds.tsv: rating index out of range");
      prep.folds.assignments[idx] = static_cast<uint8_t>(std::stoi(f[1]));
    }
  }
  return prep;
}

void subsample_users(RatingsDataset& data, int maxUsers, int minRatings,
                     uint64_t seed) {
  if (maxUsers <= 0 || static_cast<size_t>(maxUsers) >= data.users.size()) return;

  std::vector<EntityId> ids;
  ids.reserve(data.users.size());
  for (const auto& [id, info] : data.users) ids.push_back(id);

  SplitMix64 rng(seed);
  for (size_t i = ids.size(); i > 1; --i)
    std::swap(ids[i - 1], ids[rng.below(i)]);
  ids.resize(static_cast<size_t>(maxUsers));

  std::set<EntityId> keep(ids.begin(), ids.end());
  for (auto it = data.users.begin(); it != data.users.end();)
    it = keep.count(it->first) ? std::next(it) : data.users.erase(it);
  std::erase_if(data.ratings,
                [&](const RatingRecord& r) { return !keep.count(r.user); });

  // Scaled-down activity rule so tiny samples still have usable users.
  std::map<EntityId, int> perUser;
  for (const RatingRecord& r : data.ratings) ++perUser[r.user];
  for (auto it = data.users.begin(); it != data.users.end();) {
    auto found = perUser.find(it->first);
    bool ok = found != perUser.end() && found->second > minRatings;
    it = ok ? std::next(it) : data.users.erase(it);
  }
  std::erase_if(data.ratings,
                [&](const RatingRecord& r) { return !data.users.count(r.user); });
}

}  // namespace fairrec
