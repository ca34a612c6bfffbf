#include "fairrec/simgraph/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fairrec/common.hpp"

namespace fairrec {

const char* measure_name(SimMeasure m) {
  switch (m) {
    case SimMeasure::UserCosine: return "user_cosine";
    case SimMeasure::ItemCosine: return "item_cosine";
    case SimMeasure::ItemAdjustedCosine: return "item_adjusted_cosine";
    case SimMeasure::UserDemographic: return "user_demographic";
    case SimMeasure::ItemContent: return "item_content";
  }
  return "unknown";
}

double cosine(std::span<const std::pair<EntityId, double>> a,
              std::span<const std::pair<EntityId, double>> b, CosineNorm norm) {
  double dot = 0.0, normA = 0.0, normB = 0.0;
  size_t i = 0, j = 0;
  size_t corated = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      dot += a[i].second * b[j].second;
      normA += a[i].second * a[i].second;
      normB += b[j].second * b[j].second;
      ++corated;
      ++i;
      ++j;
    }
  }
  if (corated == 0) return 0.0;
  if (norm == CosineNorm::Full) {
    normA = normB = 0.0;
    for (const auto& [id, v] : a) normA += v * v;
    for (const auto& [id, v] : b) normB += v * v;
  }
  if (normA == 0.0 || normB == 0.0) return 0.0;
  return dot / (std::sqrt(normA) * std::sqrt(normB));
}

double adjusted_cosine(std::span<const std::pair<EntityId, double>> itemA,
                       std::span<const std::pair<EntityId, double>> itemB,
                       const std::unordered_map<EntityId, double>& userMeans) {
  double dot = 0.0, normA = 0.0, normB = 0.0;
  size_t corated = 0;
  size_t i = 0, j = 0;
  while (i < itemA.size() && j < itemB.size()) {
    if (itemA[i].first < itemB[j].first) {
      ++i;
    } else if (itemB[j].first < itemA[i].first) {
      ++j;
    } else {
      auto mean = userMeans.find(itemA[i].first);
      if (mean == userMeans.end())
        throw std::invalid_argument("missing training mean for user " +
                                    std::to_string(itemA[i].first));
      double ca = itemA[i].second - mean->second;
      double cb = itemB[j].second - mean->second;
      dot += ca * cb;
      normA += ca * ca;
      normB += cb * cb;
      ++corated;
      ++i;
      ++j;
    }
  }
  if (corated < 2 || normA == 0.0 || normB == 0.0) return 0.0;
  return dot / (std::sqrt(normA) * std::sqrt(normB));
}

double demographic_similarity(const UserInfo& a, const UserInfo& b) {
  int matches = (a.gender == b.gender) + (a.ageBracket == b.ageBracket) +
                (a.occupation == b.occupation);
  return matches / 3.0;
}

double content_similarity(std::span<const std::string> genresA,
                          std::span<const std::string> genresB) {
  if (genresA.empty() || genresB.empty()) return 0.0;
  size_t common = 0, i = 0, j = 0;
  while (i < genresA.size() && j < genresB.size()) {
    if (genresA[i] < genresB[j]) {
      ++i;
    } else if (genresB[j] < genresA[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  if (common == 0) return 0.0;
  return static_cast<double>(common) /
         (std::sqrt(static_cast<double>(genresA.size())) *
          std::sqrt(static_cast<double>(genresB.size())));
}

const std::vector<Neighbor>* SimilarityGraph::neighbors(EntityId e) const {
  auto it = std::lower_bound(edges.begin(), edges.end(), e,
                             [](const auto& entry, EntityId id) { return entry.first < id; });
  if (it == edges.end() || it->first != e) return nullptr;
  return &it->second;
}

SimilarityGraph knn(std::vector<std::pair<EntityId, std::vector<Neighbor>>> candidates,
                    int k, SimMeasure measure) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  SimilarityGraph graph;
  graph.measure = measure;
  graph.k = k;
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [entity, cands] : candidates) {
    std::erase_if(cands, [&](const Neighbor& n) {
      return n.similarity <= 0.0 || n.id == entity;
    });
    auto better = [](const Neighbor& a, const Neighbor& b) {
      return a.similarity > b.similarity ||
             (a.similarity == b.similarity && a.id < b.id);
    };
    size_t keep = std::min<size_t>(static_cast<size_t>(k), cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(), better);
    cands.resize(keep);
    graph.edges.emplace_back(entity, std::move(cands));
  }
  return graph;
}

RatingsView RatingsView::fromRatings(const RatingsDataset& data,
                                     std::span<const int32_t> ratingIndices) {
  RatingsView view;
  std::map<EntityId, SparseVec> byUser, byItem;
  for (int32_t idx : ratingIndices) {
    const RatingRecord& r = data.ratings[idx];
    byUser[r.user].emplace_back(r.movie, static_cast<double>(r.stars));
    byItem[r.movie].emplace_back(r.user, static_cast<double>(r.stars));
  }
  for (auto& [id, vec] : byUser) {
    std::sort(vec.begin(), vec.end());
    double sum = 0.0;
    for (const auto& [item, stars] : vec) sum += stars;
    view.userMeanStars[id] = sum / static_cast<double>(vec.size());
    view.byUser.emplace_back(id, std::move(vec));
  }
  for (auto& [id, vec] : byItem) {
    std::sort(vec.begin(), vec.end());
    view.byItem.emplace_back(id, std::move(vec));
  }
  return view;
}

SimilarityGraph build_graph(const RatingsDataset& data, const RatingsView& train,
                            SimMeasure measure, int k, CosineNorm norm) {
  std::vector<std::pair<EntityId, std::vector<Neighbor>>> candidates;

  auto pairwise = [&](const auto& entities, auto&& sim) {
    candidates.reserve(entities.size());
    for (size_t i = 0; i < entities.size(); ++i)
      candidates.emplace_back(entities[i].first, std::vector<Neighbor>{});
    for (size_t i = 0; i < entities.size(); ++i) {
      for (size_t j = i + 1; j < entities.size(); ++j) {
        double s = sim(entities[i].second, entities[j].second);
        if (s <= 0.0) continue;
        candidates[i].second.push_back({entities[j].first, s});
        candidates[j].second.push_back({entities[i].first, s});
      }
    }
  };

  switch (measure) {
    case SimMeasure::UserCosine:
      pairwise(train.byUser, [&](const SparseVec& a, const SparseVec& b) {
        return cosine(a, b, norm);
      });
      break;
    case SimMeasure::ItemCosine:
      pairwise(train.byItem, [&](const SparseVec& a, const SparseVec& b) {
        return cosine(a, b, norm);
      });
      break;
    case SimMeasure::ItemAdjustedCosine:
      pairwise(train.byItem, [&](const SparseVec& a, const SparseVec& b) {
        return adjusted_cosine(a, b, train.userMeanStars);
      });
      break;
    case SimMeasure::UserDemographic: {
      std::vector<std::pair<EntityId, UserInfo>> users(data.users.begin(),
                                                       data.users.end());
      pairwise(users, [&](const UserInfo& a, const UserInfo& b) {
        return demographic_similarity(a, b);
      });
      break;
    }
    case SimMeasure::ItemContent: {
      std::vector<std::pair<EntityId, std::vector<std::string>>> items;
      items.reserve(data.movies.size());
      for (const auto& [id, movie] : data.movies)
        items.emplace_back(id, std::vector<std::string>(movie.genres.begin(),
                                                        movie.genres.end()));
      pairwise(items, [&](const auto& a, const auto& b) {
        return content_similarity(a, b);
      });
      break;
    }
  }
  return knn(std::move(candidates), k, measure);
}

void write_graph(std::ostream& out, const SimilarityGraph& graph) {
  for (const auto& [entity, neighbors] : graph.edges)
    for (const Neighbor& n : neighbors)
      out << entity << ' ' << n.id << ' ' << format_double(n.similarity) << '\n';
}

SimilarityGraph read_graph(std::istream& in, SimMeasure measure, int k) {
  std::vector<std::pair<EntityId, std::vector<Neighbor>>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    EntityId entity, neighbor;
    double sim;
    if (!(fields >> entity >> neighbor >> sim))
      throw std::runtime_error("malformed similarity cache line: " + line);
    if (entries.empty() || entries.back().first != entity)
      entries.emplace_back(entity, std::vector<Neighbor>{});
    entries.back().second.push_back({neighbor, sim});
  }
  SimilarityGraph graph;
  graph.measure = measure;
  graph.k = k;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  graph.edges = std::move(entries);
  return graph;
}

}  // namespace fairrec
