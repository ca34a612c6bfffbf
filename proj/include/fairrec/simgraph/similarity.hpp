#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairrec/dataio/movielens.hpp"

namespace fairrec {

enum class SimMeasure : uint8_t {
  UserCosine,
  ItemCosine,
  ItemAdjustedCosine,
  UserDemographic,
  ItemContent,
};

const char* measure_name(SimMeasure m);

enum class CosineNorm : uint8_t { Corated, Full };

// Sparse vector sorted by id, e.g. one user's (itemId, stars) profile.
using SparseVec = std::vector<std::pair<EntityId, double>>;

// Cosine over the intersection of supports. In Corated mode norms are
// restricted to the co-rated entries (the neighborhood-CF convention);
// Full uses whole-vector norms. Returns 0 when the intersection is
// empty or a norm vanishes.
double cosine(std::span<const std::pair<EntityId, double>> a,
              std::span<const std::pair<EntityId, double>> b,
              CosineNorm norm = CosineNorm::Corated);

// Pearson-style adjusted cosine between two item vectors (userId ->
// stars), centering each co-rating by that user's training mean.
// Returns 0 with fewer than 2 co-raters or a zero norm. Throws when a
// co-rater has no mean.
double adjusted_cosine(std::span<const std::pair<EntityId, double>> itemA,
                       std::span<const std::pair<EntityId, double>> itemB,
                       const std::unordered_map<EntityId, double>& userMeans);

// Cosine of one-hot (gender, age bracket, occupation) encodings, which
// is the fraction of matching attributes.
double demographic_similarity(const UserInfo& a, const UserInfo& b);

// Cosine of binary genre-membership vectors. Genre lists must be
// sorted.
double content_similarity(std::span<const std::string> genresA,
                          std::span<const std::string> genresB);

struct Neighbor {
  EntityId id;
  double similarity;
};

// Directed kNN graph: edges[e] lists the (up to) k most similar
// neighbors of entity e with positive similarity, best first. Ties
// break toward the lower entity id. Entities are kept in ascending id
// order.
struct SimilarityGraph {
  SimMeasure measure;
  int k = 0;
  std::vector<std::pair<EntityId, std::vector<Neighbor>>> edges;

  const std::vector<Neighbor>* neighbors(EntityId e) const;
};

// Selects the top-k positive-similarity neighbors per entity.
// `candidates` maps each entity to its scored candidates in any order.
SimilarityGraph knn(
    std::vector<std::pair<EntityId, std::vector<Neighbor>>> candidates, int k,
    SimMeasure measure);

// Ratings restricted to one training fold, in the shapes the measures
// need. Star values are raw (unnormalized).
struct RatingsView {
  std::vector<std::pair<EntityId, SparseVec>> byUser;  // user -> (item, stars)
  std::vector<std::pair<EntityId, SparseVec>> byItem;  // item -> (user, stars)
  std::unordered_map<EntityId, double> userMeanStars;

  static RatingsView fromRatings(const RatingsDataset& data,
                                 std::span<const int32_t> ratingIndices);
};

// Computes the full graph for one measure over one training fold.
SimilarityGraph build_graph(const RatingsDataset& data, const RatingsView& train,
                            SimMeasure measure, int k,
                            CosineNorm norm = CosineNorm::Corated);

// Cache format: one `entityId neighborId similarity` line per edge.
void write_graph(std::ostream& out, const SimilarityGraph& graph);
SimilarityGraph read_graph(std::istream& in, SimMeasure measure, int k);

}  // namespace fairrec
