#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fairrec/common.hpp"
#include "fairrec/simgraph/similarity.hpp"

using namespace fairrec;

namespace {

SparseVec vec(std::initializer_list<std::pair<EntityId, double>> entries) {
  return SparseVec(entries);
}

}  // namespace

TEST_CASE("cosine over co-rated support") {
  CHECK(cosine(vec({{1, 4.0}, {2, 2.0}}), vec({{1, 4.0}, {2, 2.0}})) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(vec({{1, 4.0}}), vec({{2, 3.0}})) == 0.0);
  // dot 4*2 + 2*4 = 16, norms sqrt(20)*sqrt(20) = 20.
  CHECK(cosine(vec({{1, 4.0}, {2, 2.0}}), vec({{1, 2.0}, {2, 4.0}})) ==
        doctest::Approx(0.8).epsilon(1e-12));

  SUBCASE("full-vector norms shrink the value when supports differ") {
    auto a = vec({{1, 3.0}, {2, 4.0}, {3, 5.0}});
    auto b = vec({{1, 3.0}, {2, 4.0}});
    CHECK(cosine(a, b, CosineNorm::Corated) == doctest::Approx(1.0));
    CHECK(cosine(a, b, CosineNorm::Full) < 1.0);
  }
}

TEST_CASE("adjusted cosine centers by user means") {
  std::unordered_map<EntityId, double> means{{1, 3.0}, {2, 3.0}};
  // centered A = [1,-1], centered B = [-1,1] -> -1.
  CHECK(adjusted_cosine(vec({{1, 4.0}, {2, 2.0}}), vec({{1, 2.0}, {2, 4.0}}), means) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  auto a = vec({{1, 4.0}, {2, 2.0}});
  CHECK(adjusted_cosine(a, a, means) == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("single co-rater is degenerate") {
    CHECK(adjusted_cosine(vec({{1, 4.0}}), vec({{1, 5.0}}), means) == 0.0);
  }
  SUBCASE("all-centered-zero norm is degenerate") {
    CHECK(adjusted_cosine(vec({{1, 3.0}, {2, 3.0}}), vec({{1, 4.0}, {2, 2.0}}),
                          means) == 0.0);
  }
  SUBCASE("missing mean throws") {
    std::unordered_map<EntityId, double> partial{{1, 3.0}};
    CHECK_THROWS_AS(adjusted_cosine(vec({{1, 4.0}, {2, 2.0}}),
                                    vec({{1, 2.0}, {2, 4.0}}), partial),
                    std::invalid_argument);
  }
}

TEST_CASE("demographic similarity counts matching attributes") {
  UserInfo a{'F', 25, 4};
  CHECK(demographic_similarity(a, a) == doctest::Approx(1.0));
  CHECK(demographic_similarity(a, UserInfo{'M', 35, 7}) == 0.0);
  CHECK(demographic_similarity(a, UserInfo{'F', 35, 7}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("content similarity is a binary genre cosine") {
  std::vector<std::string> action{"Action"};
  std::vector<std::string> actionScifi{"Action", "Sci-Fi"};
  std::vector<std::string> musical{"Musical"};
  CHECK(content_similarity(action, action) == doctest::Approx(1.0));
  CHECK(content_similarity(action, musical) == 0.0);
  CHECK(content_similarity(actionScifi, action) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("similarities are symmetric on random sparse vectors") {
  SplitMix64 rng(404);
  std::unordered_map<EntityId, double> means;
  for (EntityId u = 0; u < 30; ++u) means[u] = 1.0 + rng.uniform01() * 4.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto randomVec = [&]() {
      SparseVec v;
      for (EntityId u = 0; u < 30; ++u)
        if (rng.uniform01() < 0.4)
          v.emplace_back(u, 1.0 + static_cast<double>(rng.below(5)));
      return v;
    };
    SparseVec a = randomVec(), b = randomVec();
    CHECK(cosine(a, b) == cosine(b, a));
    CHECK(adjusted_cosine(a, b, means) == adjusted_cosine(b, a, means));
    double c = cosine(a, b);
    CHECK(c >= -1.0 - 1e-12);
    CHECK(c <= 1.0 + 1e-12);
  }
}

TEST_CASE("knn keeps the k best positive neighbors with id tie-breaks") {
  SUBCASE("argmax at k=1") {
    auto graph = knn({{10, {{11, 0.9}, {12, 0.5}}}}, 1, SimMeasure::UserCosine);
    REQUIRE(graph.neighbors(10));
    REQUIRE(graph.neighbors(10)->size() == 1);
    CHECK((*graph.neighbors(10))[0].id == 11);
  }
  SUBCASE("fewer than k positive candidates") {
    auto graph = knn({{10, {{11, 0.9}, {12, 0.5}, {13, 0.2}, {14, -0.3}, {15, 0.0}}}},
                     20, SimMeasure::UserCosine);
    CHECK(graph.neighbors(10)->size() == 3);
  }
  SUBCASE("tie at the k-th slot goes to the lower id") {
    auto graph = knn({{10, {{14, 0.5}, {11, 0.9}, {13, 0.5}}}}, 2,
                     SimMeasure::UserCosine);
    auto& n = *graph.neighbors(10);
    REQUIRE(n.size() == 2);
    CHECK(n[0].id == 11);
    CHECK(n[1].id == 13);
  }
  SUBCASE("candidate order does not matter") {
    auto a = knn({{10, {{14, 0.5}, {11, 0.9}, {13, 0.5}}}}, 2, SimMeasure::UserCosine);
    auto b = knn({{10, {{13, 0.5}, {14, 0.5}, {11, 0.9}}}}, 2, SimMeasure::UserCosine);
    REQUIRE(a.edges.size() == b.edges.size());
    for (size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].first == b.edges[i].first);
      for (size_t j = 0; j < a.edges[i].second.size(); ++j)
        CHECK(a.edges[i].second[j].id == b.edges[i].second[j].id);
    }
  }
  SUBCASE("self edges are dropped") {
    auto graph = knn({{10, {{10, 1.0}, {11, 0.4}}}}, 2, SimMeasure::UserCosine);
    REQUIRE(graph.neighbors(10)->size() == 1);
    CHECK((*graph.neighbors(10))[0].id == 11);
  }
}

TEST_CASE("built graphs are directed") {
  // User 3's single kNN slot goes to user 1, while user 2's slot points
  // at 3; nobody points at 2 even though 2 has outgoing edges.
  RatingsDataset data;
  data.users[1] = data.users[2] = data.users[3] = UserInfo{'M', 25, 0};
  for (EntityId m = 1; m <= 4; ++m) data.movies[m] = MovieInfo{"m", {"Action"}};
  data.ratings = {
      {1, 1, 5, 0}, {1, 2, 5, 0},
      {2, 1, 5, 0}, {2, 2, 1, 0}, {2, 3, 5, 0},
      {3, 1, 5, 0}, {3, 2, 4, 0}, {3, 3, 5, 0},
  };
  std::vector<int32_t> all{0, 1, 2, 3, 4, 5, 6, 7};
  auto view = RatingsView::fromRatings(data, all);
  auto graph = build_graph(data, view, SimMeasure::UserCosine, 1);

  auto& n3 = *graph.neighbors(3);
  REQUIRE(n3.size() == 1);
  CHECK(n3[0].id == 1);
  auto& n2 = *graph.neighbors(2);
  REQUIRE(n2.size() == 1);
  CHECK(n2[0].id == 3);
  bool pointedAt2 = false;
  for (auto& [e, ns] : graph.edges)
    for (auto& n : ns) pointedAt2 |= (n.id == 2);
  CHECK_FALSE(pointedAt2);
}

TEST_CASE("similarity caches round-trip through the text format") {
  std::vector<std::pair<EntityId, std::vector<Neighbor>>> cands{
      {1, {{2, 0.75}, {3, 0.5}}},
      {2, {{1, 0.75}}},
  };
  auto graph = knn(std::move(cands), 2, SimMeasure::ItemCosine);
  std::stringstream io;
  write_graph(io, graph);
  auto back = read_graph(io, SimMeasure::ItemCosine, 2);
  REQUIRE(back.edges.size() == graph.edges.size());
  for (size_t i = 0; i < graph.edges.size(); ++i) {
    CHECK(back.edges[i].first == graph.edges[i].first);
    REQUIRE(back.edges[i].second.size() == graph.edges[i].second.size());
    for (size_t j = 0; j < graph.edges[i].second.size(); ++j) {
      CHECK(back.edges[i].second[j].id == graph.edges[i].second[j].id);
      CHECK(back.edges[i].second[j].similarity ==
            graph.edges[i].second[j].similarity);
    }
  }
}
