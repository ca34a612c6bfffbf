#include "fairrec/model/fair_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace fairrec {

namespace {

std::string lowercase(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct FairRule {
  const char* name;
  const char* text;
  bool coupling;  // weight defaults to couplingWeight instead of aggregationWeight
};

constexpr FairRule kItemRules[] = {
    {"fair_item_protected",
     "%w: IsFemale(U) & Rating(U, I) -> ProtectedItemRating(I)", false},
    {"fair_item_unprotected",
     "%w: !IsFemale(U) & Rating(U, I) -> UnprotectedItemRating(I)", false},
    {"fair_item_couple_pu",
     "%w: ProtectedItemRating(I) -> UnprotectedItemRating(I)", true},
    {"fair_item_couple_up",
     "%w: UnprotectedItemRating(I) -> ProtectedItemRating(I)", true},
};

constexpr FairRule kItemMirrorRules[] = {
    {"fair_item_protected_down",
     "%w: IsFemale(U) & ProtectedItemRating(I) -> Rating(U, I)", false},
    {"fair_item_unprotected_down",
     "%w: !IsFemale(U) & UnprotectedItemRating(I) -> Rating(U, I)", false},
};

constexpr FairRule kGroupRules[] = {
    {"fair_group_protected",
     "%w: IsFemale(U) & Rating(U, I) & IsGenre(I, G) -> ProtectedItemGroupRating(G)",
     false},
    {"fair_group_unprotected",
     "%w: !IsFemale(U) & Rating(U, I) & IsGenre(I, G) -> UnprotectedItemGroupRating(G)",
     false},
    {"fair_group_couple_pu",
     "%w: ProtectedItemGroupRating(G) -> UnprotectedItemGroupRating(G)", true},
    {"fair_group_couple_up",
     "%w: UnprotectedItemGroupRating(G) -> ProtectedItemGroupRating(G)", true},
};

constexpr FairRule kGroupMirrorRules[] = {
    {"fair_group_protected_down",
     "%w: IsFemale(U) & ProtectedItemGroupRating(G) & IsGenre(I, G) -> Rating(U, I)",
     false},
    {"fair_group_unprotected_down",
     "%w: !IsFemale(U) & UnprotectedItemGroupRating(G) & IsGenre(I, G) -> Rating(U, I)",
     false},
};

}  // namespace

void extend_with_fairness(BuiltModel& model, const FairnessSpec& fair,
                          const RatingsDataset& data, const ModelSpec& spec) {
  if (!fair.applyToItems && !fair.applyToGroups)
    throw std::invalid_argument("fairness enabled but neither items nor groups selected");
  if (fair.aggregationWeight < 0 || fair.couplingWeight < 0)
    throw std::invalid_argument("fairness weights must be nonnegative");

  Vocabulary& vocab = *model.vocab;
  AtomTable& atoms = *model.atoms;
  ModelPredicates& P = model.preds;

  P.isProtected = vocab.declare("IsFemale", {Domain::User}, true);
  for (const auto& [id, info] : data.users) {
    if (info.gender != 'F' && info.gender != 'M')
      throw DataError("unknown gender code for user " + std::to_string(id));
    atoms.addObserved(P.isProtected, id, info.gender == 'F' ? 1.0 : 0.0);
  }

  if (fair.applyToItems) {
    P.protectedItem = vocab.declare("ProtectedItemRating", {Domain::Item}, false);
    P.unprotectedItem = vocab.declare("UnprotectedItemRating", {Domain::Item}, false);
    for (const auto& [id, movie] : data.movies) {
      int32_t p = atoms.addTarget(P.protectedItem, id);
      int32_t u = atoms.addTarget(P.unprotectedItem, id);
      model.itemLatents.emplace_back(atoms.targetIndexOf(p), atoms.targetIndexOf(u));
    }
  }

  if (fair.applyToGroups) {
    P.itemGroup = vocab.declare("IsGenre", {Domain::Item, Domain::Group}, true);
    P.protectedGroup = vocab.declare("ProtectedItemGroupRating", {Domain::Group}, false);
    P.unprotectedGroup =
        vocab.declare("UnprotectedItemGroupRating", {Domain::Group}, false);

    auto genres = filter_genres();
    for (const auto& [id, movie] : data.movies) {
      for (const std::string& g : movie.genres) {
        std::string low = lowercase(g);
        auto at = std::find(genres.begin(), genres.end(), low);
        if (at == genres.end()) continue;
        EntityId gid = static_cast<EntityId>(at - genres.begin());
        model.groupIds.emplace(low, gid);
        atoms.addObserved(P.itemGroup, id, gid, 1.0);
      }
    }
    for (const auto& [name, gid] : model.groupIds) {
      int32_t p = atoms.addTarget(P.protectedGroup, gid);
      int32_t u = atoms.addTarget(P.unprotectedGroup, gid);
      model.groupLatents.emplace_back(atoms.targetIndexOf(p), atoms.targetIndexOf(u));
    }
  }

  auto addRules = [&](std::span<const FairRule> defs) {
    for (const FairRule& fr : defs) {
      double w = fr.coupling ? fair.couplingWeight : fair.aggregationWeight;
      if (auto it = spec.weights.find(fr.name); it != spec.weights.end()) w = it->second;
      int e = 2;
      if (auto it = spec.exponents.find(fr.name); it != spec.exponents.end())
        e = it->second;
      model.rules.push_back(make_rule(vocab, fr.name, fr.text, w, e, fair.fairnessBody));
    }
  };
  if (fair.applyToItems) {
    addRules(kItemRules);
    if (fair.mirrorAggregation) addRules(kItemMirrorRules);
  }
  if (fair.applyToGroups) {
    addRules(kGroupRules);
    if (fair.mirrorAggregation) addRules(kGroupMirrorRules);
  }
}

double mean_latent_gap(const BuiltModel& model, std::span<const double> values) {
  if (model.itemLatents.empty()) return 0.0;
  double sum = 0.0;
  for (auto [p, u] : model.itemLatents) sum += std::abs(values[p] - values[u]);
  return sum / static_cast<double>(model.itemLatents.size());
}

}  // namespace fairrec
