#include "fairrec/model/hyper_model.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "fairrec/common.hpp"

namespace fairrec {

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::MC: return "mc";
    case ModelVariant::MC_CF: return "mc_cf";
    case ModelVariant::MC_CF_DC: return "mc_cf_dc";
  }
  return "unknown";
}

ModelVariant variant_from_name(const std::string& name) {
  if (name == "mc" || name == "MC") return ModelVariant::MC;
  if (name == "mc_cf" || name == "MC_CF") return ModelVariant::MC_CF;
  if (name == "mc_cf_dc" || name == "MC_CF_DC") return ModelVariant::MC_CF_DC;
  throw DataError("unknown model variant '" + name + "'");
}

std::vector<SimMeasure> variant_measures(ModelVariant v) {
  switch (v) {
    case ModelVariant::MC:
      return {};
    case ModelVariant::MC_CF:
      return {SimMeasure::UserCosine, SimMeasure::ItemCosine,
              SimMeasure::ItemAdjustedCosine};
    case ModelVariant::MC_CF_DC:
      return {SimMeasure::UserCosine, SimMeasure::ItemCosine,
              SimMeasure::ItemAdjustedCosine, SimMeasure::UserDemographic,
              SimMeasure::ItemContent};
  }
  return {};
}

Priors compute_priors(const RatingsDataset& data, std::span<const int32_t> trainIdx) {
  Priors priors;
  std::map<EntityId, std::pair<double, int>> userAcc, itemAcc;
  double globalSum = 0.0;
  for (int32_t idx : trainIdx) {
    const RatingRecord& r = data.ratings[idx];
    double v = data.normalized(r.stars);
    auto& ua = userAcc[r.user];
    ua.first += v;
    ua.second += 1;
    auto& ia = itemAcc[r.movie];
    ia.first += v;
    ia.second += 1;
    globalSum += v;
  }
  priors.globalMean = trainIdx.empty() ? 0.5 : globalSum / trainIdx.size();

  for (const auto& [id, info] : data.users) {
    auto it = userAcc.find(id);
    if (it == userAcc.end()) {
      priors.userMean[id] = priors.globalMean;
      ++priors.coldUsers;
    } else {
      priors.userMean[id] = it->second.first / it->second.second;
    }
  }
  for (const auto& [id, info] : data.movies) {
    auto it = itemAcc.find(id);
    if (it == itemAcc.end()) {
      priors.itemMean[id] = priors.globalMean;
      ++priors.coldItems;
    } else {
      priors.itemMean[id] = it->second.first / it->second.second;
    }
  }
  if (priors.coldUsers || priors.coldItems)
    std::cerr << "warning: " << priors.coldUsers << " user(s) and "
              << priors.coldItems
              << " item(s) have no training ratings; using the global mean\n";
  return priors;
}

namespace {

struct RuleDefault {
  const char* name;
  const char* text;  // %w is replaced by the weight
  double weight;
  int exponent;
};

constexpr RuleDefault kBaseRules[] = {
    {"user_avg_up", "%w: AverageUserRating(U) -> Rating(U, I)", 1.0, 2},
    {"user_avg_down", "%w: !AverageUserRating(U) -> !Rating(U, I)", 1.0, 2},
    {"item_avg_up", "%w: AverageItemRating(I) -> Rating(U, I)", 1.0, 2},
    {"item_avg_down", "%w: !AverageItemRating(I) -> !Rating(U, I)", 1.0, 2},
    {"neg_prior", "%w: !Rating(U, I)", 0.1, 1},
};

constexpr RuleDefault kCfRules[] = {
    {"sim_users_cosine",
     "%w: SimilarUsersCosine(U1, U2) & Rating(U1, I) -> Rating(U2, I)", 5.0, 2},
    {"sim_items_cosine",
     "%w: SimilarItemsCosine(I1, I2) & Rating(U, I1) -> Rating(U, I2)", 5.0, 2},
    {"sim_items_adj_cosine",
     "%w: SimilarItemsAdjCosine(I1, I2) & Rating(U, I1) -> Rating(U, I2)", 5.0, 2},
};

constexpr RuleDefault kDcRules[] = {
    {"sim_users_demo",
     "%w: SimilarUsersDemo(U1, U2) & Rating(U1, I) -> Rating(U2, I)", 1.0, 2},
    {"sim_items_content",
     "%w: SimilarItemsContent(I1, I2) & Rating(U, I1) -> Rating(U, I2)", 1.0, 2},
};

}  // namespace

ModelRule make_rule(const Vocabulary& vocab, const std::string& name,
                    const std::string& text, double weight, int exponent,
                    BodyAtomFilter filter) {
  std::string line = text;
  size_t at = line.find("%w");
  line.replace(at, 2, format_double(weight));
  if (exponent == 2) line += " ^2";
  return ModelRule{name, parse_rule(line, vocab), filter};
}

BuiltModel build_model(const ModelSpec& spec, const RatingsDataset& data,
                       std::span<const int32_t> trainIdx,
                       std::span<const int32_t> testIdx,
                       const std::map<SimMeasure, SimilarityGraph>& graphs) {
  if (spec.k < 1) throw std::invalid_argument("k must be >= 1");

  BuiltModel model;
  model.vocab = std::make_unique<Vocabulary>();
  Vocabulary& vocab = *model.vocab;
  ModelPredicates& P = model.preds;

  P.rating = vocab.declare("Rating", {Domain::User, Domain::Item}, false);
  P.avgUser = vocab.declare("AverageUserRating", {Domain::User}, true);
  P.avgItem = vocab.declare("AverageItemRating", {Domain::Item}, true);

  auto measures = variant_measures(spec.variant);
  auto needs = [&](SimMeasure m) {
    return std::find(measures.begin(), measures.end(), m) != measures.end();
  };
  if (needs(SimMeasure::UserCosine))
    P.simUserCosine = vocab.declare("SimilarUsersCosine", {Domain::User, Domain::User}, true);
  if (needs(SimMeasure::ItemCosine))
    P.simItemCosine = vocab.declare("SimilarItemsCosine", {Domain::Item, Domain::Item}, true);
  if (needs(SimMeasure::ItemAdjustedCosine))
    P.simItemAdjCosine =
        vocab.declare("SimilarItemsAdjCosine", {Domain::Item, Domain::Item}, true);
  if (needs(SimMeasure::UserDemographic))
    P.simUserDemo = vocab.declare("SimilarUsersDemo", {Domain::User, Domain::User}, true);
  if (needs(SimMeasure::ItemContent))
    P.simItemContent =
        vocab.declare("SimilarItemsContent", {Domain::Item, Domain::Item}, true);

  model.atoms = std::make_unique<AtomTable>(vocab);
  AtomTable& atoms = *model.atoms;

  // Targets first so predictions are variables 0..nTest-1.
  for (int32_t idx : testIdx) {
    const RatingRecord& r = data.ratings[idx];
    if (atoms.find(P.rating, r.user, r.movie)) continue;  // duplicate pair
    atoms.addTarget(P.rating, r.user, r.movie);
    model.targetPairs.emplace_back(r.user, r.movie);
  }
  for (int32_t idx : trainIdx) {
    const RatingRecord& r = data.ratings[idx];
    if (atoms.find(P.rating, r.user, r.movie)) continue;
    atoms.addObserved(P.rating, r.user, r.movie, data.normalized(r.stars));
  }

  Priors priors = compute_priors(data, trainIdx);
  for (const auto& [id, mean] : priors.userMean) atoms.addObserved(P.avgUser, id, mean);
  for (const auto& [id, mean] : priors.itemMean) atoms.addObserved(P.avgItem, id, mean);

  auto addGraphAtoms = [&](SimMeasure m, PredicateId pred) {
    auto it = graphs.find(m);
    if (it == graphs.end())
      throw DataError(std::string("missing similarity graph: ") + measure_name(m));
    // Edge n -> e means n is one of e's k nearest neighbors.
    for (const auto& [entity, neighbors] : it->second.edges)
      for (const Neighbor& n : neighbors) atoms.addObserved(pred, n.id, entity, 1.0);
  };
  if (needs(SimMeasure::UserCosine)) addGraphAtoms(SimMeasure::UserCosine, P.simUserCosine);
  if (needs(SimMeasure::ItemCosine)) addGraphAtoms(SimMeasure::ItemCosine, P.simItemCosine);
  if (needs(SimMeasure::ItemAdjustedCosine))
    addGraphAtoms(SimMeasure::ItemAdjustedCosine, P.simItemAdjCosine);
  if (needs(SimMeasure::UserDemographic))
    addGraphAtoms(SimMeasure::UserDemographic, P.simUserDemo);
  if (needs(SimMeasure::ItemContent))
    addGraphAtoms(SimMeasure::ItemContent, P.simItemContent);

  auto addRules = [&](std::span<const RuleDefault> defs) {
    for (const RuleDefault& is : defs) {
      double w = is.weight;
      if (auto it = spec.weights.find(is.name); it != spec.weights.end()) w = it->second;
      int e = is.exponent;
      if (auto it = spec.exponents.find(is.name); it != spec.exponents.end())
        e = it->second;
      // Priors range over the target variables themselves, so the body
      // filter (an implication-body ablation) never applies to them.
      bool isPrior = std::string_view(is.name) == "neg_prior";
      model.rules.push_back(make_rule(vocab, is.name, is.text, w, e,
                                      isPrior ? BodyAtomFilter::All : spec.bodyRatings));
    }
  };
  addRules(kBaseRules);
  if (spec.variant != ModelVariant::MC) addRules(kCfRules);
  if (spec.variant == ModelVariant::MC_CF_DC) addRules(kDcRules);

  return model;
}

std::vector<GroundPotential> ground_model(const BuiltModel& model) {
  std::vector<GroundPotential> potentials;
  for (size_t i = 0; i < model.rules.size(); ++i) {
    const ModelRule& r = model.rules[i];
    if (r.rule.weight == 0.0) continue;
    GroundOptions opt;
    opt.openBodyFilter = r.bodyFilter;
    opt.filterPredicate = model.preds.rating;
    opt.templateId = static_cast<int32_t>(i);
    auto grounded = ground(r.rule, *model.atoms, opt);
    potentials.insert(potentials.end(), std::make_move_iterator(grounded.begin()),
                      std::make_move_iterator(grounded.end()));
  }
  return potentials;
}

std::string render_model(const BuiltModel& model) {
  std::ostringstream out;
  for (const ModelRule& r : model.rules) {
    out << "# " << r.name << '\n';
    out << render_rule(r.rule, *model.vocab) << '\n';
  }
  return out.str();
}

}  // namespace fairrec
