#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fairrec/dataio/movielens.hpp"
#include "fairrec/rules/grounding.hpp"
#include "fairrec/simgraph/similarity.hpp"

namespace fairrec {

enum class ModelVariant : uint8_t { MC, MC_CF, MC_CF_DC };

const char* variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);

// Similarity measures a variant grounds over.
std::vector<SimMeasure> variant_measures(ModelVariant v);

struct ModelSpec {
  ModelVariant variant = ModelVariant::MC_CF;
  int k = 20;
  std::map<std::string, double> weights;   // overrides by rule name
  std::map<std::string, int> exponents;    // overrides by rule name
  BodyAtomFilter bodyRatings = BodyAtomFilter::All;  // Rating literals in implication bodies
};

// A rule with its config name and how Rating literals in its body bind.
struct ModelRule {
  std::string name;
  RuleTemplate rule;
  BodyAtomFilter bodyFilter = BodyAtomFilter::All;
};

// Per-user/item means of normalized training ratings.
struct Priors {
  std::map<EntityId, double> userMean;
  std::map<EntityId, double> itemMean;
  double globalMean = 0.5;
  int coldUsers = 0;  // fell back to the global mean
  int coldItems = 0;
};

Priors compute_priors(const RatingsDataset& data, std::span<const int32_t> trainIdx);

struct ModelPredicates {
  PredicateId rating = -1;
  PredicateId avgUser = -1;
  PredicateId avgItem = -1;
  PredicateId simUserCosine = -1;
  PredicateId simItemCosine = -1;
  PredicateId simItemAdjCosine = -1;
  PredicateId simUserDemo = -1;
  PredicateId simItemContent = -1;
  // Filled when fairness rules are attached.
  PredicateId isProtected = -1;
  PredicateId itemGroup = -1;
  PredicateId protectedItem = -1;
  PredicateId unprotectedItem = -1;
  PredicateId protectedGroup = -1;
  PredicateId unprotectedGroup = -1;
};

struct BuiltModel {
  std::unique_ptr<Vocabulary> vocab;
  std::unique_ptr<AtomTable> atoms;
  ModelPredicates preds;
  std::vector<ModelRule> rules;
  // Target variables 0..targetPairs.size()-1 are the test-pair ratings,
  // in test-index order. Fairness latents come after.
  std::vector<std::pair<EntityId, EntityId>> targetPairs;
  std::vector<std::pair<int32_t, int32_t>> itemLatents;   // (P_i, U_i) variable ids
  std::vector<std::pair<int32_t, int32_t>> groupLatents;  // (P_g, U_g) variable ids
  std::map<std::string, EntityId> groupIds;
};

// Assembles the rule set and evidence for one variant on one fold:
// observed Rating atoms from trainIdx, target Rating atoms for testIdx
// pairs, average-rating atoms, and binary kNN similarity atoms.
BuiltModel build_model(const ModelSpec& spec, const RatingsDataset& data,
                       std::span<const int32_t> trainIdx,
                       std::span<const int32_t> testIdx,
                       const std::map<SimMeasure, SimilarityGraph>& graphs);

// Builds a named rule from `text` with "%w" replaced by the weight and
// "^2" appended when exponent is 2.
ModelRule make_rule(const Vocabulary& vocab, const std::string& name,
                    const std::string& text, double weight, int exponent,
                    BodyAtomFilter filter);

// Grounds every rule with its body filter; potentials are concatenated
// in rule order with templateId set to the rule's index.
std::vector<GroundPotential> ground_model(const BuiltModel& model);

// The model as a rule file, one `# name` comment plus rule per entry.
std::string render_model(const BuiltModel& model);

}  // namespace fairrec
