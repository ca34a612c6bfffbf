#pragma once

#include "fairrec/model/hyper_model.hpp"

namespace fairrec {

// Fairness extension: latent protected/unprotected aggregate-rating
// variables per item and per item group, fed by rating atoms and tied
// together by soft equality (a coupled pair of implications).
struct FairnessSpec {
  bool applyToItems = true;
  bool applyToGroups = true;
  double aggregationWeight = 1.0;  // rules feeding the latents
  double couplingWeight = 10.0;    // the equality pair
  // The displayed aggregation implications only push a latent upward,
  // so on its own it floats to the group's maximum rating, every
  // fairness potential zeroes out, and no pressure reaches the
  // predictions. Mirroring each implication (latent back onto the
  // rating) makes the squared pair an equality, so each latent tracks
  // its group's per-item mean and the coupling penalizes the gap
  // between group means. false keeps the one-sided rules exactly as
  // displayed.
  bool mirrorAggregation = true;
  BodyAtomFilter fairnessBody = BodyAtomFilter::All;  // Rating literals in rule bodies
};

// Adds IsFemale evidence, IsGenre item-group evidence, the latent
// target atoms, and the fairness rules to an already-built model. The
// base model's rules and atoms are left untouched. Weight/exponent
// overrides come from the same per-rule-name maps as the base model.
void extend_with_fairness(BuiltModel& model, const FairnessSpec& fair,
                          const RatingsDataset& data, const ModelSpec& spec);

// Mean |P_i - U_i| over the item latent pairs at a solution; the
// coupling rules drive this toward zero as their weight grows.
double mean_latent_gap(const BuiltModel& model, std::span<const double> values);

}  // namespace fairrec
