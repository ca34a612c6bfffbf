#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fairrec/rules/atom_table.hpp"
#include "fairrec/rules/rule.hpp"

namespace fairrec {

// One grounded hinge-loss term: weight * max(0, constant + sum coeff_i * y_i)^exponent,
// with y the dense vector of target-atom values. Convex in y by construction.
struct GroundPotential {
  std::vector<std::pair<int32_t, double>> coefficients;  // (target index, coefficient)
  double constant = 0.0;
  int exponent = 1;
  double weight = 1.0;
  int32_t templateId = -1;

  double distance(std::span<const double> y) const {
    double l = constant;
    for (auto [idx, c] : coefficients) l += c * y[idx];
    return l > 0.0 ? l : 0.0;
  }

  double evaluate(std::span<const double> y) const {
    double d = distance(y);
    return weight * (exponent == 2 ? d * d : d);
  }

  // Largest value the affine part can take over [0,1]^n. The potential
  // is identically zero iff this is <= 0.
  double supremum() const {
    double s = constant;
    for (auto [idx, c] : coefficients)
      if (c > 0.0) s += c;
    return s;
  }
};

// A literal resolved against concrete atoms: either a fixed observed
// value or a target variable.
struct LiteralValue {
  bool negated = false;
  bool isTarget = false;
  double value = 0.0;    // when observed
  int32_t target = -1;   // when target
};

// Lukasiewicz translation of a ground rule into its hinge potential.
// For body B1 & ... & Bn -> H the distance to satisfaction is
//   max(0, sum val(Bi) - (n-1) - val(H)),
// where val of a negated literal L is 1 - val(L). A headless prior L
// has distance 1 - val(L). Observed literals fold into the constant.
// Coefficients of a target appearing several times are merged.
GroundPotential translate(std::span<const LiteralValue> body,
                          const std::optional<LiteralValue>& head, int exponent,
                          double weight, int32_t templateId = -1);

// Which atoms an open-world body literal may bind to.
enum class BodyAtomFilter : uint8_t { All, ObservedOnly, TargetsOnly };

struct GroundOptions {
  BodyAtomFilter openBodyFilter = BodyAtomFilter::All;
  // When >= 0, the filter applies only to body literals of this
  // predicate; when -1, to every open-world body literal.
  PredicateId filterPredicate = -1;
  int32_t templateId = -1;
};

// Instantiates a template against the atom table. Every literal binds
// only to atoms present in the table (closed-world absences are false,
// making those groundings trivially satisfied). Emits one potential per
// instantiation that (a) involves at least one target atom and (b) is
// not identically zero over the box. Iteration order is the table's
// insertion order, so output is deterministic.
std::vector<GroundPotential> ground(const RuleTemplate& rule, const AtomTable& table,
                                    const GroundOptions& options = {});

}  // namespace fairrec
