#include "fairrec/rules/grounding.hpp"

#include <algorithm>
#include <stdexcept>

namespace fairrec {

GroundPotential translate(std::span<const LiteralValue> body,
                          const std::optional<LiteralValue>& head, int exponent,
                          double weight, int32_t templateId) {
  GroundPotential pot;
  pot.exponent = exponent;
  pot.weight = weight;
  pot.templateId = templateId;

  // Adds val(literal) * sign to the affine form.
  auto accumulate = [&pot](const LiteralValue& lit, double sign) {
    if (lit.negated) {
      pot.constant += sign;
      sign = -sign;
    }
    if (lit.isTarget)
      pot.coefficients.emplace_back(lit.target, sign);
    else
      pot.constant += sign * lit.value;
  };

  if (!head) {
    if (body.size() != 1)
      throw std::invalid_argument("headless rule must be a single-literal prior");
    // Prior L: distance 1 - val(L).
    pot.constant += 1.0;
    accumulate(body[0], -1.0);
  } else {
    for (const LiteralValue& lit : body) accumulate(lit, +1.0);
    pot.constant -= static_cast<double>(body.size()) - 1.0;
    accumulate(*head, -1.0);
  }

  // Merge repeated targets; drop exact cancellations.
  if (pot.coefficients.size() > 1) {
    std::stable_sort(pot.coefficients.begin(), pot.coefficients.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t out = 0;
    for (size_t i = 0; i < pot.coefficients.size();) {
      int32_t idx = pot.coefficients[i].first;
      double sum = 0.0;
      while (i < pot.coefficients.size() && pot.coefficients[i].first == idx)
        sum += pot.coefficients[i++].second;
      if (sum != 0.0) pot.coefficients[out++] = {idx, sum};
    }
    pot.coefficients.resize(out);
  }
  return pot;
}

namespace {

// Template compiled to variable slots for fast joins.
struct CompiledLiteral {
  PredicateId predicate;
  bool negated;
  bool openWorld;
  bool isHead;
  std::vector<int> slots;  // one per argument
};

struct Grounder {
  const AtomTable& table;
  const GroundOptions& options;
  int exponent;
  double weight;
  std::vector<CompiledLiteral> literals;  // body order, head last if present
  std::vector<EntityId> binding;
  std::vector<int32_t> chosen;  // atom index per literal
  std::vector<GroundPotential> out;

  bool admits(const CompiledLiteral& lit, int32_t atomIdx) const {
    const GroundAtom& a = table.atom(atomIdx);
    if (lit.isHead || !lit.openWorld) return true;
    if (options.filterPredicate >= 0 && lit.predicate != options.filterPredicate)
      return true;
    switch (options.openBodyFilter) {
      case BodyAtomFilter::ObservedOnly:
        return a.status == AtomStatus::Observed;
      case BodyAtomFilter::TargetsOnly:
        return a.status == AtomStatus::Target;
      case BodyAtomFilter::All:
        return true;
    }
    return true;
  }

  void emit() {
    std::vector<LiteralValue> body;
    std::optional<LiteralValue> head;
    bool anyTarget = false;
    for (size_t i = 0; i < literals.size(); ++i) {
      const GroundAtom& a = table.atom(chosen[i]);
      LiteralValue v;
      v.negated = literals[i].negated;
      if (a.status == AtomStatus::Target) {
        v.isTarget = true;
        v.target = table.targetIndexOf(chosen[i]);
        anyTarget = true;
      } else {
        v.value = a.value;
      }
      if (literals[i].isHead)
        head = v;
      else
        body.push_back(v);
    }
    if (!anyTarget) return;  // fully observed: a constant, skipped
    GroundPotential pot =
        translate(body, head, exponent, weight, options.templateId);
    if (pot.coefficients.empty()) return;  // targets cancelled out
    if (pot.supremum() <= 0.0) return;     // trivially satisfied everywhere
    out.push_back(std::move(pot));
  }

  void recurse(size_t litIdx) {
    if (litIdx == literals.size()) {
      emit();
      return;
    }
    const CompiledLiteral& lit = literals[litIdx];
    const int arity = static_cast<int>(lit.slots.size());

    int boundPos = -1;
    bool allBound = true;
    for (int p = 0; p < arity; ++p) {
      if (binding[lit.slots[p]] >= 0) {
        if (boundPos < 0) boundPos = p;
      } else {
        allBound = false;
      }
    }

    auto tryAtom = [&](int32_t atomIdx) {
      const GroundAtom& a = table.atom(atomIdx);
      std::array<int, 2> newlyBound{-1, -1};
      int bound = 0;
      for (int p = 0; p < arity; ++p) {
        int slot = lit.slots[p];
        if (binding[slot] >= 0) {
          if (binding[slot] != a.args[p]) {
            for (int s = 0; s < bound; ++s) binding[newlyBound[s]] = -1;
            return;
          }
        } else {
          binding[slot] = a.args[p];
          newlyBound[bound++] = slot;
        }
      }
      if (admits(lit, atomIdx)) {
        chosen[litIdx] = atomIdx;
        recurse(litIdx + 1);
      }
      for (int s = 0; s < bound; ++s) binding[newlyBound[s]] = -1;
    };

    if (allBound) {
      EntityId a0 = binding[lit.slots[0]];
      EntityId a1 = arity == 2 ? binding[lit.slots[1]] : -1;
      if (auto idx = table.find(lit.predicate, a0, a1)) tryAtom(*idx);
    } else if (boundPos >= 0) {
      for (int32_t idx : table.atomsOf(lit.predicate, boundPos,
                                       binding[lit.slots[boundPos]]))
        tryAtom(idx);
    } else {
      for (int32_t idx : table.atomsOf(lit.predicate)) tryAtom(idx);
    }
  }
};

}  // namespace

std::vector<GroundPotential> ground(const RuleTemplate& rule, const AtomTable& table,
                                    const GroundOptions& options) {
  const Vocabulary& vocab = table.vocabulary();

  Grounder g{table, options, rule.exponent, rule.weight, {}, {}, {}, {}};

  std::vector<std::string> varNames;
  auto slotOf = [&varNames](const std::string& v) {
    for (size_t i = 0; i < varNames.size(); ++i)
      if (varNames[i] == v) return static_cast<int>(i);
    varNames.push_back(v);
    return static_cast<int>(varNames.size() - 1);
  };

  auto compile = [&](const LiteralPattern& pat, bool isHead) {
    const Predicate& pred = vocab.at(pat.predicate);
    if (static_cast<int>(pat.vars.size()) != pred.arity())
      throw std::invalid_argument("arity mismatch for predicate " + pred.name);
    CompiledLiteral lit;
    lit.predicate = pat.predicate;
    lit.negated = pat.negated;
    lit.openWorld = !pred.closedWorld;
    lit.isHead = isHead;
    for (const std::string& v : pat.vars) lit.slots.push_back(slotOf(v));
    g.literals.push_back(std::move(lit));
  };

  for (const LiteralPattern& pat : rule.body) compile(pat, false);
  if (rule.head) compile(*rule.head, true);

  g.binding.assign(varNames.size(), -1);
  g.chosen.assign(g.literals.size(), -1);
  g.recurse(0);
  return std::move(g.out);
}

}  // namespace fairrec
