#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fairrec {

using PredicateId = int32_t;
using EntityId = int32_t;

enum class Domain : uint8_t { User, Item, Group };

// A predicate symbol. closedWorld predicates hold observed atoms only
// (similarities, averages, demographics); open predicates may also hold
// inference targets (Rating, the fairness latents).
struct Predicate {
  std::string name;
  std::vector<Domain> argDomains;  // size is the arity (1 or 2)
  bool closedWorld = true;

  int arity() const { return static_cast<int>(argDomains.size()); }
};

class Vocabulary {
public:
  PredicateId declare(std::string name, std::vector<Domain> argDomains,
                      bool closedWorld) {
    if (argDomains.empty() || argDomains.size() > 2)
      throw std::invalid_argument("predicate arity must be 1 or 2: " + name);
    if (byName_.count(name))
      throw std::invalid_argument("duplicate predicate name: " + name);
    PredicateId id = static_cast<PredicateId>(preds_.size());
    byName_.emplace(name, id);
    preds_.push_back(Predicate{std::move(name), std::move(argDomains), closedWorld});
    return id;
  }

  std::optional<PredicateId> find(std::string_view name) const {
    auto it = byName_.find(std::string(name));
    if (it == byName_.end()) return std::nullopt;
    return it->second;
  }

  const Predicate& at(PredicateId id) const { return preds_.at(id); }

  int size() const { return static_cast<int>(preds_.size()); }

private:
  std::vector<Predicate> preds_;
  std::unordered_map<std::string, PredicateId> byName_;
};

}  // namespace fairrec
