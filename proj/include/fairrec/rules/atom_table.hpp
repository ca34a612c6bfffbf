#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fairrec/rules/vocabulary.hpp"

namespace fairrec {

enum class AtomStatus : uint8_t { Observed, Target };

struct GroundAtom {
  PredicateId predicate;
  std::array<EntityId, 2> args;  // args[1] is -1 for arity-1 predicates
  AtomStatus status;
  double value;  // meaningful only when Observed
};

// Indexed store of ground atoms. Insertion order is the canonical
// iteration order everywhere (grounding determinism depends on it).
// Target atoms get dense variable indices 0..n-1 in insertion order.
class AtomTable {
public:
  explicit AtomTable(const Vocabulary& vocab) : vocab_(&vocab) {
    byPred_.resize(vocab.size());
    byPredArg_[0].resize(vocab.size());
    byPredArg_[1].resize(vocab.size());
  }

  int32_t addObserved(PredicateId p, EntityId a0, double value) {
    return add(p, a0, -1, AtomStatus::Observed, value);
  }
  int32_t addObserved(PredicateId p, EntityId a0, EntityId a1, double value) {
    return add(p, a0, a1, AtomStatus::Observed, value);
  }
  int32_t addTarget(PredicateId p, EntityId a0) {
    return add(p, a0, -1, AtomStatus::Target, 0.0);
  }
  int32_t addTarget(PredicateId p, EntityId a0, EntityId a1) {
    return add(p, a0, a1, AtomStatus::Target, 0.0);
  }

  std::optional<int32_t> find(PredicateId p, EntityId a0, EntityId a1 = -1) const {
    auto it = lookup_.find(key(p, a0, a1));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  const GroundAtom& atom(int32_t idx) const { return atoms_[idx]; }
  int32_t size() const { return static_cast<int32_t>(atoms_.size()); }

  // Dense variable index of a Target atom, -1 for Observed.
  int32_t targetIndexOf(int32_t atomIdx) const { return targetIdx_[atomIdx]; }
  int32_t targetCount() const { return static_cast<int32_t>(targetAtoms_.size()); }
  // Atom index of target variable i.
  int32_t targetAtom(int32_t varIdx) const { return targetAtoms_[varIdx]; }

  std::span<const int32_t> atomsOf(PredicateId p) const {
    if (static_cast<size_t>(p) >= byPred_.size()) return {};
    return byPred_[p];
  }

  // Atoms of predicate p whose argument at position argPos equals e.
  std::span<const int32_t> atomsOf(PredicateId p, int argPos, EntityId e) const {
    if (static_cast<size_t>(p) >= byPredArg_[argPos].size()) return {};
    const auto& m = byPredArg_[argPos][p];
    auto it = m.find(e);
    if (it == m.end()) return {};
    return it->second;
  }

  const Vocabulary& vocabulary() const { return *vocab_; }

private:
  int32_t add(PredicateId p, EntityId a0, EntityId a1, AtomStatus st, double value) {
    const Predicate& pred = vocab_->at(p);
    // The vocabulary may have grown since construction.
    if (static_cast<size_t>(vocab_->size()) > byPred_.size()) {
      byPred_.resize(vocab_->size());
      byPredArg_[0].resize(vocab_->size());
      byPredArg_[1].resize(vocab_->size());
    }
    if ((pred.arity() == 1) != (a1 == -1))
      throw std::invalid_argument("arity mismatch for predicate " + pred.name);
    if (st == AtomStatus::Observed && (value < 0.0 || value > 1.0))
      throw std::invalid_argument("observed value outside [0,1] for " + pred.name);
    if (st == AtomStatus::Target && pred.closedWorld)
      throw std::invalid_argument("target atom for closed-world predicate " + pred.name);
    auto [it, inserted] = lookup_.emplace(key(p, a0, a1), size());
    if (!inserted)
      throw std::invalid_argument("duplicate atom for predicate " + pred.name);
    int32_t idx = size();
    atoms_.push_back(GroundAtom{p, {a0, a1}, st, value});
    targetIdx_.push_back(st == AtomStatus::Target
                             ? static_cast<int32_t>(targetAtoms_.size())
                             : -1);
    if (st == AtomStatus::Target) targetAtoms_.push_back(idx);
    byPred_[p].push_back(idx);
    byPredArg_[0][p][a0].push_back(idx);
    if (pred.arity() == 2) byPredArg_[1][p][a1].push_back(idx);
    return idx;
  }

  static uint64_t key(PredicateId p, EntityId a0, EntityId a1) {
    // 12 bits predicate, 26 bits per argument (ids stay far below 2^26).
    return (static_cast<uint64_t>(static_cast<uint32_t>(p)) << 52) |
           (static_cast<uint64_t>(static_cast<uint32_t>(a0) & 0x3ffffffu) << 26) |
           (static_cast<uint64_t>(static_cast<uint32_t>(a1) & 0x3ffffffu));
  }

  const Vocabulary* vocab_;
  std::vector<GroundAtom> atoms_;
  std::vector<int32_t> targetIdx_;
  std::vector<int32_t> targetAtoms_;
  std::unordered_map<uint64_t, int32_t> lookup_;
  std::vector<std::vector<int32_t>> byPred_;
  std::array<std::vector<std::unordered_map<EntityId, std::vector<int32_t>>>, 2> byPredArg_;
};

}  // namespace fairrec
