#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "fairrec/rules/grounding.hpp"

namespace fairrec {

struct SolverConfig {
  int maxIterations = 25000;
  double primalTolerance = 1e-5;  // used as both absolute and relative
  double dualTolerance = 1e-5;
  double stepSize = 1.0;  // ADMM penalty rho
  uint64_t seed = 42;
  int threads = 1;  // local updates split into fixed per-thread blocks
  bool trackObjective = false;  // record objective after every consensus step
};

struct SolveReport {
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double primalResidual = 0.0;
  double dualResidual = 0.0;
  std::vector<double> objectiveHistory;  // filled when trackObjective is set
};

// Values of the target atoms, one entry per dense target index.
struct Assignment {
  std::vector<double> values;
};

// Exact weighted sum of the potentials at the given assignment.
double objective(std::span<const GroundPotential> potentials,
                 const Assignment& assignment);

// MAP inference: minimizes sum_j w_j max(0, l_j(y))^{p_j} over y in
// [0,1]^n by consensus ADMM. Each potential has a closed-form local
// update (hinge prox for p=1, rank-one quadratic for p=2); the
// consensus step averages local copies plus duals and projects onto
// the box. Deterministic for a fixed config and input order; variables
// appearing in no potential are returned as 0.
std::pair<Assignment, SolveReport> map_inference(
    std::span<const GroundPotential> potentials, int32_t nTargets,
    const SolverConfig& config = {});

// Line-oriented debug dump for cross-checking against external solvers:
// one potential per line as `weight exponent constant idx:coef ...`,
// followed, when a solution is given, by `# y[i] = v` comment lines.
void dump_potentials(std::ostream& out, std::span<const GroundPotential> potentials,
                     const Assignment* solution = nullptr);

}  // namespace fairrec
