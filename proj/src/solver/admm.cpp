#include "fairrec/solver/admm.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fairrec/common.hpp"

namespace fairrec {

double objective(std::span<const GroundPotential> potentials,
                 const Assignment& assignment) {
  double sum = 0.0;
  for (const GroundPotential& pot : potentials) {
    for (auto [idx, c] : pot.coefficients) {
      (void)c;
      if (idx < 0 || static_cast<size_t>(idx) >= assignment.values.size())
        throw std::out_of_range("potential references variable " + std::to_string(idx) +
                                " outside assignment of size " +
                                std::to_string(assignment.values.size()));
    }
    sum += pot.evaluate(assignment.values);
  }
  return sum;
}

namespace {

// Potentials flattened into contiguous arrays for the hot loops.
struct Compact {
  std::vector<int64_t> offset;  // nPotentials + 1
  std::vector<int32_t> idx;
  std::vector<double> coef;
  std::vector<double> constant;
  std::vector<double> weight;
  std::vector<double> normSq;
  std::vector<uint8_t> expo;
  int64_t nnz = 0;
};

struct Partials {
  std::vector<double> sum;  // per-variable sum of (y + u), merged by main
  double normY2 = 0.0;
  double res2 = 0.0;
  double normU2 = 0.0;
};

class AdmmSolver {
 public:
  AdmmSolver(std::span<const GroundPotential> potentials, int32_t nTargets,
             const SolverConfig& config)
      : config_(config), n_(nTargets) {
    if (config.maxIterations < 1)
      throw std::invalid_argument("maxIterations must be >= 1");
    if (config.primalTolerance <= 0 || config.dualTolerance <= 0)
      throw std::invalid_argument("tolerances must be positive");
    if (config.stepSize <= 0) throw std::invalid_argument("stepSize must be positive");

    build(potentials);

    int hw = static_cast<int>(std::thread::hardware_concurrency());
    int threads = config.threads > 0 ? config.threads : std::max(1, hw);
    threads = std::min<int64_t>(threads, std::max<int64_t>(1, c_.offset.size() - 1));
    partitionBlocks(threads);
    partials_.resize(threads);
    for (Partials& p : partials_) p.sum.assign(n_, 0.0);
  }

  ~AdmmSolver() { stopWorkers(); }

  std::pair<Assignment, SolveReport> solve(std::span<const GroundPotential> potentials) {
    const double rho = config_.stepSize;
    const size_t m = c_.offset.size() - 1;

    z_.assign(n_, 0.0);
    for (int32_t i = 0; i < n_; ++i)
      if (count_[i] > 0) z_[i] = 0.5;
    zPrev_.assign(n_, 0.0);
    localY_.assign(c_.nnz, 0.0);
    dualU_.assign(c_.nnz, 0.0);

    SolveReport report;
    Assignment best;
    double bestObjective = std::numeric_limits<double>::infinity();
    const int checkEvery = 100;  // best-iterate snapshots when not yet converged

    if (m == 0 || c_.nnz == 0) {
      report.converged = true;
      report.objective = objective(potentials, Assignment{z_});
      return {Assignment{std::move(z_)}, report};
    }

    startWorkers();

    int it = 0;
    for (it = 1; it <= config_.maxIterations; ++it) {
      // Local hinge prox per potential, then consensus averaging.
      runPhase(1);
      zPrev_.swap(z_);
      double dual2 = 0.0, zRep2 = 0.0;
      for (int32_t i = 0; i < n_; ++i) {
        if (count_[i] == 0) continue;
        double total = 0.0;
        for (const Partials& p : partials_) total += p.sum[i];
        double zi = total / count_[i];
        zi = std::clamp(zi, 0.0, 1.0);
        z_[i] = zi;
        double dz = zi - zPrev_[i];
        dual2 += count_[i] * dz * dz;
        zRep2 += count_[i] * zi * zi;
      }
      runPhase(2);

      double normY2 = 0.0, res2 = 0.0, normU2 = 0.0;
      for (const Partials& p : partials_) {
        normY2 += p.normY2;
        res2 += p.res2;
        normU2 += p.normU2;
      }

      report.primalResidual = std::sqrt(res2);
      report.dualResidual = rho * std::sqrt(dual2);

      if (config_.trackObjective)
        report.objectiveHistory.push_back(objective(potentials, Assignment{z_}));

      const double sqnnz = std::sqrt(static_cast<double>(c_.nnz));
      double epsPrimal = sqnnz * config_.primalTolerance +
                         config_.primalTolerance *
                             std::max(std::sqrt(normY2), std::sqrt(zRep2));
      double epsDual = sqnnz * config_.dualTolerance +
                       config_.dualTolerance * rho * std::sqrt(normU2);
      if (report.primalResidual <= epsPrimal && report.dualResidual <= epsDual) {
        report.converged = true;
        break;
      }

      if (it % checkEvery == 0) {
        double obj = objective(potentials, Assignment{z_});
        if (obj < bestObjective) {
          bestObjective = obj;
          best.values = z_;
        }
      }
    }
    stopWorkers();

    report.iterations = std::min(it, config_.maxIterations);
    Assignment result{std::move(z_)};
    report.objective = objective(potentials, result);
    if (!report.converged && bestObjective < report.objective) {
      result = std::move(best);
      report.objective = bestObjective;
    }
    return {std::move(result), report};
  }

 private:
  void build(std::span<const GroundPotential> potentials) {
    count_.assign(n_, 0);
    c_.offset.reserve(potentials.size() + 1);
    c_.offset.push_back(0);
    for (const GroundPotential& pot : potentials) {
      if (!std::isfinite(pot.weight) || !std::isfinite(pot.constant))
        throw std::invalid_argument("non-finite weight or constant in potential");
      if (pot.weight < 0.0) throw std::invalid_argument("negative potential weight");
      if (pot.exponent != 1 && pot.exponent != 2)
        throw std::invalid_argument("potential exponent must be 1 or 2");
      for (auto [idx, coef] : pot.coefficients) {
        if (idx < 0 || idx >= n_)
          throw std::out_of_range("potential variable index " + std::to_string(idx) +
                                  " out of range [0," + std::to_string(n_) + ")");
        if (!std::isfinite(coef))
          throw std::invalid_argument("non-finite coefficient in potential");
      }
      if (pot.weight == 0.0 || pot.coefficients.empty()) continue;
      double ns = 0.0;
      for (auto [idx, coef] : pot.coefficients) {
        c_.idx.push_back(idx);
        c_.coef.push_back(coef);
        ns += coef * coef;
        ++count_[idx];
      }
      c_.offset.push_back(static_cast<int64_t>(c_.idx.size()));
      c_.constant.push_back(pot.constant);
      c_.weight.push_back(pot.weight);
      c_.normSq.push_back(ns);
      c_.expo.push_back(static_cast<uint8_t>(pot.exponent));
    }
    c_.nnz = static_cast<int64_t>(c_.idx.size());

    // Normalize weights by their mean so the iterates (and hence the
    // returned argmin) are invariant under scaling every weight by a
    // common factor; the reported objective uses the original weights.
    if (!c_.weight.empty()) {
      double sum = 0.0;
      for (double w : c_.weight) sum += w;
      double mean = sum / static_cast<double>(c_.weight.size());
      for (double& w : c_.weight) w /= mean;
    }
  }

  // Contiguous potential blocks balanced by entry count.
  void partitionBlocks(int threads) {
    const size_t m = c_.offset.size() - 1;
    blocks_.clear();
    size_t begin = 0;
    for (int t = 0; t < threads; ++t) {
      int64_t targetEnd = c_.nnz * (t + 1) / threads;
      size_t end = begin;
      while (end < m && (static_cast<int>(t) == threads - 1 || c_.offset[end + 1] <= targetEnd))
        ++end;
      if (t == threads - 1) end = m;
      blocks_.push_back({begin, end});
      begin = end;
    }
  }

  void localPass(int tid) {
    const double rho = config_.stepSize;
    Partials& part = partials_[tid];
    std::fill(part.sum.begin(), part.sum.end(), 0.0);
    part.normY2 = 0.0;
    auto [pBegin, pEnd] = blocks_[tid];
    for (size_t j = pBegin; j < pEnd; ++j) {
      const int64_t kBegin = c_.offset[j], kEnd = c_.offset[j + 1];
      const double w = c_.weight[j], ns = c_.normSq[j];
      double t = c_.constant[j];
      for (int64_t k = kBegin; k < kEnd; ++k)
        t += c_.coef[k] * (z_[c_.idx[k]] - dualU_[k]);
      double alpha = 0.0;
      if (t > 0.0) {
        if (c_.expo[j] == 1) {
          double cap = w / rho;
          alpha = (t >= cap * ns) ? cap : t / ns;
        } else {
          alpha = 2.0 * w * t / (rho + 2.0 * w * ns);
        }
      }
      for (int64_t k = kBegin; k < kEnd; ++k) {
        double y = (z_[c_.idx[k]] - dualU_[k]) - alpha * c_.coef[k];
        localY_[k] = y;
        part.sum[c_.idx[k]] += y + dualU_[k];
        part.normY2 += y * y;
      }
    }
  }

  void dualPass(int tid) {
    Partials& part = partials_[tid];
    part.res2 = 0.0;
    part.normU2 = 0.0;
    auto [pBegin, pEnd] = blocks_[tid];
    for (int64_t k = c_.offset[pBegin]; k < c_.offset[pEnd]; ++k) {
      double diff = localY_[k] - z_[c_.idx[k]];
      double u = dualU_[k] + diff;
      dualU_[k] = u;
      part.res2 += diff * diff;
      part.normU2 += u * u;
    }
  }

  void runBlock(int phase, int tid) {
    if (phase == 1)
      localPass(tid);
    else
      dualPass(tid);
  }

  void startWorkers() {
    const int threads = static_cast<int>(blocks_.size());
    if (threads <= 1) return;
    startBarrier_ = std::make_unique<std::barrier<>>(threads);
    finishBarrier_ = std::make_unique<std::barrier<>>(threads);
    stop_.store(false, std::memory_order_relaxed);
    for (int t = 1; t < threads; ++t)
      workers_.emplace_back([this, t] {
        while (true) {
          startBarrier_->arrive_and_wait();
          if (stop_.load(std::memory_order_relaxed)) return;
          runBlock(phase_, t);
          finishBarrier_->arrive_and_wait();
        }
      });
  }

  void runPhase(int phase) {
    phase_ = phase;
    if (blocks_.size() <= 1) {
      runBlock(phase, 0);
      return;
    }
    startBarrier_->arrive_and_wait();
    runBlock(phase, 0);
    finishBarrier_->arrive_and_wait();
  }

  void stopWorkers() {
    if (workers_.empty()) return;
    stop_.store(true, std::memory_order_relaxed);
    startBarrier_->arrive_and_wait();
    for (std::thread& w : workers_) w.join();
    workers_.clear();
  }

  SolverConfig config_;
  int32_t n_;
  Compact c_;
  std::vector<int32_t> count_;
  std::vector<std::pair<size_t, size_t>> blocks_;
  std::vector<Partials> partials_;
  std::vector<double> z_, zPrev_, localY_, dualU_;

  int phase_ = 0;
  std::atomic<bool> stop_{false};
  std::unique_ptr<std::barrier<>> startBarrier_, finishBarrier_;
  std::vector<std::thread> workers_;
};

}  // namespace

std::pair<Assignment, SolveReport> map_inference(
    std::span<const GroundPotential> potentials, int32_t nTargets,
    const SolverConfig& config) {
  if (nTargets < 0) throw std::invalid_argument("nTargets must be >= 0");
  AdmmSolver solver(potentials, nTargets, config);
  return solver.solve(potentials);
}

void dump_potentials(std::ostream& out, std::span<const GroundPotential> potentials,
                     const Assignment* solution) {
  for (const GroundPotential& pot : potentials) {
    out << format_double(pot.weight) << ' ' << pot.exponent << ' '
        << format_double(pot.constant);
    for (auto [idx, coef] : pot.coefficients)
      out << ' ' << idx << ':' << format_double(coef);
    out << '\n';
  }
  if (solution) {
    for (size_t i = 0; i < solution->values.size(); ++i)
      out << "# y[" << i << "] = " << format_double(solution->values[i]) << '\n';
  }
}

}  // namespace fairrec
