#pragma once

#include <span>
#include <vector>

#include "fairrec/rules/vocabulary.hpp"

namespace fairrec {

// One test-fold prediction joined with ground truth, on the 1-5 star
// scale (already denormalized and clipped by the caller).
struct PredictionRow {
  EntityId user;
  EntityId item;
  double predictedStars;
  double trueStars;
  bool isProtected;
};

struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  double nonParity = 0.0;
  double value = 0.0;
  double absolute = 0.0;
  double underestimation = 0.0;
  double overestimation = 0.0;
  double balance = 0.0;
};

double rmse(std::span<const PredictionRow> preds);
double mae(std::span<const PredictionRow> preds);

// Absolute gap between the two groups' overall mean predicted ratings.
double non_parity(std::span<const PredictionRow> preds);

// The remaining four average a per-item gap between group-wise
// prediction errors over "eligible" items: those rated by both groups
// in the fold. Group errors are differences of per-item group means of
// predictions and truths.
double value_unfairness(std::span<const PredictionRow> preds);
double absolute_unfairness(std::span<const PredictionRow> preds);
double underestimation(std::span<const PredictionRow> preds);
double overestimation(std::span<const PredictionRow> preds);

inline double balance(double under, double over) { return (under + over) / 2.0; }

MetricsReport compute_metrics(std::span<const PredictionRow> preds);

// Cross-fold mean and population standard deviation, metric by metric.
struct MetricsAggregate {
  MetricsReport mean;
  MetricsReport sd;
  std::vector<MetricsReport> perFold;
};

MetricsAggregate aggregate_metrics(std::vector<MetricsReport> perFold);

}  // namespace fairrec
