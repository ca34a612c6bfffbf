#include "fairrec/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace fairrec {

namespace {

void require_nonempty(std::span<const PredictionRow> preds) {
  if (preds.empty()) throw std::invalid_argument("empty prediction set");
}

// Per-item group means of predictions and truths.
struct ItemGroupMeans {
  double predProtected, truthProtected;
  double predUnprotected, truthUnprotected;
};

// Means for items rated by both groups; others are ineligible.
std::vector<ItemGroupMeans> eligible_items(std::span<const PredictionRow> preds) {
  struct Sums {
    double pred[2] = {0, 0}, truth[2] = {0, 0};
    int count[2] = {0, 0};
  };
  std::map<EntityId, Sums> byItem;
  for (const PredictionRow& row : preds) {
    Sums& s = byItem[row.item];
    int g = row.isProtected ? 1 : 0;
    s.pred[g] += row.predictedStars;
    s.truth[g] += row.trueStars;
    ++s.count[g];
  }
  std::vector<ItemGroupMeans> out;
  for (const auto& [item, s] : byItem) {
    if (s.count[0] == 0 || s.count[1] == 0) continue;
    out.push_back(ItemGroupMeans{s.pred[1] / s.count[1], s.truth[1] / s.count[1],
                                 s.pred[0] / s.count[0], s.truth[0] / s.count[0]});
  }
  if (out.empty())
    throw std::invalid_argument("no item was rated by both groups in this fold");
  return out;
}

template <typename PerItem>
double item_average(std::span<const PredictionRow> preds, PerItem&& gap) {
  require_nonempty(preds);
  auto items = eligible_items(preds);
  double sum = 0.0;
  for (const ItemGroupMeans& m : items) sum += gap(m);
  return sum / static_cast<double>(items.size());
}

}  // namespace

double rmse(std::span<const PredictionRow> preds) {
  require_nonempty(preds);
  double sum = 0.0;
  for (const PredictionRow& row : preds) {
    double e = row.predictedStars - row.trueStars;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(preds.size()));
}

double mae(std::span<const PredictionRow> preds) {
  require_nonempty(preds);
  double sum = 0.0;
  for (const PredictionRow& row : preds)
    sum += std::abs(row.predictedStars - row.trueStars);
  return sum / static_cast<double>(preds.size());
}

double non_parity(std::span<const PredictionRow> preds) {
  require_nonempty(preds);
  double sum[2] = {0, 0};
  int count[2] = {0, 0};
  for (const PredictionRow& row : preds) {
    int g = row.isProtected ? 1 : 0;
    sum[g] += row.predictedStars;
    ++count[g];
  }
  if (count[0] == 0 || count[1] == 0)
    throw std::invalid_argument("a group has no predictions; non-parity undefined");
  return std::abs(sum[1] / count[1] - sum[0] / count[0]);
}

double value_unfairness(std::span<const PredictionRow> preds) {
  return item_average(preds, [](const ItemGroupMeans& m) {
    return std::abs((m.predProtected - m.truthProtected) -
                    (m.predUnprotected - m.truthUnprotected));
  });
}

double absolute_unfairness(std::span<const PredictionRow> preds) {
  return item_average(preds, [](const ItemGroupMeans& m) {
    return std::abs(std::abs(m.predProtected - m.truthProtected) -
                    std::abs(m.predUnprotected - m.truthUnprotected));
  });
}

double underestimation(std::span<const PredictionRow> preds) {
  return item_average(preds, [](const ItemGroupMeans& m) {
    return std::abs(std::max(0.0, m.truthProtected - m.predProtected) -
                    std::max(0.0, m.truthUnprotected - m.predUnprotected));
  });
}

double overestimation(std::span<const PredictionRow> preds) {
  return item_average(preds, [](const ItemGroupMeans& m) {
    return std::abs(std::max(0.0, m.predProtected - m.truthProtected) -
                    std::max(0.0, m.predUnprotected - m.truthUnprotected));
  });
}

MetricsReport compute_metrics(std::span<const PredictionRow> preds) {
  MetricsReport report;
  report.rmse = rmse(preds);
  report.mae = mae(preds);
  report.nonParity = non_parity(preds);
  report.value = value_unfairness(preds);
  report.absolute = absolute_unfairness(preds);
  report.underestimation = underestimation(preds);
  report.overestimation = overestimation(preds);
  report.balance = balance(report.underestimation, report.overestimation);
  return report;
}

MetricsAggregate aggregate_metrics(std::vector<MetricsReport> perFold) {
  if (perFold.empty()) throw std::invalid_argument("no folds to aggregate");
  auto fields = {&MetricsReport::rmse,          &MetricsReport::mae,
                 &MetricsReport::nonParity,     &MetricsReport::value,
                 &MetricsReport::absolute,      &MetricsReport::underestimation,
                 &MetricsReport::overestimation, &MetricsReport::balance};
  MetricsAggregate agg;
  double n = static_cast<double>(perFold.size());
  for (auto field : fields) {
    double sum = 0.0;
    for (const MetricsReport& r : perFold) sum += r.*field;
    double mean = sum / n;
    double var = 0.0;
    for (const MetricsReport& r : perFold) {
      double d = r.*field - mean;
      var += d * d;
    }
    agg.mean.*field = mean;
    agg.sd.*field = std::sqrt(var / n);  // population SD over the folds
  }
  agg.perFold = std::move(perFold);
  return agg;
}

}  // namespace fairrec
