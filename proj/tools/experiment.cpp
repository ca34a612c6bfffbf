#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "fairrec/common.hpp"
#include "fairrec/dataio/folds.hpp"
#include "fairrec/dataio/prepared.hpp"
#include "fairrec/metrics/metrics.hpp"
#include "fairrec/simgraph/similarity.hpp"

namespace fairrec::cli {

namespace fs = std::filesystem;

std::string ExperimentConfig::modelTag() const {
  std::string tag = variant_name(variant);
  if (fair) tag += "_fair";
  return tag;
}

BodyAtomFilter body_filter_from_name(const std::string& name) {
  if (name == "all") return BodyAtomFilter::All;
  if (name == "observed") return BodyAtomFilter::ObservedOnly;
  if (name == "targets") return BodyAtomFilter::TargetsOnly;
  throw DataError("unknown body filter '" + name +
                  "' (expected all, observed, or targets)");
}

CosineNorm cosine_norm_from_name(const std::string& name) {
  if (name == "corated") return CosineNorm::Corated;
  if (name == "full") return CosineNorm::Full;
  throw DataError("unknown cosine_norm '" + name + "' (expected corated or full)");
}

namespace {

bool bool_from(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DataError("config key '" + key + "' expects a boolean, got '" + value + "'");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string trim(std::string s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

void load_config_file(const std::string& path, ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);

  std::string line, section;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (size_t hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineNo) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::string qualified = section.empty() ? key : section + "." + key;

    try {
      if (qualified == "data.dataDir") config.dataDir = value;
      else if (qualified == "data.workDir") config.workDir = value;
      else if (qualified == "data.normalize")
        config.normalize = normalization_from_name(value);
      else if (qualified == "data.subsample") config.subsample = std::stoi(value);
      else if (qualified == "data.minRatings") config.minRatings = std::stoi(value);
      else if (qualified == "model.variant") config.variant = variant_from_name(value);
      else if (qualified == "model.fair") config.fair = bool_from(value, qualified);
      else if (qualified == "model.k") config.k = std::stoi(value);
      else if (qualified == "model.bodyRatings")
        config.bodyRatings = body_filter_from_name(value);
      else if (qualified == "model.cosineNorm")
        config.cosineNorm = cosine_norm_from_name(value);
      else if (qualified == "fairness.applyToItems")
        config.fairness.applyToItems = bool_from(value, qualified);
      else if (qualified == "fairness.applyToGroups")
        config.fairness.applyToGroups = bool_from(value, qualified);
      else if (qualified == "fairness.aggregationWeight")
        config.fairness.aggregationWeight = std::stod(value);
      else if (qualified == "fairness.couplingWeight")
        config.fairness.couplingWeight = std::stod(value);
      else if (qualified == "fairness.mirrorAggregation")
        config.fairness.mirrorAggregation = bool_from(value, qualified);
      else if (qualified == "fairness.fairnessBody")
        config.fairness.fairnessBody = body_filter_from_name(value);
      else if (qualified == "solver.maxIterations")
        config.solver.maxIterations = std::stoi(value);
      else if (qualified == "solver.primalTolerance")
        config.solver.primalTolerance = std::stod(value);
      else if (qualified == "solver.dualTolerance")
        config.solver.dualTolerance = std::stod(value);
      else if (qualified == "solver.stepSize")
        config.solver.stepSize = std::stod(value);
      else if (qualified == "solver.threads")
        config.solver.threads = std::stoi(value);
      else if (qualified == "run.seed") config.seed = std::stoull(value);
      else if (qualified == "run.folds") config.folds = std::stoi(value);
      else if (section == "weights") config.weights[key] = std::stod(value);
      else if (section == "exponents") config.exponents[key] = std::stoi(value);
      else
        throw DataError("unknown config key '" + qualified + "'");
    } catch (const std::invalid_argument&) {
      throw DataError(path + ":" + std::to_string(lineNo) + ": bad value for " +
                      qualified);
    }
  }
}

namespace {

struct FoldData {
  PreparedDataset prep;
  std::vector<int32_t> train;
  std::vector<int32_t> test;
};

FoldData load_fold(const ExperimentConfig& config, int fold) {
  FoldData data;
  // Normalization is fixed at prepare time and restored from meta.json.
  data.prep = load_prepared(config.preparedDir());
  if (fold < 0 || fold >= data.prep.folds.foldCount)
    throw DataError("fold " + std::to_string(fold) + " out of range [0," +
                    std::to_string(data.prep.folds.foldCount) + ")");
  data.train = data.prep.folds.trainIndices(fold);
  data.test = data.prep.folds.testIndices(fold);
  return data;
}

std::string sim_cache_path(const ExperimentConfig& config, SimMeasure m, int fold) {
  return config.simDir() + "/" + measure_name(m) + ".fold" + std::to_string(fold) +
         ".k" + std::to_string(config.k) + ".tsv";
}

SimilarityGraph obtain_graph(const ExperimentConfig& config, const RatingsDataset& data,
                             const RatingsView& train, SimMeasure m, int fold) {
  std::string path = sim_cache_path(config, m, fold);
  if (fs::exists(path)) {
    std::ifstream in(path);
    return read_graph(in, m, config.k);
  }
  SimilarityGraph graph = build_graph(data, train, m, config.k, config.cosineNorm);
  fs::create_directories(config.simDir());
  std::ofstream out(path, std::ios::binary);
  write_graph(out, graph);
  return graph;
}

std::map<SimMeasure, SimilarityGraph> obtain_graphs(const ExperimentConfig& config,
                                                    const FoldData& fold, int foldId) {
  std::map<SimMeasure, SimilarityGraph> graphs;
  auto measures = variant_measures(config.variant);
  if (measures.empty()) return graphs;
  RatingsView view = RatingsView::fromRatings(fold.prep.data, fold.train);
  for (SimMeasure m : measures)
    graphs.emplace(m, obtain_graph(config, fold.prep.data, view, m, foldId));
  return graphs;
}

struct TruthKey {
  EntityId user, item;
  bool operator<(const TruthKey& o) const {
    return user < o.user || (user == o.user && item < o.item);
  }
};

}  // namespace

int cmd_prepare(const ExperimentConfig& config) {
  if (config.dataDir.empty()) throw DataError("prepare needs --data-dir");
  auto start = std::chrono::steady_clock::now();

  RatingsDataset data = parse_movielens(config.dataDir, config.strict);
  data.normalization = config.normalize;
  FilterCounts counts = filter_dataset(data, config.minRatings);
  if (config.subsample > 0) {
    subsample_users(data, config.subsample, std::min(10, config.minRatings),
                    config.seed);
    counts.ratings = static_cast<int64_t>(data.ratings.size());
    counts.movies = static_cast<int64_t>(data.movies.size());
    counts.users = static_cast<int64_t>(data.users.size());
  }

  FoldSplit folds = make_folds(data.ratings.size(), config.folds, config.seed);
  write_prepared(config.preparedDir(), data, folds);

  std::cout << "prepared: ratings=" << counts.ratings << " movies=" << counts.movies
            << " users=" << counts.users
            << " (movies with ratings: " << counts.ratedMovies << ")\n"
            << "folds=" << config.folds << " seed=" << config.seed
            << " elapsed=" << seconds_since(start) << "s\n";

  if (config.strictCounts && config.subsample == 0) {
    auto within = [](int64_t actual, int64_t expected, double tol) {
      return std::abs(actual - expected) <= expected * tol;
    };
    bool ok = counts.movies == 1305 && within(counts.ratings, 443079, 0.005) &&
              within(counts.users, 2965, 0.005);
    if (!ok) {
      std::cerr << "count mismatch: expected ratings=443079 movies=1305 users=2965\n";
      return 2;
    }
  }
  return 0;
}

int cmd_similarity(const ExperimentConfig& config) {
  auto measures = variant_measures(config.variant);
  if (measures.empty()) {
    std::cout << "variant " << variant_name(config.variant)
              << " uses no similarity graphs\n";
    return 0;
  }
  int foldCount = load_prepared(config.preparedDir()).folds.foldCount;
  for (int fold = 0; fold < foldCount; ++fold) {
    FoldData data = load_fold(config, fold);
    RatingsView view = RatingsView::fromRatings(data.prep.data, data.train);
    for (SimMeasure m : measures) {
      std::string path = sim_cache_path(config, m, fold);
      if (fs::exists(path)) {
        std::cout << "cached " << path << "\n";
        continue;
      }
      auto start = std::chrono::steady_clock::now();
      SimilarityGraph graph =
          build_graph(data.prep.data, view, m, config.k, config.cosineNorm);
      fs::create_directories(config.simDir());
      std::ofstream out(path, std::ios::binary);
      write_graph(out, graph);
      std::cout << "wrote " << path << " (" << seconds_since(start) << "s)\n";
    }
  }
  return 0;
}

int cmd_run(const ExperimentConfig& config, int fold, const std::string& dumpPath) {
  FoldData data = load_fold(config, fold);
  auto graphs = obtain_graphs(config, data, fold);

  ModelSpec spec;
  spec.variant = config.variant;
  spec.k = config.k;
  spec.weights = config.weights;
  spec.exponents = config.exponents;
  spec.bodyRatings = config.bodyRatings;

  auto groundStart = std::chrono::steady_clock::now();
  BuiltModel model = build_model(spec, data.prep.data, data.train, data.test, graphs);
  if (config.fair) extend_with_fairness(model, config.fairness, data.prep.data, spec);
  std::vector<GroundPotential> potentials = ground_model(model);
  double groundSeconds = seconds_since(groundStart);

  auto solveStart = std::chrono::steady_clock::now();
  auto [assignment, report] =
      map_inference(potentials, model.atoms->targetCount(), config.solver);
  double solveSeconds = seconds_since(solveStart);

  fs::create_directories(config.runDir());
  std::string predPath =
      config.runDir() + "/fold" + std::to_string(fold) + ".predictions.tsv";
  {
    std::ofstream out(predPath, std::ios::binary);
    char buf[64];
    for (size_t i = 0; i < model.targetPairs.size(); ++i) {
      auto [user, item] = model.targetPairs[i];
      double stars = data.prep.data.starsFromValue(assignment.values[i]);
      std::snprintf(buf, sizeof(buf), "%d\t%d\t%.6f\n", user, item, stars);
      out << buf;
    }
  }

  {
    std::ofstream out(config.runDir() + "/model.rules", std::ios::binary);
    out << render_model(model);
  }

  nlohmann::json j;
  j["fold"] = fold;
  j["model"] = config.modelTag();
  j["variables"] = model.atoms->targetCount();
  j["ratingTargets"] = model.targetPairs.size();
  j["latentVariables"] =
      model.atoms->targetCount() - static_cast<int32_t>(model.targetPairs.size());
  j["potentials"] = potentials.size();
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["objective"] = report.objective;
  j["primalResidual"] = report.primalResidual;
  j["dualResidual"] = report.dualResidual;
  j["groundSeconds"] = groundSeconds;
  j["solveSeconds"] = solveSeconds;
  if (config.fair && !model.itemLatents.empty())
    j["meanItemLatentGap"] = mean_latent_gap(model, assignment.values);
  {
    std::ofstream out(config.runDir() + "/fold" + std::to_string(fold) +
                      ".report.json");
    out << j.dump(2) << '\n';
  }

  if (!dumpPath.empty()) {
    std::ofstream out(dumpPath, std::ios::binary);
    dump_potentials(out, potentials, &assignment);
  }

  std::cout << "fold " << fold << ": " << model.targetPairs.size() << " targets, "
            << potentials.size() << " potentials, " << report.iterations
            << " iterations, converged=" << (report.converged ? "true" : "false")
            << ", objective=" << report.objective << " (ground " << groundSeconds
            << "s, solve " << solveSeconds << "s)\n";

  if (!report.converged && config.strict) {
    std::cerr << "solver did not converge within " << config.solver.maxIterations
              << " iterations\n";
    return 3;
  }
  return 0;
}

int cmd_evaluate(const ExperimentConfig& config) {
  PreparedDataset prep = load_prepared(config.preparedDir());
  const int foldCount = prep.folds.foldCount;

  std::map<TruthKey, double> truth;
  std::vector<std::map<TruthKey, bool>> inFold(foldCount);
  for (size_t i = 0; i < prep.data.ratings.size(); ++i) {
    const RatingRecord& r = prep.data.ratings[i];
    truth[{r.user, r.movie}] = static_cast<double>(r.stars);
    inFold[prep.folds.assignments[i]][{r.user, r.movie}] = true;
  }

  std::vector<MetricsReport> perFold;
  for (int fold = 0; fold < foldCount; ++fold) {
    std::string path =
        config.runDir() + "/fold" + std::to_string(fold) + ".predictions.tsv";
    std::ifstream in(path);
    if (!in)
      throw DataError("missing predictions for fold " + std::to_string(fold) + ": " +
                      path + " (run `fairrec run --fold " + std::to_string(fold) +
                      "` first)");
    std::vector<PredictionRow> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream fields(line);
      PredictionRow row{};
      if (!(fields >> row.user >> row.item >> row.predictedStars))
        throw DataError(path + ": malformed prediction line: " + line);
      auto t = truth.find({row.user, row.item});
      if (t == truth.end() || !inFold[fold].count({row.user, row.item}))
        throw DataError(path + ": prediction for unknown test pair");
      row.trueStars = t->second;
      row.isProtected = prep.data.users.at(row.user).gender == 'F';
      rows.push_back(row);
    }
    perFold.push_back(compute_metrics(rows));
  }

  MetricsAggregate agg = aggregate_metrics(std::move(perFold));

  fs::create_directories(config.runDir());
  auto fields = std::vector<std::pair<const char*, double MetricsReport::*>>{
      {"rmse", &MetricsReport::rmse},
      {"mae", &MetricsReport::mae},
      {"overestimation", &MetricsReport::overestimation},
      {"absolute", &MetricsReport::absolute},
      {"non_parity", &MetricsReport::nonParity},
      {"underestimation", &MetricsReport::underestimation},
      {"value", &MetricsReport::value},
      {"balance", &MetricsReport::balance},
  };
  {
    std::ofstream out(config.runDir() + "/metrics.tsv", std::ios::binary);
    out << "model\tmetric\tfold\tvalue\n";
    for (auto [name, member] : fields) {
      for (size_t f = 0; f < agg.perFold.size(); ++f)
        out << config.modelTag() << '\t' << name << '\t' << f << '\t'
            << format_double(agg.perFold[f].*member) << '\n';
      out << config.modelTag() << '\t' << name << "\tmean\t"
          << format_double(agg.mean.*member) << '\n';
      out << config.modelTag() << '\t' << name << "\tsd\t"
          << format_double(agg.sd.*member) << '\n';
    }
  }

  std::ostringstream table;
  char cell[64];
  std::snprintf(cell, sizeof(cell), "%-16s", "model");
  table << cell;
  for (auto [name, member] : fields) {
    (void)member;
    std::snprintf(cell, sizeof(cell), " %15s", name);
    table << cell;
  }
  table << '\n';
  std::snprintf(cell, sizeof(cell), "%-16s", config.modelTag().c_str());
  table << cell;
  for (auto [name, member] : fields) {
    (void)name;
    std::snprintf(cell, sizeof(cell), "   %.3f (%.3f)", agg.mean.*member,
                  agg.sd.*member);
    table << cell;
  }
  table << '\n';
  {
    std::ofstream out(config.runDir() + "/metrics.txt", std::ios::binary);
    out << table.str();
  }
  std::cout << table.str();
  return 0;
}

int cmd_cv(const ExperimentConfig& config) {
  int foldCount = load_prepared(config.preparedDir()).folds.foldCount;
  for (int fold = 0; fold < foldCount; ++fold) {
    int rc = cmd_run(config, fold, "");
    if (rc != 0) return rc;
  }
  return cmd_evaluate(config);
}

int cmd_synth(const ExperimentConfig& config, const SyntheticSpec& spec) {
  if (config.dataDir.empty()) throw DataError("synth needs --data-dir");
  write_synthetic_movielens(config.dataDir, spec);
  std::cout << "wrote synthetic dataset to " << config.dataDir
            << " (users=" << spec.users << " movies=" << spec.movies
            << " bias=" << spec.bias << ")\n";
  return 0;
}

}  // namespace fairrec::cli
