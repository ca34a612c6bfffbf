#pragma once

#include <map>
#include <string>

#include "fairrec/dataio/movielens.hpp"
#include "fairrec/dataio/synthetic.hpp"
#include "fairrec/model/fair_model.hpp"
#include "fairrec/model/hyper_model.hpp"
#include "fairrec/solver/admm.hpp"

namespace fairrec::cli {

// Everything a run needs; defaults here, overridden by the config file,
// overridden again by command-line flags.
struct ExperimentConfig {
  std::string dataDir;
  std::string workDir = "work";
  ModelVariant variant = ModelVariant::MC_CF;
  bool fair = false;
  int k = 20;
  uint64_t seed = 42;
  int folds = 5;
  int subsample = 0;  // 0 = full dataset
  int minRatings = 50;  // keep users with strictly more ratings than this
  Normalization normalize = Normalization::MinMax;
  CosineNorm cosineNorm = CosineNorm::Corated;
  BodyAtomFilter bodyRatings = BodyAtomFilter::All;
  FairnessSpec fairness;
  std::map<std::string, double> weights;
  std::map<std::string, int> exponents;
  SolverConfig solver;
  bool strict = false;        // exit 3 when the solver does not converge
  bool strictCounts = false;  // prepare: require the published counts

  std::string modelTag() const;
  std::string preparedDir() const { return workDir + "/prepared"; }
  std::string simDir() const { return workDir + "/sim"; }
  std::string runDir() const { return workDir + "/runs/" + modelTag(); }
};

// Flat INI-style config: [section] headers, key = value pairs, '#'
// comments. Unknown keys are an error so typos fail loudly.
void load_config_file(const std::string& path, ExperimentConfig& config);

BodyAtomFilter body_filter_from_name(const std::string& name);
CosineNorm cosine_norm_from_name(const std::string& name);

int cmd_prepare(const ExperimentConfig& config);
int cmd_similarity(const ExperimentConfig& config);
int cmd_run(const ExperimentConfig& config, int fold, const std::string& dumpPath);
int cmd_evaluate(const ExperimentConfig& config);
int cmd_cv(const ExperimentConfig& config);
int cmd_synth(const ExperimentConfig& config, const SyntheticSpec& spec);

}  // namespace fairrec::cli
